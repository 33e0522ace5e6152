"""Uniform two-qubit Clifford gates as Pauli lookup tables.

A two-qubit Pauli is indexed by the 4-bit integer ``v = x1 | x2<<1 | z1<<2 | z2<<3``
and stands for the hermitian operator ``i^{x.z} X^x Z^z``. A Clifford is stored
as ``image[v]`` (the index of ``U P_v U^dag`` up to sign) and ``sign[v]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

NUM_SYMPLECTIC = 720
NUM_CLIFFORD = 11520

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)


def _bits(v: int) -> np.ndarray:
    return np.array([(v >> k) & 1 for k in range(4)], dtype=np.uint8)


def _index(bits) -> int:
    return int(sum(int(b) << k for k, b in enumerate(bits)))


@lru_cache(maxsize=None)
def pauli_matrix(v: int) -> np.ndarray:
    """Hermitian two-qubit Pauli ``i^{x.z} X^x Z^z`` (qubit 1 is the high tensor factor)."""
    x1, x2, z1, z2 = _bits(v)
    P = np.kron(np.linalg.matrix_power(_X, x1), np.linalg.matrix_power(_X, x2)) @ \
        np.kron(np.linalg.matrix_power(_Z, z1), np.linalg.matrix_power(_Z, z2))
    return (1j ** (int(x1 * z1) + int(x2 * z2))) * P


@lru_cache(maxsize=1)
def symplectic_group() -> np.ndarray:
    """All 720 matrices S in GL(4, 2) with ``S^T Omega S = Omega`` (columns = images of basis bits)."""
    allm = ((np.arange(2**16)[:, None] >> np.arange(16)) & 1).astype(np.int64).reshape(-1, 4, 4)
    omega = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]]).astype(np.int64)
    prod = np.einsum("nji,jk,nkl->nil", allm, omega, allm) % 2
    ok = np.all(prod == omega, axis=(1, 2))
    group = allm[ok].astype(np.uint8)
    assert group.shape[0] == NUM_SYMPLECTIC
    return group


def _table_from_symplectic(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lookup table of the Clifford mapping each generator to +P_{S e_k}."""
    gens = [pauli_matrix(_index(S[:, k])) for k in range(4)]
    image = np.zeros(16, dtype=np.uint8)
    sign = np.zeros(16, dtype=np.uint8)
    for v in range(16):
        b = _bits(v)
        M = np.eye(4, dtype=complex)
        for k in range(4):
            if b[k]:
                M = M @ gens[k]
        M = (1j ** (int(b[0] * b[2]) + int(b[1] * b[3]))) * M
        w = _index(S @ b % 2)
        P = pauli_matrix(w)
        ratio = np.trace(P.conj().T @ M) / 4
        if abs(abs(ratio) - 1) > 1e-9 or abs(ratio.imag) > 1e-9:
            raise AssertionError("symplectic image is not a hermitian Pauli")
        image[v] = w
        sign[v] = 0 if ratio.real > 0 else 1
    return image, sign


@lru_cache(maxsize=1)
def _base_tables() -> tuple[np.ndarray, np.ndarray]:
    group = symplectic_group()
    tabs = [_table_from_symplectic(S) for S in group]
    return np.array([t[0] for t in tabs]), np.array([t[1] for t in tabs])


_PARITY = np.array([[bin(s & v).count("1") & 1 for v in range(16)] for s in range(16)], dtype=np.uint8)


@dataclass(frozen=True)
class Clifford2:
    """Two-qubit Clifford modulo global phase: symplectic class and generator sign bits."""

    symplectic_index: int
    sign_bits: int

    @property
    def index(self) -> int:
        return self.symplectic_index * 16 + self.sign_bits

    @classmethod
    def from_index(cls, k: int) -> "Clifford2":
        return cls(int(k) // 16, int(k) % 16)

    def table(self) -> tuple[np.ndarray, np.ndarray]:
        image, sign = _base_tables()
        return image[self.symplectic_index], sign[self.symplectic_index] ^ _PARITY[self.sign_bits]

    def unitary(self) -> np.ndarray:
        """A 4x4 unitary realising the gate (global phase arbitrary)."""
        image, sign = self.table()
        # U is fixed (up to phase) by U P U^dag for the generators; build it from the
        # stabilizer projector of the image of |00>, then the images of X1, X2.
        Pz1 = (-1) ** int(sign[4]) * pauli_matrix(image[4])
        Pz2 = (-1) ** int(sign[8]) * pauli_matrix(image[8])
        proj = (np.eye(4) + Pz1) @ (np.eye(4) + Pz2) / 4
        k = int(np.argmax(np.linalg.norm(proj, axis=0)))
        col0 = proj[:, k] / np.linalg.norm(proj[:, k])
        Px1 = (-1) ** int(sign[1]) * pauli_matrix(image[1])
        Px2 = (-1) ** int(sign[2]) * pauli_matrix(image[2])
        # |x1 x2> = X1^x1 X2^x2 |00>; qubit 1 is the high bit of the column index
        cols = [col0, Px2 @ col0, Px1 @ col0, Px1 @ Px2 @ col0]
        return np.stack(cols, axis=1)


IDENTITY = Clifford2(int(np.flatnonzero([np.array_equal(S, np.eye(4)) for S in symplectic_group()])[0]), 0)


def random_two_qubit_clifford(rng: np.random.Generator) -> Clifford2:
    """Uniform sample from the 11520 two-qubit Cliffords modulo phase."""
    return Clifford2.from_index(int(rng.integers(NUM_CLIFFORD)))
