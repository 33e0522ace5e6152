"""CHP-style stabilizer tableau with destabilizers.

Rows ``0..L-1`` are destabilizers and rows ``L..2L-1`` stabilizers. Each row
is a hermitian Pauli ``(-1)^r prod_q i^{x_q z_q} X_q^{x_q} Z_q^{z_q}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import Clifford2


class InvalidTableauError(ValueError):
    pass


def gf2_rank(rows) -> int:
    """Rank over GF(2) of a collection of Python-int bit vectors."""
    basis: dict[int, int] = {}
    for v in rows:
        v = int(v)
        while v:
            h = v.bit_length() - 1
            if h in basis:
                v ^= basis[h]
            else:
                basis[h] = v
                break
    return len(basis)


def gf2_echelon(rows) -> list[int]:
    """Reduced basis with distinct leading bits."""
    basis: dict[int, int] = {}
    for v in rows:
        v = int(v)
        while v:
            h = v.bit_length() - 1
            if h in basis:
                v ^= basis[h]
            else:
                basis[h] = v
                break
    return list(basis.values())


def gf2_solve(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One solution of ``M x = b`` over GF(2); raises if inconsistent."""
    M = (np.asarray(M, dtype=np.uint8) & 1).copy()
    b = (np.asarray(b, dtype=np.uint8) & 1).copy()
    rows, cols = M.shape
    aug = np.concatenate([M, b[:, None]], axis=1)
    pivots = []
    r = 0
    for c in range(cols):
        nz = np.flatnonzero(aug[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        aug[[r, p]] = aug[[p, r]]
        mask = aug[:, c].astype(bool)
        mask[r] = False
        aug[mask] ^= aug[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if np.any(aug[r:, -1]):
        raise InvalidTableauError("inconsistent GF(2) system")
    x = np.zeros(cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        x[c] = aug[i, -1]
    return x


def _g(x1, z1, x2, z2):
    """Exponent of i picked up when multiplying single-qubit Paulis (Aaronson-Gottesman)."""
    x1, z1, x2, z2 = (a.astype(np.int64) for a in (x1, z1, x2, z2))
    return np.where(
        (x1 == 0) & (z1 == 0), 0,
        np.where((x1 == 1) & (z1 == 1), z2 - x2,
                 np.where(x1 == 1, z2 * (2 * x2 - 1), x2 * (1 - 2 * z2))))


def symplectic_product(x1, z1, x2, z2) -> int:
    return int((np.sum(x1 & z2) + np.sum(z1 & x2)) % 2)


@dataclass
class StabilizerTableau:
    x: np.ndarray  # (2L, L) uint8
    z: np.ndarray  # (2L, L) uint8
    r: np.ndarray  # (2L,) uint8

    @property
    def num_qubits(self) -> int:
        return self.x.shape[1]

    @classmethod
    def zero_state(cls, L: int) -> "StabilizerTableau":
        x = np.zeros((2 * L, L), dtype=np.uint8)
        z = np.zeros((2 * L, L), dtype=np.uint8)
        x[np.arange(L), np.arange(L)] = 1
        z[L + np.arange(L), np.arange(L)] = 1
        return cls(x, z, np.zeros(2 * L, dtype=np.uint8))

    @classmethod
    def from_generators(cls, xs, zs, signs=None) -> "StabilizerTableau":
        """Tableau of the state stabilized by the given ``L`` independent commuting Paulis."""
        xs = np.asarray(xs, dtype=np.uint8)
        zs = np.asarray(zs, dtype=np.uint8)
        L = xs.shape[1]
        if xs.shape != (L, L) or zs.shape != (L, L):
            raise InvalidTableauError("need exactly L generators on L qubits")
        signs = np.zeros(L, dtype=np.uint8) if signs is None else np.asarray(signs, dtype=np.uint8)
        S = np.concatenate([xs, zs], axis=1)
        # d anticommutes with s_i  <=>  s_i . (d_z | d_x) = 1
        M = np.concatenate([zs, xs], axis=1)
        D = np.zeros((L, 2 * L), dtype=np.uint8)
        for i in range(L):
            e = np.zeros(L, dtype=np.uint8)
            e[i] = 1
            D[i] = gf2_solve(M, e)
        for k in range(L):
            for i in range(k):
                if symplectic_product(D[k, :L], D[k, L:], D[i, :L], D[i, L:]):
                    D[k] ^= S[i]
        tab = cls(np.concatenate([D[:, :L], xs]), np.concatenate([D[:, L:], zs]),
                  np.concatenate([np.zeros(L, dtype=np.uint8), signs]))
        tab.validate()
        return tab

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.x.copy(), self.z.copy(), self.r.copy())

    def stabilizers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        L = self.num_qubits
        return self.x[L:], self.z[L:], self.r[L:]

    def validate(self) -> None:
        """Check the symplectic structure: stabilizers commute, d_i anticommutes only with s_i."""
        L = self.num_qubits
        X = self.x.astype(np.int64)
        Z = self.z.astype(np.int64)
        gram = (X @ Z.T + Z @ X.T) % 2
        target = np.zeros((2 * L, 2 * L), dtype=np.int64)
        target[np.arange(L), L + np.arange(L)] = 1
        target[L + np.arange(L), np.arange(L)] = 1
        if not np.array_equal(gram, target):
            raise InvalidTableauError("tableau rows violate the symplectic relations")

    def apply_clifford2(self, gate: Clifford2, i: int, j: int) -> None:
        image, sign = gate.table()
        v = (self.x[:, i] | (self.x[:, j] << 1) | (self.z[:, i] << 2) | (self.z[:, j] << 3)).astype(np.intp)
        w = image[v]
        self.r ^= sign[v]
        self.x[:, i] = w & 1
        self.x[:, j] = (w >> 1) & 1
        self.z[:, i] = (w >> 2) & 1
        self.z[:, j] = (w >> 3) & 1

    def _rowsum(self, h: int, i: int) -> None:
        phase = 2 * int(self.r[h]) + 2 * int(self.r[i]) + int(np.sum(_g(self.x[i], self.z[i], self.x[h], self.z[h])))
        self.r[h] = 0 if phase % 4 == 0 else 1
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def measure_z(self, site: int, rng: np.random.Generator | None = None, outcome: int | None = None) -> tuple[int, bool]:
        """Measure Z on ``site``; returns ``(bit, was_random)``.

        A random outcome is drawn from ``rng`` unless ``outcome`` forces it.
        """
        L = self.num_qubits
        hits = np.flatnonzero(self.x[L:, site])
        if hits.size:
            p = L + int(hits[0])
            for i in np.flatnonzero(self.x[:, site]):
                if i != p:
                    self._rowsum(int(i), p)
            self.x[p - L], self.z[p - L], self.r[p - L] = self.x[p], self.z[p], self.r[p]
            if outcome is None:
                outcome = int(rng.integers(2))
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, site] = 1
            self.r[p] = outcome
            return outcome, True
        # deterministic: accumulate the stabilizers selected by the destabilizers
        scratch = StabilizerTableau(np.zeros((1, L), np.uint8), np.zeros((1, L), np.uint8), np.zeros(1, np.uint8))
        for i in np.flatnonzero(self.x[:L, site]):
            phase = 2 * int(scratch.r[0]) + 2 * int(self.r[L + i]) + \
                int(np.sum(_g(self.x[L + i], self.z[L + i], scratch.x[0], scratch.z[0])))
            scratch.r[0] = 0 if phase % 4 == 0 else 1
            scratch.x[0] ^= self.x[L + i]
            scratch.z[0] ^= self.z[L + i]
        return int(scratch.r[0]), False

    def expectation_z(self, site: int) -> int:
        """+1/-1 if Z_site is (up to sign) in the stabilizer group, else 0."""
        bit, rand = self.copy().measure_z(site, outcome=0)
        return 0 if rand else 1 - 2 * bit

    def stabilizer_ints(self, order=None) -> list[int]:
        """Stabilizers as ints; bit ``2k`` (``2k+1``) holds x (z) of ``order[k]``,
        later entries of ``order`` being more significant."""
        L = self.num_qubits
        order = list(range(L)) if order is None else list(order)
        weights = [1 << (2 * k) for k in range(len(order))]
        X, Z = self.x[L:][:, order], self.z[L:][:, order]
        return [sum(w for w, b in zip(weights, xr) if b) + sum(2 * w for w, b in zip(weights, zr) if b)
                for xr, zr in zip(X, Z)]

    def state_vector(self) -> np.ndarray:
        """Dense amplitudes (qubit 0 is the most significant bit); for small L only."""
        L = self.num_qubits
        rng = np.random.default_rng(12345)
        psi = rng.standard_normal(2**L) + 1j * rng.standard_normal(2**L)
        for xr, zr, s in zip(*self.stabilizers()):
            P = pauli_string_matrix(xr, zr, s)
            psi = 0.5 * (psi + P @ psi)
        return psi / np.linalg.norm(psi)


_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)
_SY = np.array([[0, -1j], [1j, 0]])


def pauli_string_matrix(xr, zr, sign=0) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for a, b in zip(xr, zr):
        op = _SY if (a and b) else _SX if a else _SZ if b else np.eye(2)
        out = np.kron(out, op)
    return (-1) ** int(sign) * out
