"""Dense statevector simulation of monitored brickwork circuits.

States are stored as flat complex arrays of length ``2**L`` with qubit 0 as
the most significant bit (axis 0 of the ``(2,)*L`` tensor view).
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from ..gaussian.core import InvalidInputError, Region, as_region

CUTOFF_EIG = 1e-12
MAX_QUBITS = 24
GATE_ENSEMBLES = ("haar", "u1")


class NormGuardError(ArithmeticError):
    """Raised when a projection leaves a (numerically) zero state."""


def product_state(num_qubits: int, bits: Iterable[int] | None = None) -> np.ndarray:
    bits = [0] * num_qubits if bits is None else list(bits)
    psi = np.zeros(2**num_qubits, dtype=complex)
    psi[int("".join(map(str, bits)) or "0", 2)] = 1.0
    return psi


def num_qubits_of(psi) -> int:
    n = int(np.log2(np.asarray(psi).size))
    if 2**n != np.asarray(psi).size:
        raise InvalidInputError("state length is not a power of two")
    return n


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random U(dim) from the QR decomposition of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_two_qubit(rng: np.random.Generator) -> np.ndarray:
    return haar_unitary(4, rng)


def u1_haar_two_qubit(rng: np.random.Generator) -> np.ndarray:
    """``diag(e^{i th1}, V, e^{i th2})`` in the basis |00>, |01>, |10>, |11>."""
    th1, th2 = rng.uniform(0.0, 2 * np.pi, size=2)
    U = np.zeros((4, 4), dtype=complex)
    U[0, 0] = np.exp(1j * th1)
    U[1:3, 1:3] = haar_unitary(2, rng)
    U[3, 3] = np.exp(1j * th2)
    return U


def apply_two_qubit(psi: np.ndarray, U: np.ndarray, i: int, j: int) -> np.ndarray:
    """Apply ``U`` to qubits ``(i, j)`` (``i`` is the high bit of the gate index)."""
    L = num_qubits_of(psi)
    if j == i + 1:
        out = np.matmul(U, psi.reshape(2**i, 4, -1))
        return out.reshape(-1)
    if i == L - 1 and j == 0:
        # wrap-around pair of the periodic chain
        t = psi.reshape(2, -1, 2)
        out = np.einsum("abcd,dmc->bma", U.reshape(2, 2, 2, 2), t, optimize=True)
        return out.reshape(-1)
    t = np.moveaxis(psi.reshape((2,) * L), (i, j), (0, 1))
    shape = t.shape
    t = (U @ t.reshape(4, -1)).reshape(shape)
    return np.moveaxis(t, (0, 1), (i, j)).reshape(-1)


def prob_zero(psi: np.ndarray, site: int) -> float:
    t = psi.reshape(2**site, 2, -1)
    return float(np.vdot(t[:, 0, :], t[:, 0, :]).real)


def measure_z(psi: np.ndarray, site: int, rng: np.random.Generator, inplace: bool = False) -> tuple[np.ndarray, int]:
    """Born-sampled Z measurement; returns the renormalised state and outcome bit."""
    p0 = prob_zero(psi, site)
    outcome = 0 if rng.random() < p0 else 1
    p = p0 if outcome == 0 else 1.0 - p0
    if p <= 1e-300:
        raise NormGuardError(f"projection on site {site} annihilated the state")
    out = psi if inplace else psi.copy()
    t = out.reshape(2**site, 2, -1)
    t[:, 1 - outcome, :] = 0.0
    t[:, outcome, :] *= 1.0 / np.sqrt(p)
    return out, outcome


def brickwork_pairs(L: int, layer: int) -> list[tuple[int, int]]:
    """Gate pairs of a periodic brickwork layer (even layers start at site 0)."""
    return [(i, (i + 1) % L) for i in range(layer % 2, L, 2)]


def initial_state(L: int, kind: str) -> np.ndarray:
    """``"zeros"`` is |0...0>; ``"neel"`` is |0101...>, the half-filled charge sector."""
    if kind == "zeros":
        return product_state(L)
    if kind == "neel":
        return product_state(L, [k % 2 for k in range(L)])
    raise InvalidInputError(f"unknown initial state {kind!r}")


def run_dense_mipt(L: int, p: float, gate_ensemble: str = "haar", T: int | None = None, seed=None,
                   rng: np.random.Generator | None = None, max_qubits: int = MAX_QUBITS,
                   initial: str | None = None) -> np.ndarray:
    """Monitored brickwork circuit with periodic boundary.

    Each layer applies two-qubit gates on alternating even/odd bonds and then
    measures every site in Z with probability ``p``. The U(1) ensemble starts
    from the Neel state by default (|0...0> is a frozen charge sector), the
    Haar ensemble from |0...0>.
    """
    if L < 2 or L % 2 or L > max_qubits:
        raise InvalidInputError(f"need even 2 <= L <= {max_qubits}, got {L}")
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError("p must lie in [0, 1]")
    if gate_ensemble not in GATE_ENSEMBLES:
        raise InvalidInputError(f"unknown gate ensemble {gate_ensemble!r}")
    draw = haar_two_qubit if gate_ensemble == "haar" else u1_haar_two_qubit
    rng = np.random.default_rng(seed) if rng is None else rng
    T = 4 * L if T is None else T
    if initial is None:
        initial = "neel" if gate_ensemble == "u1" else "zeros"
    psi = initial_state(L, initial)
    for layer in range(T):
        for i, j in brickwork_pairs(L, layer):
            psi = apply_two_qubit(psi, draw(rng), i, j)
        for site in range(L):
            if rng.random() < p:
                psi, _ = measure_z(psi, site, rng, inplace=True)
        nrm = np.linalg.norm(psi)
        if not np.isfinite(nrm) or abs(nrm - 1.0) > 1e-10:
            raise NormGuardError(f"norm drifted to {nrm} in layer {layer}")
        psi /= nrm
    return psi


def total_z(psi) -> float:
    L = num_qubits_of(psi)
    probs = np.abs(psi) ** 2
    idx = np.arange(psi.size)
    weight = sum((idx >> b) & 1 for b in range(L))
    return float(np.sum(probs * (L - 2 * weight)))


def _as_sites(R) -> tuple[int, ...]:
    return as_region(R).sites if not isinstance(R, Region) else R.sites


def region_matrix(psi, R) -> np.ndarray:
    """``psi`` reshaped to (region) x (complement) with region sites in the given order."""
    L = num_qubits_of(psi)
    sites = _as_sites(R)
    if any(s >= L for s in sites):
        raise InvalidInputError(f"region {sites} outside {L} qubits")
    rest = [s for s in range(L) if s not in sites]
    t = np.transpose(np.asarray(psi).reshape((2,) * L), list(sites) + rest)
    return t.reshape(2 ** len(sites), -1)


def reduced_density(psi, R) -> np.ndarray:
    M = region_matrix(psi, R)
    rho = M @ M.conj().T
    return 0.5 * (rho + rho.conj().T)


def entropy_dense(rho, cutoff: float = CUTOFF_EIG) -> float:
    """von Neumann entropy in bits."""
    w = np.linalg.eigvalsh(rho)
    return spectrum_entropy(w, cutoff)


def spectrum_entropy(w, cutoff: float = CUTOFF_EIG) -> float:
    w = np.asarray(w)
    w = w[w > cutoff]
    return float(-np.sum(w * np.log2(w)))


def region_spectrum(psi, R) -> np.ndarray:
    """Eigenvalues of rho_R using the smaller of the two Gram matrices."""
    M = region_matrix(psi, R)
    gram = M @ M.conj().T if M.shape[0] <= M.shape[1] else M.conj().T @ M
    return np.linalg.eigvalsh(gram)


def region_entropy_dense(psi, R) -> float:
    if len(_as_sites(R)) == 0:
        return 0.0
    return spectrum_entropy(region_spectrum(psi, R))


def cmi_dense(psi, A, B, C) -> float:
    A, B, C = _as_sites(A), _as_sites(B), _as_sites(C)
    S = region_entropy_dense
    return S(psi, A + B) + S(psi, B + C) - S(psi, B) - S(psi, A + B + C)


def interval(start: int, length: int, L: int) -> tuple[int, ...]:
    return tuple((start + k) % L for k in range(length))
