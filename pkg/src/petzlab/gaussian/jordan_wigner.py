"""Dense (qubit) representation of Gaussian states via Jordan-Wigner.

gamma_{2j} = Z...Z X_j and gamma_{2j+1} = Z...Z Y_j (0-indexed), so that
Z_j = -i gamma_{2j} gamma_{2j+1}. Site 0 is the leftmost tensor factor, which
matches the axis order used by :mod:`petzlab.dense`. Only meant for a handful
of sites.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .core import schur_decompose

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)


def _kron_all(ops):
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


@lru_cache(maxsize=8)
def majorana_operators(num_sites: int) -> tuple[np.ndarray, ...]:
    ops = []
    for j in range(num_sites):
        for P in (_X, _Y):
            ops.append(_kron_all([_Z] * j + [P] + [_I] * (num_sites - j - 1)))
    return tuple(ops)


def density_matrix(G) -> np.ndarray:
    """Dense density matrix of the Gaussian state with correlation matrix ``G``."""
    G = np.asarray(G, dtype=float)
    n = G.shape[0] // 2
    sf = schur_decompose(G)
    gam = majorana_operators(n)
    rho = np.eye(2**n, dtype=complex) / 2**n
    for k, e in enumerate(sf.eps):
        a = sum(sf.orthogonal[i, 2 * k] * gam[i] for i in range(2 * n))
        b = sum(sf.orthogonal[i, 2 * k + 1] * gam[i] for i in range(2 * n))
        rho = rho @ (np.eye(2**n) + e * 1j * a @ b)
    return 0.5 * (rho + rho.conj().T)


def correlation_matrix(rho) -> np.ndarray:
    """``G_ij = Tr(rho i gamma_i gamma_j)`` from a dense density matrix."""
    rho = np.asarray(rho)
    n = int(round(np.log2(rho.shape[0])))
    gam = majorana_operators(n)
    G = np.zeros((2 * n, 2 * n))
    for i in range(2 * n):
        for j in range(i + 1, 2 * n):
            G[i, j] = np.real(np.trace(rho @ (1j * gam[i] @ gam[j])))
            G[j, i] = -G[i, j]
    return G


def state_vector(G) -> np.ndarray:
    """Amplitudes of a pure Gaussian state (global phase arbitrary)."""
    rho = density_matrix(G)
    w, V = np.linalg.eigh(rho)
    if w[-1] < 1 - 1e-8:
        raise ValueError("correlation matrix does not describe a pure state")
    return V[:, -1]


def quadratic_hamiltonian(M) -> np.ndarray:
    """Dense ``H = (i/2) sum M_ij gamma_i gamma_j``."""
    M = np.asarray(M, dtype=float)
    gam = majorana_operators(M.shape[0] // 2)
    H = sum(0.5j * M[i, j] * gam[i] @ gam[j] for i in range(M.shape[0]) for j in range(M.shape[0]) if M[i, j])
    return 0.5 * (H + H.conj().T)
