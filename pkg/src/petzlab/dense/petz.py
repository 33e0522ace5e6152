"""Rotated and twirled Petz recovery fidelities for dense states.

The main route evaluates ``F_t = || Phi_ABC^dag Phi~_t ||_1`` where ``Phi~_t``
purifies the recovered state ``rho_BC^{(1+it)/2} rho_B^{-(1+it)/2} rho_AB
(...)^dag``; ``rho_AB (x) I_C`` is purified by the maximally entangled vector on
C and a copy C*. All negative powers act on the support only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..gaussian.core import InvalidInputError
from .statevector import CUTOFF_EIG, _as_sites, num_qubits_of, reduced_density, region_matrix

T_CUT = 20.0
DEFAULT_NODES = 81


@dataclass
class Purification:
    """Matrix view of a purification: rows = system basis, columns = ancilla."""

    matrix: np.ndarray
    provenance: str  # "original-state" or "canonical"

    def density(self) -> np.ndarray:
        return self.matrix @ self.matrix.conj().T


@dataclass
class SpectralFactor:
    """``rho = U diag(lam) U^dag`` restricted to the support ``lam > cutoff``."""

    unitary: np.ndarray
    eigenvalues: np.ndarray
    dim: int

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    def power(self, z: complex) -> np.ndarray:
        U = self.unitary
        return (U * self.eigenvalues.astype(complex) ** z) @ U.conj().T

    def reconstruct(self) -> np.ndarray:
        return self.power(1.0)


def spectral_factor_from_density(rho, cutoff: float = CUTOFF_EIG) -> SpectralFactor:
    w, V = np.linalg.eigh(0.5 * (rho + np.conj(rho).T))
    keep = w > cutoff
    order = np.argsort(w[keep])[::-1]
    return SpectralFactor(V[:, keep][:, order], w[keep][order], rho.shape[0])


def spectral_factor(psi, R, cutoff: float = CUTOFF_EIG) -> SpectralFactor:
    """Support eigendecomposition of ``rho_R``; thin SVD when R is the larger side."""
    L = num_qubits_of(psi)
    n = len(_as_sites(R))
    if 2 * n > L:
        M = region_matrix(psi, R)
        U, s, _ = np.linalg.svd(M, full_matrices=False)
        lam = s**2
        keep = lam > cutoff
        return SpectralFactor(U[:, keep], lam[keep], M.shape[0])
    return spectral_factor_from_density(reduced_density(psi, R), cutoff)


def canonical_purification(rho, cutoff: float = CUTOFF_EIG) -> Purification:
    """``sqrt(rho)`` up to an isometry on the ancilla (support columns only)."""
    sf = spectral_factor_from_density(rho, cutoff)
    return Purification(sf.unitary * np.sqrt(sf.eigenvalues), "canonical")


def purification(psi, R) -> Purification:
    """``psi`` itself if R covers at least half the chain, else the canonical one."""
    L = num_qubits_of(psi)
    if 2 * len(_as_sites(R)) >= L:
        return Purification(region_matrix(psi, R), "original-state")
    return canonical_purification(reduced_density(psi, R))


def nuclear_norm(M: np.ndarray) -> float:
    gram = M @ M.conj().T if M.shape[0] <= M.shape[1] else M.conj().T @ M
    w = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def uhlmann_fidelity(rho, sigma, cutoff: float = CUTOFF_EIG) -> float:
    """``|| sqrt(rho) sqrt(sigma) ||_1``."""
    a = canonical_purification(rho, cutoff).matrix
    b = canonical_purification(sigma, cutoff).matrix
    return nuclear_norm(a.conj().T @ b)


@dataclass
class PetzInputs:
    dims: tuple[int, int, int]
    phi_abc: Purification
    phi_ab: Purification
    rho_bc: SpectralFactor
    rho_b: SpectralFactor


def prepare_petz_inputs(psi, A, B, C) -> PetzInputs:
    A, B, C = _as_sites(A), _as_sites(B), _as_sites(C)
    if len(set(A + B + C)) != len(A + B + C):
        raise InvalidInputError("regions overlap")
    if not B + C or not A + B:
        raise InvalidInputError("need non-empty AB and BC")
    dims = (2 ** len(A), 2 ** len(B), 2 ** len(C))
    return PetzInputs(dims, purification(psi, A + B + C), purification(psi, A + B),
                      spectral_factor(psi, B + C), spectral_factor(psi, B))


def _petz_overlap(inp: PetzInputs, t: float) -> np.ndarray:
    dA, dB, dC = inp.dims
    z = 0.5 * (1.0 + 1j * t)
    e1 = inp.phi_abc.matrix.shape[1]
    e2 = inp.phi_ab.matrix.shape[1]
    # X = rho_B^{-z} Phi_AB on the B leg
    fb = inp.rho_b
    X = inp.phi_ab.matrix.reshape(dA, dB, e2)
    if fb.rank:
        Ub = fb.unitary
        X = np.einsum("bk,k,ck,acx->abx", Ub, fb.eigenvalues.astype(complex) ** (-z), Ub.conj(), X, optimize=True)
    else:
        X = np.zeros_like(X)
    # W = (rho_BC^z)^dag Phi_ABC on the BC leg
    fbc = inp.rho_bc
    P = inp.phi_abc.matrix.reshape(dA, dB * dC, e1)
    Ubc = fbc.unitary
    proj = np.einsum("mk,amx->akx", Ubc.conj(), P, optimize=True)
    proj *= np.conj(fbc.eigenvalues.astype(complex) ** z)[None, :, None]
    W = np.einsum("mk,akx->amx", Ubc, proj, optimize=True).reshape(dA * dB, dC, e1)
    # M[e1, (e2, c)] = sum_{a,b} conj(W[ab, c, e1]) X[ab, e2]
    M = np.einsum("ncx,ny->xyc", W.conj(), X.reshape(dA * dB, e2), optimize=True)
    return M.reshape(e1, e2 * dC)


def uhlmann_petz_fidelity(psi, A, B, C, t: float = 0.0, inputs: PetzInputs | None = None) -> float:
    """Rotated Petz recovery fidelity of C from B for the pure state ``psi``.

    Cost is dominated by contractions of size ``O(2^{3 L_ABC})``.
    """
    inp = prepare_petz_inputs(psi, A, B, C) if inputs is None else inputs
    return min(nuclear_norm(_petz_overlap(inp, float(t))), 1.0 + 1e-9)


def uhlmann_petz_curve(psi, A, B, C, t_grid: Iterable[float]) -> list[tuple[float, float]]:
    inp = prepare_petz_inputs(psi, A, B, C)
    return [(float(t), uhlmann_petz_fidelity(psi, A, B, C, t, inputs=inp)) for t in t_grid]


def _partial_trace_last(rho, d_keep: int, d_drop: int) -> np.ndarray:
    return np.trace(rho.reshape(d_keep, d_drop, d_keep, d_drop), axis1=1, axis2=3)


def _partial_trace_first(rho, d_drop: int, d_keep: int) -> np.ndarray:
    return np.trace(rho.reshape(d_drop, d_keep, d_drop, d_keep), axis1=0, axis2=2)


def marginals(rho_abc, dims: Sequence[int]):
    """(rho_AB, rho_BC, rho_B) of a tripartite density matrix with dimensions ``dims``."""
    dA, dB, dC = dims
    rho_ab = _partial_trace_last(rho_abc, dA * dB, dC)
    rho_bc = _partial_trace_first(rho_abc, dA, dB * dC)
    rho_b = _partial_trace_last(rho_bc, dB, dC)
    return rho_ab, rho_bc, rho_b


def direct_petz_recover(rho_abc, dims: Sequence[int], t: float = 0.0, cutoff: float = CUTOFF_EIG) -> np.ndarray:
    """Literal rotated Petz recovery ``K_t (rho_AB (x) I_C) K_t^dag`` on density matrices."""
    dA, dB, dC = dims
    rho_ab, rho_bc, rho_b = marginals(rho_abc, dims)
    z = 0.5 * (1.0 + 1j * t)
    p_bc = spectral_factor_from_density(rho_bc, cutoff).power(z)
    p_b = spectral_factor_from_density(rho_b, cutoff).power(-z)
    K = np.kron(np.eye(dA), p_bc) @ np.kron(np.kron(np.eye(dA), p_b), np.eye(dC))
    out = K @ np.kron(rho_ab, np.eye(dC)) @ K.conj().T
    out = 0.5 * (out + out.conj().T)
    return out / np.trace(out).real


def twirl_weight(t):
    """beta(t) = pi / (2 (1 + cosh(pi t))), a probability density on the real line."""
    return np.pi / (2.0 * (1.0 + np.cosh(np.pi * np.asarray(t, dtype=float))))


def twirl_kernel(x):
    """Characteristic function of ``beta``: ``int beta(t) e^{i t x} dt = x / sinh(x)``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-8
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x**2 / 6.0, xs / np.sinh(xs))


def twirled_petz_recover(rho_abc, dims: Sequence[int], method: str = "spectral",
                         nodes: int = DEFAULT_NODES, t_cut: float = T_CUT,
                         cutoff: float = CUTOFF_EIG) -> np.ndarray:
    """``int beta(t) D_t(rho_AB) dt`` by Gauss-Legendre quadrature or in closed form.

    The closed form expands the recovered operator in the eigenbases of
    ``rho_BC`` and ``rho_B``; each matrix element then carries a phase
    ``exp(i t x)`` whose beta-average is ``x / sinh(x)``.
    """
    if method == "quadrature":
        ts, ws = np.polynomial.legendre.leggauss(nodes)
        ts, ws = t_cut * ts, t_cut * ws
        out = sum(w * twirl_weight(t) * direct_petz_recover(rho_abc, dims, t, cutoff) for t, w in zip(ts, ws))
        out = 0.5 * (out + out.conj().T)
        return out / np.trace(out).real
    if method != "spectral":
        raise InvalidInputError(f"unknown method {method!r}")
    dA, dB, dC = dims
    rho_ab, rho_bc, rho_b = marginals(rho_abc, dims)
    fbc = spectral_factor_from_density(rho_bc, cutoff)
    fb = spectral_factor_from_density(rho_b, cutoff)
    V, lam = fbc.unitary, fbc.eigenvalues
    Wb, mu = fb.unitary, fb.eigenvalues
    # Z = rho_B^{-1/2} rho_AB rho_B^{-1/2} in the rho_B eigenbasis: (a, k, a', l)
    Z = np.einsum("bk,abcd,dl->akcl", Wb.conj(), rho_ab.reshape(dA, dB, dA, dB), Wb, optimize=True)
    Z = Z / np.sqrt(mu)[None, :, None, None] / np.sqrt(mu)[None, None, None, :]
    # Q[i, k, c] = <v_i | w_k, c>
    Q = np.einsum("bci,bk->ikc", V.conj().reshape(dB, dC, -1), Wb, optimize=True)
    ll, lm = 0.5 * np.log(lam), 0.5 * np.log(mu)
    x = ll[:, None, None, None] - ll[None, :, None, None] - lm[None, None, :, None] + lm[None, None, None, :]
    T = np.einsum("ikc,jlc->ijkl", Q, Q.conj(), optimize=True) * twirl_kernel(x)
    Y = np.einsum("ijkl,akbl->aibj", T, Z, optimize=True)
    Y = Y * np.sqrt(lam)[None, :, None, None] * np.sqrt(lam)[None, None, None, :]
    r = lam.size
    Y = Y.reshape(dA * r, dA * r)
    Vf = np.kron(np.eye(dA), V)
    out = Vf @ Y @ Vf.conj().T
    out = 0.5 * (out + out.conj().T)
    return out / np.trace(out).real


def twirled_petz_fidelity(rho_abc, dims: Sequence[int], method: str = "spectral",
                          nodes: int = DEFAULT_NODES, t_cut: float = T_CUT) -> float:
    rec = twirled_petz_recover(rho_abc, dims, method=method, nodes=nodes, t_cut=t_cut)
    return uhlmann_fidelity(rec, rho_abc)


def fidelity_dense(psi, A, B, C, t: float = 0.0) -> float:
    """Literal route: reduced density, direct recovery, then Uhlmann fidelity."""
    A, B, C = _as_sites(A), _as_sites(B), _as_sites(C)
    rho = reduced_density(psi, A + B + C)
    dims = (2 ** len(A), 2 ** len(B), 2 ** len(C))
    return uhlmann_fidelity(direct_petz_recover(rho, dims, t), rho)
