"""Fermionic Gaussian states in the Majorana correlation-matrix picture.

A state on ``L`` sites is carried by the real antisymmetric ``2L x 2L`` matrix

    G_ij = Tr(rho * i gamma_i gamma_j),   i != j,

with site ``j`` (0-indexed) owning Majoranas ``2j`` and ``2j + 1``. All entropies
are in bits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

logger = logging.getLogger(__name__)

TOL_PURE = 1e-10
TOL_PHYS = 1e-8
TOL_DEGENERATE = 1e-12
TOL_SYMMETRIZE = 1e-8

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


class InvalidInputError(ValueError):
    """Raised for malformed matrices, regions or parameters."""


class UnphysicalStateError(ValueError):
    """Raised when a correlation matrix has a Schur value with |eps| > 1."""


class DegenerateGroundStateError(ValueError):
    """Raised when a quadratic Hamiltonian has a zero-energy mode."""


@dataclass(frozen=True)
class Region:
    """An ordered set of site indices with an optional label."""

    sites: tuple[int, ...]
    label: str = "custom"

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if len(set(sites)) != len(sites):
            raise InvalidInputError(f"duplicate sites in region {sites}")
        if any(s < 0 for s in sites):
            raise InvalidInputError(f"negative site index in region {sites}")
        object.__setattr__(self, "sites", sites)

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def majoranas(self) -> np.ndarray:
        s = np.asarray(self.sites, dtype=int)
        return np.stack([2 * s, 2 * s + 1], axis=1).reshape(-1)

    @classmethod
    def interval(cls, start: int, length: int, num_sites: int | None = None, label: str = "custom") -> "Region":
        """Contiguous interval, wrapped modulo ``num_sites`` when given."""
        sites = range(start, start + length)
        if num_sites is not None:
            sites = [s % num_sites for s in sites]
        return cls(tuple(sites), label)


def as_region(region: Region | Iterable[int]) -> Region:
    if isinstance(region, Region):
        return region
    return Region(tuple(region))


@dataclass(frozen=True)
class SystemLayout:
    num_sites: int

    def __post_init__(self):
        if self.num_sites < 1:
            raise InvalidInputError("num_sites must be positive")

    @property
    def majorana_count(self) -> int:
        return 2 * self.num_sites

    def check(self, region: Region) -> None:
        if any(s >= self.num_sites for s in region.sites):
            raise InvalidInputError(f"region {region.sites} exceeds layout of {self.num_sites} sites")


@dataclass
class SchurForm:
    """``G = O @ blocks(eps) @ O.T`` with blocks ``[[0, e], [-e, 0]]``, ``eps`` >= 0 descending."""

    orthogonal: np.ndarray
    eps: np.ndarray
    clipped: int = 0

    def blocks(self) -> np.ndarray:
        return np.kron(np.diag(self.eps), J2)

    def reconstruct(self) -> np.ndarray:
        return self.orthogonal @ self.blocks() @ self.orthogonal.T


# --- validation -------------------------------------------------------------


def as_correlation_matrix(G, tol: float = TOL_SYMMETRIZE) -> np.ndarray:
    """Validate and antisymmetrize a correlation (or coupling) matrix."""
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {G.shape}")
    if G.shape[0] % 2:
        raise InvalidInputError(f"dimension must be even, got {G.shape[0]}")
    if G.size and np.max(np.abs(G + G.T)) > tol:
        raise InvalidInputError("matrix is not antisymmetric")
    return 0.5 * (G - G.T)


# --- Schur decomposition ----------------------------------------------------


def _pair_columns(G: np.ndarray, depth: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Real orthogonal O and eps >= 0 with O.T G O block diagonal."""
    n = G.shape[0]
    if n == 0:
        return np.zeros((0, 0)), np.zeros(0)
    scale = np.max(np.abs(G))
    if scale == 0.0 or depth > 8:
        return np.eye(n), np.zeros(n // 2)
    w, V = np.linalg.eigh(1j * G / scale)
    # eigh returns ascending; the upper half holds +eps
    top = w[n // 2:][::-1]
    vecs = V[:, n // 2:][:, ::-1]
    good = top > 1e-7
    cols = []
    eps = []
    for e, v in zip(top[good], vecs[:, good].T):
        # fix the phase so the dominant component is +i|v_k|; canonical input then gives O = I
        a = np.abs(v)
        k = np.flatnonzero(a >= a.max() - 1e-10)[0]
        v = v * (1j * a[k] / v[k])
        x = np.sqrt(2.0) * v.real
        y = np.sqrt(2.0) * v.imag
        cols.extend([y, x])
        eps.append(e * scale)
    O = np.array(cols).T if cols else np.zeros((n, 0))
    if O.shape[1]:
        # polar step cleans up eigenvector noise from close pairs
        U, _, Vt = np.linalg.svd(O, full_matrices=False)
        O = U @ Vt
    k = n - O.shape[1]
    if k:
        K = sla.null_space(O.T) if O.shape[1] else np.eye(n)
        sub = K.T @ G @ K
        Osub, esub = _pair_columns(0.5 * (sub - sub.T), depth + 1)
        O = np.hstack([O, K @ Osub])
        eps.extend(list(esub))
    return O, np.asarray(eps)


def schur_decompose(G, clip: bool = True, tol_phys: float = TOL_PHYS) -> SchurForm:
    """Real Schur form of an antisymmetric matrix.

    Values slightly above one (within ``tol_phys``) are clipped to one when
    ``clip`` is set; the count is stored on the result.
    """
    G = as_correlation_matrix(G)
    O, _ = _pair_columns(G)
    # read eps back from the rotated matrix so O and eps are consistent
    Lam = O.T @ G @ O
    eps = Lam[0::2, 1::2].diagonal().copy()
    neg = eps < 0
    if np.any(neg):
        idx = np.flatnonzero(neg)
        O[:, [*(2 * idx), *(2 * idx + 1)]] = O[:, [*(2 * idx + 1), *(2 * idx)]]
        eps[neg] = -eps[neg]
    order = np.argsort(-eps, kind="stable")
    perm = np.stack([2 * order, 2 * order + 1], axis=1).reshape(-1)
    O = O[:, perm]
    eps = eps[order]
    clipped = 0
    if clip:
        over = (eps > 1.0) & (eps <= 1.0 + tol_phys)
        clipped = int(np.count_nonzero(over))
        if clipped:
            logger.debug("clipping %d Schur values to 1", clipped)
            eps[over] = 1.0
    return SchurForm(O, eps, clipped)


def schur_values(G) -> np.ndarray:
    """Schur values |eps| (descending) without the orthogonal factor."""
    G = as_correlation_matrix(G)
    if G.shape[0] == 0:
        return np.zeros(0)
    w = np.linalg.eigvalsh(1j * G)
    return np.sort(np.abs(w[G.shape[0] // 2:]))[::-1]


def check_physical(G, tol_phys: float = TOL_PHYS) -> None:
    eps = schur_values(G)
    if eps.size and eps[0] > 1.0 + tol_phys:
        raise UnphysicalStateError(f"Schur value {eps[0]:.3e} exceeds 1")


# --- constructors -----------------------------------------------------------


def free_fermion_chain_hamiltonian(L: int, boundary: str = "NS") -> np.ndarray:
    """Coupling matrix of ``H = i sum_k gamma_k gamma_{k+1}`` on ``2L`` Majoranas.

    ``boundary="NS"`` imposes gamma_{2L+1} = -gamma_1, ``"R"`` the periodic
    (Ramond) choice and ``"open"`` drops the wrapping bond.
    """
    n = 2 * L
    M = np.zeros((n, n))
    for k in range(n - 1):
        M[k, k + 1] = 1.0
        M[k + 1, k] = -1.0
    if boundary in ("NS", "R"):
        s = -1.0 if boundary == "NS" else 1.0
        M[n - 1, 0] += s
        M[0, n - 1] -= s
    elif boundary != "open":
        raise InvalidInputError(f"unknown boundary {boundary!r}")
    return M


def ground_state_energy(M) -> float:
    return -float(np.sum(schur_values(M)))


def energy(M, G) -> float:
    """<H> = (1/2) sum_ij M_ij G_ij for H = (i/2) sum M_ij gamma_i gamma_j."""
    return 0.5 * float(np.sum(np.asarray(M) * np.asarray(G)))


def ground_state_correlation(M, tol_degenerate: float = TOL_DEGENERATE) -> np.ndarray:
    """Correlation matrix of the ground state of ``H = (i/2) sum M_ij gamma_i gamma_j``.

    Each normal mode ``i eps_k gt_{2k-1} gt_{2k}`` with ``eps_k > 0`` is lowest
    when ``<i gt_{2k-1} gt_{2k}> = -1``.
    """
    sf = schur_decompose(M, clip=False)
    if sf.eps.size and sf.eps[-1] < tol_degenerate:
        raise DegenerateGroundStateError(
            f"zero-energy mode (|eps| = {sf.eps[-1]:.2e}); ground space is degenerate"
        )
    G = -sf.orthogonal @ np.kron(np.eye(sf.eps.size), J2) @ sf.orthogonal.T
    return 0.5 * (G - G.T)


def thermal_state_correlation(M, beta: float) -> np.ndarray:
    """Correlation matrix of ``exp(-beta H) / Z``; ``beta = np.inf`` gives the ground state."""
    if beta < 0 or np.isnan(beta):
        raise InvalidInputError("beta must be non-negative")
    if np.isinf(beta):
        return ground_state_correlation(M)
    sf = schur_decompose(M, clip=False)
    G = -sf.orthogonal @ np.kron(np.diag(np.tanh(beta * sf.eps)), J2) @ sf.orthogonal.T
    return 0.5 * (G - G.T)


def ising_cft_correlation(L: int) -> np.ndarray:
    """Ground state of the critical Ising chain (NS sector) in closed form."""
    if L < 2:
        raise InvalidInputError("L must be at least 2")
    n = 2 * L
    d = np.subtract.outer(np.arange(n), np.arange(n))
    G = np.zeros((n, n))
    odd = (d % 2) != 0
    G[odd] = 1.0 / (L * np.sin(np.pi * d[odd] / (2 * L)))
    return 0.5 * (G - G.T)


def chiral_occupations(L: int, beta_R: float) -> np.ndarray:
    """phi_n for n = 0..L-1: right movers (n < L/2) thermal, left movers frozen at one."""
    n = np.arange(L)
    p = np.pi / L * (n + 0.5)
    phi = np.ones(L)
    right = n < L // 2
    if np.isinf(beta_R):
        return phi
    # 1 / (1 + exp(-x)) written stably
    phi[right] = 0.5 * (1.0 + np.tanh(0.5 * beta_R * np.sin(p[right])))
    return phi


def chiral_correlation(L: int, beta_R: float) -> np.ndarray:
    """Chiral thermal state: left movers in their ground state, right movers at ``beta_R``."""
    if L % 2:
        raise InvalidInputError("chiral state needs an even number of sites")
    if not beta_R > 0:
        raise InvalidInputError("beta_R must be positive")
    n = 2 * L
    d = np.subtract.outer(np.arange(n), np.arange(n))
    phi = chiral_occupations(L, beta_R)
    p = np.pi / L * (np.arange(L) + 0.5)
    S = np.tensordot(phi, np.sin(np.multiply.outer(p, d)), axes=1)
    G = -ising_cft_correlation(L) + (2.0 / L) * S
    np.fill_diagonal(G, 0.0)
    return 0.5 * (G - G.T)


def random_correlation_matrix(num_sites: int, rng: np.random.Generator, pure: bool = False) -> np.ndarray:
    """Haar-orthogonal rotation of random Schur values; test helper."""
    n = 2 * num_sites
    O = _haar_orthogonal(n, rng)
    eps = np.ones(num_sites) if pure else rng.uniform(-1.0, 1.0, num_sites)
    G = O @ np.kron(np.diag(eps), J2) @ O.T
    return 0.5 * (G - G.T)


def _haar_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


# --- region operations ------------------------------------------------------


def partial_trace(G, keep: Region | Iterable[int]) -> np.ndarray:
    """Correlation matrix of the reduced state on ``keep`` (sites, in the given order)."""
    G = np.asarray(G)
    region = as_region(keep)
    if len(region) == 0:
        raise InvalidInputError("cannot keep an empty region")
    SystemLayout(G.shape[0] // 2).check(region)
    idx = region.majoranas()
    return G[np.ix_(idx, idx)]


def direct_sum(*blocks) -> np.ndarray:
    blocks = [np.asarray(b, dtype=float).reshape(np.shape(b) if np.size(b) else (0, 0)) for b in blocks]
    if not blocks:
        return np.zeros((0, 0))
    return sla.block_diag(*blocks) if any(b.size for b in blocks) else np.zeros((0, 0))


# --- entropy ----------------------------------------------------------------


def _binary_entropy_bits(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    out = np.zeros_like(p)
    m = (p > 0) & (p < 1)
    q = p[m]
    out[m] = -(q * np.log2(q) + (1 - q) * np.log2(1 - q))
    return out


def entropy_from_eps(eps: np.ndarray, tol_pure: float = TOL_PURE, tol_phys: float = TOL_PHYS) -> float:
    eps = np.abs(np.asarray(eps, dtype=float))
    if eps.size and eps.max() > 1.0 + tol_phys:
        raise UnphysicalStateError(f"Schur value {eps.max():.3e} exceeds 1")
    eps = np.where(eps > 1.0 - tol_pure, 1.0, eps)
    return float(np.sum(_binary_entropy_bits(0.5 * (1.0 + eps))))


def entropy(G) -> float:
    """Von Neumann entropy in bits."""
    G = np.asarray(G, dtype=float)
    if G.shape[0] == 0:
        return 0.0
    return entropy_from_eps(schur_values(G))


def region_entropy(G, region: Region | Iterable[int]) -> float:
    region = as_region(region)
    if len(region) == 0:
        return 0.0
    return entropy(partial_trace(G, region))


def cmi(G, A, B, C) -> float:
    """I(A:C|B) = S_AB + S_BC - S_B - S_ABC in bits."""
    A, B, C = as_region(A), as_region(B), as_region(C)
    _check_disjoint(A, B, C)
    AB = A.sites + B.sites
    BC = B.sites + C.sites
    ABC = A.sites + B.sites + C.sites
    return (region_entropy(G, AB) + region_entropy(G, BC)
            - region_entropy(G, B.sites) - region_entropy(G, ABC))


def mutual_information(G, A, B) -> float:
    A, B = as_region(A), as_region(B)
    _check_disjoint(A, B)
    return region_entropy(G, A) + region_entropy(G, B) - region_entropy(G, A.sites + B.sites)


def _check_disjoint(*regions: Region) -> None:
    seen: set[int] = set()
    for r in regions:
        if seen & set(r.sites):
            raise InvalidInputError("regions must be pairwise disjoint")
        seen |= set(r.sites)


# --- serialization ----------------------------------------------------------

_MAGIC = b"PZCM"


def save_correlation_matrix(path, G) -> None:
    """Binary layout: 4-byte magic, little-endian uint32 dimension, float64 row-major data."""
    G = np.ascontiguousarray(G, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(np.uint32(G.shape[0]).astype("<u4").tobytes())
        fh.write(G.tobytes(order="C"))


def load_correlation_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise InvalidInputError(f"{path}: not a correlation-matrix file")
        n = int(np.frombuffer(fh.read(4), dtype="<u4")[0])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * n:
        raise InvalidInputError(f"{path}: expected {n * n} entries, found {data.size}")
    return data.reshape(n, n).copy()


def save_correlation_csv(path, G) -> None:
    """CSV layout: first line ``dim,<n>``, then ``n`` rows of ``repr`` floats."""
    G = np.asarray(G, dtype=float)
    with open(path, "w") as fh:
        fh.write(f"dim,{G.shape[0]}\n")
        for row in G:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def load_correlation_csv(path) -> np.ndarray:
    with open(path) as fh:
        head = fh.readline().strip().split(",")
        if head[0] != "dim":
            raise InvalidInputError(f"{path}: missing dimension header")
        n = int(head[1])
        rows = [[float(x) for x in line.split(",")] for line in fh if line.strip()]
    G = np.array(rows, dtype=float).reshape(n, n) if n else np.zeros((0, 0))
    return G
