"""Gaussian channels, (rotated) Petz recovery and fidelity on correlation matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import (
    InvalidInputError,
    Region,
    SchurForm,
    as_correlation_matrix,
    as_region,
    direct_sum,
    partial_trace,
    schur_decompose,
    _check_disjoint,
)

TOL_DECOUPLE = 1e-8
TOL_PROB = 1e-12
TOL_NUM = 1e-9
# sqrt(I + X^2) turns 1e-16 round-off on pure modes into ~1e-8 per mode
TOL_GUARD = 1e-6
DEFAULT_T_GRID = np.linspace(-5.0, 5.0, 41)


class ForbiddenOutcomeError(ValueError):
    """Raised when forcing a measurement outcome of (near) zero probability."""


@dataclass
class GaussianMap:
    """Grassmann data (A, B, D, c) of a Gaussian linear map.

    For a trace-preserving map ``G -> A + B G B^T`` and ``D = 0``, ``c = 1``.
    """

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray | None = None
    c: complex = 1.0
    trace_preserving: bool = True

    def __post_init__(self):
        self.A = as_correlation_matrix(self.A)
        self.B = np.asarray(self.B, dtype=float)
        if self.D is None:
            self.D = np.zeros((self.B.shape[1], self.B.shape[1]))
        self.D = as_correlation_matrix(self.D)
        if self.trace_preserving and (self.c != 1.0 or np.any(self.D)):
            raise InvalidInputError("trace-preserving maps have c = 1 and D = 0")

    def compose(self, first: "GaussianMap") -> "GaussianMap":
        """The map ``self o first`` (apply ``first`` then ``self``)."""
        return GaussianMap(self.A + self.B @ first.A @ self.B.T, self.B @ first.B)


@dataclass(frozen=True)
class MeasurementOutcome:
    site: int
    outcome: int
    probability: float


def apply_tp_map(gmap: GaussianMap, G) -> np.ndarray:
    if not gmap.trace_preserving:
        raise InvalidInputError("apply_tp_map needs a trace-preserving map")
    G = np.asarray(G, dtype=float)
    if gmap.B.shape[1] != G.shape[0] or gmap.B.shape[0] != gmap.A.shape[0]:
        raise InvalidInputError(f"map of shape {gmap.B.shape} cannot act on {G.shape}")
    out = gmap.A + gmap.B @ G @ gmap.B.T
    return 0.5 * (out - out.T)


def _sqrt_one_plus_square(G, pinv: bool = False, tol_decouple: float = TOL_DECOUPLE) -> np.ndarray:
    """sqrt(I + G^2) (spectrum sqrt(1 - eps^2)); with ``pinv`` its pseudo-inverse.

    Modes with |eps| >= 1 - tol_decouple are treated as pure: they sit in the
    kernel of the pseudo-inverse.
    """
    S = np.eye(G.shape[0]) + G @ G
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    w = np.clip(w, 0.0, None)
    if pinv:
        cut = 2.0 * tol_decouple
        f = np.where(w > cut, 1.0 / np.sqrt(np.where(w > cut, w, 1.0)), 0.0)
    else:
        f = np.sqrt(w)
    return (V * f) @ V.T


def erasure_map(n_keep: int, n_erase: int) -> GaussianMap:
    """Trace-preserving Gaussian map erasing the last ``n_erase`` Majoranas."""
    B = direct_sum(np.eye(n_keep), np.zeros((n_erase, n_erase)))
    return GaussianMap(np.zeros_like(B), B)


def petz_map_matrices(G_sigma, erased: Region | Iterable[int] | None = None, *, n_erased_majoranas: int | None = None,
                      G_N_sigma=None, tol_decouple: float = TOL_DECOUPLE) -> GaussianMap:
    """Petz recovery map for erasing a block of Majoranas from ``G_sigma``.

    The erased sites must form the trailing block of ``G_sigma`` (the layout
    used throughout: A, B, then C). ``G_N_sigma`` defaults to ``G_sigma`` with
    the erased rows/columns zeroed, which is the erasure channel's output when
    sigma factorises across the cut.
    """
    G_sigma = as_correlation_matrix(G_sigma)
    n = G_sigma.shape[0]
    if n_erased_majoranas is None:
        region = as_region(erased if erased is not None else ())
        idx = region.majoranas()
        n_erased_majoranas = idx.size
        if idx.size and not np.array_equal(np.sort(idx), np.arange(n - idx.size, n)):
            raise InvalidInputError("erased sites must be the trailing block")
    n_keep = n - n_erased_majoranas
    B_N = erasure_map(n_keep, n_erased_majoranas).B
    if G_N_sigma is None:
        G_N_sigma = B_N @ G_sigma @ B_N.T
    G_N_sigma = as_correlation_matrix(G_N_sigma)
    B = _sqrt_one_plus_square(G_sigma) @ B_N.T @ _sqrt_one_plus_square(G_N_sigma, pinv=True, tol_decouple=tol_decouple)
    A = G_sigma - B @ G_N_sigma @ B.T
    return GaussianMap(A, B)


def rotation_conjugator(M, t: float, tol_decouple: float = TOL_DECOUPLE, schur: SchurForm | None = None) -> np.ndarray:
    """R(M, t) = O (+)_i rot(t * artanh(eps_i)) O^T; pure modes (|eps| ~ 1) are left fixed.

    Pass ``schur`` to reuse a decomposition of ``M`` across many ``t``.
    """
    t = float(t)
    if not np.isfinite(t):
        raise InvalidInputError("rotation parameter must be finite")
    sf = schur_decompose(M) if schur is None else schur
    n = sf.eps.size
    if t == 0.0 or n == 0:
        return np.eye(2 * n)
    eps = sf.eps
    free = eps < 1.0 - tol_decouple
    # ((1+e)/(1-e))^{it/2} = exp(i t artanh(e)) on the principal branch
    phi = np.zeros(n)
    phi[free] = t * np.arctanh(eps[free])
    c, s = np.cos(phi), np.sin(phi)
    blocks = np.zeros((2 * n, 2 * n))
    blocks[0::2, 0::2] = np.diag(c)
    blocks[0::2, 1::2] = np.diag(-s)
    blocks[1::2, 0::2] = np.diag(s)
    blocks[1::2, 1::2] = np.diag(c)
    return sf.orthogonal @ blocks @ sf.orthogonal.T


@dataclass
class PetzSetup:
    """Blocks of the erasure-recovery problem in A, B, C Majorana order."""

    G_ABC: np.ndarray
    G_AB0: np.ndarray
    G_sigma: np.ndarray
    G_N_sigma: np.ndarray
    petz: GaussianMap
    sizes: tuple[int, int, int]
    schur_sigma: SchurForm
    schur_N: SchurForm


def petz_setup(G, A, B, C) -> PetzSetup:
    A, B, C = as_region(A), as_region(B), as_region(C)
    _check_disjoint(A, B, C)
    if len(B) + len(C) == 0 or len(A) + len(B) == 0:
        raise InvalidInputError("need non-empty AB and BC")
    G_ABC = partial_trace(G, A.sites + B.sites + C.sites)
    a, b, c = 2 * len(A), 2 * len(B), 2 * len(C)
    G_A = G_ABC[:a, :a]
    G_B = G_ABC[a:a + b, a:a + b]
    G_BC = G_ABC[a:, a:]
    G_AB = G_ABC[:a + b, :a + b]
    zc = np.zeros((c, c))
    G_sigma = direct_sum(G_A, G_BC)
    G_N = direct_sum(G_A, G_B, zc)
    petz = petz_map_matrices(G_sigma, n_erased_majoranas=c, G_N_sigma=G_N)
    return PetzSetup(G_ABC, direct_sum(G_AB, zc), G_sigma, G_N, petz, (a, b, c),
                     schur_decompose(G_sigma), schur_decompose(G_N))


def rotated_petz_map(setup: PetzSetup, t: float) -> GaussianMap:
    R_sigma = rotation_conjugator(setup.G_sigma, t, schur=setup.schur_sigma)
    R_N = rotation_conjugator(setup.G_N_sigma, -t, schur=setup.schur_N)
    return GaussianMap(R_sigma @ setup.petz.A @ R_sigma.T, R_sigma @ setup.petz.B @ R_N)


def rotated_petz_recover(G, A, B, C, t: float, setup: PetzSetup | None = None) -> np.ndarray:
    """Correlation matrix of the rotated-Petz recovered state on A, B, C (in that order)."""
    if setup is None:
        setup = petz_setup(G, A, B, C)
    return apply_tp_map(rotated_petz_map(setup, t), setup.G_AB0)


@dataclass
class FidelityDiagnostics:
    fidelity: float
    log2_fidelity: float
    cond_overlap: float
    max_eps_intermediate: float


def gaussian_fidelity(G_rho, G_sigma, return_diagnostics: bool = False):
    """Uhlmann fidelity ``Tr sqrt(sqrt(sigma) rho sqrt(sigma))`` of two Gaussian states.

    The intermediate ``((G_rho)^-1 - G_sigma)^-1`` is evaluated as
    ``(I - G_rho G_sigma)^-1 G_rho``, which needs no inverse of ``G_rho``.
    Everything is summed in the log domain. Pure modes make the result
    accurate to about 1e-8 per mode, so values just above one are clipped.
    """
    Gr = as_correlation_matrix(G_rho)
    Gs = as_correlation_matrix(G_sigma)
    if Gr.shape != Gs.shape:
        raise InvalidInputError(f"shape mismatch {Gr.shape} vs {Gs.shape}")
    n = Gr.shape[0]
    if n == 0:
        return FidelityDiagnostics(1.0, 0.0, 1.0, 0.0) if return_diagnostics else 1.0
    L = n // 2
    K = np.eye(n) - Gr @ Gs
    sign, logdet_K = np.linalg.slogdet(K)
    sv = np.linalg.svd(K, compute_uv=False)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if sign <= 0 or sv[-1] < 1e-13:
        diag = FidelityDiagnostics(0.0, -np.inf, cond, np.nan)
        return diag if return_diagnostics else 0.0
    S = _sqrt_one_plus_square(Gs)
    X = Gs + S @ np.linalg.solve(K, Gr) @ S
    X = 0.5 * (X - X.T)
    Y = np.eye(n) + X @ X
    w = np.clip(np.linalg.eigvalsh(0.5 * (Y + Y.T)), 0.0, None)
    logdet_2 = np.sum(np.log(1.0 + np.sqrt(w)))
    ln_f = -0.5 * L * np.log(2.0) + 0.25 * logdet_K + 0.25 * logdet_2
    log2_f = min(ln_f / np.log(2.0), 0.0)
    if ln_f > TOL_GUARD:
        raise ArithmeticError(f"fidelity {np.exp(ln_f)} exceeds 1")
    F = float(np.exp2(log2_f))
    if return_diagnostics:
        max_eps = float(np.sqrt(max(0.0, 1.0 - w.min()))) if w.size else 0.0
        return FidelityDiagnostics(F, float(log2_f), float(cond), max_eps)
    return F


def parity_measure(G, site: int, rng: np.random.Generator | None = None, outcome: int | None = None,
                   tol_prob: float = TOL_PROB) -> tuple[np.ndarray, MeasurementOutcome]:
    """Project site ``site`` onto ``i gamma_{2n} gamma_{2n+1} = (-1)^a``.

    Pass ``outcome`` to force a result, otherwise ``rng`` draws it by the Born rule.
    """
    G = np.array(G, dtype=float)
    n = G.shape[0] // 2
    if not 0 <= site < n:
        raise InvalidInputError(f"site {site} outside 0..{n - 1}")
    i, j = 2 * site, 2 * site + 1
    g = G[i, j]
    p0 = min(max(0.5 + 0.5 * g, 0.0), 1.0)
    if outcome is None:
        if rng is None:
            raise InvalidInputError("need an rng or a forced outcome")
        outcome = 0 if rng.random() < p0 else 1
    if outcome not in (0, 1):
        raise InvalidInputError("outcome must be 0 or 1")
    s = 1.0 if outcome == 0 else -1.0
    prob = p0 if outcome == 0 else 1.0 - p0
    x = s * g
    if 1.0 + x < tol_prob:
        raise ForbiddenOutcomeError(f"outcome {outcome} on site {site} has probability {prob:.2e}")
    gi, gj = G[:, i].copy(), G[:, j].copy()
    G += (s / (1.0 + x)) * (np.outer(gj, gi) - np.outer(gi, gj))
    G[[i, j], :] = 0.0
    G[:, [i, j]] = 0.0
    G[i, j] = s
    G[j, i] = -s
    return 0.5 * (G - G.T), MeasurementOutcome(site, outcome, prob)


def measure_sites(G, p: float, rng: np.random.Generator, sites: Sequence[int] | None = None):
    """Measure each site's parity independently with probability ``p``."""
    G = np.asarray(G, dtype=float)
    sites = range(G.shape[0] // 2) if sites is None else sites
    outcomes = []
    for site in sites:
        if rng.random() < p:
            G, out = parity_measure(G, site, rng)
            outcomes.append(out)
    return G, outcomes


def petz_fidelity_curve(G, A, B, C, t_grid: Iterable[float] = DEFAULT_T_GRID) -> list[tuple[float, float]]:
    """``[(t, F_t), ...]`` for the rotated Petz recovery of C from B."""
    setup = petz_setup(G, A, B, C)
    out = []
    for t in t_grid:
        Gt = rotated_petz_recover(G, A, B, C, t, setup=setup)
        out.append((float(t), gaussian_fidelity(Gt, setup.G_ABC)))
    return out


def best_t(curve: Sequence[tuple[float, float]]) -> float:
    ts, fs = zip(*curve)
    return float(ts[int(np.argmax(fs))])
