"""Ensemble averages, scaling fits and the t-asymmetry metric."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

FIT_MODELS = ("linear-through-origin", "linear-affine", "quadratic-through-origin")


class FitError(ValueError):
    pass


def eta_of(L_A: float, L_B: float, L_C: float) -> float:
    """Cross-ratio from interval lengths, ``L_A L_C / ((L_A + L_B)(L_B + L_C))``."""
    return L_A * L_C / ((L_A + L_B) * (L_B + L_C))


def eta_chord(L_A: float, L_B: float, L_C: float, L: int) -> float:
    """Cross-ratio on a ring of ``L`` sites: every length l -> (L/pi) sin(pi l / L)."""
    ch = lambda l: (L / np.pi) * np.sin(np.pi * l / L)  # noqa: E731
    return ch(L_A) * ch(L_C) / (ch(L_A + L_B) * ch(L_B + L_C))


def _sem(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0


@dataclass
class SummaryRow:
    scenario: str
    backend: str
    L: int
    p: float
    L_A: int
    L_B: int
    L_C: int
    eta_lengths: float
    eta_chord: float
    t: float
    mean_neg_log2_F: float
    sem: float
    mean_F: float
    mean_cmi_bits: float
    cmi_sem: float
    N: int
    neg_log2_mean_F: float = 0.0  # log-of-mean aggregation


@dataclass
class EnsembleSummary:
    rows: list[SummaryRow] = field(default_factory=list)

    def groups(self) -> dict[tuple, list[SummaryRow]]:
        out = defaultdict(list)
        for r in self.rows:
            out[(r.scenario, r.backend, r.L, r.p, r.L_A, r.L_B, r.L_C)].append(r)
        return dict(out)

    def at_t(self, t: float = 0.0) -> list[SummaryRow]:
        """One row per region group: the grid point closest to ``t``."""
        return [min(rows, key=lambda r: abs(r.t - t)) for rows in self.groups().values()]

    def best_t(self) -> list[SummaryRow]:
        """One row per region group: the grid point with the smallest mean infidelity."""
        return [min(rows, key=lambda r: r.mean_neg_log2_F) for rows in self.groups().values()]


def summarize(records: Sequence[dict]) -> EnsembleSummary:
    """Mean-of-log and log-of-mean aggregation per (region, t) with standard errors."""
    groups = defaultdict(list)
    for rec in records:
        reg = rec["regions"]
        key = (rec["scenario"], rec["backend"], rec["L"], rec["p"], reg["L_A"], reg["L_B"], reg["L_C"])
        groups[key].append(rec)
    rows = []
    for key in sorted(groups):
        recs = groups[key]
        scenario, backend, L, p, la, lb, lc = key
        t_grid = np.asarray(recs[0]["t_grid"])
        if any(not np.array_equal(np.asarray(r["t_grid"]), t_grid) for r in recs):
            raise ValueError(f"records of group {key} use different t grids")
        F = np.array([r["F_t"] for r in recs], dtype=float)
        cm = np.array([r["cmi_bits"] for r in recs], dtype=float)
        with np.errstate(divide="ignore"):
            nl = -np.log2(F)
        for k, t in enumerate(t_grid):
            rows.append(SummaryRow(
                scenario, backend, int(L), float(p), int(la), int(lb), int(lc),
                eta_of(la, lb, lc), eta_chord(la, lb, lc, L), float(t),
                float(np.mean(nl[:, k])), _sem(nl[:, k]), float(np.mean(F[:, k])),
                float(np.mean(cm)), _sem(cm), len(recs), float(-np.log2(np.mean(F[:, k]))),
            ))
    return EnsembleSummary(rows)


@dataclass
class ScalingFit:
    model: str
    x: str
    coefficients: tuple[float, ...]
    residual_sum: float
    r2: float
    n_points: int


def fit_xy(x, y, model: str, x_name: str = "x") -> ScalingFit:
    """Least squares for ``y = a x``, ``y = a x + b`` or ``y = a x^2``.

    R^2 is the centred ``1 - RSS / sum (y - mean y)^2`` for every model, so a
    through-origin fit is scored against the same baseline as the affine one.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if model not in FIT_MODELS:
        raise FitError(f"unknown model {model!r}")
    if x.size < 2:
        raise FitError("need at least two points")
    if model == "linear-affine":
        X = np.stack([x, np.ones_like(x)], axis=1)
    else:
        X = (x if model == "linear-through-origin" else x**2)[:, None]
    tss = float(np.sum((y - y.mean()) ** 2))
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    rss = float(np.sum((y - X @ coef) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    return ScalingFit(model, x_name, tuple(float(c) for c in coef), rss, r2, int(x.size))


def fit_scaling(summary: EnsembleSummary, x: str = "cmi", model: str = "linear-through-origin",
                t: float | str = 0.0) -> ScalingFit:
    """Fit mean -log2 F (at ``t``, or the best t per region when ``t == "best"``) against ``x``."""
    rows = summary.best_t() if t == "best" else summary.at_t(float(t))
    column = {"cmi": "mean_cmi_bits", "eta": "eta_lengths", "eta_lengths": "eta_lengths",
              "eta_chord": "eta_chord"}.get(x)
    if column is None:
        raise FitError(f"unknown regressor {x!r}")
    xs = [getattr(r, column) for r in rows]
    ys = [r.mean_neg_log2_F for r in rows]
    return fit_xy(xs, ys, model, x)


@dataclass(frozen=True)
class AsymmetryResult:
    delta: float
    sem: float
    n: int


def asymmetry_metric(records: Sequence[dict]) -> AsymmetryResult:
    """Mean over t > 0 of ``(-log2 F_{-t}) - (-log2 F_t)``, averaged over trajectories.

    Positive values mean recovery is better at positive t. Each trajectory
    contributes the average over its region triples, which sets the SEM.
    """
    per_traj = defaultdict(list)
    for rec in records:
        t = np.asarray(rec["t_grid"], dtype=float)
        F = np.asarray(rec["F_t"], dtype=float)
        pos = np.flatnonzero(t > 0)
        neg = [int(np.flatnonzero(np.isclose(t, -t[k]))[0]) if np.any(np.isclose(t, -t[k])) else -1 for k in pos]
        pairs = [(k, m) for k, m in zip(pos, neg) if m >= 0]
        if not pairs:
            raise ValueError("t grid has no symmetric pairs")
        with np.errstate(divide="ignore"):
            nl = -np.log2(F)
        per_traj[(rec["seed"], rec["trajectory"])].append(np.mean([nl[m] - nl[k] for k, m in pairs]))
    d = np.array([np.mean(v) for _, v in sorted(per_traj.items())])
    return AsymmetryResult(float(np.mean(d)), _sem(d), int(d.size))
