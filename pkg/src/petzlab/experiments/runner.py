"""Ensemble orchestration: one record per (trajectory, region triple)."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Iterable

import numpy as np

from ..dense.petz import uhlmann_petz_curve
from ..dense.statevector import cmi_dense, interval, run_dense_mipt
from ..gaussian.core import chiral_correlation, cmi, ising_cft_correlation
from ..gaussian.petz import measure_sites, petz_fidelity_curve
from ..stabilizer.circuits import levin_wen_partition, run_clifford_mipt, toric_code_state
from ..stabilizer.entropy import cmi_stabilizer, petz_fidelity_stabilizer
from .config import ExperimentConfig

RECORD_SCHEMA_VERSION = 1
CMI_FLOOR = -1e-8


class NumericalGuardError(ArithmeticError):
    """A record contains NaN or an out-of-range value (CLI exit code 3)."""


def trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(index)]))


def random_partition(L: int, rng: np.random.Generator) -> tuple[tuple[int, int, int], int]:
    """A random contiguous (L_A, L_B, L_C) with all parts >= 1, fitting in L, and a random start."""
    while True:
        la, lb, lc = (int(v) for v in rng.integers(1, L - 1, size=3))
        if la + lb + lc <= L:
            return (la, lb, lc), int(rng.integers(L))


def _triples(cfg: ExperimentConfig, rng: np.random.Generator):
    out = [(r, cfg.start) for r in cfg.regions]
    out += [random_partition(cfg.L, rng) for _ in range(cfg.random_regions)]
    return out


def _split(L: int, triple, start: int):
    la, lb, lc = triple
    return interval(start, la, L), interval(start + la, lb, L), interval(start + la + lb, lc, L)


def _record(cfg: ExperimentConfig, index: int, triple, start: int, cmi_bits: float, F_t, wall: float) -> dict:
    return {
        "schema_version": RECORD_SCHEMA_VERSION,
        "scenario": cfg.scenario,
        "backend": cfg.backend,
        "seed": cfg.master_seed,
        "trajectory": index,
        "L": cfg.L,
        "p": cfg.p,
        "ensemble": cfg.ensemble,
        "regions": {"L_A": int(triple[0]), "L_B": int(triple[1]), "L_C": int(triple[2]), "start": int(start)},
        "cmi_bits": float(cmi_bits),
        "t_grid": [float(t) for t in cfg.t_grid],
        "F_t": [float(f) for f in F_t],
        "wall_time": float(wall),
    }


def _gaussian_state(cfg: ExperimentConfig, rng):
    if cfg.scenario.startswith("ising"):
        G = ising_cft_correlation(cfg.L)
    else:
        G = chiral_correlation(cfg.L, cfg.beta_R)
    if cfg.scenario.endswith("measured"):
        G, _ = measure_sites(G, cfg.p, rng)
    return G


def run_trajectory(cfg: ExperimentConfig, index: int) -> list[dict]:
    """Simulate trajectory ``index`` and analyse every configured region triple."""
    t0 = time.perf_counter()
    rng = trajectory_rng(cfg.master_seed, index)
    T = cfg.depth_factor * cfg.L
    records = []
    if cfg.scenario == "toric-tee":
        tab = toric_code_state(cfg.L, cfg.L)
        A, B, C = levin_wen_partition(cfg.L, cfg.L)
        fid = petz_fidelity_stabilizer(tab, A, B, C)
        return [_record(cfg, index, (len(A), len(B), len(C)), 0, fid.cmi_bits,
                        [fid.fidelity] * len(cfg.t_grid), time.perf_counter() - t0)]
    if cfg.backend == "stabilizer":
        tab = run_clifford_mipt(cfg.L, cfg.p, T=T, rng=rng)
        sim = time.perf_counter() - t0
        for triple, start in _triples(cfg, rng):
            t1 = time.perf_counter()
            A, B, C = _split(cfg.L, triple, start)
            fid = petz_fidelity_stabilizer(tab, A, B, C)
            # stabilizer fidelity is independent of t
            records.append(_record(cfg, index, triple, start, fid.cmi_bits, [fid.fidelity] * len(cfg.t_grid),
                                   sim + time.perf_counter() - t1))
        return records
    if cfg.backend == "dense":
        if cfg.scenario == "mipt-clifford":
            psi = run_clifford_mipt(cfg.L, cfg.p, T=T, rng=rng).state_vector()
        else:
            psi = run_dense_mipt(cfg.L, cfg.p, cfg.ensemble, T=T, rng=rng)
        sim = time.perf_counter() - t0
        for triple, start in _triples(cfg, rng):
            t1 = time.perf_counter()
            A, B, C = _split(cfg.L, triple, start)
            curve = uhlmann_petz_curve(psi, A, B, C, cfg.t_grid)
            records.append(_record(cfg, index, triple, start, cmi_dense(psi, A, B, C), [f for _, f in curve],
                                   sim + time.perf_counter() - t1))
        return records
    G = _gaussian_state(cfg, rng)
    sim = time.perf_counter() - t0
    for triple, start in _triples(cfg, rng):
        t1 = time.perf_counter()
        A, B, C = _split(cfg.L, triple, start)
        curve = petz_fidelity_curve(G, A, B, C, cfg.t_grid)
        records.append(_record(cfg, index, triple, start, cmi(G, A, B, C), [f for _, f in curve],
                               sim + time.perf_counter() - t1))
    return records


def check_record(rec: dict) -> None:
    F = np.asarray(rec["F_t"], dtype=float)
    c = rec["cmi_bits"]
    if not np.all(np.isfinite(F)) or not math.isfinite(c):
        raise NumericalGuardError(f"non-finite value in trajectory {rec['trajectory']} regions {rec['regions']}")
    if np.any(F < 0) or np.any(F > 1 + 1e-9) or c < CMI_FLOOR:
        raise NumericalGuardError(f"out-of-range value in trajectory {rec['trajectory']} regions {rec['regions']}")


def run_ensemble(cfg: ExperimentConfig, indices: Iterable[int] | None = None) -> list[dict]:
    """All records of the ensemble, ordered by trajectory; identical for any ``threads``."""
    indices = list(range(cfg.num_trajectories)) if indices is None else list(indices)
    work = partial(run_trajectory, cfg)
    if cfg.threads > 1 and len(indices) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(work, indices))
    else:
        chunks = [work(i) for i in indices]
    records = [r for chunk in chunks for r in chunk]
    for rec in records:
        check_record(rec)
    return records
