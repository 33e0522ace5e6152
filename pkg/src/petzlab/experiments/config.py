"""Declarative experiment configuration (a single JSON file)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from ..gaussian.petz import DEFAULT_T_GRID

CONFIG_VERSION = 1

SCENARIOS = ("mipt-clifford", "mipt-haar", "mipt-u1", "ising-ground", "ising-measured",
             "chiral", "chiral-measured", "toric-tee")
BACKENDS = ("gaussian", "stabilizer", "dense")
ALLOWED = {
    "mipt-clifford": ("stabilizer", "dense"),
    "mipt-haar": ("dense",),
    "mipt-u1": ("dense",),
    "ising-ground": ("gaussian",),
    "ising-measured": ("gaussian",),
    "chiral": ("gaussian",),
    "chiral-measured": ("gaussian",),
    "toric-tee": ("stabilizer",),
}
DENSE_CLIFFORD_MAX_L = 12


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    backend: str
    L: int
    p: float = 0.0
    beta_R: float | None = None
    regions: tuple[tuple[int, int, int], ...] = ()
    start: int = 0
    random_regions: int = 0
    t_grid: tuple[float, ...] = tuple(float(t) for t in DEFAULT_T_GRID)
    num_trajectories: int = 1
    master_seed: int = 0
    threads: int = 1
    depth_factor: int = 4
    output_dir: str = "results"
    version: int = CONFIG_VERSION

    @property
    def ensemble(self) -> str:
        return {"mipt-clifford": "clifford", "mipt-haar": "haar", "mipt-u1": "u1",
                "ising-measured": "parity", "chiral-measured": "parity"}.get(self.scenario, "none")

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["regions"] = [list(r) for r in self.regions]
        d["t_grid"] = list(self.t_grid)
        return d


def _chord(l: float, L: int) -> float:
    return (L / np.pi) * np.sin(np.pi * l / L)


def expand_sweep(sweep: dict, L: int) -> list[tuple[int, int, int]]:
    """Cartesian product of L_A, L_B (and L_C, default = L_A) filtered by an eta window."""
    try:
        la = [int(v) for v in sweep["L_A"]]
        lb = [int(v) for v in sweep["L_B"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"region_sweep needs integer lists L_A and L_B: {exc}") from None
    lc = sweep.get("L_C")
    kind = sweep.get("eta", "chord")
    lo, hi = float(sweep.get("eta_min", 0.0)), float(sweep.get("eta_max", 1.0))
    out = []
    for a in la:
        for b in lb:
            for c in ([a] if lc is None else [int(v) for v in lc]):
                if kind == "chord":
                    eta = _chord(a, L) * _chord(c, L) / (_chord(a + b, L) * _chord(b + c, L))
                elif kind == "lengths":
                    eta = a * c / ((a + b) * (b + c))
                else:
                    raise ConfigError(f"unknown eta convention {kind!r}")
                if lo <= eta <= hi:
                    out.append((a, b, c))
    return out


def _t_grid(spec) -> tuple[float, ...]:
    if spec is None:
        return tuple(float(t) for t in DEFAULT_T_GRID)
    if isinstance(spec, dict):
        try:
            return tuple(float(t) for t in np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad t_grid spec: {exc}") from None
    try:
        grid = tuple(float(t) for t in spec)
    except (TypeError, ValueError):
        raise ConfigError("t_grid must be a list of numbers or {start, stop, num}") from None
    if not grid or not all(np.isfinite(grid)):
        raise ConfigError("t_grid must be non-empty and finite")
    return grid


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {"version", "scenario", "backend", "L", "p", "beta_R", "regions", "region_sweep", "start",
             "random_regions", "t_grid", "num_trajectories", "master_seed", "threads", "depth_factor", "output"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if int(raw.get("version", CONFIG_VERSION)) != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {raw.get('version')}")
    try:
        L = int(raw["L"])
        scenario = str(raw["scenario"])
        backend = str(raw["backend"])
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc}") from None
    regions = [tuple(int(v) for v in r) for r in raw.get("regions", [])]
    if "region_sweep" in raw:
        regions += expand_sweep(raw["region_sweep"], L)
    cfg = ExperimentConfig(
        scenario=scenario,
        backend=backend,
        L=L,
        p=float(raw.get("p", 0.0)),
        beta_R=None if raw.get("beta_R") is None else float(raw["beta_R"]),
        regions=tuple(regions),
        start=int(raw.get("start", 0)),
        random_regions=int(raw.get("random_regions", 0)),
        t_grid=_t_grid(raw.get("t_grid")),
        num_trajectories=int(raw.get("num_trajectories", 1)),
        master_seed=int(raw.get("master_seed", 0)),
        threads=int(raw.get("threads", 1)),
        depth_factor=int(raw.get("depth_factor", 4)),
        output_dir=str(raw.get("output", {}).get("dir", "results")),
    )
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    if cfg.backend not in BACKENDS:
        raise ConfigError(f"unknown backend {cfg.backend!r}")
    if cfg.backend not in ALLOWED[cfg.scenario]:
        raise ConfigError(f"backend {cfg.backend!r} cannot run scenario {cfg.scenario!r}")
    if not 0.0 <= cfg.p <= 1.0:
        raise ConfigError("p must lie in [0, 1]")
    if cfg.num_trajectories < 1:
        raise ConfigError("num_trajectories must be >= 1")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if cfg.scenario.startswith("chiral") and (cfg.beta_R is None or cfg.beta_R <= 0):
        raise ConfigError("chiral scenarios need beta_R > 0")
    if cfg.scenario.startswith("mipt") and cfg.L % 2:
        raise ConfigError("circuit scenarios need even L")
    if cfg.scenario.startswith("chiral") and cfg.L % 2:
        raise ConfigError("chiral scenarios need even L")
    if cfg.scenario == "mipt-clifford" and cfg.backend == "dense" and cfg.L > DENSE_CLIFFORD_MAX_L:
        raise ConfigError(f"dense Clifford runs are limited to L <= {DENSE_CLIFFORD_MAX_L}")
    if cfg.scenario == "toric-tee":
        if cfg.L < 4:
            raise ConfigError("toric-tee needs L >= 4")
        return
    if not cfg.regions and cfg.random_regions < 1:
        raise ConfigError("no regions: give regions, region_sweep or random_regions")
    for r in cfg.regions:
        if len(r) != 3 or min(r) < 0 or r[1] + r[2] == 0 or r[0] + r[1] == 0:
            raise ConfigError(f"bad region triple {r}")
        if sum(r) > cfg.L:
            raise ConfigError(f"regions {r} do not fit in L = {cfg.L}")


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = config_from_dict(raw)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if overrides:
        cfg = replace(cfg, **overrides)
        validate(cfg)
    return cfg
