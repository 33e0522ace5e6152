"""Command line: ``petzlab run | summarize | fit | report``.

Exit codes: 0 success, 2 configuration error, 3 numerical-guard failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .analysis import FIT_MODELS, FitError, ScalingFit, asymmetry_metric, fit_scaling, summarize
from ..gaussian.core import InvalidInputError
from .config import ConfigError, load_config
from .emit import emit, read_records, read_summary_json, write_records
from .runner import NumericalGuardError, check_record, run_ensemble

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def default_fits(summary) -> list[ScalingFit]:
    """The fits reported by ``run`` and ``summarize``: infidelity vs CMI and vs chord eta."""
    fits = []
    for x, model in (("cmi", "linear-through-origin"), ("cmi", "quadratic-through-origin"),
                     ("eta_chord", "linear-through-origin"), ("eta_chord", "quadratic-through-origin")):
        try:
            fits.append(fit_scaling(summary, x=x, model=model, t=0.0))
        except FitError:
            pass
    return fits


def _write_outputs(records, out_dir: Path) -> None:
    summary = summarize(records)
    emit(summary, default_fits(summary), out_dir)


def cmd_run(args) -> int:
    cfg = load_config(args.config, master_seed=args.seed, threads=args.threads, output_dir=args.out)
    records = run_ensemble(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_records(records, out / "records.jsonl")
    _write_outputs(records, out)
    print(f"{len(records)} records written to {out}")
    return EXIT_OK


def _load_records(path) -> list[dict]:
    try:
        records = read_records(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read records {path}: {exc}") from None
    for rec in records:
        check_record(rec)
    return records


def cmd_summarize(args) -> int:
    records = _load_records(args.records)
    out = Path(args.out or Path(args.records).parent)
    _write_outputs(records, out)
    print(f"summary written to {out}")
    return EXIT_OK


def _load_summary(path):
    path = Path(path)
    if path.suffix == ".jsonl":
        return summarize(_load_records(path))
    try:
        return read_summary_json(path.read_text())[0]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise ConfigError(f"cannot read summary {path}: {exc}") from None


def cmd_fit(args) -> int:
    summary = _load_summary(args.input)
    t = "best" if args.t == "best" else float(args.t)
    try:
        fit = fit_scaling(summary, x=args.x, model=args.model, t=t)
    except FitError as exc:
        raise ConfigError(str(exc)) from None
    print(json.dumps(asdict(fit), sort_keys=True))
    return EXIT_OK


def cmd_report(args) -> int:
    records = _load_records(args.records)
    summary = summarize(records)
    print(f"{'L_A':>4} {'L_B':>4} {'L_C':>4} {'eta_chord':>10} {'cmi':>9} {'-log2F0':>9} {'best_t':>7} {'N':>5}")
    best = {(r.L_A, r.L_B, r.L_C): r for r in summary.best_t()}
    for r in summary.at_t(0.0):
        b = best[(r.L_A, r.L_B, r.L_C)]
        print(f"{r.L_A:>4} {r.L_B:>4} {r.L_C:>4} {r.eta_chord:>10.4f} {r.mean_cmi_bits:>9.5f} "
              f"{r.mean_neg_log2_F:>9.5f} {b.t:>7.3f} {r.N:>5}")
    for fit in default_fits(summary):
        print(f"fit {fit.model} vs {fit.x}: coefficients {np.round(fit.coefficients, 6).tolist()} "
              f"R2 {fit.r2:.5f} rss {fit.residual_sum:.3e}")
    try:
        a = asymmetry_metric(records)
        print(f"asymmetry delta {a.delta:.6g} sem {a.sem:.3g} over {a.n} trajectories")
    except ValueError:
        pass
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="petzlab", description="Rotated Petz recovery experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run an ensemble from a config file")
    p.add_argument("config")
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--threads", type=int, help="override worker count")
    p.add_argument("--out", help="override output directory")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("summarize", help="aggregate a records.jsonl file")
    p.add_argument("records")
    p.add_argument("--out")
    p.set_defaults(func=cmd_summarize)
    p = sub.add_parser("fit", help="fit infidelity against CMI or eta")
    p.add_argument("input", help="records.jsonl or summary.json")
    p.add_argument("--x", default="cmi", choices=["cmi", "eta", "eta_lengths", "eta_chord"])
    p.add_argument("--model", default="linear-through-origin", choices=FIT_MODELS)
    p.add_argument("--t", default="0", help="t value or 'best'")
    p.set_defaults(func=cmd_fit)
    p = sub.add_parser("report", help="print a table, fits and asymmetry")
    p.add_argument("records")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidInputError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalGuardError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
