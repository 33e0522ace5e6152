"""Flat-file output: records (JSON lines), summary CSV and summary/fit JSON."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from importlib import resources
from pathlib import Path
from typing import Sequence

from .analysis import EnsembleSummary, ScalingFit, SummaryRow

SUMMARY_SCHEMA_VERSION = 1
CSV_COLUMNS = ("scenario", "backend", "L", "p", "L_A", "L_B", "L_C", "eta_lengths", "eta_chord", "t",
               "mean_neg_log2_F", "sem", "mean_F", "mean_cmi_bits", "cmi_sem", "N")


def _num(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def summary_csv(summary: EnsembleSummary) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SUMMARY_SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in summary.rows:
        w.writerow([_num(getattr(row, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def read_summary_csv(text: str) -> EnsembleSummary:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = []
    for rec in csv.DictReader(lines):
        kw = {}
        for name in CSV_COLUMNS:
            v = rec[name]
            kw[name] = v if name in ("scenario", "backend") else int(v) if name in ("L", "L_A", "L_B", "L_C", "N") else float(v)
        rows.append(SummaryRow(**kw))
    return EnsembleSummary(rows)


def summary_json(summary: EnsembleSummary, fits: Sequence[ScalingFit] = (), extra: dict | None = None) -> str:
    doc = {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "rows": [asdict(r) for r in summary.rows],
        "fits": [dict(asdict(f), coefficients=list(f.coefficients)) for f in fits],
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def read_summary_json(text: str) -> tuple[EnsembleSummary, list[ScalingFit]]:
    doc = json.loads(text)
    rows = [SummaryRow(**r) for r in doc["rows"]]
    fits = [ScalingFit(f["model"], f["x"], tuple(f["coefficients"]), f["residual_sum"], f["r2"], f["n_points"])
            for f in doc.get("fits", [])]
    return EnsembleSummary(rows), fits


def write_records(records: Sequence[dict], path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_records(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def emit(summary: EnsembleSummary, fits: Sequence[ScalingFit], out_dir, formats=("csv", "json")) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        (out / "summary.csv").write_text(summary_csv(summary))
        written.append(out / "summary.csv")
    if "json" in formats:
        (out / "summary.json").write_text(summary_json(summary, fits))
        written.append(out / "summary.json")
    return written


def load_schema(name: str) -> dict:
    """Published JSON schema: ``"record"`` or ``"summary"``."""
    text = resources.files("petzlab.experiments").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)
