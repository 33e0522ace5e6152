import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import cmi_from_rho, fidelity, ghz, petz_recover
from petzlab.experiments.analysis import FitError, asymmetry_metric, eta_chord, eta_of, fit_scaling, fit_xy, summarize
from petzlab.experiments.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from petzlab.experiments.config import ConfigError, config_from_dict, expand_sweep, load_config
from petzlab.experiments.emit import (CSV_COLUMNS, emit, load_schema, read_records, read_summary_csv,
                                      read_summary_json, summary_csv, summary_json, write_records)
from petzlab.experiments.runner import NumericalGuardError, check_record, run_ensemble

T_GRID = [-2.0, -1.0, 0.0, 1.0, 2.0]


def make_record(F, cmi=1.0, traj=0, regions=(1, 2, 1), t_grid=T_GRID, scenario="mipt-clifford", backend="stabilizer"):
    return {
        "schema_version": 1, "scenario": scenario, "backend": backend, "seed": 0, "trajectory": traj,
        "L": 8, "p": 0.1, "ensemble": "clifford",
        "regions": {"L_A": regions[0], "L_B": regions[1], "L_C": regions[2], "start": 0},
        "cmi_bits": float(cmi), "t_grid": list(t_grid), "F_t": [float(f) for f in F], "wall_time": 0.0,
    }


def strip_wall(records):
    return [{k: v for k, v in r.items() if k != "wall_time"} for r in records]


# --- eta ------------------------------------------------------------------------------------


def test_eta_values():
    assert abs(eta_of(2, 8, 2) - 0.04) < 1e-15
    # chord convention reproduces the quoted 0.095 at L = 20
    assert abs(eta_chord(2, 8, 2, 20) - 0.095) < 1e-3
    assert eta_of(1, 10**6, 1) < 1e-11
    assert abs(eta_chord(2, 8, 2, 10**6) - 0.04) < 1e-9


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 40), st.integers(1, 40), st.integers(1, 40))
def test_eta_symmetry_and_range(a, b, c):
    assert eta_of(a, b, c) == eta_of(c, b, a)
    assert 0 < eta_of(a, b, c) < 1
    L = 2 * (a + b + c)
    assert abs(eta_chord(a, b, c, L) - eta_chord(c, b, a, L)) < 1e-15


def test_expand_sweep_window():
    out = expand_sweep({"L_A": [1, 2, 3], "L_B": [6, 8], "eta": "lengths", "eta_min": 0.02, "eta_max": 0.1}, 20)
    assert out and all(0.02 <= eta_of(*r) <= 0.1 for r in out)
    assert out == [(1, 6, 1), (2, 6, 2), (2, 8, 2), (3, 8, 3)]


# --- fits -------------------------------------------------------------------------------------


def test_fit_exact_linear():
    x = np.linspace(0.1, 2.0, 12)
    f = fit_xy(x, 0.37 * x, "linear-through-origin")
    assert abs(f.coefficients[0] - 0.37) < 1e-12 and f.residual_sum < 1e-24
    f = fit_xy(x, 0.37 * x - 0.2, "linear-affine")
    assert np.abs(np.array(f.coefficients) - [0.37, -0.2]).max() < 1e-12
    f = fit_xy(x, 1.5 * x**2, "quadratic-through-origin")
    assert abs(f.coefficients[0] - 1.5) < 1e-12 and abs(f.r2 - 1) < 1e-12
    with pytest.raises(FitError):
        fit_xy(x, x, "cubic")
    with pytest.raises(FitError):
        fit_xy([1.0], [1.0], "linear-affine")


def test_fit_stabilizer_ensemble_coefficient_half():
    cfg = config_from_dict({"scenario": "mipt-clifford", "backend": "stabilizer", "L": 16, "p": 0.16,
                            "regions": [[a, b, a] for a in (1, 2, 3, 4) for b in (2, 4, 6)],
                            "num_trajectories": 10, "master_seed": 4})
    summary = summarize(run_ensemble(cfg))
    fit = fit_scaling(summary, x="cmi", model="linear-through-origin")
    assert abs(fit.coefficients[0] - 0.5) < 1e-12
    best = fit_scaling(summary, x="cmi", t="best")
    assert abs(best.coefficients[0] - 0.5) < 1e-12


# --- summarize ----------------------------------------------------------------------------------


def test_summarize_constant_records():
    recs = [make_record([0.5] * 5, traj=k) for k in range(7)]
    rows = summarize(recs).rows
    assert len(rows) == 5
    assert all(r.sem == 0 and r.cmi_sem == 0 and r.N == 7 for r in rows)
    assert all(abs(r.mean_neg_log2_F - 1) < 1e-15 and abs(r.neg_log2_mean_F - 1) < 1e-15 for r in rows)


def test_summarize_ghz_ensemble():
    # GHZ on three qubits: F = 2^{-1/2} from the dense oracle at every t
    rho = np.outer(ghz(3), ghz(3).conj())
    F = [fidelity(petz_recover(rho, 2, 2, 2, t), rho) for t in T_GRID]
    cmi = cmi_from_rho(rho, [0], [1], [2], 3)
    rows = summarize([make_record(F, cmi=cmi, traj=k) for k in range(5)]).rows
    assert all(abs(r.mean_neg_log2_F - 0.5) < 1e-9 and abs(r.mean_cmi_bits - 1) < 1e-12 for r in rows)


def test_summarize_sem_halves():
    rng = np.random.default_rng(0)
    base = rng.uniform(0.3, 0.9, size=25)
    small = [make_record([f] * 5, traj=k) for k, f in enumerate(base)]
    # four exact copies: same sample std (up to ddof), 4x the N
    big = [make_record([f] * 5, traj=k) for k, f in enumerate(np.tile(base, 4))]
    s1, s4 = summarize(small).rows[0], summarize(big).rows[0]
    ddof_fix = np.sqrt((100 - 1) / 100 * 25 / (25 - 1))
    assert abs(s4.sem * 2 * ddof_fix - s1.sem) < 1e-12


def test_summarize_rejects_mixed_grids():
    with pytest.raises(ValueError):
        summarize([make_record([0.5] * 5), make_record([0.5] * 3, t_grid=[-1.0, 0.0, 1.0], traj=1)])


# --- asymmetry --------------------------------------------------------------------------------------


def test_asymmetry_stabilizer_exact_zero():
    cfg = config_from_dict({"scenario": "mipt-clifford", "backend": "stabilizer", "L": 12, "p": 0.1,
                            "random_regions": 5, "num_trajectories": 6, "t_grid": T_GRID})
    a = asymmetry_metric(run_ensemble(cfg))
    assert a.delta == 0.0 and a.n == 6


def test_asymmetry_ising_and_chiral():
    base = {"backend": "gaussian", "L": 64, "regions": [[4, 16, 4], [6, 20, 6]], "t_grid": [-4, -2, 0, 2, 4]}
    ising = asymmetry_metric(run_ensemble(config_from_dict({**base, "scenario": "ising-ground"})))
    chiral = asymmetry_metric(run_ensemble(config_from_dict({**base, "scenario": "chiral", "beta_R": 8.0})))
    # single pure state: SEM is zero, so the classifications reduce to |delta| ~ 0 and delta > 0
    assert abs(ising.delta) < 1e-8
    assert chiral.delta > 1e-3


def test_asymmetry_sign_convention():
    a = asymmetry_metric([make_record([0.5, 0.6, 0.9, 0.95, 0.97])])
    assert a.delta > 0
    with pytest.raises(ValueError):
        asymmetry_metric([make_record([0.5, 0.6], t_grid=[0.0, 1.0])])


# --- config validation ------------------------------------------------------------------------------


@pytest.mark.parametrize("raw", [
    {"scenario": "mipt-haar", "backend": "gaussian", "L": 8, "regions": [[1, 2, 1]]},
    {"scenario": "nope", "backend": "dense", "L": 8, "regions": [[1, 2, 1]]},
    {"scenario": "mipt-haar", "backend": "dense", "L": 8, "p": 1.5, "regions": [[1, 2, 1]]},
    {"scenario": "mipt-haar", "backend": "dense", "L": 8, "num_trajectories": 0, "regions": [[1, 2, 1]]},
    {"scenario": "mipt-haar", "backend": "dense", "L": 8, "regions": [[4, 4, 4]]},
    {"scenario": "mipt-haar", "backend": "dense", "L": 8},
    {"scenario": "chiral", "backend": "gaussian", "L": 16, "regions": [[1, 2, 1]]},
    {"scenario": "mipt-haar", "backend": "dense", "L": 8, "regions": [[1, 2, 1]], "bogus": 1},
    {"scenario": "mipt-haar", "backend": "dense", "L": 8, "regions": [[1, 2, 1]], "version": 2},
    {"scenario": "mipt-haar", "backend": "dense", "regions": [[1, 2, 1]]},
])
def test_config_errors(raw):
    with pytest.raises(ConfigError):
        config_from_dict(raw)


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"scenario": "ising-ground", "backend": "gaussian", "L": 32,
                                "region_sweep": {"L_A": [2, 3], "L_B": [6, 8]},
                                "t_grid": {"start": -2, "stop": 2, "num": 5}}))
    cfg = load_config(path, master_seed=7, threads=None)
    assert cfg.master_seed == 7 and cfg.threads == 1 and len(cfg.regions) == 4
    assert cfg.t_grid == (-2.0, -1.0, 0.0, 1.0, 2.0)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    with pytest.raises(ConfigError):
        load_config(path, threads=0)


# --- runner: determinism, schema, guards ----------------------------------------------------------------


def test_run_deterministic_and_thread_independent():
    raw = {"scenario": "mipt-haar", "backend": "dense", "L": 8, "p": 0.2, "regions": [[1, 2, 1], [2, 2, 2]],
           "num_trajectories": 3, "master_seed": 11, "t_grid": T_GRID}
    a = run_ensemble(config_from_dict(raw))
    b = run_ensemble(config_from_dict(raw))
    c = run_ensemble(config_from_dict({**raw, "threads": 2}))
    assert strip_wall(a) == strip_wall(b) == strip_wall(c)
    d = run_ensemble(config_from_dict({**raw, "master_seed": 12}))
    assert strip_wall(a) != strip_wall(d)
    # a trajectory does not depend on which others are run
    assert strip_wall(run_ensemble(config_from_dict(raw), indices=[2])) == strip_wall(a[4:])


def test_records_validate_against_schema():
    schema = load_schema("record")
    for raw in ({"scenario": "mipt-clifford", "backend": "stabilizer", "L": 8, "random_regions": 3},
                {"scenario": "mipt-u1", "backend": "dense", "L": 6, "p": 0.1, "regions": [[1, 2, 1]]},
                {"scenario": "ising-measured", "backend": "gaussian", "L": 16, "p": 0.2, "regions": [[2, 4, 2]]},
                {"scenario": "toric-tee", "backend": "stabilizer", "L": 4}):
        for rec in run_ensemble(config_from_dict({**raw, "num_trajectories": 2})):
            jsonschema.validate(rec, schema)
    bad = make_record([0.5] * 5)
    bad["F_t"][0] = 1.5
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, schema)


def test_toric_record():
    rec, = run_ensemble(config_from_dict({"scenario": "toric-tee", "backend": "stabilizer", "L": 4}))
    assert rec["cmi_bits"] == 2 and set(rec["F_t"]) == {0.5}


def test_numerical_guard():
    check_record(make_record([1.0, 0.5, 0.0, 0.5, 1.0]))
    for F, cmi in (([np.nan] * 5, 1.0), ([0.5] * 5, np.nan), ([1.1] * 5, 1.0), ([0.5] * 5, -0.1)):
        with pytest.raises(NumericalGuardError):
            check_record(make_record(F, cmi=cmi))


def test_stabilizer_dense_backend_consistency():
    raw = {"scenario": "mipt-clifford", "L": 8, "p": 0.15, "regions": [[1, 2, 1], [2, 3, 2], [1, 1, 3]],
           "start": 3, "num_trajectories": 4, "master_seed": 5, "t_grid": T_GRID}
    stab = run_ensemble(config_from_dict({**raw, "backend": "stabilizer"}))
    dense = run_ensemble(config_from_dict({**raw, "backend": "dense"}))
    assert len(stab) == len(dense) == 12
    for s, d in zip(stab, dense):
        assert s["regions"] == d["regions"]
        assert abs(s["cmi_bits"] - d["cmi_bits"]) < 1e-7
        assert np.abs(np.array(s["F_t"]) - d["F_t"]).max() < 1e-7


# --- emit and round trips -------------------------------------------------------------------------------


def small_summary():
    cfg = config_from_dict({"scenario": "ising-measured", "backend": "gaussian", "L": 24, "p": 0.2,
                            "regions": [[2, 6, 2], [3, 6, 3], [2, 8, 2]], "num_trajectories": 4, "t_grid": T_GRID})
    return run_ensemble(cfg)


def test_emit_roundtrip_and_schema(tmp_path):
    records = small_summary()
    summary = summarize(records)
    fits = [fit_scaling(summary, x="eta_chord", model="quadratic-through-origin")]
    text = summary_csv(summary)
    assert text.splitlines()[0] == "# schema_version=1"
    assert tuple(text.splitlines()[1].split(",")) == CSV_COLUMNS
    back = read_summary_csv(text)
    for a, b in zip(summary.rows, back.rows):
        for col in CSV_COLUMNS:
            assert getattr(a, col) == getattr(b, col)
    js = summary_json(summary, fits)
    jsonschema.validate(json.loads(js), load_schema("summary"))
    s2, f2 = read_summary_json(js)
    assert s2.rows == summary.rows and f2 == fits
    paths = emit(summary, fits, tmp_path)
    assert sorted(p.name for p in paths) == ["summary.csv", "summary.json"]
    write_records(records, tmp_path / "r.jsonl")
    assert read_records(tmp_path / "r.jsonl") == records


def test_emit_bytes_deterministic(tmp_path):
    records = small_summary()
    for d in ("a", "b"):
        summary = summarize(records)
        emit(summary, [fit_scaling(summary)], tmp_path / d)
    for name in ("summary.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


# --- CLI ------------------------------------------------------------------------------------------------


def test_cli_end_to_end(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "mipt-clifford", "backend": "stabilizer", "L": 12, "p": 0.1,
                               "random_regions": 4, "num_trajectories": 3, "t_grid": T_GRID}))
    runs = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        assert main(["run", str(cfg), "--seed", "3", "--out", str(out)]) == EXIT_OK
        runs.append(out)
    for name in ("summary.csv", "summary.json"):
        assert (runs[0] / name).read_bytes() == (runs[1] / name).read_bytes()
    assert strip_wall(read_records(runs[0] / "records.jsonl")) == strip_wall(read_records(runs[1] / "records.jsonl"))
    capsys.readouterr()
    assert main(["fit", str(runs[0] / "records.jsonl"), "--x", "cmi"]) == EXIT_OK
    fit = json.loads(capsys.readouterr().out)
    assert abs(fit["coefficients"][0] - 0.5) < 1e-12
    assert main(["fit", str(runs[0] / "summary.json"), "--t", "best"]) == EXIT_OK
    assert main(["summarize", str(runs[0] / "records.jsonl"), "--out", str(tmp_path / "s")]) == EXIT_OK
    assert (tmp_path / "s" / "summary.json").read_bytes() == (runs[0] / "summary.json").read_bytes()
    assert main(["report", str(runs[0] / "records.jsonl")]) == EXIT_OK
    assert "asymmetry delta 0" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario": "mipt-haar", "backend": "gaussian", "L": 8, "regions": [[1, 2, 1]]}))
    assert main(["run", str(bad)]) == EXIT_CONFIG
    assert main(["run", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert main(["summarize", str(tmp_path / "missing.jsonl")]) == EXIT_CONFIG
    nan = tmp_path / "nan.jsonl"
    write_records([make_record([np.nan] * 5)], nan)
    assert main(["report", str(nan)]) == EXIT_NUMERIC
