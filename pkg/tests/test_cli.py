"""End-to-end workflows and the command-line interface."""

import numpy as np
import pytest

from jamgame import SweepSpec, parse_scenario, register_payoff_kind
from jamgame.cli import main
from jamgame.errors import UnsupportedOperationError
from jamgame.runner import run_check, run_oracle_and_simulate, run_solve, run_sweep

from conftest import S1_TAU_HI, S1_TAU_LO, S1_U_STAR, S1_YAML, S1_J


@pytest.fixture
def s1_path(tmp_path):
    path = tmp_path / "s1.yaml"
    path.write_text(S1_YAML, encoding="utf-8")
    return path


def _csv_rows(text):
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


# --- runner workflows ------------------------------------------------------------

def test_run_solve_s1_report_fields():
    out = run_solve(parse_scenario(S1_YAML))
    assert out.report.kind == "nontrivial-mixed"
    assert out.z == pytest.approx(0.5)
    assert out.region == "inside"
    text = out.text()
    assert "kind: nontrivial-mixed" in text
    assert "u_star:" in text and "p_star:" in text and "z:" in text
    row = _csv_rows(out.csv())[0]
    assert row["kind"] == "nontrivial-mixed"
    assert float(row["u_star"]) == pytest.approx(S1_U_STAR, abs=1e-9)
    assert float(row["J"]) == pytest.approx(S1_J, abs=1e-9)


def test_run_solve_trivial_kinds():
    stay = run_solve(parse_scenario(S1_YAML.replace("tau: 1.6", "tau: 3.0")))
    assert stay.report.kind == "trivial-stay" and stay.region == "above"
    block = run_solve(parse_scenario(S1_YAML.replace("tau: 1.6", "tau: 0.4")))
    assert block.report.kind == "trivial-blocking" and block.region == "below"


def test_csv_byte_stable():
    a = run_solve(parse_scenario(S1_YAML)).csv()
    b = run_solve(parse_scenario(S1_YAML)).csv()
    assert a == b
    sweep = SweepSpec("tau", 0.5, 2.5, 7)
    c = run_sweep(parse_scenario(S1_YAML), sweep).csv()
    d = run_sweep(parse_scenario(S1_YAML), sweep).csv()
    assert c == d


def test_sweep_tau_recovers_region_boundaries():
    rows = run_sweep(parse_scenario(S1_YAML), SweepSpec("tau", 0.1, 3.0, 30)).rows
    step = (3.0 - 0.1) / 29
    flips = [(a.parameter + b.parameter) / 2
             for a, b in zip(rows, rows[1:])
             if (a.kind == "nontrivial-mixed") != (b.kind == "nontrivial-mixed")]
    assert len(flips) == 2
    assert abs(flips[0] - S1_TAU_LO) <= step
    assert abs(flips[1] - S1_TAU_HI) <= step
    assert all(r.oracle_gap <= 2e-3 for r in rows)


def test_sweep_state_scale_follows_z_scaling():
    # z at scale lam is z1 / lam^2, so the inside window in lam is
    # (sqrt(z1/hi), sqrt(z1/lo)); labels along the sweep must agree.
    sf = parse_scenario(S1_YAML)
    rows = run_sweep(sf, SweepSpec("state-scale", 0.5, 2.5, 41)).rows
    z1 = 0.5
    lam_lo = np.sqrt(z1 / 0.7229916897506925)
    lam_hi = np.sqrt(z1 / 0.17355371900826455)
    step = (2.5 - 0.5) / 40
    for r in rows:
        want = lam_lo < r.parameter < lam_hi
        got = r.kind == "nontrivial-mixed"
        if want != got:
            assert min(abs(r.parameter - lam_lo), abs(r.parameter - lam_hi)) <= step
        assert r.z == pytest.approx(z1 / r.parameter**2, rel=1e-12)


def test_single_point_sweep_matches_solve():
    sf = parse_scenario(S1_YAML)
    row = run_sweep(sf, SweepSpec("tau", 1.6, 1.6, 1)).rows[0]
    solo = run_solve(sf)
    assert row.kind == solo.report.kind
    assert row.u_star == pytest.approx(solo.report.u_star, abs=1e-12)
    assert row.J == pytest.approx(solo.report.value, abs=1e-12)
    assert row.p_tilde_1 == pytest.approx(float(solo.report.p_tilde[0]), abs=1e-12)
    assert row.z == pytest.approx(solo.z, abs=1e-15)


def test_sweep_requires_lq_kind():
    register_payoff_kind("opaque-test", lambda sf: (_ for _ in ()).throw(RuntimeError))
    sf = parse_scenario(S1_YAML.replace("kind: lq", "kind: opaque-test"))
    with pytest.raises(UnsupportedOperationError):
        run_sweep(sf, SweepSpec("tau", 0.1, 1.0, 3))


def test_oracle_and_simulate_verdict():
    sf = parse_scenario(S1_YAML)
    out = run_oracle_and_simulate(sf)
    assert out.verdict and out.exit_code == 0
    assert abs(out.solve.report.value - out.oracle.j1_hat) <= 1e-3
    assert out.oracle.gap <= 1e-3
    assert abs(out.mc.mean - out.solve.report.value) <= out.mc.half_width
    assert out.saddle.passed


def test_oracle_perturbed_control_fails_controller_side():
    out = run_oracle_and_simulate(parse_scenario(S1_YAML), perturb_u=0.1)
    assert not out.saddle.passed
    assert out.saddle.controller_violation > 1e-4
    assert not out.verdict and out.exit_code == 4


def test_simulate_tiny_trials_wide_interval():
    sf = parse_scenario(S1_YAML.replace("trials: 200000", "trials: 10"))
    out = run_oracle_and_simulate(sf)
    assert out.mc.half_width > 0.1
    assert out.mc_contains  # wide interval still covers the value


def test_run_check_reports_assumptions():
    out = run_check(parse_scenario(S1_YAML))
    assert out.passed and out.exit_code == 0
    assert out.coercive and out.connected and out.ranking_ok
    assert out.derivative_error <= 1e-6
    assert out.interval_source == "closed-form"


def test_run_check_catches_noncoercive_kind():
    from jamgame import ChannelSet, GameInstance, LinkState

    def build_runaway(sf):
        return GameInstance(dynamics=lambda x, v: x,
                            payoff=lambda y, u, j: -u * u,
                            channels=ChannelSet.constant(sf.q),
                            link=LinkState(sf.j_minus, sf.c_minus),
                            x=sf.x)

    register_payoff_kind("runaway-test", build_runaway)
    out = run_check(parse_scenario(S1_YAML.replace("kind: lq", "kind: runaway-test")))
    assert not out.passed and out.exit_code == 3
    assert not out.coercive


# --- command line ----------------------------------------------------------------

def test_cli_solve_stdout(s1_path, capsys):
    code = main(["solve", "--scenario", str(s1_path)])
    captured = capsys.readouterr()
    assert code == 0
    assert "kind: nontrivial-mixed" in captured.out


def test_cli_solve_writes_files_and_figure(s1_path, tmp_path, capsys):
    out = tmp_path / "reports" / "s1"
    code = main(["solve", "--scenario", str(s1_path), "--out", str(out)])
    assert code == 0
    assert (out.with_suffix(".txt")).exists()
    assert (out.with_suffix(".csv")).exists()
    png = out.with_suffix(".png")
    assert png.exists() and png.stat().st_size > 1000


def test_cli_no_plot(s1_path, tmp_path):
    out = tmp_path / "s1"
    assert main(["solve", "--scenario", str(s1_path), "--out", str(out), "--no-plot"]) == 0
    assert not out.with_suffix(".png").exists()


def test_cli_out_dir_env(s1_path, tmp_path, monkeypatch):
    base = tmp_path / "envout"
    monkeypatch.setenv("JAMGAME_OUT_DIR", str(base))
    assert main(["solve", "--scenario", str(s1_path), "--out", "run1", "--no-plot"]) == 0
    assert (base / "run1.csv").exists()


def test_cli_sweep_with_figure(s1_path, tmp_path, capsys):
    out = tmp_path / "sweep"
    code = main(["sweep", "--scenario", str(s1_path), "--out", str(out),
                 "--sweep-param", "tau", "--sweep-range", "0.2", "2.8",
                 "--sweep-points", "12"])
    assert code == 0
    rows = _csv_rows(out.with_suffix(".csv").read_text())
    assert len(rows) == 12
    assert float(rows[0]["parameter"]) == 0.2
    assert [*rows[0].keys()] == ["parameter", "z", "region", "kind", "u_star",
                                 "p_tilde_1", "J", "oracle_gap"]
    assert out.with_suffix(".png").exists()


def test_cli_oracle_and_simulate(s1_path, capsys):
    assert main(["oracle", "--scenario", str(s1_path)]) == 0
    assert "verdict: pass" in capsys.readouterr().out
    assert main(["oracle", "--scenario", str(s1_path), "--perturb-u", "0.1"]) == 4
    assert main(["simulate", "--scenario", str(s1_path),
                 "--trials", "20000", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "monte carlo" in out and "20000 trials, seed 3" in out


def test_cli_check(s1_path, capsys):
    assert main(["check", "--scenario", str(s1_path)]) == 0
    assert "assumptions: pass" in capsys.readouterr().out


def test_cli_invalid_scenario_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text(S1_YAML.replace("q: [0.1, 0.9]", "q: [0.9, 0.1]"), encoding="utf-8")
    assert main(["solve", "--scenario", str(bad)]) == 2
    assert "strictly increasing" in capsys.readouterr().err


def test_cli_missing_file_exit_code(tmp_path):
    assert main(["solve", "--scenario", str(tmp_path / "nope.yaml")]) == 2


def test_cli_grid_overrides(s1_path, tmp_path):
    out = tmp_path / "o"
    code = main(["oracle", "--scenario", str(s1_path), "--out", str(out),
                 "--u-grid", "501", "--p-grid", "301", "--trials", "5000"])
    assert code == 0
    row = _csv_rows(out.with_suffix(".csv").read_text())[0]
    assert row["verdict"] == "true"
