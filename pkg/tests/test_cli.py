"""Command-line interface: subcommands, exit codes, CSV and manifest output."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from genseries import load_spec, parse_dump
from genseries.cli import main

SPECS = Path(__file__).resolve().parent.parent / "specs"
DUFFING = str(SPECS / "duffing.spec")
LINEAR = str(SPECS / "linear.spec")


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- expand ------------------------------------------------------------------


def test_expand_order1_prints_counts_and_arrays(capsys):
    code, out, _ = run(capsys, "expand", DUFFING, "--order", "1")
    assert code == 0
    assert "# g0: raw 1 merged 1" in out
    assert "# g1: raw 7 merged 7" in out
    assert "-4*e1" in out and "-36*e2" in out


def test_expand_order2_reports_listing_convention(capsys):
    code, out, _ = run(capsys, "expand", DUFFING, "--order", "2")
    assert code == 0
    assert "# g2: raw 941 merged 331 listed 360" in out
    assert "quadratic-bracket products kept per source term" in out


def test_expand_dump_round_trips(capsys):
    code, out, _ = run(capsys, "expand", DUFFING, "--order", "1", "--format",
                       "dump")
    assert code == 0
    rows = parse_dump(out)
    assert len(rows) == 8  # one seed term plus seven first-order terms
    assert {order for order, _ in rows} == {0, 1}


def test_expand_writes_file_and_manifest(capsys, tmp_path):
    target = tmp_path / "series.txt"
    code, out, _ = run(capsys, "expand", DUFFING, "--order", "1", "-o",
                       str(target))
    assert code == 0
    assert target.exists()
    manifest = json.loads((tmp_path / "series.txt.manifest.json").read_text())
    assert manifest["command"] == "expand"
    assert manifest["input_spec"] == DUFFING
    assert str(target) in manifest["outputs"]
    assert manifest["tool_version"]


# -- mean-response and moment ------------------------------------------------


def test_mean_response_stdout(capsys):
    code, out, _ = run(capsys, "mean-response", DUFFING, "--order", "1",
                       "--dt", "0.1", "--t-end", "2.0")
    assert code == 0
    assert "# order 1:" in out
    assert "surviving expectation terms: order 1 index 1/7" in out
    header = next(l for l in out.splitlines() if l.startswith("t,"))
    assert header == "t,mean,order0,order1"


def test_mean_response_csv_numbers(capsys, tmp_path):
    target = tmp_path / "mean.csv"
    code, _, _ = run(capsys, "mean-response", DUFFING, "--order", "2",
                     "--dt", "0.05", "--t-end", "5.0", "-o", str(target))
    assert code == 0
    data = np.genfromtxt(target, delimiter=",", names=True)
    assert data["t"][0] == 0.0
    assert data["t"][-1] == pytest.approx(5.0)
    # totals are the row sums of the per-order columns
    total = data["order0"] + data["order1"] + data["order2"]
    assert np.allclose(total, data["mean"], atol=1e-12)
    # CSV numbers agree with the closed form evaluated directly
    from genseries import NoiseSpec, mean_response_detail

    detail = mean_response_detail(
        load_spec(DUFFING).spec, NoiseSpec(Fraction(1, 10)), max_order=2
    )
    assert data["mean"][-1] == pytest.approx(detail.total().at(5.0), abs=1e-9)
    assert (tmp_path / "mean.csv.manifest.json").exists()


def test_moment_header_names_power(capsys):
    code, out, _ = run(capsys, "moment", DUFFING, "--power", "2", "--order",
                       "1", "--dt", "0.1", "--t-end", "1.0")
    assert code == 0
    header = next(l for l in out.splitlines() if l.startswith("t,"))
    assert header == "t,y2,order0,order1"


def test_moment_zero_noise_is_flat_zero(capsys):
    code, out, _ = run(capsys, "moment", DUFFING, "--sigma2", "0", "--order",
                       "1", "--dt", "0.5", "--t-end", "1.0")
    assert code == 0
    rows = [l for l in out.splitlines() if l and l[0].isdigit()]
    for row in rows:
        values = [float(v) for v in row.split(",")[1:]]
        assert all(v == 0.0 for v in values)


# -- respond -----------------------------------------------------------------


@pytest.fixture()
def step_signal(tmp_path) -> str:
    path = tmp_path / "input.csv"
    ts = np.arange(0.0, 4.0 + 1e-9, 0.002)
    lines = ["t,x"] + [f"{t:.6f},{0.05}" for t in ts]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def test_respond_tracks_ode(capsys, tmp_path, step_signal):
    target = tmp_path / "resp.csv"
    code, _, _ = run(capsys, "respond", DUFFING, step_signal, "-o", str(target))
    assert code == 0
    data = np.genfromtxt(target, delimiter=",", names=True)
    assert list(data.dtype.names) == ["t", "series", "ode"]
    assert float(np.max(np.abs(data["series"] - data["ode"]))) < 2e-4


def test_respond_rejects_deep_quadrature(capsys, step_signal):
    code, _, err = run(capsys, "respond", DUFFING, step_signal, "--order", "2")
    assert code == 1
    assert "depth" in err


def test_respond_rejects_nonuniform_grid(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,x\n0.0,1.0\n0.1,1.0\n0.3,1.0\n")
    code, _, err = run(capsys, "respond", DUFFING, str(path))
    assert code == 1
    assert "uniform" in err


# -- diagrams ----------------------------------------------------------------


def test_diagrams_writes_dot_files(capsys, tmp_path):
    code, out, _ = run(capsys, "diagrams", "--order", "2,1", "--out-dir",
                       str(tmp_path))
    assert code == 0
    dots = sorted(tmp_path.glob("Y2_1*.dot"))
    assert len(dots) == 5
    assert "multiplicity" in out
    for mult in ("2", "3", "4", "6"):
        assert mult in out
    text = dots[0].read_text()
    assert text.startswith("graph")
    assert (tmp_path / "Y2_1.manifest.json").exists()


def test_diagrams_order_zero_is_empty(capsys, tmp_path):
    code, out, _ = run(capsys, "diagrams", "--order", "0,0", "--out-dir",
                       str(tmp_path))
    assert code == 0
    assert "0 terms" in out
    assert list(tmp_path.glob("*.dot")) == []


# -- validate ----------------------------------------------------------------


def test_validate_linear_spec_passes_quickly(capsys):
    code, out, _ = run(capsys, "validate", LINEAR, "--paths", "2000",
                       "--times", "10", "--t-end", "3.0", "--dt", "0.005")
    assert code == 0
    assert "PASS factorization" in out
    assert "PASS fixed-point-residual" in out
    assert "PASS linear-response" in out
    assert "PASS monte-carlo" in out
    summary = json.loads(out.splitlines()[-1])
    assert summary["passed"] is True
    assert summary["checks"]["monte-carlo"] is True
    assert summary["metrics"]["monte-carlo"]["paths"] == 2000


def test_validate_duffing_first_order(capsys):
    code, out, _ = run(capsys, "validate", DUFFING, "--order", "1", "--paths",
                       "2000", "--times", "10", "--t-end", "3.0", "--dt",
                       "0.005", "--word-length", "6")
    assert code == 0
    assert "PASS oracle-triangle" in out
    summary = json.loads(out.splitlines()[-1])
    assert summary["metrics"]["oracle-triangle"]["expected"] == pytest.approx(2.0)


def test_validate_reports_failure_with_exit_two(capsys, monkeypatch):
    import genseries.cli as cli_mod
    from genseries.checks import ConsistencyReport

    def fake_mc(spec, sigma_squared, order=2, cfg=None, n_times=50,
                threshold=3.0):
        times = np.linspace(0.0, 1.0, n_times)
        zeros = np.zeros(n_times)
        return ConsistencyReport(
            times=times, symbolic=zeros, ensemble_mean=zeros + 1.0,
            standard_error=zeros + 0.1, z_scores=zeros + 10.0,
            threshold=threshold, diverged=0, ensemble_size=7,
        )

    monkeypatch.setattr(cli_mod, "mc_consistency", fake_mc)
    code, out, _ = run(capsys, "validate", LINEAR, "--paths", "7", "--times",
                       "5", "--t-end", "1.0", "--dt", "0.01")
    assert code == 2
    assert "FAIL monte-carlo" in out
    summary = json.loads(out.splitlines()[-1])
    assert summary["passed"] is False


# -- exit codes and plumbing -------------------------------------------------


def test_usage_error_is_exit_one(capsys):
    code, _, err = run(capsys, "expand", DUFFING, "--order", "notanumber")
    assert code == 1
    assert err


def test_unknown_command_is_exit_one(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == 1


def test_missing_spec_file_is_exit_one(capsys, tmp_path):
    code, _, err = run(capsys, "expand", str(tmp_path / "nope.spec"))
    assert code == 1
    assert err


def test_budget_flag_exit_three(capsys):
    code, _, err = run(capsys, "expand", DUFFING, "--order", "2", "--budget",
                       "50")
    assert code == 3
    assert "budget" in err.lower()


def test_budget_env_var(capsys, monkeypatch):
    monkeypatch.setenv("GENSERIES_TERM_BUDGET", "50")
    code, _, _ = run(capsys, "expand", DUFFING, "--order", "2")
    assert code == 3
    # an explicit flag wins over the environment
    code, _, _ = run(capsys, "expand", DUFFING, "--order", "2", "--budget",
                     "100000")
    assert code == 0


def test_invalid_budget_env_var_is_usage_error(capsys, monkeypatch):
    monkeypatch.setenv("GENSERIES_TERM_BUDGET", "many")
    code, _, err = run(capsys, "expand", DUFFING, "--order", "1")
    assert code == 1
    assert "GENSERIES_TERM_BUDGET" in err


def test_version_flag(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0
    assert out.strip()
