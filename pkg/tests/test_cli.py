import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from lzlab.cli import cli, fig1_data, fig2_data, fig3_data, fig4_data
from lzlab import make_params

FAST = ["--window", "-6", "6", "--step", "1e-3"]


@pytest.fixture()
def runner():
    return CliRunner()


def read_csv(path: Path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, data


def test_simulate_default_grid_contract(runner, tmp_path):
    result = runner.invoke(
        cli, ["simulate", "--epsilon", "4", "--window", "-20", "20", "--out", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    header, data = read_csv(tmp_path / "trajectory.csv")
    assert header == ["tau", "re_a", "im_a", "re_b", "im_b", "abs_a", "abs_b", "norm_defect"]
    assert data.shape[0] == 40001
    assert data[:, 7].max() <= 1e-8
    # final |a| sits inside the Stueckelberg envelope of the asymptotic value
    assert abs(data[-1, 5] - 0.6752) < 0.02
    manifest = json.loads((tmp_path / "simulate_manifest.json").read_text())
    assert manifest["command"] == "simulate"
    for entry in manifest["outputs"]:
        assert (tmp_path / entry["path"]).exists()
    assert manifest["wall_time"] > 0


def test_simulate_17_digit_serialization(runner, tmp_path):
    result = runner.invoke(cli, ["simulate", "--epsilon", "4", *FAST, "--out", str(tmp_path)])
    assert result.exit_code == 0
    lines = (tmp_path / "trajectory.csv").read_text().strip().split("\n")
    # 17 significant digits: every serialized double round-trips exactly
    for token in lines[2].split(","):
        assert f"{float(token):.17g}" == token
    mantissas = [t.replace("-", "").replace(".", "").split("e")[0].lstrip("0")
                 for t in lines[2].split(",")]
    assert max(len(m) for m in mantissas) >= 16


def test_simulate_determinism(runner, tmp_path):
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    for d in (a_dir, b_dir):
        result = runner.invoke(cli, ["simulate", "--epsilon", "4", *FAST, "--out", str(d)])
        assert result.exit_code == 0
    assert (a_dir / "trajectory.csv").read_bytes() == (b_dir / "trajectory.csv").read_bytes()


def test_out_env_override(runner, tmp_path):
    env_dir = tmp_path / "env_target"
    result = runner.invoke(
        cli,
        ["simulate", "--epsilon", "4", *FAST, "--out", str(tmp_path / "ignored")],
        env={"LZLAB_OUT": str(env_dir)},
    )
    assert result.exit_code == 0
    assert (env_dir / "trajectory.csv").exists()
    assert not (tmp_path / "ignored" / "trajectory.csv").exists()


def test_no_temp_residue(runner, tmp_path):
    runner.invoke(cli, ["simulate", "--epsilon", "4", *FAST, "--out", str(tmp_path)])
    assert not list(tmp_path.glob("*.tmp-*"))


def test_json_format(runner, tmp_path):
    result = runner.invoke(
        cli, ["simulate", "--epsilon", "4", *FAST, "--format", "json", "--out", str(tmp_path)]
    )
    assert result.exit_code == 0
    payload = json.loads((tmp_path / "trajectory.json").read_text())
    assert "abs_a" in payload and len(payload["tau"]) == 12001


def test_config_file_with_flag_override(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"epsilon": 2.0, "tau_min": -6.0, "tau_max": 6.0, "step": 0.01}')
    result = runner.invoke(
        cli, ["simulate", "--config", str(cfg), "--epsilon", "4", "--out", str(tmp_path)]
    )
    assert result.exit_code == 0
    manifest = json.loads((tmp_path / "simulate_manifest.json").read_text())
    assert manifest["params"]["epsilon"] == 4.0
    assert manifest["params"]["tau_min"] == -6.0


def test_alpha_omega_flags(runner, tmp_path):
    result = runner.invoke(
        cli,
        ["simulate", "--alpha", "0.25", "--omega", "0.25", *FAST, "--out", str(tmp_path)],
    )
    assert result.exit_code == 0
    manifest = json.loads((tmp_path / "simulate_manifest.json").read_text())
    assert manifest["params"]["epsilon"] == {"alpha": 0.25, "omega": 0.25}


def test_config_error_exit_code(runner, tmp_path):
    result = runner.invoke(cli, ["simulate", "--epsilon", "-1", *FAST, "--out", str(tmp_path)])
    assert result.exit_code == 2
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"epsilon": 1.0, "bogus": 3}')
    result = runner.invoke(cli, ["simulate", "--config", str(cfg), "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert "unknown" in result.output


def test_markov_command_summary(runner, tmp_path):
    result = runner.invoke(
        cli,
        ["markov", "--epsilon", "4", "--window", "-60", "60", "--step", "1e-3",
         "--out", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    header, data = read_csv(tmp_path / "markov.csv")
    assert header == ["tau", "re_eta", "im_eta", "A_M", "phi_M"]
    summary = json.loads((tmp_path / "markov_summary.json").read_text())
    assert summary["lz_integral"] == pytest.approx(np.pi / 8, rel=1e-10)
    assert summary["lz_formula"] == pytest.approx(0.6752319066557773, rel=1e-12)
    assert summary["A_M_endpoint"] == pytest.approx(summary["lz_formula"], abs=2e-3)
    # eta at tau = 0: half the full-line integral, component pi/(4 eps)**0.5 each
    i0 = np.argmin(np.abs(data[:, 0]))
    expected = 0.5 * np.sqrt(np.pi / 4.0) / np.sqrt(2.0)
    assert data[i0, 1] == pytest.approx(expected, abs=1e-12)
    assert data[i0, 2] == pytest.approx(expected, abs=1e-12)


def test_figures_commands(runner, tmp_path):
    for which in ("fig1", "fig2", "fig3", "fig4"):
        out = tmp_path / which
        result = runner.invoke(
            cli, ["figures", which, "--epsilon", "4", *FAST, "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert (out / f"{which}.csv").exists()
        assert (out / f"figures-{which}_manifest.json").exists()


def test_fig1_geometry():
    p = make_params(4.0, tau_min=-20, tau_max=20, step=1e-3)
    header, cols = fig1_data(p)
    assert header[:3] == ["tau", "re_a", "im_a"]
    re_a, im_a = cols[1], cols[2]
    assert abs(re_a[-1]) < 0.75 and abs(re_a[-1]) > 0.6
    assert abs(im_a[-1]) < 0.05
    # the elementary branches are masked out near the origin and finite at
    # the window edges
    re_asym = cols[5]
    i0 = len(re_asym) // 2
    assert np.isnan(re_asym[i0])
    assert np.isfinite(re_asym[0]) and np.isfinite(re_asym[-1])
    assert abs(re_asym[0] - re_a[0]) < 1e-3


def test_fig2_marker_row():
    p = make_params(4.0, tau_min=-6, tau_max=6, step=1e-3)
    header, cols = fig2_data(p)
    assert header == ["tau", "phi_dot", "minus_eps_tau", "phi_ddot", "is_tau0"]
    flags = cols[4]
    assert flags.sum() == 1.0
    i = int(np.argmax(flags))
    assert abs(cols[3][i]) <= 0.05 * (2 * 4.0 / 3.0)
    assert cols[1][i] == pytest.approx(cols[2][i], abs=1e-9)


def test_fig3_sine_zero_crossings():
    p = make_params(4.0, tau_min=-6, tau_max=6, step=1e-3)
    header, cols = fig3_data(p)
    tau, sine = cols[0], cols[2]
    # roots of sin(pi/4 - eps tau^2) sit at eps tau^2 = pi/4 + k pi
    for k in range(2, 8):
        root = np.sqrt((np.pi / 4 + k * np.pi) / 4.0)
        i = np.searchsorted(tau, root)
        assert sine[i - 2] * sine[i + 2] < 0
    # oscillatory term absent at negative times
    assert np.all(sine[tau <= 0] == 0.0)


def test_fig4_curves():
    p = make_params(4.0, tau_min=-6, tau_max=6, step=1e-3)
    header, cols = fig4_data(p)
    assert header == ["tau", "phi_dot_exact", "phi_dot_linearized", "phi_dot_markov"]
    tau, exact, lin, mk = cols
    # all three agree on the leading negative-time behaviour
    i = np.searchsorted(tau, -5.0)
    for curve in (exact, lin, mk):
        assert curve[i] == pytest.approx(1.0 / (2 * 4.0 * -5.0), abs=2e-3)
    # and separate near the origin
    i0 = np.searchsorted(tau, 0.0)
    assert not np.isclose(lin[i0], mk[i0], atol=0.01)


def test_check_command_passes(check_run):
    result, report, _ = check_run
    assert result.exit_code == 0, result.output
    assert report["all_passed"] is True
    names = {c["name"] for c in report["checks"]}
    assert "norm_conservation_max_defect" in names
    assert "reflection_identity_max" in names
    for c in report["checks"]:
        assert set(c) >= {"name", "value", "threshold", "passed", "comparator"}
    assert "PASS" in result.output


def test_check_degrades_with_loose_ode_tol(runner, tmp_path):
    result = runner.invoke(
        cli, ["check", "--ode-tol", "1e-3", "--out", str(tmp_path)]
    )
    assert result.exit_code == 1
    report = json.loads((tmp_path / "check_report.json").read_text())
    norm = [c for c in report["checks"] if c["name"] == "norm_conservation_max_defect"]
    assert norm and norm[0]["passed"] is False
