"""Command-line front end.

Commands: simulate (exact trajectory), markov (rate function and Markov
solution), figures (per-figure data bundles), check (invariant suite).
Outputs are CSV with a header row (floats at 17 significant digits) plus a
JSON run manifest; files are written atomically (temp file, then rename).

Exit codes: 0 ok, 1 check failure, 2 configuration error, 3 numerical
failure.  The LZLAB_OUT environment variable overrides --out.
"""
from __future__ import annotations

import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from . import __version__, checks, markov, polar, solver
from .fresnel import fresnel_F_many, gauss_integral
from .params import ConfigError, Params, make_params, parse_config, params_to_json

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_FIGURES = ("fig1", "fig2", "fig3", "fig4")


def _fmt(x: float) -> str:
    if np.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    lines = [",".join(header)]
    rows = len(columns[0])
    for i in range(rows):
        lines.append(",".join(_fmt(float(col[i])) for col in columns))
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_manifest(out_dir: Path, command: str, params: Params,
                    outputs: list[tuple[str, str]], wall_time: float) -> Path:
    manifest = {
        "command": command,
        "params": json.loads(params_to_json(params)),
        "outputs": [{"path": p, "kind": k} for p, k in outputs],
        "versions": f"lzlab {__version__}",
        "wall_time": wall_time,
    }
    path = out_dir / f"{command}_manifest.json"
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    for p, _ in outputs:
        if not (out_dir / p).exists():
            raise RuntimeError(f"manifest lists missing output {p}")
    return path


def _resolve_out(out: str | None) -> Path:
    env = os.environ.get("LZLAB_OUT")
    target = Path(env) if env else Path(out) if out else Path.cwd()
    target.mkdir(parents=True, exist_ok=True)
    return target


def _build_params(config, epsilon, alpha, omega, window, step, ode_tol, quad_tol,
                  default_epsilon: float | None = None) -> Params:
    file_values: dict = {}
    if config is not None:
        base = parse_config(Path(config).read_text())
        file_values = json.loads(params_to_json(base))
    merged = dict(file_values)
    if epsilon is not None:
        merged["epsilon"] = epsilon
    if "epsilon" not in merged and alpha is None and omega is None and default_epsilon is not None:
        merged["epsilon"] = default_epsilon
    if alpha is not None or omega is not None:
        eps_obj = merged.get("epsilon")
        eps_obj = dict(eps_obj) if isinstance(eps_obj, dict) else {}
        if alpha is not None:
            eps_obj["alpha"] = alpha
        if omega is not None:
            eps_obj["omega"] = omega
        merged["epsilon"] = eps_obj
    if window is not None:
        merged["tau_min"], merged["tau_max"] = window
    if step is not None:
        merged["step"] = step
    if ode_tol is not None:
        merged["ode_tol"] = ode_tol
    if quad_tol is not None:
        merged["quad_tol"] = quad_tol
    return parse_config(merged)


def common_options(f):
    f = click.option("--epsilon", type=float, default=None, help="chirp/coupling^2 ratio")(f)
    f = click.option("--alpha", type=float, default=None, help="chirp rate")(f)
    f = click.option("--omega", type=float, default=None, help="coupling constant")(f)
    f = click.option("--window", type=float, nargs=2, default=None,
                     help="tau_min tau_max")(f)
    f = click.option("--step", type=float, default=None, help="grid spacing")(f)
    f = click.option("--ode-tol", type=float, default=None)(f)
    f = click.option("--quad-tol", type=float, default=None)(f)
    f = click.option("--config", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="JSON config file (flags override)")(f)
    f = click.option("--out", type=click.Path(file_okay=False), default=None,
                     help="output directory (env LZLAB_OUT overrides)")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                     default="csv")(f)
    return f


@click.group()
@click.version_option(version=__version__, prog_name="lzlab")
def cli() -> None:
    """Numerical laboratory for Landau-Zener dynamics."""


def _simulate_frame(params: Params):
    opts = solver.SolverOptions()
    traj = solver.integrate_coupled(params, opts)
    defect = traj.norm_defect()
    header = ["tau", "re_a", "im_a", "re_b", "im_b", "abs_a", "abs_b", "norm_defect"]
    cols = [traj.tau, traj.a.real, traj.a.imag, traj.b.real, traj.b.imag,
            np.abs(traj.a), np.abs(traj.b), defect]
    return header, cols


@cli.command()
@common_options
def simulate(epsilon, alpha, omega, window, step, ode_tol, quad_tol, config, out, fmt):
    """Integrate the coupled amplitude equations and export the trajectory."""
    t0 = time.perf_counter()
    try:
        params = _build_params(config, epsilon, alpha, omega, window, step, ode_tol, quad_tol)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    out_dir = _resolve_out(out)
    try:
        header, cols = _simulate_frame(params)
    except (solver.SolverError, ArithmeticError, FloatingPointError) as exc:
        click.echo(f"solver failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    outputs = _emit_table(out_dir, "trajectory", header, cols, fmt)
    _write_manifest(out_dir, "simulate", params, outputs, time.perf_counter() - t0)
    click.echo(f"wrote {outputs[0][0]} ({len(cols[0])} rows)")


def _emit_table(out_dir: Path, stem: str, header, cols, fmt: str):
    if fmt == "csv":
        name = f"{stem}.csv"
        write_csv(out_dir / name, header, cols)
        return [(name, "csv")]
    name = f"{stem}.json"
    payload = {h: [float(v) for v in c] for h, c in zip(header, cols)}
    _atomic_write(out_dir / name, json.dumps(payload) + "\n")
    return [(name, "json")]


def _markov_frames(params: Params):
    mt = markov.markov_solution(params)
    header = ["tau", "re_eta", "im_eta", "A_M", "phi_M"]
    cols = [mt.tau, mt.eta.real, mt.eta.imag, mt.A_M, mt.phi_M]
    summary = {
        "lz_integral": markov.lz_integral(params.epsilon, params.quad_tol),
        "lz_formula": markov.lz_formula(params.epsilon),
        "A_M_endpoint": float(mt.A_M[-1]),
        "phi_M_endpoint": float(mt.phi_M[-1]),
    }
    return header, cols, summary


@cli.command("markov")
@common_options
def markov_cmd(epsilon, alpha, omega, window, step, ode_tol, quad_tol, config, out, fmt):
    """Export the Markov rate function and the Markov solution."""
    t0 = time.perf_counter()
    try:
        params = _build_params(config, epsilon, alpha, omega, window, step, ode_tol, quad_tol)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    out_dir = _resolve_out(out)
    try:
        header, cols, summary = _markov_frames(params)
    except ArithmeticError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    outputs = _emit_table(out_dir, "markov", header, cols, fmt)
    _atomic_write(out_dir / "markov_summary.json",
                  json.dumps(summary, indent=2, sort_keys=True) + "\n")
    outputs.append(("markov_summary.json", "json"))
    _write_manifest(out_dir, "markov", params, outputs, time.perf_counter() - t0)
    click.echo(f"wrote {outputs[0][0]}; lz_integral={summary['lz_integral']:.6g}")


def _figure_exact(params: Params):
    opts = solver.SolverOptions(initial_condition="asymptotic")
    return solver.integrate_coupled(params, opts)


def fig1_data(params: Params):
    """Exact and Markov trajectories in the complex plane plus the
    elementary large-|tau| branches (masked near tau = 0 where they blow up)."""
    traj = _figure_exact(params)
    mt = markov.markov_solution(params)
    eps = params.epsilon
    tau = traj.tau
    a_markov = mt.A_M * np.exp(1j * mt.phi_M)

    a_asym = np.full(len(tau), np.nan + 1j * np.nan, dtype=complex)
    cut = 1.0 / np.sqrt(eps)
    neg = tau <= -cut
    tn = tau[neg]
    ln_a = (
        -(1.0 / (8.0 * eps**2)) * (1.0 / tn**2 - 1.0 / params.tau_min**2)
        + 1j * (1.0 / (2.0 * eps)) * np.log(np.abs(tn) / abs(params.tau_min))
    )
    a_asym[neg] = np.exp(ln_a)
    pos = tau >= cut
    tp = tau[pos]
    T = params.tau_max
    Fp, _ = fresnel_F_many(tp, eps)
    FT, _ = fresnel_F_many(np.array([T]), eps)
    integral = (
        (1.0 / (8.0 * eps**2)) * (1.0 / T**2 - 1.0 / tp**2)
        - 1j / (2.0 * eps) * np.log(T / tp)
        + gauss_integral(+1, eps) * (np.conj(Fp) - np.conj(FT[0]))
    )
    a_asym[pos] = markov.lz_formula(eps) * np.exp(integral)

    header = ["tau", "re_a", "im_a", "re_a_markov", "im_a_markov",
              "re_a_asym", "im_a_asym"]
    cols = [tau, traj.a.real, traj.a.imag, a_markov.real, a_markov.imag,
            a_asym.real, a_asym.imag]
    return header, cols


def fig2_data(params: Params):
    """Phase velocity against -eps tau and the phase acceleration, with the
    denominator-zero marker row."""
    ptraj = polar.polar_decompose(_figure_exact(params))
    eps = params.epsilon
    diag = polar.find_denominator_zero(ptraj, eps)
    tau = ptraj.tau
    cols = [tau, ptraj.phi_dot, -eps * tau, ptraj.phi_ddot, np.zeros(len(tau))]
    if diag is not None:
        i = int(np.searchsorted(tau, diag.tau0))
        marker = [diag.tau0, -eps * diag.tau0, -eps * diag.tau0,
                  diag.phi_ddot_at_tau0, 1.0]
        cols = [np.insert(c, i, m) for c, m in zip(cols, marker)]
    header = ["tau", "phi_dot", "minus_eps_tau", "phi_ddot", "is_tau0"]
    return header, cols


def fig3_data(params: Params):
    """Square-root decomposition of the phase velocity: anti-symmetric branch,
    oscillatory term (positive times only), exact curve, 1/(2 eps tau)."""
    ptraj = polar.polar_decompose(_figure_exact(params))
    eps = params.epsilon
    tau = ptraj.tau
    S = np.sqrt(np.pi / eps)
    beta = np.pi / 4.0
    R = polar.sqrt_branch(tau, eps)
    branch = np.where(tau < 0, R, -R)
    branch[tau == 0.0] = np.nan
    sine = np.where(tau > 0, -S * np.sin(beta - eps * tau * tau), 0.0)
    with np.errstate(divide="ignore"):
        inv = np.where(tau != 0.0, 1.0 / (2.0 * eps * tau), np.nan)
    header = ["tau", "sqrt_branch", "sine_term", "phi_dot_exact", "inv_two_eps_tau"]
    return header, [tau, branch, sine, ptraj.phi_dot, inv]


def fig4_data(params: Params):
    """Exact, linearized and Markov phase velocities on one grid."""
    ptraj = polar.polar_decompose(_figure_exact(params))
    lin = polar.solve_linearized_phase(params)
    pm = polar.markov_phase_velocity(ptraj.tau, params.epsilon)
    header = ["tau", "phi_dot_exact", "phi_dot_linearized", "phi_dot_markov"]
    return header, [ptraj.tau, ptraj.phi_dot, lin.phi_dot, pm]


_FIG_BUILDERS = {"fig1": fig1_data, "fig2": fig2_data, "fig3": fig3_data,
                 "fig4": fig4_data}


@cli.command()
@click.argument("which", type=click.Choice(_FIGURES))
@common_options
def figures(which, epsilon, alpha, omega, window, step, ode_tol, quad_tol, config, out, fmt):
    """Export the data behind one of the four figures (default eps = 4)."""
    t0 = time.perf_counter()
    try:
        params = _build_params(config, epsilon, alpha, omega, window, step,
                               ode_tol, quad_tol, default_epsilon=4.0)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    out_dir = _resolve_out(out)
    try:
        header, cols = _FIG_BUILDERS[which](params)
    except (solver.SolverError, ArithmeticError, FloatingPointError) as exc:
        click.echo(f"solver failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    outputs = _emit_table(out_dir, which, header, cols, fmt)
    _write_manifest(out_dir, f"figures-{which}", params, outputs,
                    time.perf_counter() - t0)
    click.echo(f"wrote {outputs[0][0]}")


@cli.command()
@common_options
def check(epsilon, alpha, omega, window, step, ode_tol, quad_tol, config, out, fmt):
    """Run the invariant suite and write a machine-readable report."""
    t0 = time.perf_counter()
    try:
        params = _build_params(config, epsilon, alpha, omega, window, step,
                               ode_tol, quad_tol, default_epsilon=4.0)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    out_dir = _resolve_out(out)
    try:
        results = checks.run_checks(params)
    except (solver.SolverError, ArithmeticError, FloatingPointError) as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    report = {
        "params": json.loads(params_to_json(params)),
        "checks": [asdict(r) for r in results],
        "all_passed": all(r.passed for r in results),
        "wall_time": time.perf_counter() - t0,
    }
    _atomic_write(out_dir / "check_report.json",
                  json.dumps(report, indent=2, sort_keys=True) + "\n")
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        click.echo(f"{status} {r.name}: {r.value:.3e} {r.comparator} {r.threshold:.3e}")
    if not report["all_passed"]:
        sys.exit(EXIT_CHECK_FAILED)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
