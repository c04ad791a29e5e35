"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
with the measured value.  Tolerances are fixed here and match the package's
public accuracy contract."""
import time

import numpy as np
import pytest

from conftest import period_average, principal_angle
from lzlab import make_params
from lzlab.fresnel import fresnel_F, fresnel_asymptotic, gauss_integral
from lzlab.markov import (
    eta_direct,
    eta_ode,
    eta_quadrature,
    lz_formula,
    lz_integral,
    markov_solution,
    stueckelberg_cancellation,
    stueckelberg_resolved_step,
)
from lzlab.polar import (
    find_denominator_zero,
    fit_stueckelberg,
    markov_phase_velocity,
    nonlinear_phase_residual,
    polar_decompose,
    polar_from_markov,
    polar_residuals,
    verify_markov_phase_equation,
)
from lzlab.solver import SolverOptions, integrate_coupled, integrate_second_order


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"[acceptance] {criterion}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, f"{criterion}: {detail}"


@pytest.fixture(scope="session")
def wide_exact_runs(warm_jit):
    """Timed +-200 runs for eps in {0.5, 1, 2, 4} with the corrected start."""
    runs = {}
    t0 = time.perf_counter()
    for eps in (0.5, 1.0, 2.0, 4.0):
        step = min(1e-3, stueckelberg_resolved_step(eps, 200.0, 12))
        p = make_params(eps, tau_min=-200.0, tau_max=200.0, step=step)
        runs[eps] = integrate_second_order(
            p, SolverOptions(initial_condition="asymptotic")
        )
    elapsed = time.perf_counter() - t0
    return runs, elapsed


def test_criterion_1_landau_zener_from_exact_dynamics(wide_exact_runs):
    runs, elapsed = wide_exact_runs
    worst = 0.0
    for eps, traj in runs.items():
        avg = period_average(traj.tau, np.abs(traj.a), eps)
        worst = max(worst, abs(avg - lz_formula(eps)))
    ok = worst <= 5e-3 and elapsed < 30.0
    report("AC1 exact Landau-Zener amplitude",
           ok, f"max |avg - exp(-pi/2eps)| = {worst:.2e}, runtime {elapsed:.1f}s")


def test_criterion_2_markov_exactness():
    t0 = time.perf_counter()
    worst_rel, worst_imag = 0.0, 0.0
    for eps in np.geomspace(0.25, 16.0, 10):
        value = lz_integral(float(eps), quad_tol=1e-10)
        worst_rel = max(worst_rel, abs(value - np.pi / (2 * eps)) / (np.pi / (2 * eps)))
        raw = gauss_integral(+1, float(eps)) * 0.5 * gauss_integral(-1, float(eps))
        worst_imag = max(worst_imag, abs(raw.imag))
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-8 and worst_imag < 1e-10 and elapsed < 5.0
    report("AC2 Markov exactness pi/(2 eps)",
           ok, f"rel {worst_rel:.2e}, imag {worst_imag:.2e}, runtime {elapsed:.1f}s")


def test_criterion_3_reflection_identity(warm_jit):
    t0 = time.perf_counter()
    eps = 1.0
    rng = np.random.default_rng(42)
    worst = 0.0
    for t in rng.uniform(1e-6, 15.0, size=50):
        pos, _ = eta_quadrature(float(t), eps)
        neg, _ = eta_quadrature(float(-t), eps)
        rhs = gauss_integral(+1, eps) * np.exp(-1j * eps * t * t)
        worst = max(worst, abs(pos + neg - rhs))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 10.0
    report("AC3 reflection identity (quadrature-backed)",
           ok, f"max defect {worst:.2e}, runtime {elapsed:.1f}s")


def test_criterion_4_asymptotic_order():
    t0 = time.perf_counter()

    def rel_err(tau):
        exact = fresnel_F(tau, 1.0).value
        return abs(exact - fresnel_asymptotic(tau, 1.0, order=2)) / abs(exact)

    ratio = rel_err(8.0) / rel_err(16.0)
    elapsed = time.perf_counter() - t0
    ok = 12.0 <= ratio <= 20.0 and elapsed < 5.0
    report("AC4 asymptotic convergence order", ok,
           f"error ratio 8->16 = {ratio:.2f} (theory 16), runtime {elapsed:.1f}s")


def test_criterion_5_stueckelberg_cancellation(wide_exact_runs):
    runs, _ = wide_exact_runs
    worst_markov = 0.0
    for eps in (1.0, 4.0):
        step = min(1e-3, stueckelberg_resolved_step(eps, 200.0))
        p = make_params(eps, tau_min=-200.0, tau_max=200.0, step=step)
        worst_markov = max(worst_markov, abs(stueckelberg_cancellation(p)))
    worst_phase = 0.0
    for eps in (1.0, 4.0):
        phi = polar_decompose(runs[eps]).phi[-1]
        worst_phase = max(worst_phase, abs(principal_angle(phi)))
    ok = worst_markov <= 1e-3 and worst_phase <= 0.02
    report("AC5 Stueckelberg cancellation", ok,
           f"|int Im eta + tails| = {worst_markov:.2e}, |phi(200)| = {worst_phase:.3f}")


def test_criterion_6_pole_diagnostic(traj_eps4_asym):
    eps = 4.0
    ptraj = polar_decompose(traj_eps4_asym)
    diag = find_denominator_zero(ptraj, eps)
    found = diag is not None
    benign = found and abs(diag.phi_ddot_at_tau0) <= 0.05 * (2 * eps / 3)
    near = np.abs(ptraj.tau - diag.tau0) < 0.5
    margin = np.abs(ptraj.phi_ddot[near] + 2 * eps / 3).min()
    ok = found and benign and margin > 1.0
    report("AC6 pole diagnostic", ok,
           f"tau0 = {diag.tau0:.4f}, |phi''(tau0)| = {abs(diag.phi_ddot_at_tau0):.2e}, "
           f"distance to -2eps/3 branch >= {margin:.2f}")


def test_criterion_7_constants_matching(warm_jit):
    worst_S, worst_beta = 0.0, 0.0
    for eps in (1.0, 4.0):
        p = make_params(eps, tau_min=-40.0, tau_max=40.0, step=1e-3)
        fit = fit_stueckelberg(polar_from_markov(markov_solution(p)),
                               window=(20.0 / np.sqrt(eps), 40.0))
        worst_S = max(worst_S, abs(fit.S_fit / np.sqrt(np.pi / eps) - 1.0))
        worst_beta = max(worst_beta, abs(fit.beta_fit - np.pi / 4.0))
    ok = worst_S <= 0.03 and worst_beta <= 0.05
    report("AC7 oscillation constants S, beta", ok,
           f"S rel err {worst_S:.2e}, beta err {worst_beta:.2e}")


def test_criterion_8_cross_route_agreement(traj_eps4, traj_eps4_second, params_eps4):
    sup_solver = np.abs(traj_eps4.a - traj_eps4_second.a).max()
    mt = eta_ode(params_eps4)
    inner = np.abs(mt.tau) <= 15.0
    sup_eta = np.abs(mt.eta[inner] - eta_direct(mt.tau[inner], 4.0)).max()
    rng = np.random.default_rng(8)
    sup_quad = 0.0
    for t in rng.uniform(-15.0, 15.0, size=12):
        qv, _ = eta_quadrature(float(t), 4.0)
        sup_quad = max(sup_quad, abs(qv - eta_direct(float(t), 4.0)))
    ok = sup_solver <= 1e-6 and sup_eta <= 1e-6 and sup_quad <= 1e-6
    report("AC8 cross-solver and cross-route agreement", ok,
           f"solvers {sup_solver:.2e}, eta ode {sup_eta:.2e}, eta quad {sup_quad:.2e}")


def test_criterion_9_residual_suites(traj_eps4):
    eps = 4.0
    ptraj = polar_decompose(traj_eps4)
    _, r_phi = polar_residuals(ptraj, eps)
    r53 = np.abs(r_phi).max()
    r56 = np.abs(nonlinear_phase_residual(ptraj, eps)).max()
    taus = np.concatenate([np.linspace(-15, -0.1, 300), np.linspace(0.1, 15, 300)])
    r64 = np.abs(verify_markov_phase_equation(taus, eps)).max()
    ok = r53 <= 1e-6 and r56 <= 1e-4 and r64 <= 1e-7
    report("AC9 residual suites", ok,
           f"phase eq {r53:.2e} <= 1e-6, nonlinear {r56:.2e} <= 1e-4, "
           f"markov-companion {r64:.2e} <= 1e-7")


def test_criterion_10_figure_reproduction(check_run):
    from lzlab.cli import fig1_data

    p = make_params(4.0)
    header, cols = fig1_data(p)
    tau, re_a, im_a = cols[0], cols[1], cols[2]
    radius = period_average(tau, np.hypot(re_a, im_a), 4.0)
    im_avg = period_average(tau, im_a, 4.0)
    _, report_json, elapsed = check_run
    ok = (
        abs(radius - 0.6752) <= 5e-3
        and abs(im_avg) <= 0.02
        and report_json["all_passed"]
        and elapsed < 60.0
    )
    report("AC10 figure reproduction and check suite", ok,
           f"radius {radius:.4f} (target 0.6752 +- 5e-3), |Im a| avg {abs(im_avg):.2e}, "
           f"check suite {'ok' if report_json['all_passed'] else 'FAILED'} "
           f"in {elapsed:.0f}s")
