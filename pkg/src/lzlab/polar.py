"""Amplitude/phase decomposition of the surviving amplitude and the
equations of motion it obeys.

Writing a = A exp(i phi) turns the linear second-order equation for a into
the coupled real pair

    A'' + (-phi'^2 - 2 eps tau phi' + 1) A = 0
    A phi'' + 2 A' (phi' + eps tau) = 0

and, after eliminating A, into a nonlinear second-order equation for the
phase velocity phi'.  All phase derivatives here come from the analytic
derivative chain of a (never finite differences), so the residuals of these
equations measure implementation consistency at rounding level and blow up
loudly on any sign or factor mistake.

Key structural facts handled below:

* the amplitude integrand f = phi''/(2 (phi' + eps tau)) looks singular
  where the denominator crosses zero, but on physical trajectories the
  numerator vanishes at the same point (the -2 eps/3 pole branch is not
  realized); find_denominator_zero locates the crossing and checks which
  branch occurs, amplitude_from_phase bridges the 0/0 point by
  interpolation over a small excluded band;
* the linearized phase equation carries a 1/tau coefficient.  Bounded
  solutions have phi''(0) = 0; solve_linearized_phase integrates up to a
  band around tau = 0 and crosses it on the local Frobenius basis
  {1 + 2 t^2 ln|t| + ..., t^2 + ...} plus the odd particular series, which
  imposes exactly that regularity;
* the Markov phase velocity -Im[eta] solves the companion linear equation
  without the -4 phi' shift exactly; verify_markov_phase_equation checks
  that residual identity numerically.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from . import _rk
from .markov import eta_derivatives, eta_direct
from .params import MarkovTrajectory, Params, PolarTrajectory, Trajectory, make_grid
from .solver import derivatives_arrays

__all__ = [
    "SingularDecompositionError",
    "PoleBranchError",
    "PhaseGapError",
    "IllConditionedFitError",
    "PoleDiagnostic",
    "StueckelbergFit",
    "LinearizedPhaseSolution",
    "polar_decompose",
    "polar_from_markov",
    "polar_residuals",
    "nonlinear_phase_residual",
    "find_denominator_zero",
    "solve_linearized_phase",
    "markov_phase_velocity",
    "verify_markov_phase_equation",
    "sqrt_branch",
    "sqrt_phase_velocity",
    "fit_stueckelberg",
    "amplitude_from_phase",
]

#: |a| below this is treated as a genuine zero of the decomposition
AMPLITUDE_FLOOR = 1e-12


class SingularDecompositionError(ValueError):
    """|a| vanished somewhere, the polar decomposition is undefined there."""


class PoleBranchError(RuntimeError):
    """The excluded phi''(tau0) = -2 eps/3 branch showed up."""


class PhaseGapError(ValueError):
    """The square-root phase velocity is not defined at tau = 0 (the finite
    jump there is an artifact of dropping A'')."""


class IllConditionedFitError(RuntimeError):
    """Fit window too short to separate the oscillation quadratures."""


@dataclass(frozen=True)
class PoleDiagnostic:
    """First zero tau0 of phi' + eps tau and the phase acceleration there."""

    tau0: float
    phi_ddot_at_tau0: float
    g_residual: float


@dataclass(frozen=True)
class StueckelbergFit:
    """Amplitude and phase shift of the oscillatory part of phi'."""

    S_fit: float
    beta_fit: float
    window: tuple[float, float]
    rms_residual: float


@dataclass(frozen=True)
class LinearizedPhaseSolution:
    """Solution samples of the linearized phase-velocity equation."""

    params: Params
    tau: np.ndarray
    phi_dot: np.ndarray
    phi_ddot: np.ndarray
    bridge_half_width: float
    phi_dot_at_zero: float


def polar_decompose(trajectory: Trajectory) -> PolarTrajectory:
    """Polar view A, phi and the first three analytic phase derivatives.

    phi is built on a continuous branch: the trapezoid integral of phi'
    (reference phi(tau_min) = 0) selects the winding number, then each value
    snaps onto the exact complex argument of a, so A exp(i phi) reproduces a
    to rounding while jumps of 2 pi are excluded by the integral.
    """
    eps = trajectory.params.epsilon
    tau, a, b = trajectory.tau, trajectory.a, trajectory.b
    A = np.abs(a)
    if A.min() < AMPLITUDE_FLOOR:
        i_bad = int(np.argmin(A))
        raise SingularDecompositionError(
            f"|a| = {A[i_bad]:.3e} below {AMPLITUDE_FLOOR} at tau = {tau[i_bad]:.6g}"
        )
    adot, addot, adddot = derivatives_arrays(tau, a, b, eps)
    r1 = adot / a
    r2 = addot / a - r1 * r1
    r3 = adddot / a - 3.0 * (addot / a) * r1 + 2.0 * r1**3
    phi_dot = r1.imag
    phi_ddot = r2.imag
    phi_dddot = r3.imag
    A_dot = r1.real * A
    A_ddot = (r2.real + r1.real**2) * A

    phi_int = np.concatenate(
        [[0.0], np.cumsum(0.5 * (phi_dot[1:] + phi_dot[:-1]) * np.diff(tau))]
    )
    arg = np.angle(a) - np.angle(a[0])
    winding = np.rint((phi_int - arg) / (2.0 * np.pi))
    phi = arg + 2.0 * np.pi * winding

    return PolarTrajectory(
        params=trajectory.params, tau=tau, A=A, phi=phi,
        phi_dot=phi_dot, phi_ddot=phi_ddot, phi_dddot=phi_dddot,
        A_dot=A_dot, A_ddot=A_ddot,
    )


def polar_from_markov(mtraj: MarkovTrajectory) -> PolarTrajectory:
    """Polar view of the Markov solution a_M = A_M exp(i phi_M).

    phi' = -Im[eta] with higher derivatives from the eta equation, and
    A'/A = -Re[eta]; this is what the constants-matching fit runs on, since
    the oscillation constants sqrt(pi/eps) and pi/4 belong to this solution.
    """
    if mtraj.A_M is None or mtraj.phi_M is None:
        raise ValueError("MarkovTrajectory lacks A_M/phi_M; use markov_solution")
    eps = mtraj.params.epsilon
    eta = mtraj.eta
    eta_dot, eta_ddot = eta_derivatives(mtraj.tau, eta, eps)
    A = mtraj.A_M
    return PolarTrajectory(
        params=mtraj.params, tau=mtraj.tau, A=A, phi=mtraj.phi_M,
        phi_dot=-eta.imag, phi_ddot=-eta_dot.imag, phi_dddot=-eta_ddot.imag,
        A_dot=-eta.real * A, A_ddot=(eta.real**2 - eta_dot.real) * A,
    )


def polar_residuals(ptraj: PolarTrajectory, epsilon: float):
    """Per-sample residuals (r_A, r_phi) of the coupled polar equations."""
    g = ptraj.phi_dot + epsilon * ptraj.tau
    r_A = ptraj.A_ddot + (-ptraj.phi_dot**2 - 2.0 * epsilon * ptraj.tau * ptraj.phi_dot + 1.0) * ptraj.A
    r_phi = ptraj.A * ptraj.phi_ddot + 2.0 * ptraj.A_dot * g
    return r_A, r_phi


def nonlinear_phase_residual(ptraj: PolarTrajectory, epsilon: float) -> np.ndarray:
    """Left side of the decoupled nonlinear phase-velocity equation.

    3 phi''^2 - 2 (phi'+eps tau) phi''' + 2 eps phi''
    - 4 (phi'+eps tau)^4 + 4 [1 + (eps tau)^2] (phi'+eps tau)^2
    """
    g = ptraj.phi_dot + epsilon * ptraj.tau
    return (
        3.0 * ptraj.phi_ddot**2
        - 2.0 * g * ptraj.phi_dddot
        + 2.0 * epsilon * ptraj.phi_ddot
        - 4.0 * g**4
        + 4.0 * (1.0 + (epsilon * ptraj.tau) ** 2) * g**2
    )


def find_denominator_zero(ptraj: PolarTrajectory, epsilon: float,
                          branch_tolerance: float = 0.05) -> PoleDiagnostic | None:
    """Locate the first zero tau0 of g = phi' + eps tau, if the window has one.

    The bracketing sign change of the samples is refined on a cubic Hermite
    interpolant (g and its analytic slope phi'' + eps are both available).
    Returns None when g never changes sign.  Raises PoleBranchError when the
    phase acceleration at tau0 is not small against 2 eps/3, i.e. when the
    pole branch would be realized.
    """
    g = ptraj.phi_dot + epsilon * ptraj.tau
    sign_change = np.nonzero(np.diff(np.sign(g)) != 0)[0]
    if len(sign_change) == 0:
        return None
    i0 = int(sign_change[0])
    lo = max(0, i0 - 3)
    hi = min(len(ptraj.tau), i0 + 5)
    window = slice(lo, hi)
    g_spline = CubicHermiteSpline(ptraj.tau[window], g[window], ptraj.phi_ddot[window] + epsilon)
    tau0 = brentq(g_spline, ptraj.tau[i0], ptraj.tau[i0 + 1], xtol=1e-13, rtol=1e-15)
    pdd_spline = CubicHermiteSpline(ptraj.tau[window], ptraj.phi_ddot[window], ptraj.phi_dddot[window])
    pdd0 = float(pdd_spline(tau0))
    threshold = branch_tolerance * (2.0 * epsilon / 3.0)
    if abs(pdd0) > threshold:
        raise PoleBranchError(
            f"phi''({tau0:.6g}) = {pdd0:.3e} is not small against 2 eps/3 = "
            f"{2 * epsilon / 3:.3e}; pole branch suspected"
        )
    return PoleDiagnostic(tau0=float(tau0), phi_ddot_at_tau0=pdd0,
                          g_residual=float(abs(g_spline(tau0))))


# ---------------------------------------------------------------------------
# linearized phase equation

def _frobenius_basis(t: float, epsilon: float):
    """Local solution basis of u'' - u'/t + (4 eps^2 t^2 - 4) u = 2 eps t.

    Columns of M: the log solution u1 = 1 + 2 t^2 ln|t| + t^4 ln|t|
    - (3 + 2 eps^2)/4 t^4 and the analytic solution
    u2 = t^2 + t^4/2 + (1 - 2 eps^2) t^6/12; P is the odd particular series
    (2 eps/3) t^3 + (8 eps/45) t^5.  Rows are (value, derivative).
    Truncation error is O(t^6 ln t), so the bridge half-width must stay small.
    """
    if t == 0.0:
        return np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([0.0, 0.0])
    L = np.log(abs(t))
    t2, t3, t4, t5, t6 = t * t, t**3, t**4, t**5, t**6
    d4 = -(3.0 + 2.0 * epsilon * epsilon) / 4.0
    u1 = 1.0 + 2.0 * t2 * L + t4 * L + d4 * t4
    du1 = 4.0 * t * L + 2.0 * t + 4.0 * t3 * L + t3 + 4.0 * d4 * t3
    u2 = t2 + t4 / 2.0 + (1.0 - 2.0 * epsilon**2) * t6 / 12.0
    du2 = 2.0 * t + 2.0 * t3 + (1.0 - 2.0 * epsilon**2) * t5 / 2.0
    up = (2.0 * epsilon / 3.0) * t3 + (8.0 * epsilon / 45.0) * t5
    dup = 2.0 * epsilon * t2 + (8.0 * epsilon / 9.0) * t4
    return np.array([[u1, u2], [du1, du2]]), np.array([up, dup])


def solve_linearized_phase(params: Params) -> LinearizedPhaseSolution:
    """Integrate the linearized phase-velocity equation over the grid.

    Treated as a first-order system in (phi'_l, phi''_l) with initial values
    from the large-negative-time behaviour of the rate function:
    phi'_l(tau_min) = 1/(2 eps tau_min) and its derivative.  The coefficient
    1/tau is singular at the origin; integration stops a few nodes short,
    matches the local Frobenius basis (which enforces the bounded-branch
    condition phi''_l(0) = 0), and restarts on the other side from the same
    local expansion.  The even ln|t| continuation of the log solution is the
    regularization choice; bounded solutions admit no other tau = 0 value.
    """
    grid = make_grid(params)
    eps = params.epsilon
    i_zero = int(np.searchsorted(grid, 0.0))
    if grid[i_zero] != 0.0:
        raise ValueError("grid must contain tau = 0")
    half_width = min(max(10.0 * params.step, 1e-3), 0.1)
    k = int(np.ceil(half_width / params.step))
    i_lo = i_zero - k
    i_hi = i_zero + k
    if i_lo < 1 or i_hi > len(grid) - 2:
        raise ValueError("window too narrow around tau = 0 for the series bridge")

    rtol = min(max(params.ode_tol * 1e-2, 1e-13), 1e-2)
    atol = rtol * 1e-3
    u0 = 1.0 / (2.0 * eps * params.tau_min)
    du0 = -1.0 / (2.0 * eps * params.tau_min**2)
    y0 = np.array([u0, du0], dtype=np.complex128)
    Y_neg, _, _, status, t_fail = _rk.integrate_grid(
        _rk.MODE_LINEARIZED_PHASE, eps, grid[: i_lo + 1], y0, rtol, atol, -1.0
    )
    if status != _rk.STATUS_OK:
        raise RuntimeError(f"linearized phase integration failed at tau={t_fail:.6g}")

    M, P = _frobenius_basis(float(grid[i_lo]), eps)
    coeffs = np.linalg.solve(M, np.array([Y_neg[-1, 0].real, Y_neg[-1, 1].real]) - P)
    bridge = np.empty((i_hi - i_lo + 1, 2))
    for j, t in enumerate(grid[i_lo : i_hi + 1]):
        Mb, Pb = _frobenius_basis(float(t), eps)
        bridge[j] = Mb @ coeffs + Pb

    y1 = np.array([bridge[-1, 0], bridge[-1, 1]], dtype=np.complex128)
    Y_pos, _, _, status, t_fail = _rk.integrate_grid(
        _rk.MODE_LINEARIZED_PHASE, eps, grid[i_hi:], y1, rtol, atol, -1.0
    )
    if status != _rk.STATUS_OK:
        raise RuntimeError(f"linearized phase integration failed at tau={t_fail:.6g}")

    phi_dot = np.concatenate([Y_neg[:, 0].real, bridge[1:-1, 0], Y_pos[:, 0].real])
    phi_ddot = np.concatenate([Y_neg[:, 1].real, bridge[1:-1, 1], Y_pos[:, 1].real])
    return LinearizedPhaseSolution(
        params=params, tau=grid, phi_dot=phi_dot, phi_ddot=phi_ddot,
        bridge_half_width=k * params.step, phi_dot_at_zero=float(coeffs[0]),
    )


# ---------------------------------------------------------------------------
# Markov phase velocity and the square-root decomposition

def markov_phase_velocity(tau, epsilon: float):
    """Phase velocity of the Markov solution, -Im[eta]."""
    eta = eta_direct(tau, epsilon)
    return -np.imag(eta) if np.ndim(tau) else -eta.imag


def verify_markov_phase_equation(tau, epsilon: float) -> np.ndarray:
    """Residual of the companion linear phase equation on -Im[eta].

    phi'''_M - phi''_M / tau + (2 eps tau)^2 phi'_M - 2 eps tau, with all
    derivatives from the eta relations.  Zero up to rounding; keep |tau|
    away from the 1/tau amplification at the origin.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau == 0.0):
        raise ValueError("residual undefined at tau = 0")
    eta = eta_direct(tau, epsilon)
    eta_dot, eta_ddot = eta_derivatives(tau, eta, epsilon)
    pd, pdd, pddd = -eta.imag, -eta_dot.imag, -eta_ddot.imag
    return pddd - pdd / tau + (2.0 * epsilon * tau) ** 2 * pd - 2.0 * epsilon * tau


def sqrt_branch(abs_tau, epsilon: float):
    """R(|tau|) = eps |tau| - sqrt((eps tau)^2 + 1), the anti-symmetric part."""
    at = np.abs(np.asarray(abs_tau, dtype=float))
    w = epsilon * at
    return w - np.sqrt(w * w + 1.0)


def sqrt_phase_velocity(tau: float, epsilon: float,
                        S: float | None = None, beta: float | None = None) -> float:
    """Piecewise square-root approximation of the phase velocity.

        phi'(tau) = R(|tau|)                          for tau < 0
        phi'(tau) = -R(|tau|) - S sin(beta - eps tau^2) for tau > 0

    Defaults S = sqrt(pi/eps), beta = pi/4.  tau = 0 sits on the finite jump
    from -1 to 1 - S sin(beta), an artifact of dropping A''; requesting it
    raises PhaseGapError.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if tau == 0.0:
        raise PhaseGapError(
            "phi' jumps from -1 to 1 - S sin(beta) at tau = 0 in this approximation"
        )
    if S is None:
        S = np.sqrt(np.pi / epsilon)
    if beta is None:
        beta = np.pi / 4.0
    R = float(sqrt_branch(tau, epsilon))
    if tau < 0:
        return R
    return -R - S * np.sin(beta - epsilon * tau * tau)


def fit_stueckelberg(ptraj: PolarTrajectory,
                     window: tuple[float, float] | None = None) -> StueckelbergFit:
    """Least-squares oscillation constants of phi' at positive times.

    Subtracting the square-root extension leaves
    phi' + R(|tau|) = -S sin(beta - eps tau^2), linear in
    (S cos beta, S sin beta) once the sine is expanded.  The default window
    [20/sqrt(eps), tau_max] keeps the period count eps-independent; at least
    five oscillation periods are required.
    """
    eps = ptraj.params.epsilon
    if window is None:
        window = (20.0 / np.sqrt(eps), float(ptraj.tau[-1]))
    lo, hi = window
    if not 0.0 < lo < hi:
        raise ValueError(f"fit window must satisfy 0 < lo < hi, got {window}")
    periods = eps * (hi * hi - lo * lo) / (2.0 * np.pi)
    if periods < 5.0:
        raise IllConditionedFitError(
            f"window {window} spans {periods:.2f} oscillation periods, need >= 5"
        )
    mask = (ptraj.tau >= lo) & (ptraj.tau <= hi)
    if mask.sum() < 32:
        raise IllConditionedFitError(f"only {int(mask.sum())} samples in window {window}")
    theta = eps * ptraj.tau[mask] ** 2
    y = ptraj.phi_dot[mask] + sqrt_branch(ptraj.tau[mask], eps)
    design = np.column_stack([np.sin(theta), -np.cos(theta)])
    coeffs, _, rank, sv = np.linalg.lstsq(design, y, rcond=None)
    if rank < 2 or sv[1] < 1e-6 * sv[0]:
        raise IllConditionedFitError("sine and cosine quadratures not separable")
    p, q = coeffs
    S_fit = float(np.hypot(p, q))
    beta_fit = float(np.arctan2(q, p))
    rms = float(np.sqrt(np.mean((design @ coeffs - y) ** 2)))
    return StueckelbergFit(S_fit=S_fit, beta_fit=beta_fit,
                           window=(float(lo), float(hi)), rms_residual=rms)


def amplitude_from_phase(ptraj: PolarTrajectory, epsilon: float,
                         excluded_half_width: float | None = None,
                         magnitude_cap: float = 50.0) -> np.ndarray:
    """Rebuild A from the phase alone via A = exp(-int f), f = phi''/(2 g).

    g = phi' + eps tau crosses zero once; phi'' vanishes there too, so f is
    finite but numerically 0/0.  A band of half-width 10*step (default)
    around the crossing is bridged by linear interpolation of f between the
    band edges.  If f still exceeds magnitude_cap inside the band, the band
    is widened and a warning is issued.
    """
    tau = ptraj.tau
    step = ptraj.params.step
    if excluded_half_width is None:
        excluded_half_width = 10.0 * step
    g = ptraj.phi_dot + epsilon * tau
    with np.errstate(divide="ignore", invalid="ignore"):
        f = 0.5 * ptraj.phi_ddot / g
    diag = find_denominator_zero(ptraj, epsilon)
    if diag is not None:
        delta = excluded_half_width
        for _ in range(8):
            band = np.abs(tau - diag.tau0) < delta
            edges = np.nonzero(~band)[0]
            left = edges[edges < np.argmax(band)].max()
            right = edges[edges > np.argmax(band)].min()
            f_bridge = np.interp(
                tau[band], [tau[left], tau[right]], [f[left], f[right]]
            )
            if np.all(np.abs(f_bridge) <= magnitude_cap) and np.all(
                np.isfinite(f[~band])
            ):
                f = f.copy()
                f[band] = f_bridge
                break
            delta *= 2.0
            warnings.warn(
                f"amplitude integrand above {magnitude_cap} inside the excluded "
                f"band; widening to half-width {delta:.3g}",
                RuntimeWarning,
                stacklevel=2,
            )
        else:
            raise RuntimeError("could not bridge the amplitude integrand")
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(tau))])
    return ptraj.A[0] * np.exp(-integral)
