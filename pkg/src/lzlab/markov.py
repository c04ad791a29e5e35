"""The Markov rate function eta and everything built on it.

eta(tau) = exp(-i eps tau^2) * int_{-inf}^{tau} exp(+i eps s^2) ds drives the
rate equation a' = -eta a whose solution

    a_M(tau) = exp(-int_{-inf}^{tau} eta) = A_M exp(i phi_M)

reproduces the exact asymptotic amplitude exp(-pi/(2 eps)) despite the
approximation behind it.  Three independent routes to eta coexist here:

  eta_direct      half-line Fresnel integral for tau <= 0, then the
                  reflection identity
                  eta(|t|) = -eta(-|t|) + sqrt(i pi/eps) exp(-i eps t^2)
  eta_ode         propagation of eta' + 2 i eps tau eta - 1 = 0, seeded with
                  the direct value at tau_min (the literal eta(-inf) = 0 is
                  unreachable and a zero seed leaves an O(1/|tau_min|)
                  transient)
  eta_quadrature  brute-force adaptive quadrature of the defining integral

The imaginary part of eta integrates to zero over the whole line (the
Stueckelberg oscillations cancel the phase wound up at negative times), and
the full integral equals pi/(2 eps) exactly; both are exposed as numerical
operations below.

On the phase reference: Im[eta] decays only like 1/(2 eps |tau|), so the
phase integral from -inf diverges logarithmically and phi_M is referenced to
zero at tau_min instead.  For symmetric windows the log pieces of the two
tails cancel pairwise; stueckelberg_cancellation adds that paired tail
analytically, which is the only form in which the (-inf, tau_min] phase tail
is finite.  The amplitude tail has no such problem and is added as the
convergent term 1/(8 eps^2 tau_min^2).
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_simpson

from . import _rk
from .fresnel import (
    fresnel_F,
    fresnel_F_bruteforce,
    fresnel_F_many,
    gauss_integral,
)
from .params import MarkovTrajectory, Params, make_grid

__all__ = [
    "eta_direct",
    "eta_derivatives",
    "eta_ode",
    "eta_quadrature",
    "markov_solution",
    "stueckelberg_cancellation",
    "stueckelberg_resolved_step",
    "lz_integral",
    "lz_formula",
]


def eta_direct(tau, epsilon: float):
    """Markov rate function via the Fresnel integral and reflection.

    For tau <= 0, eta = exp(-i eps tau^2) F(|tau|); for tau > 0 the
    reflection identity maps the value back to the negative axis.  Accepts
    scalars or arrays; continuous at tau = 0.
    """
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    phase = np.exp(-1j * epsilon * tau_arr * tau_arr)
    F_abs, _ = fresnel_F_many(np.abs(tau_arr), epsilon)
    neg = phase * F_abs
    pos = gauss_integral(+1, epsilon) * phase - neg
    out = np.where(tau_arr <= 0, neg, pos)
    return complex(out[0]) if np.isscalar(tau) or np.ndim(tau) == 0 else out


def eta_derivatives(tau, eta, epsilon: float):
    """eta' and eta'' obtained from the rate-function differential equation,
    eta' = 1 - 2 i eps tau eta, and its tau derivative."""
    tau = np.asarray(tau)
    eta = np.asarray(eta)
    eta_dot = 1.0 - 2j * epsilon * tau * eta
    eta_ddot = -2j * epsilon * eta - 2j * epsilon * tau * eta_dot
    return eta_dot, eta_ddot


def eta_ode(params: Params) -> MarkovTrajectory:
    """eta on the module grid by propagating its differential equation."""
    grid = make_grid(params)
    y0 = np.array([eta_direct(params.tau_min, params.epsilon)], dtype=np.complex128)
    rtol = min(max(params.ode_tol * 1e-2, 1e-13), 1e-2)
    Y, _, _, status, t_fail = _rk.integrate_grid(
        _rk.MODE_ETA, params.epsilon, grid, y0, rtol, rtol * 1e-3, -1.0
    )
    if status != _rk.STATUS_OK:
        raise RuntimeError(f"eta integration failed at tau={t_fail:.6g}")
    return MarkovTrajectory(params=params, tau=grid, eta=Y[:, 0])


def eta_quadrature(tau: float, epsilon: float, quad_tol: float = 1e-10):
    """Brute-force eta from the defining integral; returns (value, est_error).

    int_{-inf}^{tau} exp(i eps s^2) ds equals F(-tau) by s -> -s, evaluated
    here with the adaptive-quadrature route rather than the primary one.
    """
    Fv = fresnel_F_bruteforce(-tau, epsilon, quad_tol)
    phase = np.exp(-1j * epsilon * tau * tau)
    return phase * Fv.value, Fv.est_error


def _cumulative(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    # fourth-order composite rule on the (per-side uniform) grid
    return cumulative_simpson(y, x=x, initial=0.0)


def markov_solution(params: Params) -> MarkovTrajectory:
    """Markov solution a_M = A_M exp(i phi_M) on the module grid.

    A_M includes the analytic amplitude tail over (-inf, tau_min];
    phi_M(tau_min) = 0 by construction (see module docstring for why the
    phase tail cannot be added pointwise).
    """
    grid = make_grid(params)
    eta = eta_direct(grid, params.epsilon)
    re_tail = 1.0 / (8.0 * params.epsilon**2 * params.tau_min**2)
    cum_re = _cumulative(eta.real, grid)
    cum_im = _cumulative(eta.imag, grid)
    A_M = np.exp(-(re_tail + cum_re))
    phi_M = -cum_im
    return MarkovTrajectory(params=params, tau=grid, eta=eta, A_M=A_M, phi_M=phi_M)


def stueckelberg_resolved_step(epsilon: float, tau_max: float,
                               points_per_period: int = 20) -> float:
    """Grid step resolving the quadratic-phase oscillation out to tau_max."""
    return np.pi / (points_per_period * epsilon * tau_max)


def stueckelberg_cancellation(params: Params) -> float:
    """int Im[eta] over the window plus the paired analytic tails.

    Requires a symmetric window.  The two half-line tails diverge
    individually but their sum reduces, via the reflection identity, to
    sqrt(pi/eps) Im[exp(i pi/4) conj(F(tau_max))], which is convergent.
    The exact full-line value is zero.
    """
    if abs(params.tau_min + params.tau_max) > 1e-12 * params.tau_max:
        raise ValueError("stueckelberg_cancellation requires a symmetric window")
    grid = make_grid(params)
    eta = eta_direct(grid, params.epsilon)
    body = _cumulative(eta.imag, grid)[-1]
    T = params.tau_max
    tail = np.sqrt(np.pi / params.epsilon) * np.imag(
        np.exp(0.25j * np.pi) * np.conj(fresnel_F(T, params.epsilon).value)
    )
    return float(body + tail)


def lz_integral(epsilon: float, quad_tol: float = 1e-10) -> float:
    """Full-line integral of eta, evaluated through its half-line reduction.

    int eta = sqrt(i pi/eps) * int_0^inf exp(-i eps s^2) ds, with the
    remaining half-line integral supplied by the closed-form full-line value.
    A nonreal result beyond quad_tol signals a branch bug, so it raises.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    value = gauss_integral(+1, epsilon) * (0.5 * gauss_integral(-1, epsilon))
    if abs(value.imag) > quad_tol:
        raise ArithmeticError(
            f"lz_integral imaginary part {value.imag:.3e} exceeds {quad_tol:.3e}"
        )
    return float(value.real)


def lz_formula(epsilon: float) -> float:
    """Asymptotic amplitude exp(-pi/(2 eps)) of the surviving level."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return float(np.exp(-np.pi / (2.0 * epsilon)))
