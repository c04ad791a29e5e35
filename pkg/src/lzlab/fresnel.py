"""Oscillatory quadratic-phase integrals.

Everything downstream is built from three objects:

  gauss_integral   the full-line integral of exp(+-i eps tau^2), known in
                   closed form as sqrt((+-i) pi / eps)
  fresnel_F        the half-line integral F(tau) = int_tau^inf exp(i eps s^2) ds
  fresnel_asymptotic  the large-tau expansion
                   F(tau) = [-1/(2 i eps tau) + 1/(4 eps^2 tau^3) + ...] e^{i eps tau^2}

fresnel_F evaluates the finite piece int_0^tau through the standard Fresnel
sine/cosine functions (a convergent-series/rational evaluation) below a
crossover in x = |tau| sqrt(eps), and switches to the asymptotic expansion
above it.  Every evaluation reports an absolute error estimate; it is never
exactly zero.  If a requested tolerance cannot be met the best estimate is
still returned, callers decide what to do with est_error.

A brute-force adaptive-quadrature route is kept alongside as an independent
cross-check; it shares no code with the primary path beyond the closed-form
tail bound.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import fresnel as _fresnel_sc

__all__ = [
    "FresnelValue",
    "gauss_integral",
    "fresnel_F",
    "fresnel_F_many",
    "fresnel_F_bruteforce",
    "fresnel_asymptotic",
    "quadratic_phase_integral",
    "ASYMPTOTIC_CROSSOVER",
]

#: branch switch on x = |tau|*sqrt(eps).  Above this the order-2 asymptotic
#: series is accurate to ~3/(4 x^4) relative (= 9e-11 at the default), and
#: both branches agree far better than any tolerance used in this package.
#: Tunable; the overlap-band agreement test pins the consistency.
ASYMPTOTIC_CROSSOVER = 300.0

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class FresnelValue:
    """A complex integral value with an absolute error estimate."""

    value: complex
    est_error: float


def gauss_integral(sign: int, epsilon: float) -> complex:
    """Full-line integral of exp(sign * i * eps * tau^2), sign = +-1.

    Closed form sqrt(pi/eps) * exp(sign * i pi/4); no quadrature involved.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return np.sqrt(np.pi / epsilon) * np.exp(sign * 0.25j * np.pi)


def _finite_segment(x, epsilon):
    """int_0^x exp(i eps s^2) ds via the Fresnel sine/cosine functions."""
    u = np.asarray(x, dtype=float) * np.sqrt(2.0 * epsilon / np.pi)
    s, c = _fresnel_sc(u)
    return np.sqrt(np.pi / (2.0 * epsilon)) * (c + 1j * s)


def fresnel_asymptotic(tau: float, epsilon: float, order: int = 2) -> complex:
    """Partial sum of the large-tau expansion of F(tau), tau > 0.

    order selects how many bracketed terms are kept (1 or 2).
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise ValueError("fresnel_asymptotic requires tau > 0")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    s = -1.0 / (2j * epsilon * tau)
    if order >= 2:
        s = s + 1.0 / (4.0 * epsilon**2 * tau**3)
    out = s * np.exp(1j * epsilon * tau * tau)
    return complex(out) if out.ndim == 0 else out


def fresnel_F_many(tau, epsilon: float):
    """Vectorized F(tau) with per-point error estimates.

    Returns (values, est_errors) as ndarrays.  Used by the rate-function
    machinery on full grids; fresnel_F wraps the scalar case.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    x = np.abs(tau) * np.sqrt(epsilon)
    half_gauss = 0.5 * gauss_integral(+1, epsilon)
    values = np.empty(tau.shape, dtype=np.complex128)
    errors = np.empty(tau.shape, dtype=float)

    series = x <= ASYMPTOTIC_CROSSOVER
    if np.any(series):
        ts = tau[series]
        values[series] = half_gauss - _finite_segment(ts, epsilon)
        # series/rational evaluation is good to a few ulp of the larger of
        # the two pieces; the quadratic phase itself carries rounding
        # eps*tau^2 * ulp
        scale = np.maximum(np.abs(values[series]), abs(half_gauss))
        errors[series] = _EPS * (4.0 * scale + epsilon * ts * ts * np.abs(values[series]))
    if np.any(~series):
        ta = tau[~series]
        mag = np.abs(ta)
        va = fresnel_asymptotic(mag, epsilon, order=2)
        # reflection handles tau < 0: F(-|t|) = gauss - F(|t|)
        va = np.where(ta >= 0, va, 2.0 * half_gauss - va)
        values[~series] = va
        third_term = 3.0 / (8.0 * epsilon**3 * mag**5)
        errors[~series] = third_term + _EPS * epsilon * ta * ta * np.abs(va)
    np.maximum(errors, _EPS, out=errors)
    return values, errors


def fresnel_F(tau: float, epsilon: float, quad_tol: float | None = None) -> FresnelValue:
    """F(tau) = int_tau^inf exp(i eps s^2) ds with an error estimate.

    quad_tol is advisory: when the achievable accuracy at the evaluation
    point is worse, the best available est_error is reported rather than
    failing.
    """
    values, errors = fresnel_F_many(tau, epsilon)
    return FresnelValue(complex(values[0]), float(errors[0]))


def _positive_segment_quad(a: float, b: float, epsilon: float, epsabs: float):
    """Brute-force int_a^b exp(i eps s^2) ds for 0 <= a < b.

    Plain adaptive quadrature on the slowly varying head, then the
    substitution u = s^2 with oscillatory-weight quadrature for the rest.
    """
    val = 0.0 + 0.0j
    err = 0.0
    c = min(b, 1.0 / np.sqrt(epsilon))
    if a < c:
        re = quad(lambda s: np.cos(epsilon * s * s), a, c, epsabs=epsabs, limit=200)
        im = quad(lambda s: np.sin(epsilon * s * s), a, c, epsabs=epsabs, limit=200)
        val += re[0] + 1j * im[0]
        err += re[1] + im[1]
        a = c
    if a < b:
        half_inv_sqrt = lambda u: 0.5 / np.sqrt(u)
        re = quad(half_inv_sqrt, a * a, b * b, weight="cos", wvar=epsilon,
                  epsabs=epsabs, limit=800)
        im = quad(half_inv_sqrt, a * a, b * b, weight="sin", wvar=epsilon,
                  epsabs=epsabs, limit=800)
        val += re[0] + 1j * im[0]
        err += re[1] + im[1]
    return val, err


def quadratic_phase_integral(a: float, b: float, epsilon: float,
                             epsabs: float = 1e-12):
    """int_a^b exp(i eps s^2) ds by adaptive quadrature, any finite a < b.

    Returns (value, est_error).  Independent of the fresnel_F path.
    """
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    val = 0.0 + 0.0j
    err = 0.0
    if a < 0:
        lo, hi = max(0.0, -b), -a
        if lo < hi:
            v, e = _positive_segment_quad(lo, hi, epsilon, epsabs)
            val += v
            err += e
    if b > 0:
        lo = max(0.0, a)
        if lo < b:
            v, e = _positive_segment_quad(lo, b, epsilon, epsabs)
            val += v
            err += e
    return val, err


def fresnel_F_bruteforce(tau: float, epsilon: float,
                         quad_tol: float = 1e-10) -> FresnelValue:
    """F(tau) by adaptive quadrature up to a cutoff plus a three-term
    integration-by-parts tail.  Cross-check route for fresnel_F."""
    L = max(60.0 / np.sqrt(epsilon), 1.5 * abs(tau) + 1.0)
    val, err = quadratic_phase_integral(tau, L, epsilon, epsabs=min(quad_tol, 1e-12))
    tail = np.exp(1j * epsilon * L * L) * (
        -1.0 / (2j * epsilon * L)
        + 1.0 / (4.0 * epsilon**2 * L**3)
        + 3.0 / (8j * epsilon**3 * L**5)
    )
    tail_err = 15.0 / (16.0 * epsilon**4 * L**7)
    return FresnelValue(val + tail, err + tail_err)
