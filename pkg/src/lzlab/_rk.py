"""Adaptive Dormand-Prince 5(4) propagation for the small complex systems
used throughout the package.

One jit-compiled driver serves four right-hand sides, selected by an integer
mode so numba compiles a single specialization:

  mode 0: coupled interaction-picture amplitudes (a, b)
          i a' = exp(-i eps tau^2) b,  i b' = exp(+i eps tau^2) a
  mode 1: second-order form (a, a')      a'' + 2 i eps tau a' + a = 0
  mode 2: Markov rate function (eta,)    eta' + 2 i eps tau eta - 1 = 0
  mode 3: linearized phase velocity (u, u') with u = phi_dot
          u'' - u'/tau + [(2 eps tau)^2 - 4] u = 2 eps tau
          (real system stored in the complex state; the caller never
          integrates mode 3 across tau = 0, see polar.solve_linearized_phase)

The driver lands exactly on every requested output node by clipping the step,
so stored samples need no interpolation.  fixed_h > 0 disables adaptivity and
subdivides each output interval into equal steps of roughly that size, which
is what the convergence-order measurements use.
"""
from __future__ import annotations

import numpy as np
from numba import njit

MODE_COUPLED = 0
MODE_SECOND_ORDER = 1
MODE_ETA = 2
MODE_LINEARIZED_PHASE = 3

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1


@njit(cache=True)
def _rhs(mode, t, y, eps, out):
    if mode == 0:
        ph = np.exp(-1j * eps * t * t)
        out[0] = -1j * ph * y[1]
        out[1] = -1j * y[0] / ph
    elif mode == 1:
        out[0] = y[1]
        out[1] = -2j * eps * t * y[1] - y[0]
    elif mode == 2:
        out[0] = 1.0 - 2j * eps * t * y[0]
    else:
        out[0] = y[1]
        w = 2.0 * eps * t
        out[1] = y[1] / t - (w * w - 4.0) * y[0] + w


@njit(cache=True)
def _step(mode, t, y, h, eps, k, ynew, yerr):
    # Dormand-Prince 5(4); k[0] holds f(t, y) on entry (FSAL), k[6] holds
    # f(t+h, ynew) on exit.
    dim = y.shape[0]
    for i in range(dim):
        ynew[i] = y[i] + h * 0.2 * k[0, i]
    _rhs(mode, t + 0.2 * h, ynew, eps, k[1])
    for i in range(dim):
        ynew[i] = y[i] + h * (3.0 / 40.0 * k[0, i] + 9.0 / 40.0 * k[1, i])
    _rhs(mode, t + 0.3 * h, ynew, eps, k[2])
    for i in range(dim):
        ynew[i] = y[i] + h * (44.0 / 45.0 * k[0, i] - 56.0 / 15.0 * k[1, i]
                              + 32.0 / 9.0 * k[2, i])
    _rhs(mode, t + 0.8 * h, ynew, eps, k[3])
    for i in range(dim):
        ynew[i] = y[i] + h * (19372.0 / 6561.0 * k[0, i] - 25360.0 / 2187.0 * k[1, i]
                              + 64448.0 / 6561.0 * k[2, i] - 212.0 / 729.0 * k[3, i])
    _rhs(mode, t + 8.0 / 9.0 * h, ynew, eps, k[4])
    for i in range(dim):
        ynew[i] = y[i] + h * (9017.0 / 3168.0 * k[0, i] - 355.0 / 33.0 * k[1, i]
                              + 46732.0 / 5247.0 * k[2, i] + 49.0 / 176.0 * k[3, i]
                              - 5103.0 / 18656.0 * k[4, i])
    _rhs(mode, t + h, ynew, eps, k[5])
    for i in range(dim):
        ynew[i] = y[i] + h * (35.0 / 384.0 * k[0, i] + 500.0 / 1113.0 * k[2, i]
                              + 125.0 / 192.0 * k[3, i] - 2187.0 / 6784.0 * k[4, i]
                              + 11.0 / 84.0 * k[5, i])
    _rhs(mode, t + h, ynew, eps, k[6])
    for i in range(dim):
        yerr[i] = h * (71.0 / 57600.0 * k[0, i] - 71.0 / 16695.0 * k[2, i]
                       + 71.0 / 1920.0 * k[3, i] - 17253.0 / 339200.0 * k[4, i]
                       + 22.0 / 525.0 * k[5, i] - 1.0 / 40.0 * k[6, i])


@njit(cache=True)
def integrate_grid(mode, eps, t_out, y0, rtol, atol, fixed_h):
    """Propagate y0 from t_out[0], storing the state at every output node.

    Returns (Y, n_steps, n_rejected, status, t_fail).
    """
    n_out = t_out.shape[0]
    dim = y0.shape[0]
    Y = np.empty((n_out, dim), dtype=np.complex128)
    y = y0.copy()
    ynew = np.empty(dim, dtype=np.complex128)
    yerr = np.empty(dim, dtype=np.complex128)
    k = np.empty((7, dim), dtype=np.complex128)
    for i in range(dim):
        Y[0, i] = y[i]
    t = t_out[0]
    _rhs(mode, t, y, eps, k[0])
    h = -1.0
    n_steps = 0
    n_rej = 0
    for i_out in range(1, n_out):
        t_target = t_out[i_out]
        if fixed_h > 0.0:
            n_sub = max(1, int(np.rint((t_target - t) / fixed_h)))
            hs = (t_target - t) / n_sub
            for _ in range(n_sub):
                _step(mode, t, y, hs, eps, k, ynew, yerr)
                for i in range(dim):
                    y[i] = ynew[i]
                    k[0, i] = k[6, i]
                t += hs
                n_steps += 1
            t = t_target
        else:
            if h <= 0.0:
                sc = 0.0
                for i in range(dim):
                    m = abs(k[0, i])
                    if m > sc:
                        sc = m
                h = min(1e-2, t_target - t)
                if sc > 1.0:
                    h = min(h, 1e-2 / sc)
            while t < t_target:
                clipped = False
                if h >= t_target - t:
                    h_try = t_target - t
                    clipped = True
                else:
                    h_try = h
                _step(mode, t, y, h_try, eps, k, ynew, yerr)
                err = 0.0
                for i in range(dim):
                    ay = abs(y[i])
                    ayn = abs(ynew[i])
                    sc = atol + rtol * (ay if ay > ayn else ayn)
                    e = abs(yerr[i]) / sc
                    err += e * e
                err = np.sqrt(err / dim)
                if err <= 1.0:
                    t = t_target if clipped else t + h_try
                    for i in range(dim):
                        y[i] = ynew[i]
                        k[0, i] = k[6, i]
                    n_steps += 1
                    fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                    h = h_try * fac
                else:
                    n_rej += 1
                    h = h_try * max(0.2, 0.9 * err ** -0.2)
                if h < 1e-14 * (abs(t) + 1.0):
                    return Y, n_steps, n_rej, STATUS_STEP_UNDERFLOW, t
        for i in range(dim):
            Y[i_out, i] = y[i]
    return Y, n_steps, n_rej, STATUS_OK, t_out[n_out - 1]


def warmup() -> None:
    """Trigger jit compilation of all modes on a tiny problem."""
    t = np.array([-0.5, 0.5])
    for mode, dim in ((MODE_COUPLED, 2), (MODE_SECOND_ORDER, 2), (MODE_ETA, 1)):
        y0 = np.zeros(dim, dtype=np.complex128)
        y0[0] = 1.0
        integrate_grid(mode, 1.0, t, y0, 1e-8, 1e-10, -1.0)
        integrate_grid(mode, 1.0, t, y0, 1e-8, 1e-10, 0.1)
    integrate_grid(
        MODE_LINEARIZED_PHASE, 1.0, np.array([-2.0, -1.0]),
        np.array([0.1 + 0j, 0.01 + 0j]), 1e-8, 1e-10, -1.0,
    )
