"""Shared domain types, parameter validation and grid construction.

The whole laboratory works in dimensionless variables: time tau = Omega * t
and the single coupling parameter epsilon = alpha / Omega**2 (chirp rate over
squared coupling).  Chirp ``alpha`` and coupling ``omega`` are accepted as
convenience inputs and reduced to epsilon immediately.

All types here are frozen value objects; they can be shared freely between
threads and never mutate after construction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

import numpy as np

__all__ = [
    "ConfigError",
    "Params",
    "State",
    "Trajectory",
    "PolarSample",
    "PolarTrajectory",
    "RateSample",
    "MarkovTrajectory",
    "make_params",
    "make_grid",
    "parse_config",
    "params_to_json",
]

#: relative tolerance for the epsilon == alpha/omega**2 consistency check
EPSILON_CONSISTENCY_RTOL = 1e-12

_CONFIG_KEYS = {"epsilon", "tau_min", "tau_max", "step", "quad_tol", "ode_tol"}


class ConfigError(ValueError):
    """Invalid physical or numerical configuration."""


@dataclass(frozen=True)
class Params:
    """Physical configuration plus numerical controls.

    epsilon   dimensionless ratio alpha/omega**2, > 0
    alpha     chirp rate, kept only when supplied as input
    omega     coupling constant, kept only when supplied as input
    tau_min   left end of the integration window, < 0
    tau_max   right end of the integration window, > 0
    step      nominal grid spacing, > 0
    quad_tol  quadrature tolerance
    ode_tol   integrator tolerance
    """

    epsilon: float
    tau_min: float = -20.0
    tau_max: float = 20.0
    step: float = 1e-3
    quad_tol: float = 1e-10
    ode_tol: float = 1e-9
    alpha: float | None = None
    omega: float | None = None


def make_params(
    epsilon: float | None = None,
    *,
    alpha: float | None = None,
    omega: float | None = None,
    tau_min: float = -20.0,
    tau_max: float = 20.0,
    step: float = 1e-3,
    quad_tol: float = 1e-10,
    ode_tol: float = 1e-9,
) -> Params:
    """Validate and normalize a parameter set.

    Either ``epsilon`` or the pair ``(alpha, omega)`` must be given.  When
    both are given they must agree to within 1e-12 relative.
    """
    if alpha is not None or omega is not None:
        if alpha is None or omega is None:
            raise ConfigError("alpha and omega must be supplied together")
        if alpha <= 0 or omega <= 0:
            raise ConfigError("alpha and omega must be positive")
        derived = alpha / omega**2
        if epsilon is None:
            epsilon = derived
        elif abs(epsilon - derived) > EPSILON_CONSISTENCY_RTOL * abs(derived):
            raise ConfigError(
                f"epsilon={epsilon} inconsistent with alpha/omega**2={derived}"
            )
    if epsilon is None:
        raise ConfigError("epsilon (or alpha and omega) is required")
    epsilon = float(epsilon)
    if not np.isfinite(epsilon) or epsilon <= 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    if not (tau_min < 0.0 < tau_max):
        raise ConfigError(f"window must satisfy tau_min < 0 < tau_max, got [{tau_min}, {tau_max}]")
    if not (np.isfinite(step) and step > 0):
        raise ConfigError(f"step must be positive, got {step}")
    if quad_tol <= 0 or ode_tol <= 0:
        raise ConfigError("tolerances must be positive")
    return Params(
        epsilon=epsilon,
        tau_min=float(tau_min),
        tau_max=float(tau_max),
        step=float(step),
        quad_tol=float(quad_tol),
        ode_tol=float(ode_tol),
        alpha=None if alpha is None else float(alpha),
        omega=None if omega is None else float(omega),
    )


def make_grid(params: Params) -> np.ndarray:
    """Uniform-per-side grid over [tau_min, tau_max] with tau = 0 as a node.

    Each side of the origin is uniform with spacing <= params.step; for
    symmetric windows the two spacings coincide and the grid is globally
    uniform and symmetric about 0.  tau=0 is always an exact grid point so
    the singular 1/tau coefficient of the linearized phase equation can be
    treated explicitly rather than by luck of spacing.
    """
    n_neg = int(np.ceil(-params.tau_min / params.step - 1e-12))
    n_pos = int(np.ceil(params.tau_max / params.step - 1e-12))
    neg = np.linspace(params.tau_min, 0.0, n_neg + 1)
    pos = np.linspace(0.0, params.tau_max, n_pos + 1)
    return np.concatenate([neg[:-1], pos])


@dataclass(frozen=True)
class State:
    """Interaction-picture amplitudes at one instant."""

    tau: float
    a: complex
    b: complex

    def norm_defect(self) -> float:
        return abs(1.0 - (abs(self.a) ** 2 + abs(self.b) ** 2))


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the coupled amplitude equations.

    Samples are stored as parallel arrays (tau strictly increasing, first
    entry at tau_min); ``state_at`` and iteration provide the per-sample
    State view.
    """

    params: Params
    tau: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        if len(self.tau) == 0:
            raise ValueError("trajectory must contain at least one sample")
        if np.any(np.diff(self.tau) <= 0):
            raise ValueError("trajectory tau values must be strictly increasing")

    def __len__(self) -> int:
        return len(self.tau)

    def state_at(self, i: int) -> State:
        return State(float(self.tau[i]), complex(self.a[i]), complex(self.b[i]))

    def __iter__(self) -> Iterator[State]:
        return (self.state_at(i) for i in range(len(self)))

    @property
    def samples(self) -> list[State]:
        return list(self)

    def norm_defect(self) -> np.ndarray:
        return np.abs(1.0 - (np.abs(self.a) ** 2 + np.abs(self.b) ** 2))

    def interpolate(self, t: float) -> tuple[complex, complex]:
        """Linear-in-step interpolation of (a, b) between stored samples."""
        re_a = np.interp(t, self.tau, self.a.real)
        im_a = np.interp(t, self.tau, self.a.imag)
        re_b = np.interp(t, self.tau, self.b.real)
        im_b = np.interp(t, self.tau, self.b.imag)
        return complex(re_a, im_a), complex(re_b, im_b)


@dataclass(frozen=True)
class PolarSample:
    """Polar decomposition a = A exp(i phi) with analytic phase derivatives."""

    tau: float
    A: float
    phi: float
    phi_dot: float
    phi_ddot: float
    phi_dddot: float


@dataclass(frozen=True)
class PolarTrajectory:
    """Amplitude/phase view of a trajectory, phi on a continuous branch.

    A_dot and A_ddot are carried along because the polar equations of motion
    need them; they come from the same analytic derivative chain as the phase
    derivatives, never from finite differencing.
    """

    params: Params
    tau: np.ndarray
    A: np.ndarray
    phi: np.ndarray
    phi_dot: np.ndarray
    phi_ddot: np.ndarray
    phi_dddot: np.ndarray
    A_dot: np.ndarray
    A_ddot: np.ndarray

    def __len__(self) -> int:
        return len(self.tau)

    def sample_at(self, i: int) -> PolarSample:
        return PolarSample(
            float(self.tau[i]),
            float(self.A[i]),
            float(self.phi[i]),
            float(self.phi_dot[i]),
            float(self.phi_ddot[i]),
            float(self.phi_dddot[i]),
        )

    @property
    def samples(self) -> list[PolarSample]:
        return [self.sample_at(i) for i in range(len(self))]


@dataclass(frozen=True)
class RateSample:
    """Markov rate function and the Markov solution built from it."""

    tau: float
    eta: complex
    A_M: float
    phi_M: float


@dataclass(frozen=True)
class MarkovTrajectory:
    """Markov rate function eta sampled on a grid, with the cumulative
    amplitude A_M and phase phi_M when they have been computed.

    phi_M is referenced to zero at tau_min.
    """

    params: Params
    tau: np.ndarray
    eta: np.ndarray
    A_M: np.ndarray | None = None
    phi_M: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.tau)

    def sample_at(self, i: int) -> RateSample:
        if self.A_M is None or self.phi_M is None:
            raise ValueError("A_M/phi_M not computed for this trajectory")
        return RateSample(
            float(self.tau[i]),
            complex(self.eta[i]),
            float(self.A_M[i]),
            float(self.phi_M[i]),
        )

    @property
    def samples(self) -> list[RateSample]:
        return [self.sample_at(i) for i in range(len(self))]


def _format_float(x: float) -> str:
    # repr round-trips doubles exactly, keeping serialize->parse->serialize
    # byte-identical
    return repr(float(x))


def params_to_json(params: Params) -> str:
    """Canonical JSON form of a Params (sorted keys, repr floats)."""
    items: list[tuple[str, str]] = []
    if params.alpha is not None and params.omega is not None:
        items.append(
            (
                "epsilon",
                '{"alpha": %s, "omega": %s}'
                % (_format_float(params.alpha), _format_float(params.omega)),
            )
        )
    else:
        items.append(("epsilon", _format_float(params.epsilon)))
    for key in ("ode_tol", "quad_tol", "step", "tau_max", "tau_min"):
        items.append((key, _format_float(getattr(params, key))))
    items.sort(key=lambda kv: kv[0])
    return "{" + ", ".join(f'"{k}": {v}' for k, v in items) + "}"


def parse_config(text_or_dict: str | dict) -> Params:
    """Parse the JSON config format.

    Schema: {"epsilon": number | {"alpha": number, "omega": number},
    "tau_min": number, "tau_max": number, "step": number,
    "quad_tol": number, "ode_tol": number}.  Unknown keys are rejected.
    """
    if isinstance(text_or_dict, str):
        try:
            data = json.loads(text_or_dict)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
    else:
        data = dict(text_or_dict)
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs: dict = {}
    eps_entry = data.get("epsilon")
    if isinstance(eps_entry, dict):
        extra = set(eps_entry) - {"alpha", "omega"}
        if extra:
            raise ConfigError(f"unknown keys in epsilon object: {sorted(extra)}")
        kwargs["alpha"] = eps_entry.get("alpha")
        kwargs["omega"] = eps_entry.get("omega")
        epsilon = None
    elif eps_entry is None:
        epsilon = None
    elif isinstance(eps_entry, (int, float)) and not isinstance(eps_entry, bool):
        epsilon = float(eps_entry)
    else:
        raise ConfigError(f"epsilon must be a number or alpha/omega object, got {eps_entry!r}")
    for key in ("tau_min", "tau_max", "step", "quad_tol", "ode_tol"):
        if key in data:
            value = data[key]
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{key} must be a number, got {value!r}")
            kwargs[key] = float(value)
    return make_params(epsilon, **kwargs)
