"""Numerical laboratory for Landau-Zener dynamics.

Exact propagation of the two-level crossing, the Markov rate-function
treatment (Fresnel integrals, reflection identity, exact transition
formula), and the amplitude/phase decomposition with its nonlinear and
linearized phase equations.
"""

__version__ = "0.1.0"

from .params import (  # noqa: F401
    ConfigError,
    MarkovTrajectory,
    Params,
    PolarSample,
    PolarTrajectory,
    RateSample,
    State,
    Trajectory,
    make_grid,
    make_params,
    params_to_json,
    parse_config,
)
from .fresnel import (  # noqa: F401
    FresnelValue,
    fresnel_F,
    fresnel_asymptotic,
    gauss_integral,
)
from .solver import (  # noqa: F401
    SolverError,
    SolverOptions,
    derivatives,
    integrate_coupled,
    integrate_second_order,
)
from .markov import (  # noqa: F401
    eta_direct,
    eta_ode,
    eta_quadrature,
    lz_formula,
    lz_integral,
    markov_solution,
    stueckelberg_cancellation,
)
from .polar import (  # noqa: F401
    PoleDiagnostic,
    StueckelbergFit,
    amplitude_from_phase,
    find_denominator_zero,
    fit_stueckelberg,
    markov_phase_velocity,
    nonlinear_phase_residual,
    polar_decompose,
    polar_from_markov,
    polar_residuals,
    solve_linearized_phase,
    sqrt_phase_velocity,
)
