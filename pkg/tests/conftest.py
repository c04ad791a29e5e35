import numpy as np
import pytest

from lzlab import _rk, make_params
from lzlab.solver import SolverOptions, integrate_coupled, integrate_second_order


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    # compile the stepping kernels once so timed assertions see steady state
    _rk.warmup()


@pytest.fixture(scope="session")
def params_eps4():
    return make_params(4.0)


@pytest.fixture(scope="session")
def traj_eps4(params_eps4, warm_jit):
    return integrate_coupled(params_eps4)


@pytest.fixture(scope="session")
def traj_eps4_second(params_eps4, warm_jit):
    return integrate_second_order(params_eps4)


@pytest.fixture(scope="session")
def traj_eps4_asym(params_eps4, warm_jit):
    return integrate_coupled(params_eps4, SolverOptions(initial_condition="asymptotic"))


@pytest.fixture(scope="session")
def check_run(tmp_path_factory, warm_jit):
    """One full invariant-suite run shared by the CLI and acceptance tests."""
    import json
    import time

    from click.testing import CliRunner

    from lzlab.cli import cli

    out = tmp_path_factory.mktemp("check")
    t0 = time.perf_counter()
    result = CliRunner().invoke(cli, ["check", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    report = json.loads((out / "check_report.json").read_text())
    return result, report, elapsed


def last_period_mask(tau, epsilon):
    """Samples inside the final full Stueckelberg period before tau[-1]."""
    theta_max = epsilon * tau[-1] ** 2
    tau_lo = np.sqrt((theta_max - 2.0 * np.pi) / epsilon)
    return tau >= tau_lo


def period_average(tau, values, epsilon):
    m = last_period_mask(tau, epsilon)
    return np.trapezoid(values[m], tau[m]) / (tau[m][-1] - tau[m][0])


def principal_angle(phi):
    return (phi + np.pi) % (2.0 * np.pi) - np.pi


def fd8(values, h):
    """Eighth-order central first derivative on a uniform grid.

    The outermost four samples at each end are garbage (np.roll wraps); the
    caller trims them.
    """
    w = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280]) / h
    out = np.zeros_like(values)
    for j, wj in enumerate(w):
        if wj != 0.0:
            out = out + wj * np.roll(values, 4 - j)
    return out
