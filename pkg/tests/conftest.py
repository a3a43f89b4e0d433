import numpy as np
import pytest

from gpgfill.instances.adversarial import gen_adversarial
from gpgfill.model import TIME_INVARIANT, TIME_VARYING, Instance


def make_instance(orders, inventory, fixed, costs, regime=TIME_VARYING, bounds=None):
    """Build an instance; ``costs`` may be a (K+1, n) matrix repeated over the horizon."""
    orders = np.atleast_2d(np.asarray(orders, dtype=np.int64))
    costs = np.asarray(costs, dtype=np.float64)
    if costs.ndim == 2:
        costs = np.repeat(costs[:, None, :], orders.shape[0], axis=1)
    return Instance(
        fixed_costs=fixed,
        variable_costs=costs,
        initial_inventory=inventory,
        orders=orders,
        cost_regime=regime,
        cost_bounds=bounds,
    )


@pytest.fixture
def depletion2():
    return gen_adversarial("greedy-depletion", M=2)[0]


@pytest.fixture
def two_fdc():
    # two FDCs, each stocking a different item
    return make_instance(
        orders=[[1, 1], [1, 0], [0, 2]],
        inventory=[[1, 0], [0, 2]],
        fixed=[5.0, 3.0, 3.0],
        costs=[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]],
        regime=TIME_INVARIANT,
        bounds=(1.0, 1.0),
    )


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import CRITERIA, LINES

    if not LINES:
        return
    terminalreporter.section("acceptance criteria")
    for suite in CRITERIA:
        if suite in LINES:
            terminalreporter.write_line(LINES[suite])
