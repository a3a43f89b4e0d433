import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpgfill.baselines.myopic import MyopicPolicy
from gpgfill.instances.adversarial import gen_adversarial
from gpgfill.instances.tiny import random_tiny
from gpgfill.model import TIME_INVARIANT, ConfigurationError, run_policy, trace_cost
from gpgfill.oracles import (
    ANALYTIC_EXACT,
    ANALYTIC_UPPER,
    BRUTE_FORCE,
    OptResult,
    StateSpaceOverflow,
    analytic_opt,
    bruteforce_opt,
)
from gpgfill.oracles import bounds
from gpgfill.policies import POLICY_NAMES, make_policy

from .conftest import make_instance


def test_depletion_optimum(depletion2):
    res = bruteforce_opt(depletion2)
    assert res.opt_cost == 3.0
    assert res.method == BRUTE_FORCE and res.exact
    assert trace_cost(depletion2, res.opt_plan) == 3.0


def test_fixed_cost_pair_first_member():
    first, second = gen_adversarial("fixed-cost-pair", n=3, f=[5.0], f0=50.0, a=8.0)
    assert bruteforce_opt(first).opt_cost == 29.0
    assert second.meta["annotations"] == {"opt_cost": 113.0, "method": ANALYTIC_UPPER}
    assert bruteforce_opt(second).opt_cost <= 113.0


def test_block_table_first_member():
    res = analytic_opt("block-table", {"s": 1, "d": 1, "n": 2, "K": 2, "c0": 1.0, "c1": 0.01, "c2": 1.0,
                                       "f0": 10.0, "f": [5.0, 5.0]})
    assert res.opt_cost == pytest.approx(5.04)
    assert res.method == ANALYTIC_EXACT


def test_zero_orders_have_zero_optimum():
    inst = make_instance(np.zeros((2, 2)), [[1, 1]], [3.0, 1.0], np.ones((2, 2)))
    assert bruteforce_opt(inst).opt_cost == 0.0


def test_state_space_guard():
    inst = make_instance(np.full((5, 3), 3), np.full((3, 3), 3), [1.0] * 4, np.ones((4, 3)))
    with pytest.raises(StateSpaceOverflow):
        bruteforce_opt(inst, max_states=100)


def test_unknown_family():
    with pytest.raises(ConfigurationError):
        analytic_opt("no-such-family", {})


def _exhaustive(inst):
    """Reference optimum by enumerating whole plan sequences (only for very small cases)."""
    K1, n = inst.K + 1, inst.n
    best = math.inf

    def per_period(order, inv):
        choices = []
        for i in range(n):
            opts = []
            for split in itertools.product(range(int(order[i]) + 1), repeat=inst.K):
                if sum(split) <= order[i] and all(split[k] <= inv[k][i] for k in range(inst.K)):
                    opts.append(split)
            choices.append(opts)
        for combo in itertools.product(*choices):
            plan = np.zeros((K1, n), dtype=np.int64)
            for i, split in enumerate(combo):
                plan[1:, i] = split
                plan[0, i] = order[i] - sum(split)
            yield plan

    def rec(t, inv, plans):
        nonlocal best
        if t == inst.T:
            best = min(best, trace_cost(inst, plans))
            return
        for plan in per_period(inst.orders[t], inv):
            rec(t + 1, [[inv[k][i] - plan[k + 1, i] for i in range(n)] for k in range(inst.K)], plans + [plan])

    rec(0, inst.initial_inventory.tolist(), [])
    return best


@pytest.mark.parametrize("seed", range(25))
def test_bruteforce_matches_plan_enumeration(seed):
    rng = np.random.default_rng(seed)
    inst = random_tiny(rng, n_max=2, K_max=2, T_max=3, S_max=2, I_max=2)
    assert bruteforce_opt(inst, audit_fraction=0.5).opt_cost == pytest.approx(_exhaustive(inst), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), name=st.sampled_from(POLICY_NAMES + ("myopic",)))
def test_no_policy_beats_the_optimum(seed, name):
    rng = np.random.default_rng(seed)
    inst = random_tiny(rng, regime=TIME_INVARIANT if seed % 2 else "time-varying", K=1 if seed % 3 == 0 else None)
    policy = MyopicPolicy() if name == "myopic" else make_policy(name)
    try:
        alg = run_policy(inst, policy, seed=seed).total_cost
    except ConfigurationError:
        return
    assert bruteforce_opt(inst, want_plan=False).opt_cost <= alg + 1e-9


# ---------------------------------------------------------------- formulas

def test_gap_constants():
    assert bounds.MULTI_VARYING_GAP == pytest.approx(6.4721, abs=1e-4)
    assert bounds.MULTI_VARYING_GAP <= 6.473
    assert bounds.SINGLE_VARYING_GAP == pytest.approx(19.8275, abs=1e-4)
    assert bounds.SINGLE_VARYING_GAP <= 19.828


def test_cost_comparison_upper_value():
    assert bounds.cost_comparison_upper(50, [5] * 10) == 20


def test_randomized_upper_branches():
    assert bounds.randomized_upper(0.5, 1.0) == pytest.approx(1.52241, abs=1e-5)
    assert bounds.randomized_upper(2.0, 1.0) == 3.0
    # the two branches meet at the golden-ratio threshold
    w = bounds.GOLDEN
    assert bounds.randomized_upper(w * (1 - 1e-12), 1.0) == pytest.approx(1 + w, abs=1e-9)


def test_single_invariant_lower():
    assert bounds.single_invariant_lower(3.0, 3.0) == 2.0
    assert bounds.single_invariant_lower(0.1, 1.0) == 1.25


def test_order_size_upper_at_default_threshold():
    from gpgfill.policies import theta_default

    theta = theta_default(50, 5, 8, 30)
    value = bounds.order_size_upper(50, 5, 8, 30, theta)
    # the default threshold equalizes the first two terms
    assert value == pytest.approx(max(theta, 30 / 8))
    assert theta == pytest.approx((50 + 30 * theta) / (5 + 8 * theta))


def test_domain_errors():
    with pytest.raises(bounds.DomainError):
        bounds.cost_comparison_upper(1.0, [0.0, 2.0])
    with pytest.raises(bounds.DomainError):
        bounds.bound_value("no-such-bound")
    with pytest.raises(bounds.DomainError):
        bounds.order_size_upper(1.0, 1.0, 0.0, 1.0, 1.0)


def test_bound_dispatch():
    assert bounds.bound_value("multi-invariant-lower", f0=50, f=[5] * 10) == 20.0


def test_split_size_integer_and_real():
    cross = bounds.split_crossing(100.0, 0.0, 1.0)
    assert cross == pytest.approx(10.0)
    assert bounds.best_split_size(100.0, 0.0, 1.0) == pytest.approx(10.0)
    assert bounds.best_split_size(1.0, 0.0, 1.0) == pytest.approx(0.5)
    assert bounds.best_split_size(1.0, 0.0, 1.0, integer_n=False) == pytest.approx(1.0)


def test_ratio_values():
    assert bounds.competitive_ratio(4, OptResult(3.0, ANALYTIC_EXACT)).value == pytest.approx(4 / 3)
    assert bounds.competitive_ratio(7.5, OptResult(7.5, BRUTE_FORCE)).value == 1.0
    loose = bounds.competitive_ratio(5, OptResult(4.0, ANALYTIC_UPPER))
    assert loose.value == 1.25 and loose.lower_bound_only
    assert bounds.competitive_ratio(0, OptResult(0.0, BRUTE_FORCE)).value == 1.0
    assert bounds.competitive_ratio(1, OptResult(0.0, BRUTE_FORCE)).value == math.inf


@settings(max_examples=300)
@given(
    f0=st.floats(1e-2, 1e4),
    f=st.floats(1e-2, 1e3),
    a=st.floats(1e-2, 1e2),
    r=st.floats(1.0, 1e3),
)
def test_upper_bounds_dominate_lower_bounds(f0, f, a, r):
    from gpgfill.policies import theta_default

    b = a * r
    ub = bounds.order_size_upper(f0, f, a, b, theta_default(f0, f, a, b))
    lb = bounds.multi_varying_lower(f0, f, a, b, integer_n=False)
    assert lb <= ub * (1 + 1e-9)
    assert ub / lb <= 6.473
    assert bounds.better_of_two_upper(f0, f, a, b) <= bounds.better_of_two_upper_relaxed(f0, f, a, b) * (1 + 1e-9) \
        or f0 < f
    assert bounds.better_of_two_upper_relaxed(f0, f, a, b) / bounds.single_varying_lower(
        f0, f, a, b, integer_n=False
    ) <= 19.828


def test_block_table_ratio_grows_with_n():
    # finite members only approach the lower bound, so check the trend
    ratios = []
    for n in (2, 4, 8, 16):
        inst = gen_adversarial("block-table", n=n, c1=1e-3)[1]
        alg = run_policy(inst, make_policy("cost-comparison-v-priority")).total_cost
        ratios.append(alg / inst.meta["annotations"]["opt_cost"])
    assert ratios == sorted(ratios)
    assert ratios[-1] < bounds.bound_value("multi-invariant-lower", f0=10.0, f=[5.0, 5.0])
