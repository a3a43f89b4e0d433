import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from gpgfill.baselines.aggregate_lp import (
    LpSolution,
    OrderTypeDistribution,
    UnsupportedInputError,
    build_aggregate_lp,
    solve_lp,
)
from gpgfill.baselines.ipfc import IpfcPolicy, ipfc_decide
from gpgfill.baselines.myopic import MyopicPolicy, myopic_decide
from gpgfill.baselines.simplex import LpIterationLimit, simplex
from gpgfill.instances.stochastic import StochasticConfig, gen_stochastic
from gpgfill.model import TIME_INVARIANT, ConfigurationError, period_cost, run_policy

# ------------------------------------------------------------------ myopic

F = np.array([5.0, 3.0, 3.0])
SPLIT_STOCK = np.array([[1, 0], [0, 1]])


def test_myopic_prefers_single_rdc_shipment():
    plan = myopic_decide(np.array([1, 1]), SPLIT_STOCK, np.ones((3, 2)), F)
    assert plan.tolist() == [[1, 1], [0, 0], [0, 0]]
    assert period_cost(plan, F, np.ones((3, 2))) == 7.0


def test_myopic_uses_both_fdcs_when_rdc_is_expensive():
    f = np.array([10.0, 3.0, 3.0])
    plan = myopic_decide(np.array([1, 1]), SPLIT_STOCK, np.ones((3, 2)), f)
    assert plan.tolist() == [[0, 0], [1, 0], [0, 1]]
    assert period_cost(plan, f, np.ones((3, 2))) == 8.0


def test_myopic_empty_order():
    assert not myopic_decide(np.array([0, 0]), SPLIT_STOCK, np.ones((3, 2)), F).any()


def test_myopic_refuses_large_K():
    with pytest.raises(ConfigurationError):
        myopic_decide(np.array([1]), np.ones((3, 1), dtype=int), np.ones((4, 1)), np.ones(4), max_K=2)


def _cheapest_plan(order, inv, costs, f):
    K1, n = costs.shape
    options = []
    for i in range(n):
        per = []
        for split in itertools.product(range(order[i] + 1), repeat=K1 - 1):
            if sum(split) <= order[i] and all(split[k] <= inv[k, i] for k in range(K1 - 1)):
                per.append((order[i] - sum(split),) + split)
        options.append(per)
    best = math.inf
    for combo in itertools.product(*options):
        plan = np.array(combo).T
        best = min(best, period_cost(plan, f, costs))
    return best


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_myopic_is_per_order_optimal(seed):
    rng = np.random.default_rng(seed)
    n, K = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    order = rng.integers(0, 3, size=n)
    inv = rng.integers(0, 3, size=(K, n))
    costs = rng.uniform(0.5, 3, size=(K + 1, n))
    f = rng.uniform(0, 5, size=K + 1)
    plan = myopic_decide(order, inv, costs, f)
    assert plan.sum(axis=0).tolist() == order.tolist()
    assert (plan[1:] <= inv).all()
    assert period_cost(plan, f, costs) == pytest.approx(_cheapest_plan(order, inv, costs, f), abs=1e-9)


# ------------------------------------------------------------------ simplex

def test_simplex_small_program():
    # max x + y s.t. x + 2y <= 4, 3x + y <= 6
    res = simplex([-1.0, -1.0], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
    assert res.status == "optimal"
    assert res.objective == pytest.approx(-2.8)
    assert res.x == pytest.approx([1.6, 1.2])


def test_simplex_infeasible():
    res = simplex([1.0], A_eq=[[1.0]], b_eq=[2.0], upper=[1.0])
    assert res.status == "infeasible"


def test_simplex_unbounded():
    res = simplex([-1.0, 0.0], A_ub=[[0.0, 1.0]], b_ub=[1.0])
    assert res.status == "unbounded"


def test_simplex_iteration_limit():
    rng = np.random.default_rng(1)
    A = rng.uniform(0, 1, size=(20, 30))
    with pytest.raises(LpIterationLimit) as err:
        simplex(-rng.uniform(0, 1, 30), A_ub=A, b_ub=np.ones(20), max_iter=2)
    assert err.value.iterations == 2


@pytest.mark.parametrize("seed", range(40))
def test_simplex_agrees_with_highs(seed):
    rng = np.random.default_rng(seed)
    m_ub, m_eq, nv = int(rng.integers(1, 6)), int(rng.integers(0, 3)), int(rng.integers(2, 8))
    A_ub = rng.uniform(-1, 2, size=(m_ub, nv))
    b_ub = rng.uniform(0, 5, size=m_ub)
    A_eq = rng.uniform(0, 1, size=(m_eq, nv))
    b_eq = rng.uniform(0.5, 2, size=m_eq)
    c = rng.uniform(-2, 2, size=nv)
    upper = np.where(rng.random(nv) < 0.5, 3.0, np.inf)
    ours = simplex(c, A_ub, b_ub, A_eq if m_eq else None, b_eq if m_eq else None, upper=upper)
    ref = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq if m_eq else None, b_eq=b_eq if m_eq else None,
                  bounds=[(0, u if np.isfinite(u) else None) for u in upper], method="highs")
    expected = {0: "optimal", 2: "infeasible", 3: "unbounded"}[ref.status]
    assert ours.status == expected
    if expected == "optimal":
        assert ours.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)


# ------------------------------------------------------------------ aggregate LP

def _hand_lp():
    dist = OrderTypeDistribution(((0,),), (1.0,))
    return build_aggregate_lp(dist, [10.0, 1.0], np.array([[5.0], [1.0]]), np.array([[1]]), 2)


@pytest.mark.parametrize("method", ["simplex", "highs"])
def test_hand_lp(method):
    lp = _hand_lp()
    assert lp.n_vars == 4
    sol = solve_lp(lp, method)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(17.0, abs=1e-6)
    assert sol.x(lp, 0)[0].tolist() == pytest.approx([0.5, 0.5])


def test_ample_stock_moves_everything_to_the_fdc():
    dist = OrderTypeDistribution(((0, 1), (1,)), (0.5, 0.5))
    lp = build_aggregate_lp(dist, [10.0, 1.0], np.array([[5.0, 5.0], [1.0, 1.0]]), np.array([[100, 100]]), 4)
    sol = solve_lp(lp)
    for q in range(2):
        assert sol.x(lp, q)[:, 1] == pytest.approx(1.0)


def test_zero_probability_type_still_sums_to_one():
    dist = OrderTypeDistribution(((0,), (1,)), (1.0, 0.0))
    lp = build_aggregate_lp(dist, [2.0, 1.0], np.ones((2, 2)), np.array([[1, 1]]), 3)
    sol = solve_lp(lp)
    assert sol.x(lp, 1).sum() == pytest.approx(1.0)


def test_infeasible_lp_reported():
    lp = _hand_lp()
    lp.upper = np.zeros(lp.n_vars)
    assert solve_lp(lp, "simplex").status == "infeasible"
    assert solve_lp(lp, "highs").status == "infeasible"


def test_singleton_types_match_per_type_myopic():
    # with stock caps that never bind, each singleton type is served as myopic would serve it
    f = np.array([4.0, 1.0, 2.0])
    costs = np.array([[1.0, 3.0], [2.0, 1.5], [0.5, 1.0]])
    dist = OrderTypeDistribution(((0,), (1,)), (0.3, 0.7))
    T = 5
    lp = build_aggregate_lp(dist, f, costs, np.full((2, 2), 100), T)
    expected = 0.0
    for q, lam in zip(dist.types, dist.probs):
        order = np.zeros(2, dtype=int)
        order[list(q)] = 1
        plan = myopic_decide(order, np.full((2, 2), 100), costs, f)
        expected += T * lam * period_cost(plan, f, costs)
    assert solve_lp(lp).objective == pytest.approx(expected)


def test_lp_never_exceeds_per_type_myopic():
    rng = np.random.default_rng(3)
    for _ in range(10):
        f = rng.uniform(0, 5, size=3)
        costs = rng.uniform(1, 3, size=(3, 3))
        dist = OrderTypeDistribution(((0, 1), (1, 2), (0, 1, 2)), (0.2, 0.3, 0.5))
        inv = np.full((2, 3), 50)
        lp = build_aggregate_lp(dist, f, costs, inv, 4)
        bound = 0.0
        for q, lam in zip(dist.types, dist.probs):
            order = np.zeros(3, dtype=int)
            order[list(q)] = 1
            bound += 4 * lam * period_cost(myopic_decide(order, inv, costs, f), f, costs)
        assert solve_lp(lp).objective <= bound + 1e-9


def test_solvers_agree_on_generated_setups():
    cfg = StochasticConfig(n=8, K=2, T=40, order_sizes=(1, 2, 3), type_counts=(3, 3, 2), size_probs=(0.5, 0.3, 0.2),
                           regime=TIME_INVARIANT, tau=0.5)
    for seed in range(3):
        inst = gen_stochastic(cfg, seed)
        dist = OrderTypeDistribution.from_meta(inst.meta)
        lp = build_aggregate_lp(dist, inst.fixed_costs, inst.costs_at(0), inst.initial_inventory, inst.T)
        a, b = solve_lp(lp, "simplex"), solve_lp(lp, "highs")
        assert a.objective == pytest.approx(b.objective, rel=1e-6)
        assert max(a.residuals.values()) <= 1e-7


def test_bad_order_types():
    with pytest.raises(UnsupportedInputError):
        OrderTypeDistribution(((0, 0),), (1.0,))
    with pytest.raises(UnsupportedInputError):
        build_aggregate_lp(OrderTypeDistribution(((5,),), (1.0,)), [1.0, 1.0], np.ones((2, 2)), np.ones((1, 2)), 1)


def test_solution_json_round_trip():
    sol = solve_lp(_hand_lp())
    again = LpSolution.from_json(json.loads(json.dumps(sol.to_json())))
    assert again.objective == sol.objective
    assert np.array_equal(again.values, sol.values)


# ------------------------------------------------------------------ IPFC

def _one_type_lp(shares, stock):
    dist = OrderTypeDistribution(((0,),), (1.0,))
    lp = build_aggregate_lp(dist, [1.0, 1.0], np.ones((2, 1)), np.array([[stock]]), 1)
    values = np.zeros(lp.n_vars)
    values[lp.x_index(0, 0, 0)], values[lp.x_index(0, 0, 1)] = shares
    return lp, LpSolution("optimal", 0.0, values)


def test_rdc_share_one_always_ships_from_rdc():
    lp, sol = _one_type_lp((1.0, 0.0), 5)
    rng = np.random.default_rng(0)
    for _ in range(50):
        plan, fallbacks = ipfc_decide(0, np.array([1]), lp, sol, np.array([[5]]), rng)
        assert plan.tolist() == [[1], [0]] and fallbacks == 0


def test_empty_fdc_falls_back_to_rdc():
    lp, sol = _one_type_lp((0.0, 1.0), 0)
    plan, fallbacks = ipfc_decide(0, np.array([1]), lp, sol, np.array([[0]]), np.random.default_rng(0))
    assert plan.tolist() == [[1], [0]]
    assert fallbacks == 1


def test_rounding_matches_lp_shares():
    lp, sol = _one_type_lp((0.5, 0.5), 10**6)
    rng = np.random.default_rng(7)
    inv = np.array([[10**6]])
    fdc = sum(int(ipfc_decide(0, np.array([1]), lp, sol, inv, rng)[0][1, 0]) for _ in range(10_000))
    assert abs(fdc / 10_000 - 0.5) <= 0.02


def test_ipfc_runs_and_counts_unknown_orders():
    cfg = StochasticConfig(n=6, K=2, T=30, order_sizes=(1, 2), type_counts=(2, 2), size_probs=(0.5, 0.5),
                           regime=TIME_INVARIANT, tau=1.0)
    inst = gen_stochastic(cfg, 0)
    res = run_policy(inst, IpfcPolicy(), seed=0)
    assert res.notes["unknown_types"] == 0
    assert "lp_objective" in res.notes
    odd = inst.orders.copy()
    odd[0] = 0
    odd[0, :3] = 1
    other = run_policy(inst.with_changes(orders=odd), IpfcPolicy(), seed=0)
    assert other.notes["unknown_types"] >= 1
    assert other.trace[0].plan[1:].sum() == 0 or not inst.orders[0].any()


def test_ipfc_cache(tmp_path):
    cfg = StochasticConfig(n=6, K=2, T=30, order_sizes=(1, 2), type_counts=(2, 2), size_probs=(0.5, 0.5),
                           regime=TIME_INVARIANT, tau=1.0)
    inst = gen_stochastic(cfg, 0)
    first = run_policy(inst, IpfcPolicy(cache_dir=str(tmp_path)), seed=1)
    assert len(list(tmp_path.glob("lp-*.json"))) == 1
    second = run_policy(inst, IpfcPolicy(cache_dir=str(tmp_path)), seed=1)
    assert first.total_cost == second.total_cost


def test_ipfc_requirements():
    cfg = StochasticConfig(n=6, K=2, T=10, order_sizes=(1,), type_counts=(3,), size_probs=(1.0,))
    with pytest.raises(ConfigurationError):
        run_policy(gen_stochastic(cfg, 0), IpfcPolicy())
    inst = gen_stochastic(cfg.replace(regime=TIME_INVARIANT), 0)
    with pytest.raises(ConfigurationError):
        run_policy(inst.with_changes(meta={}), IpfcPolicy())


def test_myopic_policy_never_gates():
    inst = gen_stochastic(StochasticConfig(n=10, K=2, T=30, order_sizes=(1, 3), type_counts=(3, 3),
                                           size_probs=(0.5, 0.5)), 0)
    assert run_policy(inst, MyopicPolicy()).gated_period_count == 0
