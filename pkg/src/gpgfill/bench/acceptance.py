"""Executable acceptance criteria.

Every criterion returns a :class:`CriterionResult` carrying the measured
values next to the threshold; nothing here relaxes a tolerance to force a pass.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..baselines.aggregate_lp import OrderTypeDistribution, build_aggregate_lp, solve_lp
from ..baselines.ipfc import IpfcPolicy
from ..baselines.myopic import MyopicPolicy
from ..instances.adversarial import gen_adversarial
from ..instances.stochastic import StochasticConfig, gen_stochastic
from ..instances.tiny import random_tiny
from ..model import (
    TIME_INVARIANT,
    TIME_VARYING,
    ConfigurationError,
    Instance,
    InventoryState,
    apply_plan,
    run_policy,
)
from ..oracles import bounds
from ..oracles.bruteforce import ANALYTIC_EXACT, bruteforce_opt
from ..policies import EXPLICIT, FIXED_COST, POLICY_NAMES, make_policy, theta_default
from ..rng import Streams, stream
from ..service import SessionStore
from .experiments import bound_ratios, sample_bound_params

TOL = 1e-9


@dataclass
class CriterionResult:
    number: int
    suite: str
    passed: bool
    summary: str
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:>2} {self.suite}: {self.summary} ({self.elapsed:.1f}s)"

    def to_json(self) -> dict:
        return {"number": self.number, "suite": self.suite, "passed": self.passed,
                "summary": self.summary, "elapsed": self.elapsed, "details": self.details}


# ------------------------------------------------------------------ helpers

def random_feasible_plans(instance: Instance, rng: np.random.Generator, count: int) -> list[list[np.ndarray]]:
    """Uniformly scatter every ordered unit over the DCs that still hold stock."""
    K1, n = instance.K + 1, instance.n
    out = []
    for _ in range(count):
        inv = instance.initial_inventory.copy()
        plans = []
        for t in range(instance.T):
            plan = np.zeros((K1, n), dtype=np.int64)
            for i in range(n):
                for _ in range(int(instance.orders[t, i])):
                    open_ = [0] + [k + 1 for k in range(instance.K) if inv[k, i] > 0]
                    k = open_[int(rng.integers(len(open_)))]
                    plan[k, i] += 1
                    if k:
                        inv[k - 1, i] -= 1
            plans.append(plan)
        out.append(plans)
    return out


def _static_ranking(decider, instance: Instance) -> np.ndarray:
    rule = decider.spec.rule
    if rule.kind not in (FIXED_COST, EXPLICIT) and instance.cost_regime != TIME_INVARIANT:
        raise ConfigurationError("ranking depends on time-varying costs")
    r = np.asarray(rule.ranking(decider.f, instance.costs_at(0)))
    return np.broadcast_to(r, (instance.n, instance.K + 1)) if r.ndim == 1 else r


def greedy_totals(instance: Instance, policy, seed: int):
    """Run ``policy`` and sum its per-period ungated greedy plans; also return the item rankings."""
    decider = policy.start(instance.header(), Streams(seed))
    ranking = _static_ranking(decider, instance)
    state = InventoryState(levels=instance.initial_inventory.copy())
    totals = np.zeros((instance.K + 1, instance.n), dtype=np.int64)
    for t in range(instance.T):
        plan, _ = decider.decide(instance.orders[t], instance.costs_at(t), state.levels.copy())
        totals += decider.last_greedy
        state = apply_plan(state, plan, instance.orders[t])
    return totals, ranking


def prefix_violations(instance: Instance, policy, seed: int, rng: np.random.Generator,
                      samples: int = 100, extra_plans=()) -> int:
    """Count (plan, item, prefix) triples where the greedy FDC prefix total falls short."""
    totals, ranking = greedy_totals(instance, policy, seed)
    plans = random_feasible_plans(instance, rng, samples) + [list(p) for p in extra_plans]
    bad = 0
    for plan in plans:
        star = np.sum(plan, axis=0)
        for i in range(instance.n):
            order = ranking[i].tolist()
            prefix = order[: order.index(0)]
            g = s = 0
            for k in prefix:
                g += int(totals[k, i])
                s += int(star[k, i])
                if g < s:
                    bad += 1
    return bad


def _tiny_ratio_check(number, suite, policy_name, regime, bound_fn, count, K=None, seed0=0):
    worst, worst_bound, failures, worst_at = 0.0, 0.0, 0, None
    checked = 0
    for s in range(count):
        rng = stream(seed0 + s, "instance")
        inst = random_tiny(rng, regime=regime, K=K)
        opt = bruteforce_opt(inst, want_plan=False)
        alg = run_policy(inst, make_policy(policy_name), seed=s, trace="costs").total_cost
        ratio = bounds.competitive_ratio(alg, opt).value
        bound = bound_fn(inst)
        checked += 1
        if ratio > bound + TOL:
            failures += 1
        if ratio / bound > (worst / worst_bound if worst_bound else 0.0):
            worst, worst_bound, worst_at = ratio, bound, s
    return CriterionResult(
        number, suite, failures == 0,
        f"{checked} instances, {failures} violations, worst ratio {worst:.4f} vs bound {worst_bound:.4f}",
        details={"failures": failures, "worst_ratio": worst, "worst_bound": worst_bound, "worst_seed": worst_at},
    )


# ---------------------------------------------------------------- criteria

def greedy_depletion_table() -> CriterionResult:
    rows, ok = {}, True
    for M in (2, 5, 10):
        inst = gen_adversarial("greedy-depletion", M=M)[0]
        fdc_first = run_policy(inst, make_policy("pure-greedy")).total_cost
        all_rdc = run_policy(inst, make_policy("all-rdc")).total_cost
        opt = bruteforce_opt(inst).opt_cost
        rows[M] = (fdc_first, all_rdc, opt)
        ok &= fdc_first == M + 2 and all_rdc == M + 3 and opt == 3
    shown = ", ".join(f"M={M}: ({a:g}, {b:g}, {c:g})" for M, (a, b, c) in rows.items())
    return CriterionResult(1, "greedy-depletion", ok, f"(fdc-first, all-rdc, opt) {shown}", details={"rows": rows})


def prefix_dominance(count: int = 1000, samples: int = 100) -> CriterionResult:
    violations, runs, skipped = 0, 0, 0
    per_policy: dict[str, int] = {}
    for s in range(count):
        rng = stream(s, "instance")
        regime = TIME_INVARIANT if s % 2 else TIME_VARYING
        inst = random_tiny(rng, regime=regime, K=1 if s % 4 >= 2 else None)
        opt = bruteforce_opt(inst)
        for name in POLICY_NAMES:
            try:
                v = prefix_violations(inst, make_policy(name), s, stream(s, "rounding"), samples, [opt.opt_plan])
            except ConfigurationError:
                skipped += 1
                continue
            runs += 1
            per_policy[name] = per_policy.get(name, 0) + 1
            violations += v
    return CriterionResult(
        2, "prefix-dominance", violations == 0 and runs > 0,
        f"{count} instances, {runs} policy runs x {samples + 1} offline plans, {violations} violations",
        details={"violations": violations, "runs_per_policy": per_policy, "skipped": skipped},
    )


def _os_fp_bound(inst: Instance) -> float:
    f = inst.fixed_costs
    a, b = inst.cost_bounds
    f_min = float(f[1:].min())
    return bounds.order_size_upper(f[0], f_min, a, b, theta_default(f[0], f_min, a, b))


def bound_os_fp(count: int = 500) -> CriterionResult:
    return _tiny_ratio_check(3, "bound-os-fp", "order-size-f-priority", TIME_VARYING, _os_fp_bound, count)


def bound_cc_vp(count: int = 500) -> CriterionResult:
    return _tiny_ratio_check(
        4, "bound-cc-vp", "cost-comparison-v-priority", TIME_INVARIANT,
        lambda inst: bounds.cost_comparison_upper(inst.fixed_costs[0], inst.fixed_costs[1:].tolist()), count,
    )


def bound_cc_adjv(count: int = 500) -> CriterionResult:
    return _tiny_ratio_check(
        5, "bound-cc-adjv", "cost-comparison-adjv-priority", TIME_VARYING,
        lambda inst: bounds.adjusted_cost_comparison_upper(inst.fixed_costs[0], inst.fixed_costs[1], *inst.cost_bounds),
        count, K=1,
    )


def bound_rcc_vp(count: int = 50, draws: int = 10_000) -> CriterionResult:
    policy = make_policy("randomized-cc-v-priority")
    failures, worst_slack, worst = 0, -math.inf, None
    for s in range(count):
        inst = random_tiny(stream(s, "instance"), regime=TIME_INVARIANT, K=1)
        opt = bruteforce_opt(inst, want_plan=False).opt_cost
        costs = np.array([run_policy(inst, policy, seed=r, trace="costs").total_cost for r in range(draws)])
        bound = bounds.randomized_upper(inst.fixed_costs[0], inst.fixed_costs[1])
        if opt == 0:
            mean_ratio, se = (1.0 if costs.max() == 0 else math.inf), 0.0
        else:
            mean_ratio = math.fsum(costs) / draws / opt
            se = float(costs.std(ddof=1)) / math.sqrt(draws) / opt
        slack = mean_ratio - (bound + 3 * se)
        if slack > 0:
            failures += 1
        if slack > worst_slack:
            worst_slack, worst = slack, (s, mean_ratio, se, bound)
    s, r, se, b = worst
    return CriterionResult(
        6, "bound-rcc-vp", failures == 0,
        f"{count} instances x {draws} draws, {failures} violations; tightest: mean ratio {r:.4f} "
        f"(se {se:.4f}) vs bound {b:.4f}",
        details={"failures": failures, "tightest": worst},
    )


CROSSCHECK_VARIANTS = {
    "greedy-depletion": [{"M": M} for M in (1, 2, 3, 4)],
    "fixed-cost-pair": [
        {"n": n, "f": f, "f0": f0, "a": a}
        for n in (2, 3, 4) for f, f0, a in (([5.0], 50.0, 8.0), ([60.0], 50.0, 1.0), ([2.0, 3.0], 10.0, 0.5))
    ],
    "variable-cost-pair": [{"N": N, "b": b} for N in (1, 3, 5) for b in (10.0, 2.5)],
    "block-table": [{"n": 1, "f0": f0, "c1": c1} for f0 in (10.0, 3.0) for c1 in (0.01, 2.0)],
    "single-fdc-varying-pair": [{"N": N, "f0": f0} for N in (2, 4) for f0 in (10.0, 1.0)],
    "single-fdc-invariant-pair": [
        {"M": M, "N": N, "eps": e} for M in (2, 10) for N in (1, 2, 3) for e in (0.5, 0.1)
    ],
    "stress": [{"f0": f0} for f0 in (4.0, 9.0, 12.0, 16.0)],
}


def oracle_crosscheck(max_n: int = 4, max_T: int = 5) -> CriterionResult:
    checked, mismatches, per_family = 0, [], {}
    for family, variants in CROSSCHECK_VARIANTS.items():
        for params in variants:
            for inst in gen_adversarial(family, **params):
                if inst.n > max_n or inst.T > max_T:
                    continue
                ann = inst.meta["annotations"]
                bf = bruteforce_opt(inst, want_plan=False).opt_cost
                if ann["method"] == ANALYTIC_EXACT:
                    ok = ann["opt_cost"] == bf
                else:
                    ok = ann["opt_cost"] >= bf
                checked += 1
                per_family[family] = per_family.get(family, 0) + 1
                if not ok:
                    mismatches.append((family, inst.meta["member"], params, ann["opt_cost"], bf))
    missing = [f for f in CROSSCHECK_VARIANTS if f not in per_family]
    return CriterionResult(
        7, "oracle-crosscheck", not mismatches and not missing,
        f"{checked} instances over {len(per_family)} families, {len(mismatches)} mismatches"
        + (f", families without a small member: {missing}" if missing else ""),
        details={"per_family": per_family, "mismatches": mismatches},
    )


def stress_closed_forms() -> CriterionResult:
    rows, bad = [], []
    prev_gap = -math.inf
    increasing = True
    for f0 in range(50, 501, 50):
        inst = gen_adversarial("stress", f0=float(f0))[0]
        n = inst.n
        myo = run_policy(inst, MyopicPolicy()).total_cost
        osfp = run_policy(inst, make_policy("order-size-f-priority")).total_cost
        gap = myo - osfp
        rows.append((f0, n, myo, osfp))
        if myo != n * (f0 + 2) or osfp != f0 + 2 * n:
            bad.append(f0)
        increasing &= gap > prev_gap
        prev_gap = gap
    msg = f"myopic = n(f0+2) and OS-FP = f0+2n on {10 - len(bad)}/10 values"
    if bad:
        msg += f"; OS-FP equals myopic (order size n <= threshold) at f0 in {bad}"
    msg += f"; gap strictly increasing: {increasing}"
    return CriterionResult(8, "stress", not bad and increasing, msg, details={"rows": rows, "mismatched_f0": bad})


def bound_gaps(samples: int = 10_000) -> CriterionResult:
    rng = stream(0, "instance")
    worst = {"multi-varying": 0.0, "single-varying": 0.0}
    worst_int = dict(worst)
    for _ in range(samples):
        p = sample_bound_params(rng)
        for key, v in bound_ratios(*p).items():
            worst[key] = max(worst[key], v)
        for key, v in bound_ratios(*p, integer_n=True).items():
            worst_int[key] = max(worst_int[key], v)
    ok = worst["multi-varying"] <= 6.473 and worst["single-varying"] <= 19.828
    return CriterionResult(
        9, "bound-gaps", ok,
        f"{samples} samples: max UB/LB {worst['multi-varying']:.4f} (<= 6.473), "
        f"{worst['single-varying']:.4f} (<= 19.828); integer-n lower bound gives "
        f"{worst_int['multi-varying']:.4f} and {worst_int['single-varying']:.4f}",
        details={"worst": worst, "worst_integer_n": worst_int},
    )


def _mean_costs(cfg: StochasticConfig, policies: dict, reps: int) -> dict:
    out = {name: [] for name in policies}
    for r in range(reps):
        inst = gen_stochastic(cfg, r)
        for name, pol in policies.items():
            out[name].append(run_policy(inst, pol, seed=r, trace="costs").total_cost)
    return {name: math.fsum(v) / len(v) for name, v in out.items()}


def _decision_times(cfg: StochasticConfig, policies: dict, reps: int) -> dict:
    out = {name: 0.0 for name in policies}
    for r in range(reps):
        inst = gen_stochastic(cfg, r)
        for name, pol in policies.items():
            out[name] += run_policy(inst, pol, seed=r, trace="costs").decision_time / inst.T / reps
    return out


def stochastic_ordering(reps: int = 20, timing_reps: int = 3) -> CriterionResult:
    base = StochasticConfig(K=5, T=500)
    var = _mean_costs(base, {"os-fp": make_policy("order-size-f-priority"), "myopic": MyopicPolicy()}, reps)
    inv = _mean_costs(
        base.replace(regime=TIME_INVARIANT),
        {"cc-vp": make_policy("cost-comparison-v-priority"), "myopic": MyopicPolicy(), "ipfc": IpfcPolicy()},
        reps,
    )
    ra = var["os-fp"] / var["myopic"]
    rb1, rb2 = inv["cc-vp"] / inv["myopic"], inv["cc-vp"] / inv["ipfc"]

    gpg_var = {n: make_policy(n) for n in ("order-size-f-priority", "pure-greedy", "all-rdc")}
    growth = {}
    t3 = _decision_times(base.replace(K=3), {"myopic": MyopicPolicy(), **gpg_var}, timing_reps)
    t7 = _decision_times(base.replace(K=7), {"myopic": MyopicPolicy(), **gpg_var}, timing_reps)
    growth.update({n: t7[n] / t3[n] for n in t3})
    cc = {"cost-comparison-v-priority": make_policy("cost-comparison-v-priority")}
    i3 = _decision_times(base.replace(K=3, regime=TIME_INVARIANT), cc, timing_reps)
    i7 = _decision_times(base.replace(K=7, regime=TIME_INVARIANT), cc, timing_reps)
    growth["cost-comparison-v-priority"] = i7["cost-comparison-v-priority"] / i3["cost-comparison-v-priority"]
    gpg_growth = max(v for n, v in growth.items() if n != "myopic")
    ok_a = ra <= 1.20
    ok_b = rb1 <= 1.20 and rb2 <= 1.20
    ok_c = growth["myopic"] >= 4 and gpg_growth <= 1.5
    return CriterionResult(
        10, "stochastic-ordering", ok_a and ok_b and ok_c,
        f"(a) OS-FP/myopic {ra:.3f} {'ok' if ok_a else 'FAIL'}; (b) CC-VP/myopic {rb1:.3f}, CC-VP/IPFC {rb2:.3f} "
        f"{'ok' if ok_b else 'FAIL'}; (c) K 3->7 time growth myopic {growth['myopic']:.2f}x, "
        f"max GPG {gpg_growth:.2f}x {'ok' if ok_c else 'FAIL'}",
        details={"varying": var, "invariant": inv, "growth": growth},
    )


def hand_lp_objective(method: str = "auto") -> float:
    dist = OrderTypeDistribution(((0,),), (1.0,))
    lp = build_aggregate_lp(dist, [10.0, 1.0], np.array([[5.0], [1.0]]), np.array([[1]]), 2)
    return solve_lp(lp, method).objective


def _resample_orders(inst: Instance, dist: OrderTypeDistribution, rng: np.random.Generator) -> Instance:
    idx = rng.choice(len(dist.types), size=inst.T, p=np.asarray(dist.probs))
    orders = np.zeros((inst.T, inst.n), dtype=np.int64)
    for t, q in enumerate(idx):
        orders[t, list(dist.types[q])] = 1
    return inst.with_changes(orders=orders)


def lp_sanity(setups: int = 20, reps: int = 50) -> CriterionResult:
    hand = {m: hand_lp_objective(m) for m in ("simplex", "highs")}
    ok_hand = all(abs(v - 17.0) <= 1e-6 for v in hand.values())
    worst_slack, failures = -math.inf, 0
    for s in range(setups):
        rng = stream(s, "instance")
        cfg = StochasticConfig(
            n=3, K=int(rng.integers(1, 3)), T=int(rng.integers(1, 5)), fdc_fixed=float(rng.uniform(0.5, 5)),
            rdc_fixed=float(rng.uniform(1, 20)), a=1.0, b=4.0, order_sizes=(1, 2), type_counts=(2, 2),
            size_probs=(0.6, 0.4), tau=float(rng.uniform(0.5, 3.0)), regime=TIME_INVARIANT,
        )
        base = gen_stochastic(cfg, 1000 + s)
        dist = OrderTypeDistribution.from_meta(base.meta)
        lp = build_aggregate_lp(dist, base.fixed_costs, base.costs_at(0), base.initial_inventory, base.T)
        value = solve_lp(lp).objective
        order_rng = stream(1000 + s, "rounding")
        opts = [bruteforce_opt(_resample_orders(base, dist, order_rng), want_plan=False).opt_cost for _ in range(reps)]
        mean = math.fsum(opts) / reps
        se = float(np.std(opts, ddof=1)) / math.sqrt(reps)
        slack = value - (mean + 3 * se)
        worst_slack = max(worst_slack, slack)
        if slack > 1e-9:
            failures += 1
    return CriterionResult(
        11, "lp-sanity", ok_hand and failures == 0,
        f"hand LP simplex {hand['simplex']:.9g}, HiGHS {hand['highs']:.9g}; {setups} setups, {failures} with "
        f"LP above mean OPT + 3 SE (largest LP - (mean + 3 SE) = {worst_slack:.4f})",
        details={"hand": hand, "failures": failures},
    )


def _header_json(inst: Instance) -> dict:
    h = inst.header()
    return {
        "n": h.n, "K": h.K, "T": h.T, "fixed_costs": h.fixed_costs.tolist(), "cost_regime": h.cost_regime,
        "cost_bounds": None if h.cost_bounds is None else list(h.cost_bounds),
        "initial_inventory": h.initial_inventory.tolist(),
    }


def service_plans(store: SessionStore, inst: Instance, policy: str, seed: int) -> tuple[list, float]:
    """Feed ``inst`` through the service as JSON lines; return the plans and the closing total."""
    opened = store.handle(json.dumps({"v": 1, "op": "open", "policy": policy, "seed": seed, "header": _header_json(inst)}))
    if not opened["ok"]:
        raise ConfigurationError(opened["error"]["message"])
    sid = opened["session_id"]
    plans = []
    for t in range(inst.T):
        msg = {"v": 1, "op": "decide", "session_id": sid, "order": inst.orders[t].tolist(),
               "costs": inst.costs_at(t).tolist()}
        reply = store.handle(json.dumps(msg))
        if not reply["ok"]:
            raise RuntimeError(reply["error"])
        plans.append(reply["plan"])
    closed = store.handle(json.dumps({"v": 1, "op": "close", "session_id": sid}))
    return plans, closed["summary"]["total_cost"]


def service_equivalence(sessions: int = 100) -> CriterionResult:
    names = list(POLICY_NAMES) + ["myopic"]
    store = SessionStore()
    mismatches, done = 0, 0
    for s in range(sessions):
        rng = stream(s, "instance")
        inst = random_tiny(rng, T_max=8, regime=TIME_INVARIANT if s % 2 else TIME_VARYING, K=1 if s % 3 == 0 else None)
        for offset in range(len(names)):
            name = names[(s + offset) % len(names)]
            policy = MyopicPolicy() if name == "myopic" else make_policy(name)
            try:
                batch = run_policy(inst, policy, seed=s)
            except ConfigurationError:
                continue
            plans, total = service_plans(store, inst, name, s)
            same = [r.plan.tolist() for r in batch.trace] == plans and total == batch.total_cost
            mismatches += not same
            done += 1
            break
    return CriterionResult(
        12, "service-equivalence", mismatches == 0 and done == sessions,
        f"{done} sessions, {mismatches} differing plan sequences",
        details={"sessions": done, "mismatches": mismatches},
    )


CRITERIA: dict[str, Callable[[], CriterionResult]] = {
    "greedy-depletion": greedy_depletion_table,
    "prefix-dominance": prefix_dominance,
    "bound-os-fp": bound_os_fp,
    "bound-cc-vp": bound_cc_vp,
    "bound-cc-adjv": bound_cc_adjv,
    "bound-rcc-vp": bound_rcc_vp,
    "oracle-crosscheck": oracle_crosscheck,
    "stress": stress_closed_forms,
    "bound-gaps": bound_gaps,
    "stochastic-ordering": stochastic_ordering,
    "lp-sanity": lp_sanity,
    "service-equivalence": service_equivalence,
}
SUITES = tuple(CRITERIA) + ("all",)


def run_criterion(suite: str) -> CriterionResult:
    fn = CRITERIA[suite]
    tic = time.perf_counter()
    result = fn()
    result.elapsed = time.perf_counter() - tic
    return result


def run_acceptance(suite: str = "all", echo: Optional[Callable[[str], None]] = None) -> list[CriterionResult]:
    if suite not in SUITES:
        raise ConfigurationError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    names = list(CRITERIA) if suite == "all" else [suite]
    results = []
    for name in names:
        result = run_criterion(name)
        if echo:
            echo(result.line())
        results.append(result)
    return results
