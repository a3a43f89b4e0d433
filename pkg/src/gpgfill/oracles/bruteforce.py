"""Exact clairvoyant optimum by memoized depth-first search over (period, inventory)."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..model import Instance, trace_cost

BRUTE_FORCE = "brute-force"
ANALYTIC_EXACT = "analytic-exact"
ANALYTIC_UPPER = "analytic-upper-bound"


class StateSpaceOverflow(RuntimeError):
    """The search would exceed its state budget."""


@dataclass
class OptResult:
    opt_cost: float
    method: str
    opt_plan: Optional[list[np.ndarray]] = None
    search_stats: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.method != ANALYTIC_UPPER


def _item_options(S: int, inv: tuple, c: np.ndarray):
    """All ways to split ``S`` units of one item: (unit cost, DC bitmask, FDC shipments)."""
    K = len(inv)
    out = []
    alloc = [0] * K

    def rec(k: int, left: int):
        if k == K:
            cost = c[0] * left
            mask = 1 if left else 0
            for j, q in enumerate(alloc):
                if q:
                    cost += c[j + 1] * q
                    mask |= 1 << (j + 1)
            out.append((cost, mask, tuple(alloc)))
            return
        for q in range(min(left, inv[k]) + 1):
            alloc[k] = q
            rec(k + 1, left - q)
        alloc[k] = 0

    rec(0, S)
    return out


def estimate_states(instance: Instance) -> int:
    demand = instance.orders.sum(axis=0)
    per_level = 1
    for k in range(instance.K):
        for i in range(instance.n):
            per_level *= int(min(instance.initial_inventory[k, i], demand[i])) + 1
    return per_level * instance.T


def bruteforce_opt(
    instance: Instance,
    max_states: int = 10**7,
    want_plan: bool = True,
    audit_fraction: float = 0.0,
) -> OptResult:
    """Minimum total cost over every feasible integer plan sequence.

    ``audit_fraction`` re-expands that share of cache hits and asserts the
    recomputed suffix cost equals the cached one.
    """
    if estimate_states(instance) > max_states:
        raise StateSpaceOverflow(f"estimated state space {estimate_states(instance)} exceeds {max_states}")
    started = time.perf_counter()
    K, n, T = instance.K, instance.n, instance.T
    f = [float(x) for x in instance.fixed_costs]
    fixed_of_mask = [math.fsum(f[k] for k in range(K + 1) if m >> k & 1) for m in range(1 << (K + 1))]
    orders = [[int(x) for x in row] for row in instance.orders]
    costs = [instance.costs_at(t).T.tolist() for t in range(T)]  # per item, per DC
    memo: dict = {}
    best_action: dict = {}
    stats = {"states_expanded": 0, "audits": 0}
    audit = random.Random(0)

    def expand(t: int, inv: tuple) -> float:
        stats["states_expanded"] += 1
        if stats["states_expanded"] > max_states:
            raise StateSpaceOverflow(f"expanded more than {max_states} states")
        S = orders[t]
        per_item = []
        for i in range(n):
            item_inv = tuple(inv[k * n + i] for k in range(K))
            if S[i] == 0:
                per_item.append([(0.0, 0, (0,) * K)])
            else:
                per_item.append(_item_options(S[i], item_inv, costs[t][i]))
        best = math.inf
        arg = None
        chosen = [None] * n

        def rec(i: int, var: float, mask: int):
            nonlocal best, arg
            if i == n:
                nxt = list(inv)
                for j, opt in enumerate(chosen):
                    for k, q in enumerate(opt[2]):
                        if q:
                            nxt[k * n + j] -= q
                nxt = tuple(nxt)
                total = var + fixed_of_mask[mask] + value(t + 1, nxt)
                if total < best:
                    best = total
                    arg = tuple(chosen)
                return
            for opt in per_item[i]:
                chosen[i] = opt
                rec(i + 1, var + opt[0], mask | opt[1])

        rec(0, 0.0, 0)
        best_action[(t, inv)] = arg
        return best

    def value(t: int, inv: tuple) -> float:
        if t == T:
            return 0.0
        key = (t, inv)
        if key in memo:
            if audit_fraction and audit.random() < audit_fraction:
                stats["audits"] += 1
                again = expand(t, inv)
                if again != memo[key]:
                    raise AssertionError(f"memo mismatch at {key}: {memo[key]} vs {again}")
            return memo[key]
        v = expand(t, inv)
        memo[key] = v
        return v

    inv0 = tuple(int(x) for x in instance.initial_inventory.reshape(-1))
    total = value(0, inv0)
    plans = None
    if want_plan:
        plans = []
        inv = inv0
        for t in range(T):
            action = best_action[(t, inv)]
            plan = np.zeros((K + 1, n), dtype=np.int64)
            nxt = list(inv)
            for i, opt in enumerate(action):
                shipped = 0
                for k, q in enumerate(opt[2]):
                    plan[k + 1, i] = q
                    shipped += q
                    nxt[k * n + i] -= q
                plan[0, i] = orders[t][i] - shipped
            plans.append(plan)
            inv = tuple(nxt)
        total = trace_cost(instance, plans)
    stats["elapsed"] = time.perf_counter() - started
    stats["states_cached"] = len(memo)
    return OptResult(opt_cost=total, method=BRUTE_FORCE, opt_plan=plans, search_stats=stats)
