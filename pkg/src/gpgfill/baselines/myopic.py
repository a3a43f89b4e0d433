"""Exact single-period cost minimization by activation-subset enumeration."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..model import ConfigurationError, InstanceHeader
from ..rng import Streams

DEFAULT_MAX_K = 20


@lru_cache(maxsize=64)
def _subsets(fixed: tuple) -> tuple[np.ndarray, np.ndarray]:
    """All DC subsets as bool rows, sorted by fixed cost, then size, then bitmask."""
    m = len(fixed)
    masks = np.arange(1, 1 << m, dtype=np.int64)
    members = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
    fsum = members @ np.asarray(fixed, dtype=np.float64)
    order = np.lexsort((masks, members.sum(axis=1), fsum))
    return members[order], fsum[order]


def _tie_key(used: np.ndarray) -> tuple:
    idx = tuple(np.flatnonzero(used).tolist())
    return (len(idx), idx)


def myopic_decide(
    order: np.ndarray,
    inventory: np.ndarray,
    costs: np.ndarray,
    fixed_costs: np.ndarray,
    max_K: int = DEFAULT_MAX_K,
) -> np.ndarray:
    """Cheapest feasible plan for one order, ignoring the future.

    For every subset of DCs (cheapest fixed cost first) each unit goes to the
    cheapest DC of the subset that still has stock. Subsets whose fixed cost
    alone exceeds the best total found are never evaluated. Ties prefer fewer
    DCs, then the lexicographically smallest DC set.
    """
    order = np.asarray(order, dtype=np.int64)
    inventory = np.asarray(inventory, dtype=np.int64)
    fixed_costs = np.asarray(fixed_costs, dtype=np.float64)
    K = inventory.shape[0]
    if K > max_K:
        raise ConfigurationError(f"myopic enumeration limited to K <= {max_K}, got {K}")
    plan = np.zeros((K + 1, order.shape[0]), dtype=np.int64)
    items = np.flatnonzero(order > 0)
    if len(items) == 0:
        return plan
    S = order[items]
    C = np.asarray(costs, dtype=np.float64)[:, items]
    caps = np.vstack([S[None, :], inventory[:, items]])
    rank = np.argsort(C, axis=0, kind="stable")
    C_r = np.take_along_axis(C, rank, axis=0)
    caps_r = np.take_along_axis(caps, rank, axis=0)
    members, fsum = _subsets(tuple(fixed_costs.tolist()))

    best = np.inf
    best_key = None
    best_take = None
    for row, f_A in zip(members, fsum):
        if f_A > best:
            break
        cap_A = caps_r * row[rank]
        if not row[0] and np.any(cap_A.sum(axis=0) < S):
            continue
        take = np.clip(S - (np.cumsum(cap_A, axis=0) - cap_A), 0, cap_A)
        shipped = np.zeros(K + 1, dtype=np.int64)
        np.add.at(shipped, rank.ravel(), take.ravel())
        used = shipped > 0
        cost = fixed_costs[used].sum() + (take * C_r).sum()
        if cost < best or (cost == best and _tie_key(used) < best_key):
            best, best_key, best_take = cost, _tie_key(used), take
    if best_take is None:
        raise AssertionError("no subset covers the order although the RDC is unlimited")
    sub = np.zeros_like(best_take)
    np.put_along_axis(sub, rank, best_take, axis=0)
    plan[:, items] = sub
    return plan


class MyopicDecider:
    def __init__(self, fixed_costs: np.ndarray, max_K: int):
        self.f = np.asarray(fixed_costs, dtype=np.float64)
        self.max_K = max_K
        self.notes: dict = {}

    def decide(self, order, costs, inventory):
        return myopic_decide(order, inventory, costs, self.f, self.max_K), False


class MyopicPolicy:
    """Per-order exact optimization; never gates."""

    name = "myopic"

    def __init__(self, max_K: int = DEFAULT_MAX_K):
        self.max_K = max_K

    def start(self, header: InstanceHeader, streams: Streams) -> MyopicDecider:
        if header.K > self.max_K:
            raise ConfigurationError(f"myopic enumeration limited to K <= {self.max_K}, got {header.K}")
        return MyopicDecider(header.fixed_costs, self.max_K)
