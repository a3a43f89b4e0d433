"""Independent probabilistic rounding of the aggregate LP into per-item DC choices."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from ..model import TIME_INVARIANT, ConfigurationError, InstanceHeader
from ..rng import Streams
from .aggregate_lp import (
    AggregateLp,
    LpSolution,
    OrderTypeDistribution,
    build_aggregate_lp,
    cache_key,
    solve_lp,
)

log = logging.getLogger(__name__)


def ipfc_decide(
    q: Optional[int],
    order: np.ndarray,
    lp: AggregateLp,
    solution: LpSolution,
    inventory: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, int]:
    """Sample a DC for every item of order type ``q``.

    Returns the plan and the number of items that fell back to the RDC
    because the sampled FDC had no stock. Unknown types (``q is None``)
    ship entirely from the RDC.
    """
    order = np.asarray(order, dtype=np.int64)
    plan = np.zeros((lp.K + 1, order.shape[0]), dtype=np.int64)
    if q is None:
        plan[0] = order
        return plan, 0
    items = lp.distribution.types[q]
    shares = solution.x(lp, q)
    cum = np.cumsum(shares, axis=1)
    u = rng.random(len(items))
    fallbacks = 0
    for j, i in enumerate(items):
        k = min(int(np.searchsorted(cum[j], u[j] * cum[j, -1], side="right")), lp.K)
        if k >= 1 and inventory[k - 1, i] < 1:
            k = 0
            fallbacks += 1
        plan[k, i] += 1
    return plan, fallbacks


class IpfcDecider:
    def __init__(self, policy: "IpfcPolicy", header: InstanceHeader, rng: np.random.Generator):
        self.policy = policy
        self.header = header
        self.rng = rng
        self.distribution = OrderTypeDistribution.from_meta(header.meta)
        self.type_index = {frozenset(q): j for j, q in enumerate(self.distribution.types)}
        self.lp: Optional[AggregateLp] = None
        self.solution: Optional[LpSolution] = None
        self.notes = {"fallbacks": 0, "unknown_types": 0}

    def _prepare(self, costs: np.ndarray):
        h = self.header
        self.lp = build_aggregate_lp(self.distribution, h.fixed_costs, costs, h.initial_inventory, h.T)
        key = cache_key(self.distribution, h.T, h.initial_inventory, costs, h.fixed_costs)
        cache = self.policy.cache_dir
        path = Path(cache) / f"lp-{key}.json" if cache else None
        if path is not None and path.exists():
            self.solution = LpSolution.from_json(json.loads(path.read_text()))
        else:
            self.solution = solve_lp(self.lp, self.policy.lp_method)
            if path is not None and self.solution.status == "optimal":
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(json.dumps(self.solution.to_json()))
        if self.solution.status != "optimal":
            raise RuntimeError(f"aggregate LP is {self.solution.status}")
        self.notes["lp_objective"] = self.solution.objective

    def decide(self, order, costs, inventory):
        if self.lp is None:
            self._prepare(costs)
        order = np.asarray(order, dtype=np.int64)
        if not order.any():
            return np.zeros((self.header.K + 1, order.shape[0]), dtype=np.int64), False
        q = None
        if order.max() <= 1:
            q = self.type_index.get(frozenset(np.flatnonzero(order).tolist()))
        if q is None:
            self.notes["unknown_types"] += 1
            log.info("order outside the type distribution; shipping from the RDC")
        plan, fallbacks = ipfc_decide(q, order, self.lp, self.solution, inventory, self.rng)
        self.notes["fallbacks"] += fallbacks
        return plan, False


class IpfcPolicy:
    """LP-guided randomized rounding; needs the order-type distribution in the instance metadata."""

    name = "ipfc"

    def __init__(self, lp_method: str = "auto", cache_dir: Optional[str] = None):
        self.lp_method = lp_method
        self.cache_dir = cache_dir

    def start(self, header: InstanceHeader, streams: Streams) -> IpfcDecider:
        if header.cost_regime != TIME_INVARIANT:
            raise ConfigurationError("ipfc requires time-invariant costs")
        if "distribution" not in header.meta:
            raise ConfigurationError("ipfc needs the order-type distribution in the instance metadata")
        return IpfcDecider(self, header, streams.rounding)
