"""Problem data, feasibility checks, cost accounting and the simulation loop.

DC index 0 is the regional center (unlimited stock); indices 1..K are the
front centers. Plans are integer arrays of shape ``(K+1, n)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Protocol

import numpy as np

from .rng import Streams

TIME_VARYING = "time-varying"
TIME_INVARIANT = "time-invariant"
REGIMES = (TIME_VARYING, TIME_INVARIANT)


class StructuralError(ValueError):
    """Array dimensions do not agree."""


class InfeasiblePlanError(ValueError):
    """A plan breaks demand, inventory or sign constraints."""

    def __init__(self, constraint: str, index: tuple, message: str):
        super().__init__(f"{constraint} constraint violated at {index}: {message}")
        self.constraint = constraint
        self.index = index


class ConfigurationError(ValueError):
    """A policy or experiment is not applicable to the given data."""


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """Full offline problem data.

    Attributes:
        fixed_costs: ``(K+1,)`` activation cost per DC.
        variable_costs: ``(K+1, T, n)`` per-unit shipping costs.
        initial_inventory: ``(K, n)`` stock at the front centers.
        orders: ``(T, n)`` requested quantities.
        cost_regime: ``"time-varying"`` or ``"time-invariant"``.
        cost_bounds: optional ``(a, b)`` envelope on every variable cost.
        meta: free-form metadata (family id, annotations, distribution).
    """

    fixed_costs: np.ndarray
    variable_costs: np.ndarray
    initial_inventory: np.ndarray
    orders: np.ndarray
    cost_regime: str = TIME_VARYING
    cost_bounds: Optional[tuple[float, float]] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "fixed_costs", _frozen(self.fixed_costs, np.float64))
        object.__setattr__(self, "variable_costs", _frozen(self.variable_costs, np.float64))
        object.__setattr__(self, "initial_inventory", _frozen(self.initial_inventory, np.int64))
        object.__setattr__(self, "orders", _frozen(self.orders, np.int64))
        if self.cost_bounds is not None:
            a, b = self.cost_bounds
            object.__setattr__(self, "cost_bounds", (float(a), float(b)))
        if self.variable_costs.ndim != 3 or self.orders.ndim != 2 or self.initial_inventory.ndim != 2:
            raise StructuralError("variable_costs must be 3-D; orders and initial_inventory 2-D")

    @property
    def n(self) -> int:
        return self.orders.shape[1]

    @property
    def K(self) -> int:
        return self.fixed_costs.shape[0] - 1

    @property
    def T(self) -> int:
        return self.orders.shape[0]

    def costs_at(self, t: int) -> np.ndarray:
        """Cost column ``(K+1, n)`` of period ``t`` (0-based)."""
        return self.variable_costs[:, t, :]

    def header(self) -> "InstanceHeader":
        return InstanceHeader(
            n=self.n,
            K=self.K,
            T=self.T,
            fixed_costs=self.fixed_costs,
            cost_regime=self.cost_regime,
            cost_bounds=self.cost_bounds,
            initial_inventory=self.initial_inventory,
            meta=self.meta,
        )

    def with_changes(self, **kwargs) -> "Instance":
        return replace(self, **kwargs)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.cost_regime == other.cost_regime
            and self.cost_bounds == other.cost_bounds
            and self.meta == other.meta
            and all(
                np.array_equal(getattr(self, name), getattr(other, name))
                for name in ("fixed_costs", "variable_costs", "initial_inventory", "orders")
            )
        )

    __hash__ = None


@dataclass(frozen=True)
class InstanceHeader:
    """Static information a policy may see before the first order."""

    n: int
    K: int
    T: int
    fixed_costs: np.ndarray
    cost_regime: str
    cost_bounds: Optional[tuple[float, float]]
    initial_inventory: np.ndarray
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class InventoryState:
    levels: np.ndarray
    period: int = 0


@dataclass
class PeriodRecord:
    period: int
    gated: bool
    period_cost: float
    plan: Optional[np.ndarray] = None
    inventory_after: Optional[np.ndarray] = None


@dataclass
class RunResult:
    total_cost: float
    trace: list[PeriodRecord]
    policy_id: str
    seed: int
    wall_time: float
    decision_time: float = 0.0
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def gated_period_count(self) -> int:
        return sum(1 for r in self.trace if r.gated)


class Decider(Protocol):
    def decide(self, order: np.ndarray, costs: np.ndarray, inventory: np.ndarray) -> tuple[np.ndarray, bool]:
        ...


class Policy(Protocol):
    name: str

    def start(self, header: InstanceHeader, streams: Streams) -> Decider:
        ...


def period_cost(plan: np.ndarray, fixed_costs: np.ndarray, costs: np.ndarray) -> float:
    """Fixed cost of every DC that ships a unit plus all unit shipping costs."""
    plan = np.asarray(plan)
    if plan.shape != costs.shape or plan.shape[0] != len(fixed_costs):
        raise StructuralError(
            f"plan shape {plan.shape} does not match costs {costs.shape} / fixed costs {len(fixed_costs)}"
        )
    used = plan.sum(axis=1) > 0
    return float(fixed_costs[used].sum() + (costs * plan).sum())


def check_plan(levels: np.ndarray, plan: np.ndarray, order: np.ndarray) -> None:
    """Raise :class:`InfeasiblePlanError` naming the first broken constraint."""
    plan = np.asarray(plan)
    if plan.shape != (levels.shape[0] + 1, levels.shape[1]) or order.shape != (levels.shape[1],):
        raise StructuralError(f"plan shape {plan.shape} inconsistent with inventory {levels.shape}")
    neg = np.argwhere(plan < 0)
    if len(neg):
        k, i = map(int, neg[0])
        raise InfeasiblePlanError("non-negativity", (k, i), f"m={int(plan[k, i])}")
    short = np.argwhere(plan.sum(axis=0) != order)
    if len(short):
        i = int(short[0][0])
        raise InfeasiblePlanError("demand", (i,), f"shipped {int(plan[:, i].sum())} != ordered {int(order[i])}")
    over = np.argwhere(plan[1:] > levels)
    if len(over):
        k, i = map(int, over[0])
        raise InfeasiblePlanError(
            "inventory", (k + 1, i), f"shipped {int(plan[k + 1, i])} > available {int(levels[k, i])}"
        )


def apply_plan(state: InventoryState, plan: np.ndarray, order: np.ndarray) -> InventoryState:
    """Check ``plan`` against ``state`` and ``order`` and return the depleted state."""
    order = np.asarray(order, dtype=np.int64)
    check_plan(state.levels, plan, order)
    levels = state.levels - np.asarray(plan, dtype=np.int64)[1:]
    return InventoryState(levels=levels, period=state.period + 1)


def trace_cost(instance: Instance, plans) -> float:
    """Total cost of a sequence of per-period plans (no feasibility check)."""
    return math.fsum(
        period_cost(p, instance.fixed_costs, instance.costs_at(t)) for t, p in enumerate(plans)
    )


def validate_instance(instance: Instance) -> list[str]:
    """Return one message per broken invariant, each prefixed with an index path."""
    out: list[str] = []
    f, c, inv, S = instance.fixed_costs, instance.variable_costs, instance.initial_inventory, instance.orders
    K1, T, n = c.shape
    if len(f) != K1:
        out.append(f"/fixed_costs: length {len(f)} but variable_costs has {K1} DCs")
    if S.shape != (T, n):
        out.append(f"/orders: shape {S.shape} but expected {(T, n)}")
    if inv.shape != (K1 - 1, n):
        out.append(f"/initial_inventory: shape {inv.shape} but expected {(K1 - 1, n)}")
    if n < 1:
        out.append("/n: must be positive")
    if T < 1:
        out.append("/T: must be positive")
    if instance.cost_regime not in REGIMES:
        out.append(f"/cost_regime: unknown regime {instance.cost_regime!r}")
    for name, arr in (("fixed_costs", f), ("variable_costs", c)):
        for idx in np.argwhere(~np.isfinite(arr) | (arr < 0)):
            out.append(f"/{name}/{'/'.join(map(str, idx))}: must be finite and nonnegative")
    for name, arr in (("initial_inventory", inv), ("orders", S)):
        for idx in np.argwhere(arr < 0):
            out.append(f"/{name}/{'/'.join(map(str, idx))}: must be nonnegative")
    if instance.cost_bounds is not None:
        a, b = instance.cost_bounds
        if not (0 < a <= b):
            out.append(f"/cost_bounds: need 0 < a <= b, got ({a}, {b})")
        else:
            for idx in np.argwhere((c < a) | (c > b)):
                k, t, i = map(int, idx)
                out.append(f"/variable_costs/{k}/{t}/{i}: {c[k, t, i]} outside [{a}, {b}]")
    if instance.cost_regime == TIME_INVARIANT and T > 1:
        for idx in np.argwhere(c != c[:, :1, :]):
            k, t, i = map(int, idx)
            out.append(f"/variable_costs/{k}/{t}/{i}: differs from period 0 in a time-invariant instance")
    return out


def run_policy(instance: Instance, policy: Policy, seed: int = 0, trace: str = "full") -> RunResult:
    """Simulate ``policy`` over the horizon, checking every plan before applying it.

    The policy sees one period at a time: the order, that period's cost
    column and a copy of the current inventory.
    """
    if trace not in ("full", "costs"):
        raise ValueError("trace must be 'full' or 'costs'")
    problems = validate_instance(instance)
    if problems:
        raise ConfigurationError("invalid instance: " + "; ".join(problems[:5]))
    started = time.perf_counter()
    decider = policy.start(instance.header(), Streams(seed))
    state = InventoryState(levels=instance.initial_inventory.copy())
    f = instance.fixed_costs
    records: list[PeriodRecord] = []
    decision_time = 0.0
    for t in range(instance.T):
        order = instance.orders[t]
        costs = instance.costs_at(t)
        tic = time.perf_counter()
        plan, gated = decider.decide(order, costs, state.levels.copy())
        decision_time += time.perf_counter() - tic
        state = apply_plan(state, plan, order)
        pc = period_cost(plan, f, costs)
        if trace == "full":
            records.append(PeriodRecord(t, bool(gated), pc, np.array(plan, dtype=np.int64), state.levels.copy()))
        else:
            records.append(PeriodRecord(t, bool(gated), pc))
    total = math.fsum(r.period_cost for r in records)
    notes = dict(getattr(decider, "notes", {}) or {})
    return RunResult(
        total_cost=total,
        trace=records,
        policy_id=policy.name,
        seed=int(seed),
        wall_time=time.perf_counter() - started,
        decision_time=decision_time,
        notes=notes,
    )
