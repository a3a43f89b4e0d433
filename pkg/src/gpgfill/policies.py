"""Gated priority-based greedy policies.

Each period the policy ranks DCs per item, computes the greedy plan that fills
front centers in rank order until the regional center's position, then asks a
gate whether to override that plan by routing the whole order to a single DC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .model import TIME_INVARIANT, ConfigurationError, InstanceHeader, period_cost
from .rng import Streams

FIXED_COST = "fixed-cost"
VARIABLE_COST = "variable-cost"
ADJUSTED = "adjusted-variable-cost"
EXPLICIT = "explicit"

GATE_ORDER_SIZE = "order-size"
GATE_COST = "cost-comparison"
GATE_RANDOMIZED = "randomized-cost-comparison"
GATE_NONE = "none"

POLICY_NAMES = (
    "order-size-f-priority",
    "cost-comparison-v-priority",
    "cost-comparison-adjv-priority",
    "order-size-adjv-priority",
    "randomized-cc-v-priority",
    "better-of-two",
    "pure-greedy",
    "all-rdc",
)


# ---------------------------------------------------------------- rankings

def fixed_cost_ranking(fixed_costs: np.ndarray) -> np.ndarray:
    """DC indices sorted by fixed cost, ties to the smaller index."""
    return np.argsort(np.asarray(fixed_costs), kind="stable")


def variable_cost_ranking(costs: np.ndarray) -> np.ndarray:
    """Per-item DC order ``(n, K+1)`` by unit cost, ties to the smaller index."""
    return np.argsort(np.asarray(costs), axis=0, kind="stable").T


def adjusted_ranking(costs: np.ndarray, *, eta: Optional[float] = None, factor: Optional[float] = None) -> np.ndarray:
    """Single-FDC ranking: the FDC goes first iff ``c_1 < c_0/eta`` (or ``c_1 < factor*c_0``)."""
    if costs.shape[0] != 2:
        raise ConfigurationError("adjusted variable-cost priority needs exactly one FDC")
    c0, c1 = costs[0], costs[1]
    fdc_first = c1 < c0 / eta if eta is not None else c1 < factor * c0
    out = np.empty((costs.shape[1], 2), dtype=np.int64)
    out[:, 0] = np.where(fdc_first, 1, 0)
    out[:, 1] = np.where(fdc_first, 0, 1)
    return out


def greedy_plan(order: np.ndarray, inventory: np.ndarray, ranking: np.ndarray) -> np.ndarray:
    """Fill each item from DCs ranked ahead of the RDC, saturating in order; the RDC takes the rest.

    ``ranking`` is either one permutation of ``0..K`` shared by all items or an
    ``(n, K+1)`` array with one permutation per item.
    """
    order = np.asarray(order, dtype=np.int64)
    inventory = np.asarray(inventory, dtype=np.int64)
    K, n = inventory.shape
    R = np.asarray(ranking, dtype=np.int64)
    if R.ndim == 1:
        R = np.broadcast_to(R, (n, K + 1))
    caps = np.empty((n, K + 1), dtype=np.int64)
    caps[:, 0] = 0
    caps[:, 1:] = inventory.T
    before_rdc = np.cumsum(R == 0, axis=1) == 0
    ranked_caps = np.take_along_axis(caps, R, axis=1) * before_rdc
    filled_before = np.cumsum(ranked_caps, axis=1) - ranked_caps
    take = np.clip(order[:, None] - filled_before, 0, ranked_caps)
    plan_t = np.zeros((n, K + 1), dtype=np.int64)
    np.put_along_axis(plan_t, R, take, axis=1)
    plan = np.ascontiguousarray(plan_t.T)
    plan[0] = order - plan[1:].sum(axis=0)
    return plan


# ---------------------------------------------------------------- gates

def gate_order_size(order: np.ndarray, theta: float) -> bool:
    return bool(np.asarray(order).sum() > theta)


def gate_cost_comparison(m_hat: np.ndarray, fixed_costs: np.ndarray, costs: np.ndarray, order: np.ndarray) -> bool:
    """True iff the greedy plan costs strictly more than shipping everything from the RDC."""
    rdc_only = fixed_costs[0] + float(costs[0] @ np.asarray(order))
    return bool(period_cost(m_hat, fixed_costs, costs) > rdc_only)


def randomized_gate_probability(x: float, f0: float, f1: float) -> float:
    """Probability of routing the order to the RDC given FDC savings ``x``."""
    if f0 <= 0 or f1 <= 0:
        raise ValueError("fixed costs must be positive")
    if x <= f1:
        return 1.0
    upper = max(f1, f1 * f1 / f0 - f0)
    if x > upper:
        return 0.0
    s = f0 + x
    return (f1 * f1 - s * f0) / (f1 * f1 + s * (x - f1))


def theta_default(f0: float, f_min: float, a: float, b: float) -> float:
    """Order-size threshold balancing the gated and ungated worst cases."""
    if a <= 0:
        raise ValueError("a must be positive")
    d = f_min - b
    return max(0.0, math.sqrt(f0 / a + d * d / (4 * a * a)) - d / (2 * a))


def adjv_order_size_params(f0: float, a: float, b: float) -> tuple[float, float]:
    """Default ``(eta, theta)`` for the FDC-gated single-FDC policy."""
    eta = math.sqrt(max(f0 / 2, b) / a)
    return eta, f0 / (2 * a * eta)


def better_of_two_select(f0: float, f1: float, a: Optional[float], b: Optional[float]):
    """Pick the single-FDC policy with the smaller guarantee.

    Returns ``("cost-comparison-adjv-priority", None)`` or
    ``("order-size-adjv-priority", (eta, theta))``.
    """
    if a is None or b is None:
        raise ConfigurationError("better-of-two needs cost bounds (a, b)")
    if f0 <= f1:
        return "cost-comparison-adjv-priority", None
    root = math.sqrt(b / a)
    lhs = 1 + max(f0 / f1 if f1 > 0 else math.inf, root)
    rhs = (4 + math.sqrt(2)) * max(math.sqrt(f0 / (2 * a)), root)
    if lhs <= rhs:
        return "cost-comparison-adjv-priority", None
    return "order-size-adjv-priority", adjv_order_size_params(f0, a, b)


# ---------------------------------------------------------------- specs

@dataclass(frozen=True)
class PriorityRule:
    kind: str
    eta: Optional[float] = None
    factor: Optional[float] = None
    order: Optional[tuple] = None

    def ranking(self, fixed_costs: np.ndarray, costs: np.ndarray) -> np.ndarray:
        if self.kind == FIXED_COST:
            return fixed_cost_ranking(fixed_costs)
        if self.kind == VARIABLE_COST:
            return variable_cost_ranking(costs)
        if self.kind == ADJUSTED:
            return adjusted_ranking(costs, eta=self.eta, factor=self.factor)
        if self.kind == EXPLICIT:
            return np.asarray(self.order, dtype=np.int64)
        raise ConfigurationError(f"unknown priority rule {self.kind!r}")


@dataclass(frozen=True)
class GatingCondition:
    kind: str
    theta: Optional[float] = None


@dataclass(frozen=True)
class PolicySpec:
    """A priority rule plus a gate; unresolved parameters are filled from the instance header."""

    name: str
    rule: Optional[PriorityRule]
    gate: Optional[GatingCondition]
    gate_target: str = "rdc"

    def resolve(self, header: InstanceHeader) -> "PolicySpec":
        """Return a fully parameterized spec, or raise if it does not fit the instance."""
        f = header.fixed_costs
        bounds = header.cost_bounds
        single = header.K == 1
        if self.name == "better-of-two":
            if not single:
                raise ConfigurationError("better-of-two needs exactly one FDC")
            choice, params = better_of_two_select(f[0], f[1], *(bounds or (None, None)))
            if params is None:
                return make_policy("cost-comparison-adjv-priority").resolve(header)
            eta, theta = params
            return make_policy("order-size-adjv-priority", eta=eta, theta=theta).resolve(header)
        if self.rule is None or self.gate is None:
            raise ConfigurationError(f"policy {self.name} is not fully specified")
        rule, gate = self.rule, self.gate
        if rule.kind == EXPLICIT and rule.order is None:
            rule = replace(rule, order=tuple(range(header.K + 1)))
        if rule.kind == ADJUSTED:
            if not single:
                raise ConfigurationError(f"{self.name} needs exactly one FDC")
            if rule.eta is None and rule.factor is None:
                if bounds is None:
                    raise ConfigurationError(f"{self.name} needs cost bounds or an explicit eta")
                if self.gate_target == "fdc":
                    rule = replace(rule, eta=adjv_order_size_params(f[0], *bounds)[0])
                else:
                    a, b = bounds
                    rule = replace(rule, factor=math.sqrt(a / b))
        if self.name == "cost-comparison-v-priority" and header.cost_regime != TIME_INVARIANT:
            raise ConfigurationError("cost-comparison-v-priority requires time-invariant costs")
        if gate.kind == GATE_RANDOMIZED:
            if not single:
                raise ConfigurationError("the randomized gate needs exactly one FDC")
            if header.cost_regime != TIME_INVARIANT:
                raise ConfigurationError("the randomized gate requires time-invariant costs")
            if f[0] <= 0 or f[1] <= 0:
                raise ConfigurationError("the randomized gate needs positive fixed costs")
        if gate.kind == GATE_ORDER_SIZE and gate.theta is None:
            if bounds is None:
                raise ConfigurationError(f"{self.name} needs cost bounds or an explicit theta")
            if self.gate_target == "fdc":
                gate = replace(gate, theta=adjv_order_size_params(f[0], *bounds)[1])
            else:
                f_min = float(f[1:].min()) if header.K else math.inf
                gate = replace(gate, theta=theta_default(f[0], f_min, *bounds))
        if gate.kind == GATE_ORDER_SIZE and gate.theta < 0:
            raise ConfigurationError("theta must be nonnegative")
        if self.gate_target == "fdc" and not single:
            raise ConfigurationError("FDC gating needs exactly one FDC")
        return replace(self, rule=rule, gate=gate)

    def start(self, header: InstanceHeader, streams: Streams) -> "GpgDecider":
        spec = self.resolve(header)
        rng = streams.gate if spec.gate.kind == GATE_RANDOMIZED else None
        decider = GpgDecider(spec, np.asarray(header.fixed_costs, dtype=np.float64), rng)
        if self.name == "better-of-two":
            decider.notes["selected"] = spec.name
        return decider


class GpgDecider:
    """Per-run state of a gated greedy policy.

    ``last_greedy`` holds the ungated greedy plan of the latest period, which
    is what prefix-dominance checks compare against.
    """

    def __init__(self, spec: PolicySpec, fixed_costs: np.ndarray, rng: Optional[np.random.Generator]):
        self.spec = spec
        self.f = fixed_costs
        self.rng = rng
        self.notes: dict = {}
        self.last_greedy: Optional[np.ndarray] = None
        self._static_ranking = fixed_cost_ranking(fixed_costs) if spec.rule.kind == FIXED_COST else None

    def decide(self, order: np.ndarray, costs: np.ndarray, inventory: np.ndarray) -> tuple[np.ndarray, bool]:
        spec = self.spec
        u = self.rng.random() if self.rng is not None else None
        order = np.asarray(order, dtype=np.int64)
        total = int(order.sum())
        if total == 0:
            self.last_greedy = np.zeros((len(self.f), order.shape[0]), dtype=np.int64)
            return self.last_greedy.copy(), False
        ranking = self._static_ranking if self._static_ranking is not None else spec.rule.ranking(self.f, costs)
        m_hat = greedy_plan(order, inventory, ranking)
        self.last_greedy = m_hat
        kind = spec.gate.kind
        if spec.gate_target == "fdc":
            if total <= spec.gate.theta and bool(np.all(inventory[0] >= order)):
                plan = np.zeros_like(m_hat)
                plan[1] = order
                return plan, True
            return m_hat.copy(), False
        if kind == GATE_NONE:
            fired = False
        elif kind == GATE_ORDER_SIZE:
            fired = total > spec.gate.theta
        elif kind == GATE_COST:
            fired = gate_cost_comparison(m_hat, self.f, costs, order)
        elif kind == GATE_RANDOMIZED:
            x = float((costs[0] - costs[1]) @ m_hat[1])
            fired = u < randomized_gate_probability(x, self.f[0], self.f[1])
        else:
            raise ConfigurationError(f"unknown gate {kind!r}")
        if fired:
            plan = np.zeros_like(m_hat)
            plan[0] = order
            return plan, True
        return m_hat.copy(), False


def make_policy(name: str, *, theta: Optional[float] = None, eta: Optional[float] = None) -> PolicySpec:
    """Build a named policy; omitted parameters take their instance-derived defaults."""
    if name == "order-size-f-priority":
        return PolicySpec(name, PriorityRule(FIXED_COST), GatingCondition(GATE_ORDER_SIZE, theta))
    if name == "cost-comparison-v-priority":
        return PolicySpec(name, PriorityRule(VARIABLE_COST), GatingCondition(GATE_COST))
    if name == "cost-comparison-adjv-priority":
        return PolicySpec(name, PriorityRule(ADJUSTED, eta=eta), GatingCondition(GATE_COST))
    if name == "order-size-adjv-priority":
        return PolicySpec(name, PriorityRule(ADJUSTED, eta=eta), GatingCondition(GATE_ORDER_SIZE, theta), "fdc")
    if name == "randomized-cc-v-priority":
        return PolicySpec(name, PriorityRule(VARIABLE_COST), GatingCondition(GATE_RANDOMIZED))
    if name == "better-of-two":
        return PolicySpec(name, None, None)
    if name == "pure-greedy":
        return PolicySpec(name, PriorityRule(FIXED_COST), GatingCondition(GATE_NONE))
    if name == "all-rdc":
        return PolicySpec(name, PriorityRule(EXPLICIT), GatingCondition(GATE_NONE))
    raise ConfigurationError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")
