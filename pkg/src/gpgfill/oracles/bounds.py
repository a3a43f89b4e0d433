"""Competitive-ratio guarantees and impossibility bounds as plain formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .bruteforce import ANALYTIC_UPPER, OptResult

GOLDEN = (math.sqrt(5) - 1) / 2
MULTI_VARYING_GAP = 2 * (1 + math.sqrt(5))
SINGLE_VARYING_GAP = 4 * (9 + 4 * math.sqrt(2)) / (math.sqrt(10 + 4 * math.sqrt(2)) - 1)


class DomainError(ValueError):
    """Inputs outside a formula's domain."""


def _positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")


def order_size_upper(f0: float, f_min: float, a: float, b: float, theta: float) -> float:
    """Guarantee of the order-size gate with fixed-cost priority for threshold ``theta``."""
    _positive(a=a)
    if f_min + a * theta <= 0:
        raise DomainError("f_min + a*theta must be positive")
    return max(theta, (f0 + b * theta) / (f_min + a * theta), b / a)


def split_crossing(f0: float, f: float, a: float) -> float:
    """Real ``n`` where ``n == f0/(f + n*a)``: the supremum of ``min(n, f0/(f+n*a))`` over real n."""
    _positive(a=a)
    return math.sqrt(f0 / a + f * f / (4 * a * a)) - f / (2 * a)


def best_split_size(f0: float, f: float, a: float, integer_n: bool = True) -> float:
    """``max over n >= 2 of min(n, f0/(f + n*a))``.

    With ``integer_n`` the maximum runs over whole item counts; otherwise the
    closed-form real crossing is returned.
    """
    cross = split_crossing(f0, f, a)
    if not integer_n:
        return cross
    # n rises and f0/(f+n*a) falls, so the integer optimum sits next to their crossing
    candidates = {2, max(2, math.floor(cross)), max(2, math.ceil(cross))}
    return max(min(n, f0 / (f + n * a)) for n in candidates)


def multi_varying_lower(f0: float, f_min: float, a: float, b: float, integer_n: bool = True) -> float:
    """Lower bound on every online policy with several FDCs and time-varying costs."""
    _positive(a=a)
    return max(1.0, b / (4 * a), best_split_size(f0, f_min, a, integer_n) / 4)


def cost_comparison_upper(f0: float, f: Sequence[float]) -> float:
    """Guarantee of the cost-comparison gate with variable-cost priority."""
    f_min = min(f)
    _positive(f_min=f_min)
    return max((f0 + sum(f)) / f_min, 2.0)


def multi_invariant_lower(f0: float, f: Sequence[float]) -> float:
    f_min = min(f)
    _positive(f_min=f_min)
    return (f0 + sum(f)) / f_min


def adjusted_cost_comparison_upper(f0: float, f1: float, a: float, b: float) -> float:
    """Single-FDC cost-comparison guarantee with the sqrt(a/b) adjusted ranking."""
    _positive(f1=f1, a=a)
    return 1 + max(f0 / f1, math.sqrt(b / a))


def adjusted_order_size_upper(f0: float, a: float, b: float) -> float:
    """Single-FDC FDC-gated guarantee with default parameters (needs f0 >= f1)."""
    _positive(a=a)
    return (4 + math.sqrt(2)) * math.sqrt(max(f0 / 2, b) / a)


def better_of_two_upper(f0: float, f1: float, a: float, b: float) -> float:
    first = adjusted_cost_comparison_upper(f0, f1, a, b)
    second = adjusted_order_size_upper(f0, a, b) if f0 >= f1 else math.inf
    return min(first, second)


def better_of_two_upper_relaxed(f0: float, f1: float, a: float, b: float) -> float:
    _positive(f1=f1, a=a)
    return max(
        min(2 * f0 / f1, (2 * math.sqrt(2) + 1) * math.sqrt(f0 / a)),
        (4 + math.sqrt(2)) * math.sqrt(b / a),
    )


def single_varying_lower(f0: float, f1: float, a: float, b: float, integer_n: bool = True) -> float:
    _positive(a=a)
    return max(1.0, math.sqrt(b / a) / 3, best_split_size(f0, f1, a, integer_n) / 4)


def randomized_upper(f0: float, f1: float) -> float:
    """Expected-cost guarantee of the randomized gate, in terms of ``w = f0/f1``."""
    _positive(f1=f1)
    w = f0 / f1
    if w < GOLDEN:
        r = math.sqrt(1 - w)
        return 1 + 1 / (1 - w + 2 * r)
    return 1 + w


def single_invariant_lower(f0: float, f1: float) -> float:
    _positive(f1=f1)
    return max(1 + f0 / f1, 1.25)


BOUNDS = {
    "order-size-upper": order_size_upper,
    "multi-varying-lower": multi_varying_lower,
    "cost-comparison-upper": cost_comparison_upper,
    "multi-invariant-lower": multi_invariant_lower,
    "adjusted-cost-comparison-upper": adjusted_cost_comparison_upper,
    "adjusted-order-size-upper": adjusted_order_size_upper,
    "better-of-two-upper": better_of_two_upper,
    "better-of-two-upper-relaxed": better_of_two_upper_relaxed,
    "single-varying-lower": single_varying_lower,
    "randomized-upper": randomized_upper,
    "single-invariant-lower": single_invariant_lower,
}


def bound_value(bound_id: str, **inputs) -> float:
    try:
        fn = BOUNDS[bound_id]
    except KeyError:
        raise DomainError(f"unknown bound {bound_id!r}") from None
    return float(fn(**inputs))


@dataclass(frozen=True)
class Ratio:
    value: float
    lower_bound_only: bool = False

    def __float__(self) -> float:
        return self.value


def competitive_ratio(alg_cost: float, opt: OptResult) -> Ratio:
    """``alg/opt``; against an upper bound on OPT this only bounds the true ratio from below."""
    loose = opt.method == ANALYTIC_UPPER
    if opt.opt_cost == 0:
        return Ratio(1.0 if alg_cost == 0 else math.inf, loose)
    return Ratio(alg_cost / opt.opt_cost, loose)
