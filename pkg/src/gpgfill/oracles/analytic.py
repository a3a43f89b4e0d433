"""Closed-form optimal costs for the adversarial instance families.

Each value is either exact (the regime conditions under which no cheaper plan
exists are checked) or the cost of an explicit feasible plan, which only
bounds the optimum from above.
"""

from __future__ import annotations

import math

from ..model import ConfigurationError
from .bruteforce import ANALYTIC_EXACT, ANALYTIC_UPPER, OptResult

FAMILIES = (
    "greedy-depletion",
    "fixed-cost-pair",
    "variable-cost-pair",
    "block-table",
    "single-fdc-varying-pair",
    "single-fdc-invariant-pair",
    "stress",
)


def _result(value: float, exact: bool) -> OptResult:
    return OptResult(opt_cost=float(value), method=ANALYTIC_EXACT if exact else ANALYTIC_UPPER)


def _greedy_depletion(p, member):
    # ship the big order from the RDC, then every unit order from the FDC
    return _result(3.0, True)


def _fixed_cost_pair(p, member):
    n, f0, a = p["n"], p["f0"], p["a"]
    f = min(p["f"])
    if member == "first":
        return _result(min(f, f0) + n * a, True)
    return _result(f0 + n * f + 2 * n * a, False)


def _variable_cost_pair(p, member):
    N, a, b = p["N"], p["a"], p["b"]
    f1, f2 = p["f"][0], p["f"][1]
    # the only all-cheap plan; any other plan ships a unit at cost b
    return _result(f1 + f2 + 2 * a * N, (b - a) >= f1 + f2)


def _block_table(p, member):
    s, d, n, K = p["s"], p["d"], p["n"], p["K"]
    c0, c1, c2 = p["c0"], p["c1"], p["c2"]
    f0, f = p["f0"], p["f"]
    if member == "first":
        exact = f[0] <= f0 and c1 <= min(c0, c2)
        return _result(f[0] + (s * n + (K - 1) * d * n) * c1, exact)
    value = f0 + sum(f[1:]) + s * n * c0 + d * (K - 1) * n * c2 + (f[0] + (s + K * d) * c1) * n
    return _result(value, False)


def _single_fdc_varying_pair(p, member):
    N, a, b, f0, f1 = p["N"], p["a"], p["b"], p["f0"], p["f1"]
    mid = math.sqrt(a * b)
    if member == "first":
        return _result(min(f1 + a * N, f0 + mid * N), True)
    return _result(f0 + f1 + mid * N + a * N, False)


def _single_fdc_invariant_pair(p, member):
    M, N, eps, f0, f1 = p["M"], p["N"], p["eps"], p["f0"], p["f1"]
    if member == "first":
        return _result(min(f1, f0 + N * eps), True)
    return _result(f0 + f1 + N * eps, M >= 1 and M * N * eps >= f1)


def _stress(p, member):
    f0 = p["f0"]
    n = math.ceil(math.sqrt(f0))
    return _result(f0 + 2 * n, False)


_DISPATCH = {
    "greedy-depletion": _greedy_depletion,
    "fixed-cost-pair": _fixed_cost_pair,
    "variable-cost-pair": _variable_cost_pair,
    "block-table": _block_table,
    "single-fdc-varying-pair": _single_fdc_varying_pair,
    "single-fdc-invariant-pair": _single_fdc_invariant_pair,
    "stress": _stress,
}


def analytic_opt(family: str, params: dict, member: str = "first") -> OptResult:
    """Optimal cost (or an upper bound on it) of one member of a family."""
    try:
        fn = _DISPATCH[family]
    except KeyError:
        raise ConfigurationError(f"unknown family {family!r}") from None
    if member not in ("first", "second"):
        raise ConfigurationError(f"unknown member {member!r}")
    return fn(params, member)
