"""Hand-built instance families that stress specific policy weaknesses.

Pair families return two instances that agree on the first period, so an
online policy cannot tell them apart when it makes its first decision.
"""

from __future__ import annotations

import math

import numpy as np

from ..model import TIME_INVARIANT, TIME_VARYING, ConfigurationError, Instance
from ..oracles.analytic import FAMILIES, analytic_opt

DEFAULTS = {
    "greedy-depletion": {"M": 2},
    "fixed-cost-pair": {"n": 3, "f": [5.0], "f0": 50.0, "a": 8.0},
    "variable-cost-pair": {"N": 5, "a": 1.0, "b": 10.0, "K": 2, "f0": 2.0, "f": [1.0, 1.0]},
    "block-table": {"s": 1, "d": 1, "n": 2, "K": 2, "c0": 1.0, "c1": 0.01, "c2": 1.0, "f0": 10.0, "f": [5.0, 5.0]},
    "single-fdc-varying-pair": {"N": 4, "a": 1.0, "b": 4.0, "f0": 10.0, "f1": 2.0},
    "single-fdc-invariant-pair": {"M": 10, "N": 2, "eps": 0.5, "f0": 1.0, "f1": 4.0},
    "stress": {"f0": 50.0},
}


def _params(family: str, params: dict) -> dict:
    if family not in FAMILIES:
        raise ConfigurationError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    unknown = set(params) - set(DEFAULTS[family])
    if unknown:
        raise ConfigurationError(f"unknown parameters for {family}: {sorted(unknown)}")
    return {**DEFAULTS[family], **params}


def _annotate(family: str, p: dict, member: str, extra: dict | None = None) -> dict:
    opt = analytic_opt(family, p, member)
    ann = {"opt_cost": opt.opt_cost, "method": opt.method}
    if extra:
        ann.update(extra)
    return {"family": family, "member": member, "params": p, "annotations": ann}


def _constant_costs(value: float, K: int, T: int, n: int) -> np.ndarray:
    return np.full((K + 1, T, n), float(value))


def greedy_depletion(p: dict) -> list[Instance]:
    M = int(p["M"])
    if M < 1:
        raise ConfigurationError("M must be at least 1")
    T = M + 1
    orders = np.ones((T, 1), dtype=np.int64)
    orders[0, 0] = M
    c = 1.0 / M
    inst = Instance(
        fixed_costs=[1.0, 0.0],
        variable_costs=_constant_costs(c, 1, T, 1),
        initial_inventory=[[M]],
        orders=orders,
        cost_regime=TIME_INVARIANT,
        cost_bounds=(c, c),
        meta=_annotate("greedy-depletion", p, "first", {"fdc_first_cost": M + 2, "all_rdc_cost": M + 3}),
    )
    return [inst]


def fixed_cost_pair(p: dict) -> list[Instance]:
    n, f0, a = int(p["n"]), float(p["f0"]), float(p["a"])
    f = [float(x) for x in p["f"]]
    if n < 1 or not f or a <= 0:
        raise ConfigurationError("need n >= 1, at least one FDC and a > 0")
    K = len(f)
    stocked = int(np.argmin(f))
    inv = np.zeros((K, n), dtype=np.int64)
    inv[stocked] = 1
    out = []
    for member, T in (("first", 1), ("second", n + 1)):
        orders = np.zeros((T, n), dtype=np.int64)
        orders[0] = 1
        for j in range(1, T):
            orders[j, j - 1] = 1
        out.append(
            Instance(
                fixed_costs=[f0, *f],
                variable_costs=_constant_costs(a, K, T, n),
                initial_inventory=inv,
                orders=orders,
                cost_regime=TIME_VARYING,
                cost_bounds=(a, a),
                meta=_annotate("fixed-cost-pair", p, member),
            )
        )
    return out


def variable_cost_pair(p: dict) -> list[Instance]:
    N, a, b, K = int(p["N"]), float(p["a"]), float(p["b"]), int(p["K"])
    f0 = float(p["f0"])
    f = [float(x) for x in p["f"]]
    if K < 2:
        raise ConfigurationError("variable-cost-pair needs K >= 2")
    if len(f) != K:
        raise ConfigurationError("f must list one fixed cost per FDC")
    if not 0 < a <= b:
        raise ConfigurationError("need 0 < a <= b")
    inv = np.zeros((K, 1), dtype=np.int64)
    inv[0, 0] = inv[1, 0] = N
    out = []
    for member, cheap in (("first", 2), ("second", 1)):
        c = np.full((K + 1, 2, 1), b)
        c[1, 0, 0] = c[2, 0, 0] = a
        c[cheap, 1, 0] = a
        out.append(
            Instance(
                fixed_costs=[f0, *f],
                variable_costs=c,
                initial_inventory=inv,
                orders=np.full((2, 1), N, dtype=np.int64),
                cost_regime=TIME_VARYING,
                cost_bounds=(a, b),
                meta=_annotate("variable-cost-pair", p, member),
            )
        )
    return out


def block_table(p: dict) -> list[Instance]:
    s, d, n, K = int(p["s"]), int(p["d"]), int(p["n"]), int(p["K"])
    c0, c1, c2 = float(p["c0"]), float(p["c1"]), float(p["c2"])
    f0 = float(p["f0"])
    f = [float(x) for x in p["f"]]
    if K < 1 or len(f) != K or min(s, d, n) < 1:
        raise ConfigurationError("need s, d, n >= 1, K >= 1 and one fixed cost per FDC")
    if min(c0, c1, c2) <= 0:
        raise ConfigurationError("unit costs must be positive")
    # rows 0..K; row 0 has s items per column, the others d
    cells: list[list[list[int]]] = []
    next_id = 0
    for r in range(K + 1):
        width = s if r == 0 else d
        row = []
        for _ in range(n):
            row.append(list(range(next_id, next_id + width)))
            next_id += width
        cells.append(row)
    n_items = next_id
    inv = np.zeros((K, n_items), dtype=np.int64)
    inv[0] = 1
    for r in range(1, K):
        for col in cells[r]:
            inv[r, col] = 1
    unit = np.empty((K + 1, n_items))
    unit[0], unit[1], unit[2:] = c0, c1, c2
    first_order = np.zeros(n_items, dtype=np.int64)
    for r in range(K):
        for col in cells[r]:
            first_order[col] = 1
    out = []
    for member, T in (("first", 1), ("second", n + 1)):
        orders = np.zeros((T, n_items), dtype=np.int64)
        orders[0] = first_order
        for j in range(1, T):
            for r in range(K + 1):
                orders[j, cells[r][j - 1]] = 1
        out.append(
            Instance(
                fixed_costs=[f0, *f],
                variable_costs=np.repeat(unit[:, None, :], T, axis=1),
                initial_inventory=inv,
                orders=orders,
                cost_regime=TIME_INVARIANT,
                meta=_annotate("block-table", p, member),
            )
        )
    return out


def single_fdc_varying_pair(p: dict) -> list[Instance]:
    N, a, b, f0, f1 = int(p["N"]), float(p["a"]), float(p["b"]), float(p["f0"]), float(p["f1"])
    if not 0 < a <= b:
        raise ConfigurationError("need 0 < a <= b")
    mid = math.sqrt(a * b)
    out = []
    for member, T in (("first", 1), ("second", 2)):
        c = np.empty((2, T, 1))
        c[0, 0, 0], c[1, 0, 0] = mid, a
        if T == 2:
            c[0, 1, 0], c[1, 1, 0] = b, a
        out.append(
            Instance(
                fixed_costs=[f0, f1],
                variable_costs=c,
                initial_inventory=[[N]],
                orders=np.full((T, 1), N, dtype=np.int64),
                cost_regime=TIME_VARYING,
                cost_bounds=(a, b),
                meta=_annotate("single-fdc-varying-pair", p, member),
            )
        )
    return out


def single_fdc_invariant_pair(p: dict) -> list[Instance]:
    M, N, eps = int(p["M"]), int(p["N"]), float(p["eps"])
    f0, f1 = float(p["f0"]), float(p["f1"])
    if M < 1 or N < 1 or eps <= 0:
        raise ConfigurationError("need M, N >= 1 and eps > 0")
    out = []
    for member, orders in (("first", [N]), ("second", [N, M * N])):
        T = len(orders)
        c = np.zeros((2, T, 1))
        c[0] = eps
        out.append(
            Instance(
                fixed_costs=[f0, f1],
                variable_costs=c,
                initial_inventory=[[M * N]],
                orders=np.array(orders, dtype=np.int64).reshape(T, 1),
                cost_regime=TIME_INVARIANT,
                meta=_annotate("single-fdc-invariant-pair", p, member),
            )
        )
    return out


def stress(p: dict) -> list[Instance]:
    f0 = float(p["f0"])
    if f0 <= 0:
        raise ConfigurationError("f0 must be positive")
    n = math.ceil(math.sqrt(f0))
    T = n + 1
    orders = np.zeros((T, n), dtype=np.int64)
    orders[0] = 1
    for j in range(1, T):
        orders[j, j - 1] = 1
    meta = _annotate(
        "stress",
        p,
        "first",
        {"myopic_cost": n * (f0 + 2), "order_size_cost": f0 + 2 * n},
    )
    return [
        Instance(
            fixed_costs=[f0, 0.0],
            variable_costs=_constant_costs(1.0, 1, T, n),
            initial_inventory=np.ones((1, n), dtype=np.int64),
            orders=orders,
            cost_regime=TIME_VARYING,
            cost_bounds=(1.0, 1.0),
            meta=meta,
        )
    ]


_BUILDERS = {
    "greedy-depletion": greedy_depletion,
    "fixed-cost-pair": fixed_cost_pair,
    "variable-cost-pair": variable_cost_pair,
    "block-table": block_table,
    "single-fdc-varying-pair": single_fdc_varying_pair,
    "single-fdc-invariant-pair": single_fdc_invariant_pair,
    "stress": stress,
}


def gen_adversarial(family: str, **params) -> list[Instance]:
    """Build every member of ``family``; each carries its optimal-cost annotation."""
    p = _params(family, params)
    return _BUILDERS[family](p)
