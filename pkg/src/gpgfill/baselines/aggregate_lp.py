"""Time-aggregate LP relaxation over order types.

Variables ``x[q][i, k]`` are the long-run share of item ``i`` of order type
``q`` served from DC ``k``; ``y[q][k]`` is the share of type-``q`` orders that
activate DC ``k``. Expected stock use of every FDC item, summed over order
types, must fit the initial inventory.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .simplex import FEAS_TOL, simplex

SIMPLEX_MAX_VARS = 600


class UnsupportedInputError(ValueError):
    """Order types must be nonempty sets of distinct items."""


@dataclass(frozen=True)
class OrderTypeDistribution:
    types: tuple[tuple[int, ...], ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.types) != len(self.probs):
            raise ValueError("one probability per order type")
        if any(p < 0 for p in self.probs) or abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        for q in self.types:
            if len(q) == 0 or len(set(q)) != len(q):
                raise UnsupportedInputError(f"order type {q} must be a nonempty set of items")

    @classmethod
    def from_meta(cls, meta: dict) -> "OrderTypeDistribution":
        d = meta["distribution"]
        return cls(tuple(tuple(int(i) for i in q) for q in d["types"]), tuple(float(p) for p in d["probs"]))

    def to_json(self) -> dict:
        return {"types": [list(q) for q in self.types], "probs": list(self.probs)}

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class AggregateLp:
    distribution: OrderTypeDistribution
    K: int
    T: int
    c: np.ndarray
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    x_offsets: list[int]
    y_offset: int
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.upper is None:
            self.upper = np.ones(len(self.c))

    @property
    def n_x(self) -> int:
        return self.y_offset

    @property
    def n_vars(self) -> int:
        return len(self.c)

    def x_index(self, q: int, j: int, k: int) -> int:
        return self.x_offsets[q] + j * (self.K + 1) + k

    def y_index(self, q: int, k: int) -> int:
        return self.y_offset + q * (self.K + 1) + k


@dataclass
class LpSolution:
    status: str
    objective: float
    values: Optional[np.ndarray]
    residuals: dict = field(default_factory=dict)
    method: str = ""

    def x(self, lp: AggregateLp, q: int) -> np.ndarray:
        """Shares ``(|q|, K+1)`` for order type ``q``."""
        K1 = lp.K + 1
        size = len(lp.distribution.types[q])
        start = lp.x_offsets[q]
        return self.values[start : start + size * K1].reshape(size, K1)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "objective": self.objective,
            "values": None if self.values is None else self.values.tolist(),
            "residuals": self.residuals,
            "method": self.method,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LpSolution":
        values = None if data["values"] is None else np.asarray(data["values"], dtype=np.float64)
        return cls(data["status"], float(data["objective"]), values, dict(data["residuals"]), data.get("method", ""))


def build_aggregate_lp(
    distribution: OrderTypeDistribution,
    fixed_costs: Sequence[float],
    costs: np.ndarray,
    inventory: np.ndarray,
    T: int,
) -> AggregateLp:
    """Assemble the LP; ``costs`` is the time-invariant ``(K+1, n)`` unit-cost matrix."""
    f = np.asarray(fixed_costs, dtype=np.float64)
    costs = np.asarray(costs, dtype=np.float64)
    inventory = np.asarray(inventory)
    K1 = len(f)
    K = K1 - 1
    n = costs.shape[1]
    types, lam = distribution.types, distribution.probs
    for q in types:
        if max(q) >= n or min(q) < 0:
            raise UnsupportedInputError(f"order type {q} names items outside 0..{n - 1}")
    x_offsets, off = [], 0
    for q in types:
        x_offsets.append(off)
        off += len(q) * K1
    y_offset = off
    nv = y_offset + len(types) * K1
    c = np.zeros(nv)
    eq_cols = []
    link_rows, link_cols, link_vals = [], [], []
    inv_entries: dict[tuple[int, int], list[tuple[int, float]]] = {}
    link = 0
    for qi, q in enumerate(types):
        w = T * lam[qi]
        ybase = y_offset + qi * K1
        c[ybase : ybase + K1] = w * f
        for j, i in enumerate(q):
            xbase = x_offsets[qi] + j * K1
            c[xbase : xbase + K1] = w * costs[:, i]
            for k in range(K1):
                eq_cols.append((x_offsets[qi] // K1 + j, xbase + k))
                link_rows += [link, link]
                link_cols += [xbase + k, ybase + k]
                link_vals += [1.0, -1.0]
                link += 1
                if k >= 1:
                    inv_entries.setdefault((k, i), []).append((xbase + k, w))
    n_eq = y_offset // K1
    A_eq = sp.csr_matrix(
        (np.ones(len(eq_cols)), ([r for r, _ in eq_cols], [col for _, col in eq_cols])), shape=(n_eq, nv)
    )
    b_eq = np.ones(n_eq)
    inv_rows, inv_cols, inv_vals, inv_rhs = [], [], [], []
    for r, ((k, i), entries) in enumerate(sorted(inv_entries.items())):
        for col, w in entries:
            inv_rows.append(r)
            inv_cols.append(col)
            inv_vals.append(w)
        inv_rhs.append(float(inventory[k - 1, i]))
    A_inv = sp.csr_matrix((inv_vals, (inv_rows, inv_cols)), shape=(len(inv_rhs), nv))
    A_link = sp.csr_matrix((link_vals, (link_rows, link_cols)), shape=(link, nv))
    A_ub = sp.vstack([A_inv, A_link]).tocsr()
    b_ub = np.concatenate([np.asarray(inv_rhs, dtype=np.float64), np.zeros(link)])
    return AggregateLp(distribution, K, T, c, A_ub, b_ub, A_eq, b_eq, x_offsets, y_offset)


def residuals(lp: AggregateLp, values: np.ndarray) -> dict:
    ub = lp.A_ub @ values - lp.b_ub
    eq = lp.A_eq @ values - lp.b_eq
    return {
        "inequality": float(max(0.0, ub.max(initial=0.0))),
        "equality": float(np.abs(eq).max(initial=0.0)),
        "bounds": float(max(0.0, -values.min(initial=0.0), (values - lp.upper).max(initial=0.0))),
    }


def solve_lp(lp: AggregateLp, method: str = "auto") -> LpSolution:
    """Solve with the built-in simplex (small LPs) or HiGHS (everything else)."""
    if method == "auto":
        method = "simplex" if lp.n_vars <= SIMPLEX_MAX_VARS else "highs"
    if method == "simplex":
        res = simplex(lp.c, lp.A_ub, lp.b_ub, lp.A_eq, lp.b_eq, upper=lp.upper)
        status, values = res.status, res.x
    elif method == "highs":
        res = linprog(lp.c, A_ub=lp.A_ub, b_ub=lp.b_ub, A_eq=lp.A_eq, b_eq=lp.b_eq, bounds=np.column_stack([np.zeros(lp.n_vars), lp.upper]), method="highs")
        status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status, "failed")
        values = res.x if status == "optimal" else None
        if status == "failed":
            raise RuntimeError(f"LP solver failed: {res.message}")
    else:
        raise ValueError(f"unknown LP method {method!r}")
    if status != "optimal":
        return LpSolution(status, math.nan, None, {}, method)
    values = np.clip(values, 0.0, lp.upper)
    res_d = residuals(lp, values)
    if max(res_d.values()) > FEAS_TOL:
        raise RuntimeError(f"LP solution violates constraints: {res_d}")
    return LpSolution("optimal", float(lp.c @ values), values, res_d, method)


def cache_key(distribution: OrderTypeDistribution, T: int, inventory: np.ndarray, costs: np.ndarray, fixed) -> str:
    h = hashlib.sha256()
    h.update(distribution.digest().encode())
    h.update(str(int(T)).encode())
    for arr in (np.asarray(inventory, dtype=np.int64), np.asarray(costs, dtype=np.float64), np.asarray(fixed, dtype=np.float64)):
        h.update(arr.tobytes())
    return h.hexdigest()[:24]
