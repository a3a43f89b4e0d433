"""Random tiny instances small enough for exhaustive search."""

from __future__ import annotations

import numpy as np

from ..model import TIME_INVARIANT, TIME_VARYING, Instance


def random_tiny(
    rng: np.random.Generator,
    *,
    n_max: int = 3,
    K_max: int = 3,
    T_max: int = 5,
    S_max: int = 3,
    I_max: int = 3,
    K: int | None = None,
    regime: str = TIME_VARYING,
    bounded: bool = True,
    fdc_fixed: tuple[float, float] = (0.2, 10.0),
    rdc_fixed: tuple[float, float] = (0.0, 30.0),
) -> Instance:
    """Draw one instance; half of them open with a large order followed by small ones."""
    n = int(rng.integers(1, n_max + 1))
    K = int(rng.integers(1, K_max + 1)) if K is None else K
    T = int(rng.integers(1, T_max + 1))
    a = float(rng.uniform(0.5, 2.0))
    b = float(a * rng.uniform(1.0, 5.0))
    if regime == TIME_INVARIANT:
        base = rng.uniform(a, b, size=(K + 1, 1, n))
        costs = np.repeat(base, T, axis=1)
    else:
        costs = rng.uniform(a, b, size=(K + 1, T, n))
    fixed = np.concatenate([[rng.uniform(*rdc_fixed)], rng.uniform(*fdc_fixed, size=K)])
    if rng.random() < 0.5:
        orders = rng.integers(0, S_max + 1, size=(T, n))
    else:
        orders = np.zeros((T, n), dtype=np.int64)
        orders[0] = S_max
        for t in range(1, T):
            orders[t, rng.integers(n)] = rng.integers(1, S_max + 1)
    inventory = rng.integers(0, I_max + 1, size=(K, n))
    return Instance(
        fixed_costs=fixed,
        variable_costs=costs,
        initial_inventory=inventory,
        orders=orders,
        cost_regime=regime,
        cost_bounds=(a, b) if bounded else None,
        meta={"family": "random-tiny"},
    )
