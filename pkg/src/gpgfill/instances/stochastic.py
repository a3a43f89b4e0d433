"""Random order streams drawn from a size-then-type mixture with binary demand."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..model import TIME_INVARIANT, TIME_VARYING, ConfigurationError, Instance
from ..rng import stream


@dataclass(frozen=True)
class StochasticConfig:
    n: int = 50
    K: int = 10
    T: int = 2000
    fdc_fixed: float = 5.0
    rdc_fixed: float = 50.0
    a: float = 8.0
    b: float = 30.0
    order_sizes: tuple = (1, 2, 3, 10, 15, 20)
    type_counts: tuple = (50, 50, 30, 20, 20, 10)
    size_probs: tuple = (0.4, 0.2, 0.1, 0.1, 0.1, 0.1)
    tau: float = 0.2
    regime: str = TIME_VARYING
    extra: dict = field(default_factory=dict, compare=False)

    def check(self) -> None:
        if not (len(self.order_sizes) == len(self.type_counts) == len(self.size_probs)):
            raise ConfigurationError("order_sizes, type_counts and size_probs must have equal length")
        if abs(math.fsum(self.size_probs) - 1.0) > 1e-12 or min(self.size_probs) < 0:
            raise ConfigurationError("size_probs must be a probability vector")
        if max(self.order_sizes) > self.n or min(self.order_sizes) < 1:
            raise ConfigurationError("order sizes must lie in 1..n")
        if min(self.type_counts) < 1:
            raise ConfigurationError("every size needs at least one order type")
        if self.regime not in (TIME_VARYING, TIME_INVARIANT):
            raise ConfigurationError(f"unknown regime {self.regime!r}")
        if not 0 < self.a <= self.b:
            raise ConfigurationError("need 0 < a <= b")
        if self.K < 1 or self.T < 1 or self.tau < 0:
            raise ConfigurationError("need K >= 1, T >= 1 and tau >= 0")

    def replace(self, **kwargs) -> "StochasticConfig":
        data = asdict(self)
        data.update(kwargs)
        for key in ("order_sizes", "type_counts", "size_probs"):
            data[key] = tuple(data[key])
        return StochasticConfig(**data)


def draw_order_types(config: StochasticConfig, rng: np.random.Generator) -> list[list[tuple[int, ...]]]:
    """Distinct item subsets per size; sizes with too few distinct subsets repeat some."""
    out = []
    for size, count in zip(config.order_sizes, config.type_counts):
        available = math.comb(config.n, size)
        seen: set = set()
        types: list[tuple[int, ...]] = []
        while len(types) < count:
            q = tuple(sorted(rng.permutation(config.n)[:size].tolist()))
            if q in seen and len(seen) < available:
                continue
            seen.add(q)
            types.append(q)
        out.append(types)
    return out


def type_distribution(config: StochasticConfig, types_by_size) -> tuple[list[tuple[int, ...]], list[float]]:
    """Merge identical subsets and return (types, arrival probabilities)."""
    probs: dict[tuple[int, ...], float] = {}
    for p_size, types in zip(config.size_probs, types_by_size):
        for q in types:
            probs[q] = probs.get(q, 0.0) + p_size / len(types)
    keys = list(probs)
    return keys, [probs[q] for q in keys]


def item_demand_probs(n: int, types, probs) -> np.ndarray:
    """Per-period probability that each item is requested."""
    p = np.zeros(n)
    for q, lam in zip(types, probs):
        p[list(q)] += lam
    return p


def gen_stochastic(config: StochasticConfig, seed: int) -> Instance:
    config.check()
    rng = stream(seed, "instance")
    n, K, T = config.n, config.K, config.T
    types_by_size = draw_order_types(config, rng)
    types, probs = type_distribution(config, types_by_size)
    p_item = item_demand_probs(n, types, probs)

    size_idx = rng.choice(len(config.order_sizes), size=T, p=np.asarray(config.size_probs))
    orders = np.zeros((T, n), dtype=np.int64)
    for t, s in enumerate(size_idx):
        choices = types_by_size[s]
        q = choices[int(rng.integers(len(choices)))]
        orders[t, list(q)] = 1

    if config.regime == TIME_INVARIANT:
        base = rng.uniform(config.a, config.b, size=(K + 1, 1, n))
        costs = np.repeat(base, T, axis=1)
    else:
        costs = rng.uniform(config.a, config.b, size=(K + 1, T, n))

    level = np.floor(config.tau * p_item * T / K + 0.5).astype(np.int64)
    inventory = np.repeat(level[None, :], K, axis=0)
    fixed = np.full(K + 1, float(config.fdc_fixed))
    fixed[0] = config.rdc_fixed
    meta = {
        "family": "stochastic",
        "seed": int(seed),
        "distribution": {"types": [list(q) for q in types], "probs": probs},
        "annotations": {},
    }
    return Instance(
        fixed_costs=fixed,
        variable_costs=costs,
        initial_inventory=inventory,
        orders=orders,
        cost_regime=config.regime,
        cost_bounds=(config.a, config.b),
        meta=meta,
    )
