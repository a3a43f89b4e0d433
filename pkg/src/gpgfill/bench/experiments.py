"""Seeded experiment sweeps that write tidy row and aggregate CSV files."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from ..baselines.ipfc import IpfcPolicy
from ..baselines.myopic import MyopicPolicy
from ..instances.adversarial import gen_adversarial
from ..instances.stochastic import StochasticConfig, gen_stochastic
from ..instances.tiny import random_tiny
from ..model import TIME_INVARIANT, TIME_VARYING, ConfigurationError, run_policy
from ..oracles import bounds
from ..policies import POLICY_NAMES, make_policy, theta_default
from ..rng import stream

log = logging.getLogger(__name__)

EXPERIMENTS = (
    "horizon-sweep-varying",
    "fdc-sweep-varying",
    "single-fdc-varying",
    "horizon-sweep-invariant",
    "fdc-sweep-invariant",
    "single-fdc-invariant",
    "stress",
    "bounds-grid",
    "prefix-property",
    "custom",
)

# (sweep parameter, desk sweep, full sweep, fixed config fields, default policies)
_PRESETS = {
    "horizon-sweep-varying": (
        "T", [100, 200, 300, 400, 500], [200 * i for i in range(1, 11)],
        {"K": 5, "regime": TIME_VARYING}, ["order-size-f-priority", "pure-greedy", "myopic"],
    ),
    "fdc-sweep-varying": (
        "K", [3, 5, 7], [2 * i + 1 for i in range(1, 8)],
        {"T": 500, "regime": TIME_VARYING}, ["order-size-f-priority", "pure-greedy", "myopic"],
    ),
    "single-fdc-varying": (
        "T", [100, 200, 300, 400, 500], [200 * i for i in range(1, 11)],
        {"K": 1, "regime": TIME_VARYING},
        ["cost-comparison-adjv-priority", "order-size-adjv-priority", "better-of-two", "myopic"],
    ),
    "horizon-sweep-invariant": (
        "T", [100, 200, 300, 400, 500], [200 * i for i in range(1, 11)],
        {"K": 5, "regime": TIME_INVARIANT}, ["cost-comparison-v-priority", "myopic", "ipfc"],
    ),
    "fdc-sweep-invariant": (
        "K", [3, 5, 7], [2 * i + 1 for i in range(1, 8)],
        {"T": 500, "regime": TIME_INVARIANT}, ["cost-comparison-v-priority", "myopic", "ipfc"],
    ),
    "single-fdc-invariant": (
        "T", [100, 200, 300, 400, 500], [200 * i for i in range(1, 11)],
        {"K": 1, "regime": TIME_INVARIANT},
        ["cost-comparison-adjv-priority", "randomized-cc-v-priority", "myopic", "ipfc"],
    ),
    "stress": ("f0", [50.0 * i for i in range(1, 11)], [50.0 * i for i in range(1, 11)], {},
               ["myopic", "order-size-f-priority"]),
    "bounds-grid": ("samples", [10_000], [10_000], {}, ["multi-varying", "single-varying"]),
    "prefix-property": ("K", [1, 2, 3], [1, 2, 3], {}, ["order-size-f-priority", "pure-greedy", "all-rdc"]),
}

ROW_FIELDS = ("experiment", "sweep_param", "sweep_value", "policy", "replication", "seed",
              "status", "cost", "gated_period_count")
TIMING_FIELDS = ("wall_time", "decision_time_per_order")
AGG_FIELDS = ("experiment", "sweep_param", "sweep_value", "policy", "count", "failures",
              "mean_cost", "se_cost", "mean_gated_period_count")
AGG_TIMING_FIELDS = ("mean_wall_time", "mean_decision_time_per_order")


@dataclass
class ExperimentConfig:
    experiment: str
    sweep: Optional[list] = None
    sweep_param: Optional[str] = None
    policies: Optional[list] = None
    replications: int = 100
    base_seed: int = 0
    out_dir: Optional[str] = None
    full_scale: bool = False
    timing: bool = True
    workers: int = 1
    base: dict = field(default_factory=dict)
    policy_params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def resolved(self) -> "ExperimentConfig":
        """Fill preset defaults and check the result."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(f"unknown experiment {self.experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
        if self.replications < 1:
            raise ConfigurationError("replications must be at least 1")
        if self.experiment == "custom":
            if not self.sweep_param or not self.sweep or not self.policies:
                raise ConfigurationError("custom experiments need sweep_param, sweep and policies")
            param, sweep, policies, base = self.sweep_param, self.sweep, self.policies, dict(self.base)
        else:
            p_param, desk, full, fixed, p_policies = _PRESETS[self.experiment]
            param = self.sweep_param or p_param
            sweep = self.sweep or (full if self.full_scale else desk)
            policies = self.policies or p_policies
            base = {**fixed, **self.base}
            if self.full_scale and self.experiment not in ("stress", "bounds-grid", "prefix-property"):
                base.setdefault("K", 10)
                base.setdefault("T", 2000)
        if any(b <= a for a, b in zip(sweep, sweep[1:])):
            raise ConfigurationError("sweep values must be strictly increasing")
        out = ExperimentConfig(**{**self.__dict__, "sweep": list(sweep), "sweep_param": param,
                                  "policies": list(policies), "base": base})
        if out.experiment not in ("stress", "bounds-grid", "prefix-property"):
            names = {f.name for f in fields(StochasticConfig)}
            if param not in names:
                raise ConfigurationError(f"unknown sweep parameter {param!r}")
            bad = set(base) - names
            if bad:
                raise ConfigurationError(f"unknown instance parameters {sorted(bad)}")
            for name in policies:
                build_policy(name, out.policy_params.get(name))
        return out


def build_policy(name: str, params: Optional[dict] = None):
    params = dict(params or {})
    if name == "myopic":
        return MyopicPolicy(**params)
    if name == "ipfc":
        return IpfcPolicy(**params)
    if name in POLICY_NAMES:
        return make_policy(name, **params)
    raise ConfigurationError(f"unknown policy {name!r}")


def _row(cfg, value, policy, rep, seed, status, cost="", gated="", wall="", per_order="") -> dict:
    return {
        "experiment": cfg.experiment, "sweep_param": cfg.sweep_param, "sweep_value": value,
        "policy": policy, "replication": rep, "seed": seed, "status": status,
        "cost": cost, "gated_period_count": gated, "wall_time": wall, "decision_time_per_order": per_order,
    }


def _simulate_rows(cfg: ExperimentConfig, value, rep: int) -> list[dict]:
    seed = cfg.base_seed + rep
    if cfg.experiment == "stress":
        instances = gen_adversarial("stress", f0=float(value))
        inst = instances[0]
    else:
        sc = StochasticConfig().replace(**{**cfg.base, cfg.sweep_param: value})
        inst = gen_stochastic(sc, seed)
    rows = []
    for name in cfg.policies:
        try:
            res = run_policy(inst, build_policy(name, cfg.policy_params.get(name)), seed=seed, trace="costs")
        except Exception as exc:  # one policy failing must not stop the sweep
            log.warning("%s failed at %s=%s rep %d: %s", name, cfg.sweep_param, value, rep, exc)
            rows.append(_row(cfg, value, name, rep, seed, f"error: {type(exc).__name__}: {exc}"))
            continue
        rows.append(_row(cfg, value, name, rep, seed, "ok", res.total_cost, res.gated_period_count,
                         res.wall_time, res.decision_time / inst.T))
    return rows


def sample_bound_params(rng: np.random.Generator) -> tuple[float, float, float, float]:
    """Log-uniform ``(f0, f_min, a, b)`` with ``b >= a``."""
    def lu(lo, hi):
        return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))

    a = lu(1e-2, 1e2)
    return lu(1e-2, 1e4), lu(1e-2, 1e3), a, a * lu(1.0, 1e3)


def bound_ratios(f0: float, f: float, a: float, b: float, integer_n: bool = False) -> dict:
    theta = theta_default(f0, f, a, b)
    return {
        "multi-varying": bounds.order_size_upper(f0, f, a, b, theta)
        / bounds.multi_varying_lower(f0, f, a, b, integer_n=integer_n),
        "single-varying": bounds.better_of_two_upper_relaxed(f0, f, a, b)
        / bounds.single_varying_lower(f0, f, a, b, integer_n=integer_n),
    }


def _bounds_rows(cfg: ExperimentConfig, value, rep: int) -> list[dict]:
    seed = cfg.base_seed + rep
    rng = stream(seed, "instance")
    worst = {name: 0.0 for name in cfg.policies}
    for _ in range(int(value)):
        ratios = bound_ratios(*sample_bound_params(rng))
        for name in cfg.policies:
            worst[name] = max(worst[name], ratios[name])
    return [_row(cfg, value, name, rep, seed, "ok", worst[name], 0) for name in cfg.policies]


def _prefix_rows(cfg: ExperimentConfig, value, rep: int) -> list[dict]:
    from .acceptance import prefix_violations

    seed = cfg.base_seed + rep
    rng = stream(seed, "instance")
    inst = random_tiny(rng, K=int(value))
    rows = []
    for name in cfg.policies:
        try:
            count = prefix_violations(inst, build_policy(name), seed, rng, samples=20)
        except ConfigurationError as exc:
            rows.append(_row(cfg, value, name, rep, seed, f"skipped: {exc}"))
            continue
        rows.append(_row(cfg, value, name, rep, seed, "ok", count, 0))
    return rows


def _task(args) -> list[dict]:
    cfg, value, rep = args
    if cfg.experiment == "bounds-grid":
        return _bounds_rows(cfg, value, rep)
    if cfg.experiment == "prefix-property":
        return _prefix_rows(cfg, value, rep)
    return _simulate_rows(cfg, value, rep)


def run_rows(cfg: ExperimentConfig) -> list[dict]:
    """All result rows, ordered by sweep value, replication, then policy."""
    cfg = cfg.resolved()
    tasks = [(cfg, v, r) for v in cfg.sweep for r in range(cfg.replications)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_task, tasks))
    else:
        chunks = [_task(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_csv(rows: list[dict], timing: bool = True) -> str:
    cols = ROW_FIELDS + (TIMING_FIELDS if timing else ())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()


def _mean_se(xs: list[float]) -> tuple[float, float]:
    m = len(xs)
    mean = math.fsum(xs) / m
    if m < 2:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in xs) / (m - 1)
    return mean, math.sqrt(var / m)


def aggregate(rows: list[dict], timing: bool = True) -> list[dict]:
    """Per (sweep value, policy) means and standard errors over successful rows.

    Works equally on freshly computed rows and on rows parsed back from the
    row CSV, because floats are written with ``repr``.
    """
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = (row["experiment"], row["sweep_param"], str(row["sweep_value"]), row["policy"])
        groups.setdefault(key, []).append(row)
    out = []
    for (exp, param, value, policy), members in groups.items():
        ok = [r for r in members if r["status"] == "ok"]
        agg = {"experiment": exp, "sweep_param": param, "sweep_value": value, "policy": policy,
               "count": len(ok), "failures": len(members) - len(ok)}
        if ok:
            mean, se = _mean_se([float(r["cost"]) for r in ok])
            agg["mean_cost"], agg["se_cost"] = mean, se
            agg["mean_gated_period_count"] = math.fsum(float(r["gated_period_count"]) for r in ok) / len(ok)
            if timing:
                for src, dst in zip(TIMING_FIELDS, AGG_TIMING_FIELDS):
                    # rows that are computed rather than simulated carry no timings
                    times = [float(r[src]) for r in ok if r[src] != ""]
                    agg[dst] = math.fsum(times) / len(times) if times else ""
        else:
            for c in AGG_FIELDS[6:] + (AGG_TIMING_FIELDS if timing else ()):
                agg[c] = ""
        out.append(agg)
    return out


def aggregate_csv(agg: list[dict], timing: bool = True) -> str:
    cols = AGG_FIELDS + (AGG_TIMING_FIELDS if timing else ())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for row in agg:
        w.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()


def read_rows(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[dict]
    aggregate: list[dict]
    rows_path: Optional[Path] = None
    aggregate_path: Optional[Path] = None

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if r["status"] != "ok" and not r["status"].startswith("skipped"))


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    cfg = config.resolved()
    rows = run_rows(cfg)
    agg = aggregate(rows, cfg.timing)
    result = ExperimentResult(cfg, rows, agg)
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.rows_path = out / f"{cfg.experiment}-rows.csv"
        result.aggregate_path = out / f"{cfg.experiment}-aggregate.csv"
        result.rows_path.write_text(rows_csv(rows, cfg.timing), encoding="utf-8", newline="")
        result.aggregate_path.write_text(aggregate_csv(agg, cfg.timing), encoding="utf-8", newline="")
        meta = {k: v for k, v in cfg.__dict__.items() if k != "out_dir"}
        (out / f"{cfg.experiment}-config.json").write_text(json.dumps(meta, indent=1, default=str) + "\n")
    return result
