"""JSON instance files.

Time-invariant instances store costs compactly as ``{"replicate": true,
"values": [[...]]}`` with one row per DC; reading expands them over the
horizon.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from ..model import REGIMES, TIME_INVARIANT, Instance, validate_instance

_nonneg_int_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}}
_nonneg_num = {"type": "number", "minimum": 0}

SCHEMA = {
    "type": "object",
    "required": ["n", "K", "T", "fixed_costs", "cost_regime", "costs", "initial_inventory", "orders"],
    "properties": {
        "meta": {
            "type": "object",
            "properties": {"family": {"type": "string"}, "annotations": {"type": "object"}},
        },
        "n": {"type": "integer", "minimum": 1},
        "K": {"type": "integer", "minimum": 0},
        "T": {"type": "integer", "minimum": 1},
        "fixed_costs": {"type": "array", "items": _nonneg_num},
        "cost_regime": {"enum": list(REGIMES)},
        "cost_bounds": {
            "oneOf": [
                {"type": "null"},
                {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2, "maxItems": 2},
            ]
        },
        "costs": {
            "oneOf": [
                {"type": "array", "items": {"type": "array", "items": {"type": "array", "items": _nonneg_num}}},
                {
                    "type": "object",
                    "required": ["replicate", "values"],
                    "properties": {
                        "replicate": {"const": True},
                        "values": {"type": "array", "items": {"type": "array", "items": _nonneg_num}},
                    },
                },
            ]
        },
        "initial_inventory": _nonneg_int_matrix,
        "orders": _nonneg_int_matrix,
    },
}


class InstanceParseError(ValueError):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def instance_to_json(instance: Instance) -> dict:
    if instance.cost_regime == TIME_INVARIANT:
        costs = {"replicate": True, "values": instance.variable_costs[:, 0, :].tolist()}
    else:
        costs = instance.variable_costs.tolist()
    meta = dict(instance.meta)
    meta.setdefault("family", "custom")
    meta.setdefault("annotations", {})
    return {
        "meta": meta,
        "n": instance.n,
        "K": instance.K,
        "T": instance.T,
        "fixed_costs": instance.fixed_costs.tolist(),
        "cost_regime": instance.cost_regime,
        "cost_bounds": None if instance.cost_bounds is None else list(instance.cost_bounds),
        "costs": costs,
        "initial_inventory": instance.initial_inventory.tolist(),
        "orders": instance.orders.tolist(),
    }


def instance_from_json(data: dict) -> Instance:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if error is not None:
        raise InstanceParseError(_pointer(error.absolute_path), error.message)
    n, K, T = data["n"], data["K"], data["T"]
    costs = data["costs"]
    try:
        if isinstance(costs, dict):
            values = np.asarray(costs["values"], dtype=np.float64)
            if values.shape != (K + 1, n):
                raise InstanceParseError("/costs/values", f"expected shape {(K + 1, n)}, got {values.shape}")
            tensor = np.repeat(values[:, None, :], T, axis=1)
        else:
            tensor = np.asarray(costs, dtype=np.float64)
            if tensor.shape != (K + 1, T, n):
                raise InstanceParseError("/costs", f"expected shape {(K + 1, T, n)}, got {tensor.shape}")
        shapes = {
            "fixed_costs": (K + 1,),
            "initial_inventory": (K, n),
            "orders": (T, n),
        }
        arrays = {}
        for key, shape in shapes.items():
            arr = np.asarray(data[key])
            if key == "initial_inventory" and K == 0:
                arr = arr.reshape(0, n)
            if arr.shape != shape:
                raise InstanceParseError(f"/{key}", f"expected shape {shape}, got {arr.shape}")
            arrays[key] = arr
    except ValueError as exc:
        if isinstance(exc, InstanceParseError):
            raise
        raise InstanceParseError("", f"ragged array: {exc}") from None
    bounds = data.get("cost_bounds")
    inst = Instance(
        fixed_costs=arrays["fixed_costs"],
        variable_costs=tensor,
        initial_inventory=arrays["initial_inventory"],
        orders=arrays["orders"],
        cost_regime=data["cost_regime"],
        cost_bounds=None if bounds is None else tuple(bounds),
        meta=data.get("meta", {}),
    )
    problems = validate_instance(inst)
    if problems:
        pointer, _, message = problems[0].partition(": ")
        raise InstanceParseError(pointer, message)
    return inst


def write_instance(instance: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_json(instance), indent=1) + "\n", encoding="utf-8")


def read_instance(path) -> Instance:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceParseError("", f"invalid JSON: {exc}") from None
    return instance_from_json(data)
