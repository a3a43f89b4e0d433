"""Online two-layer order fulfillment: gated greedy policies, baselines and oracles."""

from .model import (
    TIME_INVARIANT,
    TIME_VARYING,
    ConfigurationError,
    InfeasiblePlanError,
    Instance,
    InventoryState,
    RunResult,
    StructuralError,
    apply_plan,
    period_cost,
    run_policy,
    validate_instance,
)
from .policies import PolicySpec, make_policy

__all__ = [
    "TIME_INVARIANT",
    "TIME_VARYING",
    "ConfigurationError",
    "InfeasiblePlanError",
    "Instance",
    "InventoryState",
    "PolicySpec",
    "RunResult",
    "StructuralError",
    "apply_plan",
    "make_policy",
    "period_cost",
    "run_policy",
    "validate_instance",
]
