from .analytic import FAMILIES, analytic_opt
from .bruteforce import (
    ANALYTIC_EXACT,
    ANALYTIC_UPPER,
    BRUTE_FORCE,
    OptResult,
    StateSpaceOverflow,
    bruteforce_opt,
)

__all__ = [
    "ANALYTIC_EXACT",
    "ANALYTIC_UPPER",
    "BRUTE_FORCE",
    "FAMILIES",
    "OptResult",
    "StateSpaceOverflow",
    "analytic_opt",
    "bruteforce_opt",
]
