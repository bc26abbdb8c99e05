"""Learning in the limit with interaction operators and learning restrictions."""

from . import core, families, harness, operators, restrictions, transforms
from .core import (
    PAUSE, CapExceeded, ConfigError, ContractViolation, Diverged, LearnError,
    parse_term,
)
from .operators import Learner, run, star, totalize
from .restrictions import check_convergence, check_restriction

__all__ = [
    "PAUSE", "CapExceeded", "ConfigError", "ContractViolation", "Diverged", "LearnError",
    "Learner", "check_convergence", "check_restriction", "core", "families", "harness",
    "operators", "parse_term", "restrictions", "run", "star", "totalize", "transforms",
]
