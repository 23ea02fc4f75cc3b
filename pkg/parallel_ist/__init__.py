"""Parallel batched Interpolation Search Tree."""

from parallel_ist.configuration import TreeConfig
from parallel_ist.errors import (
    BenchPhaseError,
    ConfigurationError,
    ContractViolation,
    InvariantViolation,
    ISTError,
    WorkloadError,
)
from parallel_ist.tree import InterpolationSearchTree

__all__ = [
    "BenchPhaseError",
    "ConfigurationError",
    "ContractViolation",
    "InterpolationSearchTree",
    "InvariantViolation",
    "ISTError",
    "TreeConfig",
    "WorkloadError",
]
