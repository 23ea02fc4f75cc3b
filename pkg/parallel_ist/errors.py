"""Exception hierarchy for the interpolation search tree library."""

from typing import Optional


class ISTError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(ISTError):
    """Invalid tree configuration or benchmark run spec."""


class ContractViolation(ISTError):
    """Caller broke an input contract (unsorted or duplicate keys, bad dtype)."""


class InvariantViolation(ISTError):
    """A structural check on the tree failed."""

    def __init__(self, prop: str, path: str, detail: str):
        self.prop = prop
        self.path = path
        self.detail = detail
        super().__init__(f"{prop} violated at node {path}: {detail}")


class WorkloadError(ISTError):
    """Invalid key generator spec."""


class BenchPhaseError(ISTError):
    """A benchmark phase failed; carries the phase name."""

    def __init__(self, phase: str, cause: Optional[BaseException] = None):
        self.phase = phase
        self.cause = cause
        reason = f"{type(cause).__name__}: {cause}" if cause is not None else "unknown failure"
        super().__init__(f"benchmark phase '{phase}' failed ({reason})")
