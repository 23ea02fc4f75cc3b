"""Configuration management for the interpolation search tree."""

import os
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from parallel_ist.errors import ConfigurationError

ENV_PREFIX = "IST_"
DEFAULT_GRAIN = 2048


def default_threads() -> int:
    """Number of workers used when no thread budget is given."""
    return os.cpu_count() or 1


class TreeConfig(BaseModel):
    """Tuning knobs of a tree and of the fork-join primitives it calls."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(
        default=0.5,
        ge=0.5,
        lt=1.0,
        description="ID table exponent: a node over n keys gets m = floor(n^alpha) slots",
    )
    rebuild_ratio: float = Field(
        default=0.25,
        gt=0.0,
        le=1.0,
        description="A subtree is rebuilt once its update count reaches rebuild_ratio * size at last rebuild",
    )
    leaf_cutoff: int = Field(
        default=3,
        ge=1,
        description="Subtrees of at most this many keys are stored as a plain sorted node without ID table",
    )
    grain: int = Field(
        default=DEFAULT_GRAIN,
        ge=1,
        description="Sequential grain size of the fork-join primitives",
    )
    threads: int = Field(
        default_factory=default_threads,
        ge=1,
        description="Worker budget of the fork-join pool",
    )
    instrument: bool = Field(
        default=False,
        description="Collect nodes-visited and rebuild counters",
    )
    debug: bool = Field(
        default=False,
        description="Check input contracts (sortedness, distinct keys) on every call",
    )

    @classmethod
    def from_env(cls, overrides: Optional[dict[str, Any]] = None) -> "TreeConfig":
        """Create a TreeConfig from explicit overrides, then IST_* variables, then defaults."""
        overrides = overrides or {}
        values: dict[str, Any] = {}
        for field_name in cls.model_fields:
            value = overrides.get(field_name)
            if value is None:
                value = os.environ.get(f"{ENV_PREFIX}{field_name.upper()}")
            if value is not None:
                values[field_name] = value
        try:
            return cls(**values)
        except ValidationError as e:
            raise ConfigurationError(str(e)) from e

    def with_threads(self, threads: int) -> "TreeConfig":
        """Copy of this config pinned to another worker budget."""
        if threads < 1:
            raise ConfigurationError(f"threads must be >= 1, got {threads}")
        return self.model_copy(update={"threads": threads})
