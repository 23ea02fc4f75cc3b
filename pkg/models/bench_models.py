# Directory: parallel-ist/models/bench_models.py
"""
Pydantic models for workloads, benchmark runs and self-test reports
Defines the run spec accepted by the CLI and the report rows it emits
"""

from datetime import datetime, timezone
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

DEFAULT_RANGE_MAX = 2 * 10**7


class DistributionKind(str, Enum):
    """Key generator families"""
    UNIFORM_SUBSET = "uniform-subset"
    UNIFORM = "uniform"
    CLUSTERED = "clustered"


class OpMix(str, Enum):
    """Batch operation mixes"""
    INSERT = "insert"
    MIXED = "mixed"


class DistributionSpec(BaseModel):
    """Key distribution over the integer range [low, high]"""
    kind: DistributionKind = Field(default=DistributionKind.UNIFORM, description="Generator family")
    low: int = Field(default=1, description="Smallest key that may be generated")
    high: int = Field(default=DEFAULT_RANGE_MAX, description="Largest key that may be generated")
    p: Optional[float] = Field(None, description="Inclusion probability for uniform-subset; derived from n when unset")
    clusters: int = Field(default=16, ge=1, description="Number of clusters for the clustered family")
    spread: float = Field(default=0.001, gt=0.0, description="Cluster standard deviation as a fraction of the range")


class RunSpec(BaseModel):
    """One benchmark configuration"""
    n: int = Field(default=10**6, ge=0, description="Prefill target size")
    batch_size: int = Field(default=10**5, ge=0, description="Operations per batch")
    batches: int = Field(default=1, ge=0, description="Number of batches applied after the prefill")
    dist: DistributionKind = Field(default=DistributionKind.UNIFORM_SUBSET, description="Prefill key distribution")
    range_max: int = Field(default=DEFAULT_RANGE_MAX, ge=1, description="Keys are drawn from [1, range_max]")
    alpha: float = Field(default=0.5, ge=0.5, lt=1.0, description="ID table exponent")
    threads: int = Field(default=1, ge=1, description="Fork-join workers for the parallel run")
    seed: int = Field(default=42, ge=0, description="Workload seed")
    repeats: int = Field(default=10, ge=1, description="Timed repetitions per configuration")
    mix: OpMix = Field(default=OpMix.INSERT, description="Batch operation mix")

    @model_validator(mode="after")
    def _check_subset_range(self) -> "RunSpec":
        if self.dist == DistributionKind.UNIFORM_SUBSET and self.n > self.range_max:
            raise ValueError(f"n={self.n} cannot be drawn as a subset of [1, {self.range_max}]")
        return self


class PhaseTiming(BaseModel):
    """One CSV row: timing of a phase for an implementation and thread count"""
    impl: str = Field(..., description="Implementation name (ist or sortedset)")
    n: int
    batch_size: int
    threads: int
    alpha: float
    seed: int
    phase: str = Field(..., description="prefill, prepare or execute")
    mean_s: float = Field(..., description="Mean wall-clock seconds over repeats")
    stddev_s: float = Field(..., description="Standard deviation over repeats")
    speedup: float = Field(..., description="Mean at 1 thread divided by this mean")


CSV_COLUMNS = list(PhaseTiming.model_fields.keys())


class BenchReport(BaseModel):
    """Outcome of a benchmark run"""
    spec: RunSpec
    rows: List[PhaseTiming] = Field(default_factory=list)
    prefill_size: int = Field(default=0, description="Keys in the tree after the prefill")
    final_size: int = Field(default=0, description="Keys in the tree after the last batch")
    outcomes_digest: str = Field(..., description="sha256 of the batch outcome bits")
    dump_digest: str = Field(..., description="sha256 of the final tree dump")
    deterministic: bool = Field(..., description="Outcomes and dump equal across thread counts")
    generated_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())


class PropertyResult(BaseModel):
    """Result of one self-test property"""
    name: str
    passed: bool
    detail: str = ""
    duration: float = 0.0


class SelftestReport(BaseModel):
    """All self-test properties of a run"""
    scale: str
    results: List[PropertyResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def first_failure(self) -> Optional[PropertyResult]:
        return next((result for result in self.results if not result.passed), None)
