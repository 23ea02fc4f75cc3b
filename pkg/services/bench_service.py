# Directory: parallel-ist/services/bench_service.py
"""
Bench Service - Timed prefill and batch runs of the tree against a SortedSet baseline
Workload generation happens before any clock starts
"""

import hashlib
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from sortedcontainers import SortedSet

from models.batch_models import OpKind, RawOps
from models.bench_models import BenchReport, DistributionKind, DistributionSpec, RunSpec
from parallel_ist.configuration import TreeConfig
from parallel_ist.errors import BenchPhaseError
from parallel_ist.tree import InterpolationSearchTree
from services.oracle_service import oracle_apply
from services.workload_service import gen_keys, gen_ops
from utils.metrics import MetricsCollector

logger = logging.getLogger(__name__)

IST_IMPL = "ist"
BASELINE_IMPL = "sortedset"


@dataclass
class Workload:
    prefill: np.ndarray
    batches: List[RawOps]

    @property
    def empty_prefill(self) -> bool:
        return self.prefill.shape[0] == 0

    @property
    def empty_batches(self) -> bool:
        return all(len(raw) == 0 for raw in self.batches)


@dataclass
class RunFingerprint:
    outcomes_digest: str
    dump_digest: str
    prefill_size: int
    final_size: int


class BenchService:
    """Service running benchmark configurations"""

    def __init__(self, base_config: Optional[TreeConfig] = None, baseline: bool = True):
        """
        Args:
            base_config: Tree knobs other than alpha and threads
            baseline: Also time the SortedSet reference
        """
        self.base_config = base_config or TreeConfig()
        self.baseline = baseline

    def generate(self, spec: RunSpec) -> Workload:
        """Prefill keys and batches for a spec; deterministic in spec.seed."""
        try:
            prefill_spec = DistributionSpec(kind=spec.dist, low=1, high=spec.range_max)
            prefill = gen_keys(prefill_spec, spec.n, spec.seed, spec.threads)
            if spec.dist != DistributionKind.UNIFORM_SUBSET:
                prefill = np.unique(prefill)
            batch_kind = DistributionKind.UNIFORM if spec.dist == DistributionKind.UNIFORM_SUBSET else spec.dist
            batch_spec = DistributionSpec(kind=batch_kind, low=1, high=spec.range_max)
            batches = [
                gen_ops(spec.mix, batch_spec, spec.batch_size, spec.seed + 1 + index, spec.threads)
                for index in range(spec.batches)
            ]
        except MemoryError as e:
            logger.error(f"Out of memory generating workload for n={spec.n}")
            raise BenchPhaseError("generate", e) from e
        logger.info(f"Generated prefill of {prefill.shape[0]} keys and {len(batches)} batches of {spec.batch_size} ops")
        return Workload(prefill=prefill, batches=batches)

    def run(self, spec: RunSpec) -> BenchReport:
        """
        Time a spec at 1 thread and at spec.threads, plus the baseline

        Returns:
            BenchReport with one row per (impl, threads, phase), outcome and
            dump digests of the parallel run, and whether both thread counts
            produced identical outcomes and dumps
        """
        workload = self.generate(spec)
        metrics = MetricsCollector()

        thread_counts = [1] if spec.threads == 1 else [1, spec.threads]
        fingerprints = {threads: self._run_tree(spec, workload, threads, metrics) for threads in thread_counts}
        if self.baseline:
            self._run_baseline(spec, workload, metrics)

        reference = fingerprints[thread_counts[0]]
        final = fingerprints[spec.threads]
        deterministic = all(
            (fp.outcomes_digest, fp.dump_digest) == (reference.outcomes_digest, reference.dump_digest)
            for fp in fingerprints.values()
        )
        if not deterministic:
            logger.error(f"Outcomes or dump differ between thread counts {thread_counts}")

        return BenchReport(
            spec=spec,
            rows=metrics.get_rows(spec),
            prefill_size=final.prefill_size,
            final_size=final.final_size,
            outcomes_digest=final.outcomes_digest,
            dump_digest=final.dump_digest,
            deterministic=deterministic,
        )

    def _run_tree(self, spec: RunSpec, workload: Workload, threads: int, metrics: MetricsCollector) -> RunFingerprint:
        config = self.base_config.model_copy(update={"alpha": spec.alpha, "threads": threads})
        fingerprint: Optional[RunFingerprint] = None
        for repeat in range(spec.repeats):
            tree = InterpolationSearchTree(config)
            with metrics.timed(IST_IMPL, threads, "prefill", empty=workload.empty_prefill):
                if not workload.empty_prefill:
                    tree.apply(RawOps.of_kind(workload.prefill, OpKind.INSERT))
            prefill_size = len(tree)

            outcomes: List[np.ndarray] = []
            prepared = []
            with metrics.timed(IST_IMPL, threads, "prepare", empty=workload.empty_batches):
                for raw in workload.batches:
                    prepared.append(tree.prepare(raw))
            with metrics.timed(IST_IMPL, threads, "execute", empty=workload.empty_batches):
                for batch in prepared:
                    outcomes.append(tree.execute(batch).outcomes)

            if fingerprint is None:
                fingerprint = RunFingerprint(
                    outcomes_digest=_digest_outcomes(outcomes),
                    dump_digest=hashlib.sha256(tree.dump().encode("utf-8")).hexdigest(),
                    prefill_size=prefill_size,
                    final_size=len(tree),
                )
            logger.debug(f"ist threads={threads} repeat {repeat + 1}/{spec.repeats} done, size={len(tree)}")
        return fingerprint

    def _run_baseline(self, spec: RunSpec, workload: Workload, metrics: MetricsCollector) -> None:
        prefill = workload.prefill.tolist()
        for _ in range(spec.repeats):
            with metrics.timed(BASELINE_IMPL, 1, "prefill", empty=workload.empty_prefill):
                state = SortedSet(prefill)
            with metrics.timed(BASELINE_IMPL, 1, "execute", empty=workload.empty_batches):
                for raw in workload.batches:
                    oracle_apply(state, raw, in_place=True)


def _digest_outcomes(outcomes: List[np.ndarray]) -> str:
    bits = np.concatenate(outcomes) if outcomes else np.zeros(0, dtype=bool)
    digest = hashlib.sha256(np.packbits(bits).tobytes())
    digest.update(str(bits.shape[0]).encode("ascii"))
    return digest.hexdigest()


def run(spec: RunSpec, base_config: Optional[TreeConfig] = None) -> BenchReport:
    """Run one benchmark configuration."""
    return BenchService(base_config).run(spec)


def thread_sweep(spec: RunSpec, thread_counts: List[int], base_config: Optional[TreeConfig] = None) -> Tuple[List[BenchReport], bool]:
    """Run a spec at several thread counts; also report whether every run agrees."""
    service = BenchService(base_config, baseline=False)
    reports = [service.run(spec.model_copy(update={"threads": threads})) for threads in thread_counts]
    agree = len({(r.outcomes_digest, r.dump_digest) for r in reports}) <= 1
    return reports, agree
