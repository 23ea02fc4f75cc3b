# Directory: parallel-ist/services/selftest_service.py
"""
Selftest Service - Property suites for primitives, structure, oracle equivalence and determinism
Every property reports pass/fail; the run fails on the first failing property
"""

import hashlib
import logging
import math
import time
from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from models.batch_models import OpKind, RawOps
from models.bench_models import DistributionKind, DistributionSpec, OpMix, PropertyResult, SelftestReport
from parallel_ist import prim
from parallel_ist.configuration import TreeConfig, default_threads
from parallel_ist.debug import find_node
from parallel_ist.errors import ISTError
from parallel_ist.instrumentation import counters, reset_counters
from parallel_ist.tree import InterpolationSearchTree
from services.oracle_service import replay_script, script_kinds
from services.workload_service import gen_keys, gen_ops, gen_script

logger = logging.getLogger(__name__)

# Small grain so the block-parallel paths run even on small inputs.
SELFTEST_GRAIN = 64
SEARCH_COST_SLACK = 1.2


@dataclass(frozen=True)
class Scale:
    prim_trials: int
    prim_max: int
    scripts: int
    script_max: int
    ideal_sizes: tuple
    determinism_n: int
    determinism_batch: int
    cost_sizes: tuple
    cost_queries: int


SCALES = {
    "small": Scale(
        prim_trials=100,
        prim_max=2000,
        scripts=60,
        script_max=1500,
        ideal_sizes=(16, 10**2, 10**3, 10**4),
        determinism_n=2 * 10**4,
        determinism_batch=2 * 10**3,
        cost_sizes=(10**3, 10**4, 10**5),
        cost_queries=5000,
    ),
    "full": Scale(
        prim_trials=1000,
        prim_max=10**4,
        scripts=1000,
        script_max=10**4,
        ideal_sizes=(16, 10**2, 10**3, 10**4, 10**5, 10**6),
        determinism_n=10**6,
        determinism_batch=10**5,
        cost_sizes=(10**4, 10**5, 10**6),
        cost_queries=20000,
    ),
}


def loglog(n: int) -> float:
    return math.log2(math.log2(n))


def jittered_keys(rng: np.random.Generator, n: int, spacing: int = 20) -> np.ndarray:
    """Exactly n strictly increasing keys, one uniform draw per grid cell."""
    grid = np.arange(1, n + 1, dtype=np.int64) * spacing
    return grid - rng.integers(0, spacing, size=n)


class SelftestService:
    """Runs the property suites at a chosen scale"""

    def __init__(self, scale: str = "small", seed: int = 7, threads: Optional[int] = None, corrupt: bool = False):
        """
        Args:
            scale: "small" or "full"
            seed: Base seed for every generated instance
            threads: Worker budget of the parallel runs
            corrupt: Damage a node counter before the structural sweep
        """
        if scale not in SCALES:
            raise ValueError(f"unknown scale '{scale}', expected one of {sorted(SCALES)}")
        self.scale_name = scale
        self.scale = SCALES[scale]
        self.seed = seed
        self.threads = threads or default_threads()
        self.corrupt = corrupt
        self.config = TreeConfig(grain=SELFTEST_GRAIN, threads=self.threads, debug=True)

    def run(self) -> SelftestReport:
        """Run every property and collect the results."""
        report = SelftestReport(scale=self.scale_name)
        properties: List[tuple] = [
            ("prim.scan_exclusive", self.check_scan),
            ("prim.filter", self.check_filter),
            ("prim.rank", self.check_rank),
            ("prim.merge", self.check_merge),
            ("ideal structure", self.check_ideal_structure),
            ("structural sweep", self.check_structural_sweep),
            ("oracle equivalence", self.check_oracle_equivalence),
            ("determinism across threads", self.check_determinism),
            ("search cost", self.check_search_cost),
        ]
        for name, check in properties:
            report.results.append(self._run_property(name, check))
        failure = report.first_failure
        if failure is not None:
            logger.error(f"Selftest failed: {failure.name}: {failure.detail}")
        else:
            logger.info(f"Selftest ({self.scale_name}) passed {len(report.results)} properties")
        return report

    def _run_property(self, name: str, check: Callable[[], Optional[str]]) -> PropertyResult:
        logger.info(f"Checking {name}")
        start = time.perf_counter()
        try:
            detail = check()
        except ISTError as e:
            detail = str(e)
        except AssertionError as e:
            detail = str(e) or "assertion failed"
        duration = time.perf_counter() - start
        passed = detail is None
        logger.info(f"{name}: {'ok' if passed else 'FAILED'} in {duration:.2f}s")
        return PropertyResult(name=name, passed=passed, detail=detail or "", duration=duration)

    def _rng(self, salt: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, salt])))

    # -- primitives ---------------------------------------------------------

    def _sizes(self, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.scale.prim_max + 1, size=self.scale.prim_trials)

    def check_scan(self) -> Optional[str]:
        rng = self._rng(1)
        for trial, size in enumerate(self._sizes(rng).tolist()):
            xs = rng.integers(-1000, 1000, size=size)
            out, total = prim.scan_exclusive(xs, SELFTEST_GRAIN, self.threads)
            running, expected = 0, []
            for x in xs.tolist():
                expected.append(running)
                running += x
            if out.tolist() != expected or total != running:
                return f"trial {trial}: scan of {size} elements differs from sequential sums"
        return None

    def check_filter(self) -> Optional[str]:
        rng = self._rng(2)
        for trial, size in enumerate(self._sizes(rng).tolist()):
            xs = rng.integers(0, 10**6, size=size)
            mask = rng.random(size) < rng.random()
            got = prim.filter(xs, mask, SELFTEST_GRAIN, self.threads)
            expected = [x for x, keep in zip(xs.tolist(), mask.tolist()) if keep]
            if got.tolist() != expected:
                return f"trial {trial}: filter of {size} elements differs from sequential filter"
        return None

    def check_rank(self) -> Optional[str]:
        rng = self._rng(3)
        for trial, size in enumerate(self._sizes(rng).tolist()):
            a = np.sort(rng.integers(0, 4 * size + 1, size=size))
            b = np.unique(rng.integers(0, 4 * size + 1, size=int(rng.integers(0, size + 1))))
            got = prim.rank(a, b, SELFTEST_GRAIN, self.threads, debug=True)
            b_list = b.tolist()
            expected = [bisect_left(b_list, x) for x in a.tolist()]
            if got.tolist() != expected:
                return f"trial {trial}: rank of {a.shape[0]} into {b.shape[0]} differs from sequential rank"
        return None

    def check_merge(self) -> Optional[str]:
        rng = self._rng(4)
        for trial, size in enumerate(self._sizes(rng).tolist()):
            split = int(rng.integers(0, size + 1))
            a = np.sort(rng.integers(0, size + 1, size=split))
            b = np.sort(rng.integers(0, size + 1, size=size - split))
            got = prim.merge(a, b, SELFTEST_GRAIN, self.threads, debug=True)
            if got.tolist() != sorted(a.tolist() + b.tolist()):
                return f"trial {trial}: merge of {a.shape[0]} and {b.shape[0]} differs from sorted union"
        return None

    # -- structure ----------------------------------------------------------

    def check_ideal_structure(self) -> Optional[str]:
        for n in self.scale.ideal_sizes:
            keys = jittered_keys(self._rng(n), n)
            tree = InterpolationSearchTree.from_sorted(keys, self.config)
            tree.validate()
            actual = keys.shape[0]
            step = math.isqrt(actual)
            expected_rep = keys[np.arange(step, actual, step) - 1]
            if not np.array_equal(tree.state.root.rep, expected_rep):
                return f"n={actual}: root representatives are not at positions j*{step}"
            bound = math.ceil(loglog(actual)) + 2
            if tree.depth() > bound:
                return f"n={actual}: depth {tree.depth()} exceeds {bound}"
            if not np.array_equal(tree.to_array(), keys):
                return f"n={actual}: flatten does not return the input keys"
        return None

    def check_structural_sweep(self) -> Optional[str]:
        rng = self._rng(5)
        keys = np.unique(rng.integers(1, 10**6, size=5000))
        tree = InterpolationSearchTree.from_sorted(keys, self.config)
        ops = gen_ops(OpMix.MIXED, DistributionSpec(low=1, high=10**6), 4000, self.seed + 5, self.threads)
        tree.apply(ops)
        for key in rng.integers(1, 10**6, size=500).tolist():
            if key % 2:
                tree.delete(key)
            else:
                tree.insert(key)
        if self.corrupt:
            node = find_node(tree.state, "root/0") or tree.state.root
            node.s_live += 1
            logger.warning("Corrupted a node counter before validation")
        tree.validate()
        return None

    def check_oracle_equivalence(self) -> Optional[str]:
        rng = self._rng(6)
        kinds = script_kinds()
        for index in range(self.scale.scripts):
            kind = kinds[index % len(kinds)]
            size = int(rng.integers(1, self.scale.script_max + 1))
            key_range = int(rng.choice([64, 1024, 4 * size + 16]))
            steps = gen_script(self.seed * 100003 + index, size, kind, key_range, tombstone_heavy=index % 4 == 3)
            initial = None
            if index % 2:
                initial = gen_keys(DistributionSpec(kind=DistributionKind.UNIFORM, low=1, high=key_range), size // 2, index)
            mismatch = replay_script(steps, self.config, initial)
            if mismatch is not None:
                return f"script {index} ({kind.value}, {size} ops): {mismatch}"
        return None

    def check_determinism(self) -> Optional[str]:
        n, batch_size = self.scale.determinism_n, self.scale.determinism_batch
        prefill = gen_keys(
            DistributionSpec(kind=DistributionKind.UNIFORM_SUBSET, low=1, high=20 * n), n, self.seed, self.threads
        )
        batch = gen_ops(OpMix.MIXED, DistributionSpec(low=1, high=20 * n), batch_size, self.seed + 1, self.threads)
        insert_batch = RawOps.of_kind(
            gen_keys(DistributionSpec(low=1, high=20 * n), batch_size, self.seed + 2, self.threads), OpKind.INSERT
        )

        fingerprints = {}
        for threads in sorted({1, 2, self.threads}):
            config = TreeConfig(threads=threads, grain=SELFTEST_GRAIN)
            tree = InterpolationSearchTree(config)
            tree.apply(RawOps.of_kind(prefill, OpKind.INSERT))
            outcomes = np.concatenate([tree.apply(batch).outcomes, tree.apply(insert_batch).outcomes])
            fingerprints[threads] = (
                hashlib.sha256(np.packbits(outcomes).tobytes()).hexdigest(),
                hashlib.sha256(tree.dump().encode("utf-8")).hexdigest(),
            )
        if len(set(fingerprints.values())) != 1:
            differing = sorted(fingerprints)
            return f"outcomes or dump differ across thread counts {differing}"
        return None

    def check_search_cost(self) -> Optional[str]:
        calibration: Optional[float] = None
        for n in self.scale.cost_sizes:
            high = 20 * n
            keys = gen_keys(DistributionSpec(kind=DistributionKind.UNIFORM_SUBSET, low=1, high=high), n, self.seed + 3)
            tree = InterpolationSearchTree.from_sorted(keys, TreeConfig(threads=self.threads, instrument=True))
            queries = gen_keys(DistributionSpec(low=1, high=high), self.scale.cost_queries, self.seed + 4)
            reset_counters()
            for key in queries.tolist():
                tree.contains(key)
            mean = counters().mean_nodes_visited
            if calibration is None:
                calibration = mean / loglog(n)
                logger.info(f"Search cost calibrated at n={n}: {mean:.3f} nodes, c={calibration:.3f}")
                continue
            limit = SEARCH_COST_SLACK * calibration * loglog(n)
            logger.info(f"Search cost at n={n}: {mean:.3f} nodes (limit {limit:.3f})")
            if mean > limit:
                return f"n={n}: mean nodes visited {mean:.3f} exceeds {limit:.3f}"
        return None


def selftest(scale: str = "small", seed: int = 7, threads: Optional[int] = None, corrupt: bool = False) -> SelftestReport:
    """Run the property suites at a scale."""
    return SelftestService(scale, seed, threads, corrupt).run()
