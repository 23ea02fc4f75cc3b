# Directory: parallel-ist/tests/test_acceptance.py
"""
Acceptance-scale checks: full self-test properties, work linearity and parallel speedup
All tests are marked slow; run them with IST_RUN_SLOW=1
"""

import os
import time

import numpy as np
import pytest

from models.batch_models import OpKind, RawOps
from models.bench_models import DistributionKind, DistributionSpec
from parallel_ist import InterpolationSearchTree, TreeConfig, ist
from services.selftest_service import SelftestService, jittered_keys
from services.workload_service import gen_keys

pytestmark = pytest.mark.slow

LINEARITY_LIMIT = 2.5
SPEEDUP_THREADS = 8
SPEEDUP_FLOOR = 3.0


@pytest.fixture(scope="module")
def full_selftest():
    return SelftestService("full", seed=7)


class TestFullScaleProperties:
    """Full-scale self-test properties, one per test"""

    @pytest.mark.parametrize(
        "check", ["check_scan", "check_filter", "check_rank", "check_merge", "check_ideal_structure"]
    )
    def test_primitives_and_structure(self, full_selftest, check):
        assert getattr(full_selftest, check)() is None

    def test_oracle_equivalence(self, full_selftest):
        assert full_selftest.check_oracle_equivalence() is None

    def test_determinism_across_threads(self, full_selftest):
        assert full_selftest.check_determinism() is None

    def test_search_cost(self, full_selftest):
        assert full_selftest.check_search_cost() is None


def best_of(repeats, action):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        action()
        best = min(best, time.perf_counter() - start)
    return best


class TestWorkLinearity:
    """Single-threaded build and flatten scale linearly"""

    @pytest.mark.parametrize("n", [10**5, 10**6])
    def test_build_and_flatten_double(self, n):
        config = TreeConfig(threads=1)
        rng = np.random.Generator(np.random.PCG64(n))
        timings = {}
        for size in (n, 2 * n):
            keys = jittered_keys(rng, size)
            bounds = (float(keys[0]), float(keys[-1]))
            root = ist.build_ideal(keys, bounds, config)
            timings[size] = (
                best_of(3, lambda: ist.build_ideal(keys, bounds, config)),
                best_of(3, lambda: ist.flatten(root, config)),
            )
        build_ratio = timings[2 * n][0] / timings[n][0]
        flatten_ratio = timings[2 * n][1] / timings[n][1]
        assert build_ratio <= LINEARITY_LIMIT, f"build ratio {build_ratio:.2f}"
        assert flatten_ratio <= LINEARITY_LIMIT, f"flatten ratio {flatten_ratio:.2f}"


@pytest.mark.skipif((os.cpu_count() or 1) < SPEEDUP_THREADS, reason="needs at least 8 cores")
class TestParallelSpeedup:
    """Batched inserts speed up with more workers"""

    def test_execute_speedup(self):
        n, batch_size, repeats = 10**6, 10**5, 10
        high = 2 * n
        prefill = gen_keys(DistributionSpec(kind=DistributionKind.UNIFORM_SUBSET, low=1, high=high), n, 1)
        batch_keys = gen_keys(DistributionSpec(low=1, high=high), batch_size, 2)
        means = {}
        for threads in (1, SPEEDUP_THREADS):
            durations = []
            for _ in range(repeats):
                tree = InterpolationSearchTree.from_sorted(prefill, TreeConfig(threads=threads))
                batch = tree.prepare(RawOps.of_kind(batch_keys, OpKind.INSERT))
                start = time.perf_counter()
                tree.execute(batch)
                durations.append(time.perf_counter() - start)
            means[threads] = float(np.mean(durations))
        speedup = means[1] / means[SPEEDUP_THREADS]
        assert speedup >= SPEEDUP_FLOOR, f"speedup {speedup:.2f} at {SPEEDUP_THREADS} threads"
