# Directory: parallel-ist/services/workload_service.py
"""
Workload Service - Seeded key, operation and script generators
All generators are pure functions of (spec, n, seed)
"""

import logging
from typing import List, Optional, Tuple, Union

import numpy as np

from models.batch_models import OP_CONTAINS, OP_DELETE, OP_INSERT, OpKind, RawOps
from models.bench_models import DistributionKind, DistributionSpec, OpMix
from parallel_ist.errors import WorkloadError
from parallel_ist.forkjoin import get_pool

logger = logging.getLogger(__name__)

# Fixed chunking keeps output independent of the thread count.
CHUNK = 1 << 20
MIXED_PROBABILITIES = (0.5, 0.25, 0.25)

ScriptStep = Union[Tuple[str, Union[int, float], OpKind], Tuple[str, RawOps]]


def _generator(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_seq))


def _chunks(total: int) -> List[Tuple[int, int]]:
    return [(lo, min(lo + CHUNK, total)) for lo in range(0, total, CHUNK)]


def _check_range(spec: DistributionSpec) -> int:
    if spec.high < spec.low:
        raise WorkloadError(f"invalid key range [{spec.low}, {spec.high}]")
    return spec.high - spec.low + 1


def gen_keys(spec: DistributionSpec, n: int, seed: int, threads: Optional[int] = None) -> np.ndarray:
    """
    Generate int64 keys.

    Args:
        spec: Distribution family and range
        n: Requested count (expected count for uniform-subset)
        seed: Seed of the PCG64 stream; chunks use spawned child streams
        threads: Worker budget for chunk generation

    Returns:
        uniform-subset: sorted distinct keys, each range value kept with probability p;
        uniform / clustered: n keys in generation order, with replacement
    """
    if n < 0:
        raise WorkloadError(f"n must be >= 0, got {n}")
    size = _check_range(spec)
    if n == 0:
        return np.empty(0, dtype=np.int64)

    if spec.kind == DistributionKind.UNIFORM_SUBSET:
        p = spec.p if spec.p is not None else n / size
        if not 0.0 < p <= 1.0:
            raise WorkloadError(f"inclusion probability must be in (0, 1], got {p}")
        spans = _chunks(size)
        streams = np.random.SeedSequence(seed).spawn(len(spans))

        def subset_chunk(c: int) -> np.ndarray:
            lo, hi = spans[c]
            keep = _generator(streams[c]).random(hi - lo) < p
            return np.flatnonzero(keep).astype(np.int64) + (spec.low + lo)

        parts = get_pool(threads).fork_join([lambda c=c: subset_chunk(c) for c in range(len(spans))])
        return np.concatenate(parts)

    spans = _chunks(n)
    streams = np.random.SeedSequence(seed).spawn(len(spans) + 1)
    if spec.kind == DistributionKind.UNIFORM:
        def draw(c: int) -> np.ndarray:
            lo, hi = spans[c]
            return _generator(streams[c]).integers(spec.low, spec.high + 1, size=hi - lo, dtype=np.int64)
    else:
        centers = _generator(streams[-1]).integers(spec.low, spec.high + 1, size=spec.clusters, dtype=np.int64)
        sigma = spec.spread * size

        def draw(c: int) -> np.ndarray:
            lo, hi = spans[c]
            rng = _generator(streams[c])
            picks = centers[rng.integers(0, spec.clusters, size=hi - lo)]
            values = np.rint(picks + rng.normal(0.0, sigma, size=hi - lo))
            return np.clip(values, spec.low, spec.high).astype(np.int64)

    parts = get_pool(threads).fork_join([lambda c=c: draw(c) for c in range(len(spans))])
    return np.concatenate(parts)


def gen_ops(mix: OpMix, spec: DistributionSpec, n: int, seed: int, threads: Optional[int] = None) -> RawOps:
    """Raw operations with keys from spec; kinds all inserts or a fixed mixed ratio."""
    keys = gen_keys(spec, n, seed, threads)
    if mix == OpMix.INSERT:
        return RawOps.of_kind(keys, OpKind.INSERT)
    rng = _generator(np.random.SeedSequence([seed, 1]))
    codes = rng.choice(
        np.array([OP_INSERT, OP_DELETE, OP_CONTAINS], dtype=np.int8),
        size=keys.shape[0],
        p=MIXED_PROBABILITIES,
    )
    return RawOps(keys=keys, kinds=codes)


def gen_script(
    seed: int,
    size: int,
    kind: DistributionKind,
    key_range: int = 4096,
    tombstone_heavy: bool = False,
) -> List[ScriptStep]:
    """
    Random differential-test script of single operations and batches.

    Each step is ("single", key, kind) or ("batch", RawOps). A tombstone-heavy
    script biases towards deleting keys it inserted earlier.
    """
    rng = _generator(np.random.SeedSequence([seed, 2]))
    spec = DistributionSpec(kind=kind, low=1, high=key_range)
    probabilities = (0.3, 0.5, 0.2) if tombstone_heavy else MIXED_PROBABILITIES
    kinds = [OpKind.INSERT, OpKind.DELETE, OpKind.CONTAINS]
    steps: List[ScriptStep] = []
    budget = size
    step_seed = seed * 7919
    while budget > 0:
        step_seed += 1
        if rng.random() < 0.3:
            kind_pick = kinds[int(rng.choice(3, p=probabilities))]
            key = int(rng.integers(1, key_range + 1))
            steps.append(("single", key, kind_pick))
            budget -= 1
            continue
        count = int(rng.integers(1, max(2, min(budget, 512)) + 1))
        count = min(count, budget)
        draw_spec = spec if kind != DistributionKind.UNIFORM_SUBSET else spec.model_copy(
            update={"kind": DistributionKind.UNIFORM}
        )
        keys = gen_keys(draw_spec, count, step_seed, threads=1)
        codes = rng.choice(
            np.array([OP_INSERT, OP_DELETE, OP_CONTAINS], dtype=np.int8), size=count, p=probabilities
        )
        steps.append(("batch", RawOps(keys=keys, kinds=codes)))
        budget -= count
    return steps
