"""
Fork-join parallel primitives: scan, filter, rank, merge, parallel-for, sort.

Every primitive splits its input into leaf blocks by binary splitting down to
`grain` elements. The block layout depends only on the input length and the
grain, never on the thread count, so results are identical for any pool.
"""

import logging
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from parallel_ist.configuration import DEFAULT_GRAIN
from parallel_ist.errors import ContractViolation
from parallel_ist.forkjoin import get_pool

logger = logging.getLogger(__name__)

Predicate = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def split_range(start: int, stop: int, grain: int) -> List[Tuple[int, int]]:
    """Leaf intervals of the binary splitting of [start, stop)."""
    if stop <= start:
        return []
    grain = max(1, grain)
    leaves: List[Tuple[int, int]] = []
    stack = [(start, stop)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo <= grain:
            leaves.append((lo, hi))
            continue
        mid = lo + (hi - lo) // 2
        # right half pushed first so leaves come out left to right
        stack.append((mid, hi))
        stack.append((lo, mid))
    return leaves


def parallel_for_blocks(
    start: int,
    stop: int,
    body: Callable[[int, int], None],
    grain: int = DEFAULT_GRAIN,
    threads: Optional[int] = None,
) -> None:
    """Run body(lo, hi) once per leaf block of [start, stop)."""
    blocks = split_range(start, stop, grain)
    if not blocks:
        return
    if len(blocks) == 1:
        body(*blocks[0])
        return
    get_pool(threads).fork_join([lambda lo=lo, hi=hi: body(lo, hi) for lo, hi in blocks])


def parallel_for(
    start: int,
    stop: int,
    body: Callable[[int], None],
    grain: int = DEFAULT_GRAIN,
    threads: Optional[int] = None,
) -> None:
    """
    Execute body(i) exactly once for each i in [start, stop).

    Bodies for distinct indices must not share mutable state.
    """
    def run_block(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            body(i)

    parallel_for_blocks(start, stop, run_block, grain, threads)


def _block_map(n: int, fn: Callable[[int, int], object], grain: int, threads: Optional[int]) -> list:
    blocks = split_range(0, n, grain)
    if len(blocks) <= 1:
        return [fn(lo, hi) for lo, hi in blocks]
    return get_pool(threads).fork_join([lambda lo=lo, hi=hi: fn(lo, hi) for lo, hi in blocks])


def scan_exclusive(
    xs: np.ndarray,
    grain: int = DEFAULT_GRAIN,
    threads: Optional[int] = None,
) -> Tuple[np.ndarray, int]:
    """
    Exclusive prefix sums of an integer sequence.

    Returns:
        (out, total) with out[i] = sum(xs[:i]) and total = sum(xs)
    """
    xs = np.asarray(xs, dtype=np.int64)
    n = xs.shape[0]
    out = np.empty(n, dtype=np.int64)
    if n == 0:
        return out, 0

    blocks = split_range(0, n, grain)
    if len(blocks) == 1:
        np.cumsum(xs, out=out)
        total = int(out[-1])
        out -= xs
        return out, total

    sums = np.asarray(_block_map(n, lambda lo, hi: xs[lo:hi].sum(), grain, threads), dtype=np.int64)
    offsets = np.cumsum(sums) - sums

    def fill(block: int) -> None:
        lo, hi = blocks[block]
        np.cumsum(xs[lo:hi], out=out[lo:hi])
        out[lo:hi] -= xs[lo:hi]
        out[lo:hi] += offsets[block]

    parallel_for(0, len(blocks), fill, grain=1, threads=threads)
    return out, int(sums.sum())


def filter(
    xs: np.ndarray,
    keep: Predicate,
    grain: int = DEFAULT_GRAIN,
    threads: Optional[int] = None,
) -> np.ndarray:
    """
    Stable filter.

    Args:
        xs: Input sequence
        keep: Vectorized predicate applied to a block of xs, or a precomputed boolean mask

    Returns:
        The elements with keep true, in their original order
    """
    xs = np.asarray(xs)
    n = xs.shape[0]
    if isinstance(keep, np.ndarray):
        mask = keep.astype(bool, copy=False)
    else:
        mask = np.empty(n, dtype=bool)

        def evaluate(lo: int, hi: int) -> None:
            mask[lo:hi] = keep(xs[lo:hi])

        parallel_for_blocks(0, n, evaluate, grain, threads)

    blocks = split_range(0, n, grain)
    if len(blocks) <= 1:
        return xs[mask].copy()

    counts = np.asarray(
        _block_map(n, lambda lo, hi: np.count_nonzero(mask[lo:hi]), grain, threads), dtype=np.int64
    )
    offsets, total = scan_exclusive(counts, grain, threads)
    out = np.empty(total, dtype=xs.dtype)

    def pack(block: int) -> None:
        lo, hi = blocks[block]
        start = offsets[block]
        out[start:start + counts[block]] = xs[lo:hi][mask[lo:hi]]

    parallel_for(0, len(blocks), pack, grain=1, threads=threads)
    return out


def _check_sorted(name: str, xs: np.ndarray) -> None:
    if xs.shape[0] > 1 and np.any(xs[1:] < xs[:-1]):
        raise ContractViolation(f"{name} must be sorted non-decreasing")


def rank(
    a: np.ndarray,
    b: np.ndarray,
    grain: int = DEFAULT_GRAIN,
    threads: Optional[int] = None,
    debug: bool = False,
    side: str = "left",
) -> np.ndarray:
    """
    Position of every a[i] in b.

    out[i] is the smallest k with a[i] <= b[k], where b[len(b)] = +inf.
    side="right" gives the smallest k with a[i] < b[k] instead.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if debug:
        _check_sorted("rank input a", a)
        _check_sorted("rank input b", b)
    n = a.shape[0]
    out = np.empty(n, dtype=np.int64)

    def place(lo: int, hi: int) -> None:
        out[lo:hi] = np.searchsorted(b, a[lo:hi], side=side)

    parallel_for_blocks(0, n, place, grain, threads)
    return out


def _merge_positions(
    a: np.ndarray, b: np.ndarray, grain: int, threads: Optional[int], debug: bool
) -> Tuple[np.ndarray, np.ndarray]:
    # a[i] lands after every b strictly below it, b[j] after every a not above it
    pos_a = rank(a, b, grain, threads, debug)
    pos_a += np.arange(a.shape[0], dtype=np.int64)
    pos_b = rank(b, a, grain, threads, debug, side="right")
    pos_b += np.arange(b.shape[0], dtype=np.int64)
    return pos_a, pos_b


def merge(
    a: np.ndarray,
    b: np.ndarray,
    grain: int = DEFAULT_GRAIN,
    threads: Optional[int] = None,
    debug: bool = False,
) -> np.ndarray:
    """Stable merge of two sorted sequences; on ties a's elements come first."""
    a = np.asarray(a)
    b = np.asarray(b)
    if b.shape[0] == 0:
        return a.copy()
    if a.shape[0] == 0:
        return b.copy()
    out = np.empty(a.shape[0] + b.shape[0], dtype=np.result_type(a, b))
    pos_a, pos_b = _merge_positions(a, b, grain, threads, debug)

    def scatter_a(lo: int, hi: int) -> None:
        out[pos_a[lo:hi]] = a[lo:hi]

    def scatter_b(lo: int, hi: int) -> None:
        out[pos_b[lo:hi]] = b[lo:hi]

    parallel_for_blocks(0, a.shape[0], scatter_a, grain, threads)
    parallel_for_blocks(0, b.shape[0], scatter_b, grain, threads)
    return out


def argsort_stable(
    keys: np.ndarray,
    grain: int = DEFAULT_GRAIN,
    threads: Optional[int] = None,
) -> np.ndarray:
    """
    Stable sorting permutation of keys.

    Leaf blocks are sorted concurrently, then merged pairwise with the
    rank-based merge; ties keep input order.
    """
    keys = np.asarray(keys)
    n = keys.shape[0]
    blocks = split_range(0, n, grain)
    if len(blocks) <= 1:
        return np.argsort(keys, kind="stable")

    def sort_block(lo: int, hi: int) -> Tuple[np.ndarray, np.ndarray]:
        perm = np.argsort(keys[lo:hi], kind="stable") + lo
        return keys[perm], perm

    runs = _block_map(n, sort_block, grain, threads)

    def merge_pair(left: Tuple[np.ndarray, np.ndarray], right: Tuple[np.ndarray, np.ndarray]):
        (ka, pa), (kb, pb) = left, right
        pos_a, pos_b = _merge_positions(ka, kb, grain, threads, False)
        merged_keys = np.empty(ka.shape[0] + kb.shape[0], dtype=keys.dtype)
        merged_perm = np.empty(merged_keys.shape[0], dtype=np.int64)
        merged_keys[pos_a] = ka
        merged_keys[pos_b] = kb
        merged_perm[pos_a] = pa
        merged_perm[pos_b] = pb
        return merged_keys, merged_perm

    while len(runs) > 1:
        pairs = [(runs[i], runs[i + 1]) for i in range(0, len(runs) - 1, 2)]
        merged = get_pool(threads).fork_join([lambda l=l, r=r: merge_pair(l, r) for l, r in pairs])
        if len(runs) % 2:
            merged.append(runs[-1])
        runs = merged
    return runs[0][1]
