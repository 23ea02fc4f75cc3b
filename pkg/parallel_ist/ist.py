"""
Interpolation search tree algorithms.

Ideal construction, interpolation lookup, sequential single-key updates with
tombstones and threshold rebuilds, parallel flatten, and batched execution.
"""

import logging
import math
from bisect import bisect_left
from typing import List, Optional, Tuple

import numpy as np

from models.batch_models import OP_CONTAINS, OP_DELETE, OP_INSERT, Batch, BatchResult
from parallel_ist import prim
from parallel_ist.configuration import TreeConfig
from parallel_ist.errors import ContractViolation, InvariantViolation
from parallel_ist.forkjoin import get_pool
from parallel_ist.instrumentation import active_probe
from parallel_ist.state import Bounds, Node, Tree

logger = logging.getLogger(__name__)

_EMPTY_ID = np.empty(0, dtype=np.int64)


def _check_strictly_increasing(keys: np.ndarray, where: str) -> None:
    if keys.shape[0] > 1 and np.any(keys[1:] <= keys[:-1]):
        raise ContractViolation(f"{where}: keys must be strictly increasing")


def _id_size(n: int, alpha: float) -> int:
    m = math.isqrt(n) if alpha == 0.5 else int(n ** alpha)
    return max(1, m)


def compute_id(rep: np.ndarray, bounds: Bounds, m: int, grain: int = prim.DEFAULT_GRAIN) -> np.ndarray:
    """
    Interpolation table of a node.

    Entry i-1 holds the number of representatives strictly below the
    threshold a + i(b-a)/m, i.e. the j with rep[j] < t <= rep[j+1] under
    1-based rep and sentinels rep[0] = -inf, rep[k+1] = +inf.
    """
    a, b = bounds
    coords = np.asarray(rep, dtype=np.float64)
    if b > a:
        thresholds = a + np.arange(1, m + 1, dtype=np.float64) * ((b - a) / m)
    else:
        thresholds = np.full(m, a, dtype=np.float64)
    return prim.rank(thresholds, coords, grain=grain, threads=1)


def build_ideal(keys: np.ndarray, bounds: Bounds, config: TreeConfig) -> Optional[Node]:
    """
    Build an ideal tree over strictly increasing keys.

    Representatives sit at 1-based positions j*floor(sqrt(n)) < n; the gaps
    between them become children, built concurrently for large subtrees.

    Args:
        keys: Strictly increasing keys, all inside bounds
        bounds: (a, b) interpolation range of the subtree
        config: Tree configuration

    Returns:
        Root of the new subtree, or None for no keys
    """
    keys = np.asarray(keys)
    if config.debug:
        _check_strictly_increasing(keys, "build_ideal")
    return _build(keys, bounds, config, parallel=config.threads > 1)


def _build(keys: np.ndarray, bounds: Bounds, config: TreeConfig, parallel: bool) -> Optional[Node]:
    n = keys.shape[0]
    if n == 0:
        return None
    if n <= config.leaf_cutoff:
        return Node(keys.copy(), _EMPTY_ID, bounds)

    step = math.isqrt(n)
    rep_idx = np.arange(step, n, step) - 1
    rep = keys[rep_idx]
    k = rep.shape[0]
    starts = np.concatenate(([0], rep_idx + 1))
    stops = np.concatenate((rep_idx, [n]))

    a, b = bounds
    m = _id_size(n, config.alpha) if b > a else 1
    node = Node(rep, compute_id(rep, bounds, m, config.grain), bounds, s_live=n)

    edges = [a] + rep.astype(np.float64).tolist() + [b]
    spans = list(zip(starts.tolist(), stops.tolist()))

    def build_child(j: int) -> Optional[Node]:
        lo, hi = spans[j]
        return _build(keys[lo:hi], (edges[j], edges[j + 1]), config, False)

    if parallel and n > config.grain:
        node.children = get_pool(config.threads).fork_join(
            [lambda j=j: build_child(j) for j in range(k + 1)]
        )
    else:
        node.children = [build_child(j) for j in range(k + 1)]
    return node


def locate_child(node: Node, key) -> Tuple[int, Optional[int]]:
    """
    Find where key belongs inside a node.

    The ID table gives a bracket of representatives; an exact binary search
    inside it settles the slot. A bracket spoiled by floating rounding falls
    back to a search over the whole rep array.

    Returns:
        (slot, found_at_rep): slot is the number of representatives below key;
        found_at_rep is that same index when key equals a representative
    """
    rep = node.rep
    k = rep.shape[0]
    table = node.id
    m = table.shape[0]
    if m:
        a, b = node.bounds
        if b > a:
            i = math.ceil((float(key) - a) * m / (b - a))
            i = min(max(i, 1), m)
        else:
            i = 1
        hi = int(table[i - 1])
        lo = int(table[i - 2]) if i >= 2 else 0
        pos = bisect_left(rep, key, lo, hi)
        if not ((pos == 0 or rep[pos - 1] < key) and (pos == k or key <= rep[pos])):
            pos = bisect_left(rep, key)
    else:
        pos = bisect_left(rep, key)
    found = pos if pos < k and rep[pos] == key else None
    return pos, found


def search(tree: Tree, key) -> bool:
    """True iff key is stored and not tombstoned."""
    node = tree.root
    if node is None:
        return False
    key = tree.coerce_key(key)
    probe = active_probe()
    if probe is not None:
        probe.searches += 1
    while node is not None:
        if probe is not None:
            probe.nodes_visited += 1
        slot, found = locate_child(node, key)
        if found is not None:
            return not node.marked[found]
        node = node.children[slot]
    return False


def flatten(node: Optional[Node], config: Optional[TreeConfig] = None, dtype=np.int64) -> np.ndarray:
    """
    Live keys of a subtree in sorted order.

    Output offsets of every slot come from a scan over the children's live
    sizes interleaved with 0/1 live-representative flags; children then fill
    disjoint ranges of the output.
    """
    if node is None:
        return np.empty(0, dtype=dtype)
    config = config or TreeConfig()
    out = np.empty(node.s_live, dtype=node.rep.dtype)
    _flatten_into(node, out, 0, config, parallel=config.threads > 1)
    return out


def _flatten_into(node: Node, out: np.ndarray, start: int, config: TreeConfig, parallel: bool) -> None:
    k = node.k
    live = ~node.marked
    sizes = np.zeros(2 * k + 1, dtype=np.int64)
    sizes[0::2] = [child.s_live if child is not None else 0 for child in node.children]
    sizes[1::2] = live
    offsets, total = prim.scan_exclusive(sizes, config.grain, threads=1)
    if config.debug and total != node.s_live:
        raise InvariantViolation("s_live consistency", "flatten", f"node reports {node.s_live} live keys but holds {total}")

    out[start + offsets[1::2][live]] = node.rep[live]
    child_offsets = offsets[0::2].tolist()
    jobs = [
        (child, start + child_offsets[j])
        for j, child in enumerate(node.children)
        if child is not None and child.s_live > 0
    ]
    if parallel and node.s_live > config.grain and len(jobs) > 1:
        get_pool(config.threads).fork_join(
            [lambda c=c, s=s: _flatten_into(c, out, s, config, False) for c, s in jobs]
        )
    else:
        for child, child_start in jobs:
            _flatten_into(child, out, child_start, config, False)


def depth(node: Optional[Node]) -> int:
    """Number of nodes on the longest root-to-leaf path."""
    if node is None:
        return 0
    deepest = 0
    stack = [(node, 1)]
    while stack:
        current, level = stack.pop()
        deepest = max(deepest, level)
        stack.extend((child, level + 1) for child in current.children if child is not None)
    return deepest


def _record_rebuild(size: int) -> None:
    probe = active_probe()
    if probe is not None:
        probe.rebuilds += 1
        probe.rebuilt_keys += size


def _root_bounds(keys: np.ndarray, fallback: Bounds) -> Bounds:
    if keys.shape[0] == 0:
        return fallback
    return float(keys[0]), float(keys[-1])


def _drop_empty_root(tree: Tree) -> None:
    if tree.root is not None and tree.root.s_live == 0:
        tree.root = None


# ---------------------------------------------------------------------------
# Sequential single-key updates
# ---------------------------------------------------------------------------

def insert_one(tree: Tree, key) -> bool:
    """Insert key; True iff it was newly inserted or resurrected from a tombstone."""
    return _update_one(tree, key, insert=True)


def delete_one(tree: Tree, key) -> bool:
    """Tombstone key; True iff it was live."""
    return _update_one(tree, key, insert=False)


def _update_one(tree: Tree, key, insert: bool) -> bool:
    key = tree.coerce_key(key)
    config = tree.config
    root = tree.root
    if root is None:
        return _rebuild_one(tree, None, None, 0, key, insert) if insert else False
    if insert and not (root.bounds[0] <= float(key) <= root.bounds[1]):
        return _rebuild_one(tree, root, None, 0, key, insert)

    probe = active_probe()
    path: List[Node] = []
    parent: Optional[Node] = None
    slot = 0
    node: Optional[Node] = root
    while True:
        if node is None:
            changed = insert
            if insert:
                parent.children[slot] = _build(
                    np.asarray([key], dtype=tree.dtype), parent.slot_bounds(slot), config, False
                )
            break
        if probe is not None:
            probe.nodes_visited += 1
        if node.c_ops + 1 >= config.rebuild_ratio * node.s_init:
            changed = _rebuild_one(tree, node, parent, slot, key, insert)
            break
        node.c_ops += 1
        path.append(node)
        child_slot, found = locate_child(node, key)
        if found is not None:
            was_live = not node.marked[found]
            changed = was_live != insert
            node.marked[found] = not insert
            break
        parent, slot = node, child_slot
        node = node.children[child_slot]

    if changed:
        delta = 1 if insert else -1
        for visited in path:
            visited.s_live += delta
    _drop_empty_root(tree)
    return bool(changed)


def _rebuild_one(tree: Tree, node: Optional[Node], parent: Optional[Node], slot: int, key, insert: bool) -> bool:
    """Rebuild a subtree as an ideal tree over its live keys with one update applied."""
    config = tree.config
    live = flatten(node, config, dtype=tree.dtype)
    pos = int(np.searchsorted(live, key))
    present = pos < live.shape[0] and live[pos] == key
    changed = present != insert
    if changed:
        live = np.insert(live, pos, key) if insert else np.delete(live, pos)

    if parent is None:
        fallback = node.bounds if node is not None else (float(key), float(key))
        bounds = _root_bounds(live, fallback)
    else:
        bounds = parent.slot_bounds(slot)
    rebuilt = build_ideal(live, bounds, config)
    _record_rebuild(live.shape[0])
    logger.debug(f"Rebuilt subtree of {live.shape[0]} keys")
    if parent is None:
        tree.root = rebuilt
    else:
        parent.children[slot] = rebuilt
    return bool(changed)


# ---------------------------------------------------------------------------
# Batched execution
# ---------------------------------------------------------------------------

def execute_batch(tree: Tree, batch: Batch) -> BatchResult:
    """
    Apply a prepared batch and report one outcome per raw operation.

    Each node either routes its sub-batch to the children (answering keys
    that hit a representative in place), or, once its update count plus the
    incoming updates reaches the rebuild threshold, flattens itself, applies
    the sub-batch to the sorted array and rebuilds ideally.
    """
    if batch.raw_size == 0:
        return BatchResult(outcomes=np.zeros(0, dtype=bool))
    keys = tree.coerce_keys(batch.keys)
    kinds = batch.kinds
    config = tree.config
    if config.debug:
        _check_strictly_increasing(keys, "execute_batch")

    present = _execute_root(tree, keys, kinds)
    outcomes = np.where(present[batch.entry_of], batch.if_present, batch.if_absent)
    return BatchResult(outcomes=outcomes)


def _execute_root(tree: Tree, keys: np.ndarray, kinds: np.ndarray) -> np.ndarray:
    config = tree.config
    root = tree.root
    force = False
    if root is not None:
        insert_keys = keys[kinds == OP_INSERT]
        if insert_keys.shape[0]:
            a, b = root.bounds
            force = float(insert_keys[0]) < a or float(insert_keys[-1]) > b
    bounds = root.bounds if root is not None else (0.0, 0.0)
    new_root, present = _apply_batch(root, bounds, keys, kinds, tree, is_root=True, force=force)
    tree.root = new_root
    _drop_empty_root(tree)
    return present


def _apply_batch(
    node: Optional[Node],
    bounds: Bounds,
    keys: np.ndarray,
    kinds: np.ndarray,
    tree: Tree,
    is_root: bool,
    force: bool = False,
) -> Tuple[Optional[Node], np.ndarray]:
    config = tree.config
    updates = int(np.count_nonzero(kinds != OP_CONTAINS))
    if node is None:
        if updates == 0:
            return None, np.zeros(keys.shape[0], dtype=bool)
        return _rebuild_batch(None, bounds, keys, kinds, tree, is_root)
    if updates and (force or node.c_ops + updates >= config.rebuild_ratio * node.s_init):
        return _rebuild_batch(node, bounds, keys, kinds, tree, is_root)

    rep = node.rep
    k = rep.shape[0]
    pos = prim.rank(keys, rep, config.grain, config.threads)
    hit = pos < k
    hit[hit] = rep[pos[hit]] == keys[hit]
    present = np.zeros(keys.shape[0], dtype=bool)
    delta = 0

    hit_idx = np.flatnonzero(hit)
    if hit_idx.shape[0]:
        rep_pos = pos[hit_idx]
        was_live = ~node.marked[rep_pos]
        present[hit_idx] = was_live
        hit_kinds = kinds[hit_idx]
        inserts = hit_kinds == OP_INSERT
        deletes = hit_kinds == OP_DELETE
        delta += int(np.count_nonzero(inserts & ~was_live)) - int(np.count_nonzero(deletes & was_live))
        node.marked[rep_pos[inserts]] = False
        node.marked[rep_pos[deletes]] = True

    miss_idx = np.flatnonzero(~hit)
    if miss_idx.shape[0]:
        slots = pos[miss_idx]
        group_slots, group_starts = np.unique(slots, return_index=True)
        group_stops = np.append(group_starts[1:], slots.shape[0])
        groups = []
        for slot, lo, hi in zip(group_slots.tolist(), group_starts.tolist(), group_stops.tolist()):
            sel = miss_idx[lo:hi]
            child = node.children[slot]
            groups.append((slot, sel, child, child.s_live if child is not None else 0))

        def descend(slot: int, sel: np.ndarray, child: Optional[Node]):
            return _apply_batch(child, node.slot_bounds(slot), keys[sel], kinds[sel], tree, is_root=False)

        if config.threads > 1 and keys.shape[0] > config.grain and len(groups) > 1:
            results = get_pool(config.threads).fork_join(
                [lambda s=s, sel=sel, c=c: descend(s, sel, c) for s, sel, c, _ in groups]
            )
        else:
            results = [descend(s, sel, c) for s, sel, c, _ in groups]

        for (slot, sel, _, old_live), (new_child, child_present) in zip(groups, results):
            node.children[slot] = new_child
            present[sel] = child_present
            delta += (new_child.s_live if new_child is not None else 0) - old_live

    node.c_ops += updates
    node.s_live += delta
    return node, present


def _rebuild_batch(
    node: Optional[Node],
    bounds: Bounds,
    keys: np.ndarray,
    kinds: np.ndarray,
    tree: Tree,
    is_root: bool,
) -> Tuple[Optional[Node], np.ndarray]:
    config = tree.config
    grain, threads = config.grain, config.threads
    live = flatten(node, config, dtype=keys.dtype)
    n = live.shape[0]

    pos = prim.rank(keys, live, grain, threads)
    present = np.zeros(keys.shape[0], dtype=bool)
    keep = np.ones(n, dtype=bool)

    def resolve(lo: int, hi: int) -> None:
        block_pos = pos[lo:hi]
        inside = block_pos < n
        hits = np.zeros(hi - lo, dtype=bool)
        hits[inside] = live[block_pos[inside]] == keys[lo:hi][inside]
        present[lo:hi] = hits
        dropped = hits & (kinds[lo:hi] == OP_DELETE)
        keep[block_pos[dropped]] = False

    prim.parallel_for_blocks(0, keys.shape[0], resolve, grain, threads)

    kept = prim.filter(live, keep, grain, threads)
    fresh = prim.filter(keys, (kinds == OP_INSERT) & ~present, grain, threads)
    merged = prim.merge(kept, fresh, grain, threads)

    if is_root:
        bounds = _root_bounds(merged, bounds)
    rebuilt = build_ideal(merged, bounds, config)
    _record_rebuild(merged.shape[0])
    logger.debug(f"Batch rebuilt subtree: {n} live keys, {keys.shape[0]} batch keys -> {merged.shape[0]} keys")
    return rebuilt, present
