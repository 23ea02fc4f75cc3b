"""
Batch preparation: sort raw operations and resolve per-key operation chains.

A batch behaves like replaying its raw operations in input order. Only the
last update per key reaches the tree; every raw operation gets its outcome
computed twice in closed form, once assuming the key was absent before the
batch and once assuming it was live. The tree later reports which case
holds for each key.
"""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from models.batch_models import OP_CONTAINS, OP_INSERT, Batch, OpKind, RawOps
from parallel_ist import prim
from parallel_ist.configuration import DEFAULT_GRAIN

logger = logging.getLogger(__name__)

RawInput = Union[RawOps, Sequence[Tuple[Union[int, float], OpKind]]]


def as_raw_ops(raw: RawInput) -> RawOps:
    return raw if isinstance(raw, RawOps) else RawOps.from_pairs(raw)


def prepare_batch(raw: RawInput, grain: int = DEFAULT_GRAIN, threads: Optional[int] = None) -> Batch:
    """
    Turn raw operations into a prepared batch.

    Args:
        raw: (key, kind) pairs or column arrays, in input order
        grain: Sequential grain of the parallel sort
        threads: Worker budget

    Returns:
        Batch with one entry per distinct key and closed-form raw outcomes
    """
    raw = as_raw_ops(raw)
    keys = np.asarray(raw.keys)
    codes = np.asarray(raw.kinds, dtype=np.int8)
    r = keys.shape[0]
    if r == 0:
        empty_bool = np.zeros(0, dtype=bool)
        return Batch(
            keys=keys.copy(),
            kinds=np.zeros(0, dtype=np.int8),
            origins=np.zeros(0, dtype=np.int64),
            entry_of=np.zeros(0, dtype=np.int64),
            if_absent=empty_bool,
            if_present=empty_bool.copy(),
        )

    order = prim.argsort_stable(keys, grain, threads)
    sorted_keys = keys[order]
    sorted_codes = codes[order]

    group_head = np.ones(r, dtype=bool)
    group_head[1:] = sorted_keys[1:] != sorted_keys[:-1]
    group_of = np.cumsum(group_head) - 1
    head_pos = np.flatnonzero(group_head)
    group_start = head_pos[group_of]
    positions = np.arange(r, dtype=np.int64)

    # latest update at or before each position, and strictly before it
    is_update = sorted_codes != OP_CONTAINS
    last_update_incl = np.maximum.accumulate(np.where(is_update, positions, -1))
    last_update_excl = np.empty(r, dtype=np.int64)
    last_update_excl[0] = -1
    last_update_excl[1:] = last_update_incl[:-1]

    has_prior = last_update_excl >= group_start
    prior_state = sorted_codes[np.maximum(last_update_excl, 0)] == OP_INSERT
    state_if_absent = np.where(has_prior, prior_state, False)
    state_if_present = np.where(has_prior, prior_state, True)

    is_insert = sorted_codes == OP_INSERT
    if_absent = np.empty(r, dtype=bool)
    if_present = np.empty(r, dtype=bool)
    if_absent[order] = np.where(is_insert, ~state_if_absent, state_if_absent)
    if_present[order] = np.where(is_insert, ~state_if_present, state_if_present)

    group_tail = np.append(head_pos[1:], r) - 1
    survivor = last_update_incl[group_tail]
    has_update = survivor >= head_pos
    entry_kinds = np.where(has_update, sorted_codes[np.maximum(survivor, 0)], OP_CONTAINS).astype(np.int8)
    origins = order[np.where(has_update, survivor, head_pos)]

    entry_of = np.empty(r, dtype=np.int64)
    entry_of[order] = group_of

    logger.debug(f"Prepared batch: {r} raw operations over {head_pos.shape[0]} distinct keys")
    return Batch(
        keys=sorted_keys[head_pos],
        kinds=entry_kinds,
        origins=origins.astype(np.int64),
        entry_of=entry_of,
        if_absent=if_absent,
        if_present=if_present,
    )
