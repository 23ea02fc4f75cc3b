# Directory: parallel-ist/services/oracle_service.py
"""
Oracle Service - Sequential ordered-set reference for differential checks
Replays raw operations strictly in input order on a sortedcontainers SortedSet
"""

import logging
from typing import Iterable, List, Optional, Tuple

import numpy as np
from sortedcontainers import SortedSet

from models.batch_models import OpKind
from models.bench_models import DistributionKind
from parallel_ist.batching import RawInput, as_raw_ops
from parallel_ist.configuration import TreeConfig
from parallel_ist.tree import InterpolationSearchTree
from services.workload_service import ScriptStep

logger = logging.getLogger(__name__)


def oracle_apply(state: SortedSet, raw: RawInput, in_place: bool = False) -> Tuple[SortedSet, List[bool]]:
    """
    Apply raw operations one at a time in input order.

    Args:
        state: Current key set
        raw: (key, kind) pairs or column arrays
        in_place: Mutate state instead of a copy

    Returns:
        The resulting set and one outcome per raw operation
    """
    target = state if in_place else SortedSet(state)
    outcomes: List[bool] = []
    for key, kind in as_raw_ops(raw).pairs():
        if kind is OpKind.INSERT:
            if key in target:
                outcomes.append(False)
            else:
                target.add(key)
                outcomes.append(True)
        elif kind is OpKind.DELETE:
            if key in target:
                target.discard(key)
                outcomes.append(True)
            else:
                outcomes.append(False)
        else:
            outcomes.append(key in target)
    return target, outcomes


def replay_script(
    steps: Iterable[ScriptStep],
    config: Optional[TreeConfig] = None,
    initial: Optional[np.ndarray] = None,
) -> Optional[str]:
    """
    Run a script on a tree and on the oracle side by side.

    Returns:
        None when every outcome and the final contents agree, otherwise a
        description of the first divergence
    """
    keys = np.unique(initial) if initial is not None else np.empty(0, dtype=np.int64)
    tree = InterpolationSearchTree.from_sorted(keys, config)
    oracle = SortedSet(keys.tolist())

    for number, step in enumerate(steps):
        if step[0] == "single":
            _, key, kind = step
            expected = oracle_apply(oracle, [(key, kind)], in_place=True)[1][0]
            if kind is OpKind.INSERT:
                got = tree.insert(key)
            elif kind is OpKind.DELETE:
                got = tree.delete(key)
            else:
                got = tree.contains(key)
            if got != expected:
                return f"step {number}: {kind.value}({key}) returned {got}, oracle {expected}"
        else:
            raw = step[1]
            _, expected = oracle_apply(oracle, raw, in_place=True)
            got = tree.apply(raw).tolist()
            if got != expected:
                first = next(i for i, (g, e) in enumerate(zip(got, expected)) if g != e)
                key, kind = list(raw.pairs())[first]
                return f"step {number}: batch op {first} {kind.value}({key}) returned {got[first]}, oracle {expected[first]}"
        if len(tree) != len(oracle):
            return f"step {number}: size {len(tree)} != oracle size {len(oracle)}"

    contents = tree.to_array().tolist()
    if contents != list(oracle):
        return f"final contents differ: {len(contents)} keys vs oracle {len(oracle)}"
    tree.validate()
    return None


def script_kinds() -> List[DistributionKind]:
    return [DistributionKind.UNIFORM, DistributionKind.CLUSTERED, DistributionKind.UNIFORM_SUBSET]
