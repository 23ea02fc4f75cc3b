"""Node and tree state of the interpolation search tree."""

from typing import List, Optional, Tuple

import numpy as np

from parallel_ist.configuration import TreeConfig
from parallel_ist.errors import ContractViolation

Bounds = Tuple[float, float]


class Node:
    """
    One tree level.

    rep holds the representatives, marked the tombstones, children the k+1
    subtrees between consecutive representatives, id the interpolation table
    (empty for leaf-sized nodes). c_ops counts updates routed here since the
    last rebuild, s_init is the live size right after it, s_live the current
    live size of the whole subtree.
    """

    __slots__ = ("rep", "marked", "children", "id", "bounds", "c_ops", "s_init", "s_live")

    def __init__(
        self,
        rep: np.ndarray,
        id_table: np.ndarray,
        bounds: Bounds,
        children: Optional[List[Optional["Node"]]] = None,
        s_live: Optional[int] = None,
    ):
        self.rep = rep
        self.marked = np.zeros(rep.shape[0], dtype=bool)
        self.children: List[Optional[Node]] = children if children is not None else [None] * (rep.shape[0] + 1)
        self.id = id_table
        self.bounds = bounds
        self.c_ops = 0
        self.s_live = int(s_live) if s_live is not None else int(rep.shape[0])
        self.s_init = self.s_live

    @property
    def k(self) -> int:
        return int(self.rep.shape[0])

    @property
    def live_reps(self) -> int:
        return int(self.rep.shape[0] - np.count_nonzero(self.marked))

    def slot_bounds(self, slot: int) -> Bounds:
        """Bounds handed to the child in the given slot."""
        a = self.bounds[0] if slot == 0 else float(self.rep[slot - 1])
        b = self.bounds[1] if slot == self.k else float(self.rep[slot])
        return a, b


class Tree:
    """Root pointer plus configuration; the key dtype is fixed by the first keys stored."""

    __slots__ = ("root", "config", "dtype")

    def __init__(self, config: Optional[TreeConfig] = None):
        self.root: Optional[Node] = None
        self.config = config or TreeConfig.from_env()
        self.dtype: Optional[np.dtype] = None

    @property
    def size(self) -> int:
        return self.root.s_live if self.root is not None else 0

    def coerce_keys(self, keys) -> np.ndarray:
        """Cast keys to the tree's dtype, adopting int64 or float64 on first use."""
        keys = np.asarray(keys)
        if keys.dtype.kind in "iub":
            target = np.dtype(np.int64)
        elif keys.dtype.kind == "f":
            target = np.dtype(np.float64)
        else:
            raise ContractViolation(f"keys must be integers or floats, got dtype {keys.dtype}")
        if self.dtype is None:
            if keys.size == 0:
                return keys.astype(target)
            self.dtype = target
        elif target.kind != self.dtype.kind:
            if keys.size == 0:
                return keys.astype(self.dtype)
            raise ContractViolation(f"tree stores {self.dtype} keys, got {keys.dtype}")
        return keys.astype(self.dtype, copy=False)

    def coerce_key(self, key):
        return self.coerce_keys(np.asarray([key]))[0]
