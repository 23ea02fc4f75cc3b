"""Ordered-set facade over the interpolation search tree."""

import logging
from typing import Iterator, Optional

import numpy as np

from models.batch_models import Batch, BatchResult
from parallel_ist import debug, ist
from parallel_ist.batching import RawInput, prepare_batch
from parallel_ist.configuration import TreeConfig
from parallel_ist.instrumentation import enable_counters
from parallel_ist.state import Tree

logger = logging.getLogger(__name__)


class InterpolationSearchTree:
    """
    Ordered set of int64 or float64 keys.

    Single-writer: at most one mutating call at a time and no readers during
    it. Batches are executed with fork-join parallelism internally.
    """

    def __init__(self, config: Optional[TreeConfig] = None):
        self.state = Tree(config)
        if self.state.config.instrument:
            enable_counters()

    @classmethod
    def from_sorted(cls, keys, config: Optional[TreeConfig] = None) -> "InterpolationSearchTree":
        """Bulk-build an ideal tree from strictly increasing keys."""
        tree = cls(config)
        keys = tree.state.coerce_keys(keys)
        if keys.shape[0]:
            bounds = (float(keys[0]), float(keys[-1]))
            tree.state.root = ist.build_ideal(keys, bounds, tree.config)
        return tree

    @property
    def config(self) -> TreeConfig:
        return self.state.config

    def insert(self, key) -> bool:
        return ist.insert_one(self.state, key)

    def delete(self, key) -> bool:
        return ist.delete_one(self.state, key)

    def contains(self, key) -> bool:
        return ist.search(self.state, key)

    def prepare(self, raw: RawInput) -> Batch:
        return prepare_batch(raw, self.config.grain, self.config.threads)

    def execute(self, batch: Batch) -> BatchResult:
        return ist.execute_batch(self.state, batch)

    def apply(self, raw: RawInput) -> BatchResult:
        """Prepare and execute raw operations as one batch."""
        return self.execute(self.prepare(raw))

    def to_array(self) -> np.ndarray:
        return ist.flatten(self.state.root, self.config, dtype=self.state.dtype or np.int64)

    def depth(self) -> int:
        return ist.depth(self.state.root)

    def dump(self) -> str:
        return debug.debug_dump(self.state)

    def validate(self) -> None:
        debug.validate(self.state)

    def __len__(self) -> int:
        return self.state.size

    def __contains__(self, key) -> bool:
        return self.contains(key)

    def __iter__(self) -> Iterator:
        return iter(self.to_array().tolist())

    def __repr__(self) -> str:
        return f"InterpolationSearchTree(size={len(self)}, depth={self.depth()})"
