# Directory: parallel-ist/models/batch_models.py
"""
Pydantic models for batched tree operations
Defines operation kinds, raw and prepared batches, results and counter snapshots
"""

from enum import Enum
from typing import Iterator, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

# int8 codes used inside the array kernels
OP_CONTAINS = 0
OP_INSERT = 1
OP_DELETE = 2


class OpKind(str, Enum):
    """Operation kinds accepted by a batch"""
    INSERT = "insert"
    DELETE = "delete"
    CONTAINS = "contains"

    @property
    def code(self) -> int:
        """Compact code of this kind inside batch arrays"""
        return _KIND_CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "OpKind":
        return _CODE_KINDS[int(code)]


_KIND_CODES = {OpKind.CONTAINS: OP_CONTAINS, OpKind.INSERT: OP_INSERT, OpKind.DELETE: OP_DELETE}
_CODE_KINDS = {code: kind for kind, code in _KIND_CODES.items()}


class RawOps(BaseModel):
    """Unprepared operations in input order, stored column-wise"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    keys: np.ndarray = Field(..., description="Operation keys (int64 or float64)")
    kinds: np.ndarray = Field(..., description="Operation kind codes (int8)")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[Union[int, float], OpKind]]) -> "RawOps":
        """Build column arrays from (key, kind) pairs"""
        keys = np.asarray([key for key, _ in pairs])
        if keys.size == 0:
            keys = np.empty(0, dtype=np.int64)
        kinds = np.fromiter((OpKind(kind).code for _, kind in pairs), dtype=np.int8, count=len(pairs))
        return cls(keys=keys, kinds=kinds)

    @classmethod
    def of_kind(cls, keys: np.ndarray, kind: OpKind) -> "RawOps":
        """All operations share one kind"""
        keys = np.asarray(keys)
        return cls(keys=keys, kinds=np.full(keys.shape[0], kind.code, dtype=np.int8))

    def __len__(self) -> int:
        return int(self.keys.shape[0])

    def pairs(self) -> Iterator[Tuple[Union[int, float], OpKind]]:
        """Iterate (key, kind) pairs as plain Python values"""
        for key, code in zip(self.keys.tolist(), self.kinds.tolist()):
            yield key, OpKind.from_code(code)


class Batch(BaseModel):
    """
    Prepared batch: one entry per distinct key, sorted by key

    Every raw operation is mapped to its key's entry. Its outcome is resolved
    in closed form for both possible pre-batch states of that key, so the
    tree only has to report pre-batch membership per entry.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    keys: np.ndarray = Field(..., description="Distinct entry keys, strictly increasing")
    kinds: np.ndarray = Field(..., description="Surviving update code per entry, OP_CONTAINS when the key has none")
    origins: np.ndarray = Field(..., description="Raw index of the surviving operation per entry")
    entry_of: np.ndarray = Field(..., description="Entry index of every raw operation")
    if_absent: np.ndarray = Field(..., description="Raw outcomes when the key was absent before the batch")
    if_present: np.ndarray = Field(..., description="Raw outcomes when the key was live before the batch")

    def __len__(self) -> int:
        return int(self.keys.shape[0])

    @property
    def raw_size(self) -> int:
        return int(self.entry_of.shape[0])

    @property
    def update_count(self) -> int:
        return int(np.count_nonzero(self.kinds != OP_CONTAINS))


class BatchResult(BaseModel):
    """Per raw operation outcome, in raw input order"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    outcomes: np.ndarray = Field(..., description="insert: newly inserted, delete: was live, contains: member")

    def __len__(self) -> int:
        return int(self.outcomes.shape[0])

    def tolist(self) -> list:
        return self.outcomes.tolist()


class CounterSnapshot(BaseModel):
    """Instrumentation counters since the last reset"""
    nodes_visited: int = Field(default=0, description="Nodes entered by searches and single-key updates")
    searches: int = Field(default=0, description="Number of search calls")
    rebuilds: int = Field(default=0, description="Subtree rebuilds performed")
    rebuilt_keys: int = Field(default=0, description="Total live size of rebuilt subtrees")

    @property
    def mean_nodes_visited(self) -> float:
        return self.nodes_visited / self.searches if self.searches else 0.0
