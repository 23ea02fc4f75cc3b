"""Deterministic text dump and structural validation of a tree."""

import math
from typing import List, Optional

import numpy as np

from parallel_ist.errors import InvariantViolation
from parallel_ist.state import Node, Tree

BRUTE_FORCE_ID_LIMIT = 64


def debug_dump(tree: Tree) -> str:
    """One line per node in preorder: depth, k, bounds, counters, tombstones."""
    lines: List[str] = []
    stack = [(tree.root, 0)] if tree.root is not None else []
    while stack:
        node, level = stack.pop()
        a, b = node.bounds
        lines.append(
            f"{'  ' * level}depth={level} k={node.k} bounds=[{a!r},{b!r}] "
            f"c={node.c_ops}/{node.s_init}/{node.s_live} marked={int(np.count_nonzero(node.marked))}"
        )
        for child in reversed(node.children):
            if child is not None:
                stack.append((child, level + 1))
    return "\n".join(lines) + ("\n" if lines else "")


def brute_force_id(rep: np.ndarray, bounds, m: int) -> List[int]:
    """Evaluate the ID-table predicate one threshold at a time."""
    a, b = bounds
    coords = [float(x) for x in rep]
    k = len(coords)
    table = []
    for i in range(1, m + 1):
        t = a + i * ((b - a) / m) if b > a else a
        for j in range(k + 1):
            below = j == 0 or coords[j - 1] < t
            above = j == k or t <= coords[j]
            if below and above:
                table.append(j)
                break
    return table


def validate(tree: Tree) -> None:
    """
    Check every node invariant; raise InvariantViolation on the first failure.

    Checked: rep strictly increasing, array shapes, keys inside bounds and
    strictly between the enclosing representatives, k within
    [sqrt(s_init)/2, 2 sqrt(s_init)], ID tables of small nodes against brute
    force, live-size consistency, counter signs, and an empty tree having no root.
    """
    root = tree.root
    if root is None:
        return
    if root.s_live == 0:
        raise InvariantViolation("empty root", "root", "root present with no live keys")
    _validate_node(root, "root", None, None)


def _validate_node(node: Node, path: str, low, high) -> int:
    rep = node.rep
    k = node.k
    a, b = node.bounds

    if node.marked.shape[0] != k or len(node.children) != k + 1:
        raise InvariantViolation("shape", path, f"k={k}, marks={node.marked.shape[0]}, children={len(node.children)}")
    if k > 1 and np.any(rep[1:] <= rep[:-1]):
        raise InvariantViolation("rep ordering", path, "representatives not strictly increasing")
    if a > b:
        raise InvariantViolation("bounds", path, f"a={a!r} > b={b!r}")
    if k and (float(rep[0]) < a or float(rep[-1]) > b):
        raise InvariantViolation("bounds containment", path, f"keys [{rep[0]}, {rep[-1]}] outside [{a!r}, {b!r}]")
    if k and ((low is not None and not rep[0] > low) or (high is not None and not rep[-1] < high)):
        raise InvariantViolation("subtree separation", path, f"keys not strictly between {low} and {high}")
    if node.c_ops < 0 or node.s_init < 0 or node.s_live < 0:
        raise InvariantViolation("counters", path, f"c={node.c_ops} s_init={node.s_init} s_live={node.s_live}")
    m = node.id.shape[0]
    if m and not (math.sqrt(node.s_init) / 2 <= k <= 2 * math.sqrt(node.s_init)):
        raise InvariantViolation("representative count", path, f"k={k} for subtree built over {node.s_init} keys")
    if m and k <= BRUTE_FORCE_ID_LIMIT:
        expected = brute_force_id(rep, node.bounds, m)
        if node.id.tolist() != expected:
            raise InvariantViolation("ID table", path, f"table {node.id.tolist()} != {expected}")

    live = node.live_reps
    for j, child in enumerate(node.children):
        if child is None:
            continue
        child_low = rep[j - 1] if j > 0 else low
        child_high = rep[j] if j < k else high
        live += _validate_node(child, f"{path}/{j}", child_low, child_high)
    if live != node.s_live:
        raise InvariantViolation("s_live consistency", path, f"s_live={node.s_live} but subtree holds {live} live keys")
    return live


def find_node(tree: Tree, path: str) -> Optional[Node]:
    """Resolve a dump path such as 'root/3/0'."""
    node = tree.root
    for part in path.split("/")[1:]:
        if node is None:
            return None
        node = node.children[int(part)]
    return node
