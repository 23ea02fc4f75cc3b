# Directory: parallel-ist/tests/test_ist.py
"""
Test suite for the interpolation search tree
Covers ideal construction, lookup, single-key updates, flatten, depth and debug helpers
"""

import math
from bisect import bisect_left

import numpy as np
import pytest
from sortedcontainers import SortedSet

from parallel_ist import InterpolationSearchTree, TreeConfig, ist
from parallel_ist.debug import brute_force_id, find_node
from parallel_ist.errors import ContractViolation, InvariantViolation
from parallel_ist.instrumentation import counters, reset_counters

SIXTEEN = np.arange(1, 17, dtype=np.int64) * 10


def random_keys(rng, n, high=None):
    high = high or 20 * n
    return np.sort(rng.choice(high, size=n, replace=False)).astype(np.int64) + 1


class TestBuildIdeal:
    """Test ideal tree construction"""

    def test_sixteen_keys_layout(self, config):
        """Representatives at every fourth key, children of sizes 3, 3, 3, 4"""
        node = ist.build_ideal(SIXTEEN, (10.0, 160.0), config)
        assert node.rep.tolist() == [40, 80, 120]
        assert [child.s_live for child in node.children] == [3, 3, 3, 4]
        assert (node.c_ops, node.s_init, node.s_live) == (0, 16, 16)
        assert node.id.shape[0] == 4

    def test_leaf_node_has_no_id_table(self, config):
        node = ist.build_ideal(SIXTEEN[:3], (10.0, 30.0), config)
        assert node.rep.tolist() == [10, 20, 30]
        assert node.id.shape[0] == 0
        assert node.children == [None, None, None, None]

    def test_no_keys(self, config):
        assert ist.build_ideal(np.array([], dtype=np.int64), (0.0, 0.0), config) is None

    def test_round_trip_and_invariants(self, rng, config):
        keys = random_keys(rng, 10**5)
        tree = InterpolationSearchTree.from_sorted(keys, config)
        np.testing.assert_array_equal(tree.to_array(), keys)
        tree.validate()
        assert len(tree) == keys.shape[0]

    @pytest.mark.parametrize("n", [10**2, 10**3, 10**4, 10**5])
    def test_depth_bound(self, rng, config, n):
        tree = InterpolationSearchTree.from_sorted(random_keys(rng, n), config)
        assert tree.depth() <= math.ceil(math.log2(math.log2(n))) + 2

    def test_alpha_sets_id_table_size(self, rng):
        keys = random_keys(rng, 10**4)
        node = ist.build_ideal(keys, (float(keys[0]), float(keys[-1])), TreeConfig(alpha=0.75, threads=1))
        assert node.id.shape[0] == int((10**4) ** 0.75)

    def test_unsorted_keys_rejected_in_debug(self, config):
        with pytest.raises(ContractViolation):
            ist.build_ideal(np.array([3, 1, 2]), (1.0, 3.0), config)

    def test_duplicate_keys_rejected_in_debug(self, config):
        with pytest.raises(ContractViolation):
            InterpolationSearchTree.from_sorted([1, 2, 2, 3], config)


class TestComputeId:
    """Test interpolation tables"""

    def test_even_thresholds(self):
        assert ist.compute_id(np.array([10, 20, 30]), (0.0, 40.0), 4).tolist() == [0, 1, 2, 3]

    def test_no_representatives(self):
        assert ist.compute_id(np.array([], dtype=np.int64), (0.0, 5.0), 2).tolist() == [0, 0]

    def test_degenerate_bounds(self):
        assert ist.compute_id(np.array([5]), (5.0, 5.0), 3).tolist() == [0, 0, 0]

    def test_random_matches_brute_force(self, rng):
        for _ in range(50):
            rep = random_keys(rng, int(rng.integers(1, 60)), high=1000)
            a = float(rng.integers(0, int(rep[0]) + 1))
            b = float(rep[-1] + rng.integers(0, 100))
            m = int(rng.integers(1, 40))
            assert ist.compute_id(rep, (a, b), m).tolist() == brute_force_id(rep, (a, b), m)


class TestLocateChild:
    """Test interpolation lookup inside a node"""

    def test_key_on_representative(self, config):
        node = ist.build_ideal(SIXTEEN, (10.0, 160.0), config)
        assert ist.locate_child(node, 120) == (2, 2)

    def test_key_below_all_representatives(self, config):
        node = ist.build_ideal(SIXTEEN, (10.0, 160.0), config)
        assert ist.locate_child(node, 10) == (0, None)

    @pytest.mark.parametrize("alpha", [0.5, 0.9])
    def test_random_lookups_match_binary_search(self, rng, alpha):
        keys = random_keys(rng, 10**4)
        node = ist.build_ideal(keys, (float(keys[0]), float(keys[-1])), TreeConfig(alpha=alpha, threads=1))
        rep = node.rep.tolist()
        for key in rng.integers(int(keys[0]), int(keys[-1]) + 1, size=10**4).tolist():
            slot, found = ist.locate_child(node, key)
            assert slot == bisect_left(rep, key)
            assert (found is not None) == (slot < len(rep) and rep[slot] == key)

    def test_float_keys(self):
        keys = np.linspace(0.0, 1.0, 50)
        node = ist.build_ideal(keys, (0.0, 1.0), TreeConfig(threads=1))
        assert ist.locate_child(node, float(node.rep[3]))[1] == 3


class TestSearchAndUpdates:
    """Test search and the sequential single-key updates"""

    def test_empty_tree(self, config):
        tree = InterpolationSearchTree(config)
        assert not tree.contains(5)
        assert len(tree) == 0
        assert tree.state.root is None

    def test_insert_into_empty(self, config):
        tree = InterpolationSearchTree(config)
        assert tree.insert(7) is True
        assert len(tree) == 1
        assert 7 in tree

    def test_insert_existing(self, config):
        tree = InterpolationSearchTree.from_sorted(SIXTEEN, config)
        assert tree.insert(80) is False
        assert len(tree) == 16

    def test_delete_absent(self, config):
        tree = InterpolationSearchTree.from_sorted(SIXTEEN, config)
        assert tree.delete(85) is False
        assert tree.delete(10**6) is False
        assert tree.state.root.bounds == (10.0, 160.0)
        assert len(tree) == 16

    def test_delete_then_search_and_resurrect(self, config):
        tree = InterpolationSearchTree.from_sorted(SIXTEEN, config)
        assert tree.delete(80) is True
        assert not tree.contains(80)
        assert tree.delete(80) is False
        assert tree.insert(80) is True
        assert tree.contains(80)
        tree.validate()

    def test_insert_outside_bounds_moves_root_bounds(self, config):
        tree = InterpolationSearchTree.from_sorted(SIXTEEN, config)
        assert tree.insert(1000)
        assert tree.insert(-5)
        assert tree.state.root.bounds == (-5.0, 1000.0)
        tree.validate()

    def test_deleting_everything_drops_root(self, config):
        tree = InterpolationSearchTree.from_sorted(SIXTEEN, config)
        for key in SIXTEEN.tolist():
            assert tree.delete(key)
        assert len(tree) == 0
        assert tree.state.root is None
        assert tree.to_array().tolist() == []

    @pytest.mark.parametrize("threads", [1, 4])
    def test_interleaved_updates_match_oracle(self, rng, threads):
        tree = InterpolationSearchTree(TreeConfig(grain=16, threads=threads))
        oracle = SortedSet()
        keys = rng.integers(1, 5000, size=2 * 10**4).tolist()
        deletes = (rng.random(len(keys)) < 0.4).tolist()
        for key, delete in zip(keys, deletes):
            if delete:
                expected = key in oracle
                oracle.discard(key)
                assert tree.delete(key) == expected
            else:
                expected = key not in oracle
                oracle.add(key)
                assert tree.insert(key) == expected
        assert tree.to_array().tolist() == list(oracle)
        for key in rng.integers(1, 5000, size=2000).tolist():
            assert tree.contains(key) == (key in oracle)
        tree.validate()

    def test_sorted_insertions_keep_depth_logarithmic(self, config):
        """Ascending keys packed into the lowest slot of a wide root"""
        tree = InterpolationSearchTree.from_sorted([0, 10**6], config)
        n = 3000
        for key in range(1, n + 1):
            tree.insert(key)
        assert tree.depth() <= 2 * math.log2(n) + 2
        tree.validate()

    def test_mixed_dtype_rejected(self, config):
        tree = InterpolationSearchTree.from_sorted([0.5, 1.5], config)
        with pytest.raises(ContractViolation):
            tree.insert(3)


class TestFlattenAndDepth:
    """Test flatten and depth"""

    def test_absent_node(self):
        assert ist.flatten(None).tolist() == []
        assert ist.depth(None) == 0

    def test_single_node_depth(self, config):
        assert ist.depth(ist.build_ideal(SIXTEEN[:2], (10.0, 20.0), config)) == 1

    def test_tombstones_excluded(self, config):
        tree = InterpolationSearchTree.from_sorted(SIXTEEN, config)
        tree.delete(40)
        tree.delete(160)
        assert tree.to_array().tolist() == [k for k in SIXTEEN.tolist() if k not in (40, 160)]
        assert list(tree) == tree.to_array().tolist()


class TestCounters:
    """Test instrumentation counters"""

    def test_reset_gives_zeros(self):
        reset_counters()
        snapshot = counters()
        assert (snapshot.nodes_visited, snapshot.searches, snapshot.rebuilds, snapshot.rebuilt_keys) == (0, 0, 0, 0)

    def test_single_search_on_one_node(self):
        tree = InterpolationSearchTree.from_sorted([1, 2, 3], TreeConfig(instrument=True, threads=1))
        reset_counters()
        tree.contains(2)
        assert counters().nodes_visited == 1
        assert counters().searches == 1

    def test_rebuilds_counted_across_forks(self, rng):
        """Child rebuilds inside forked tasks add up to the sequential totals"""
        keys = random_keys(rng, 4000)
        prefill, batch = keys[::2], keys[1::2][::7]
        snapshots = []
        for threads in (1, 4):
            tree = InterpolationSearchTree.from_sorted(prefill, TreeConfig(instrument=True, threads=threads, grain=8))
            reset_counters()
            tree.apply([(key, "insert") for key in batch.tolist()])
            snapshots.append(counters())
        assert snapshots[0].rebuilds >= 1
        assert snapshots[0] == snapshots[1]

    def test_contains_does_not_touch_update_counters(self, config):
        tree = InterpolationSearchTree.from_sorted(SIXTEEN, config)
        tree.contains(80)
        tree.contains(85)
        assert tree.state.root.c_ops == 0


class TestDebugHelpers:
    """Test the text dump and structural validation"""

    def test_dump_of_sixteen(self, config):
        tree = InterpolationSearchTree.from_sorted(SIXTEEN, config)
        lines = tree.dump().splitlines()
        assert lines[0] == "depth=0 k=3 bounds=[10.0,160.0] c=0/16/16 marked=0"
        assert lines[1] == "  depth=1 k=3 bounds=[10.0,40.0] c=0/3/3 marked=0"
        assert len(lines) == 7

    def test_dump_counts_tombstones(self, config):
        tree = InterpolationSearchTree.from_sorted(SIXTEEN, config)
        tree.delete(40)
        assert tree.dump().splitlines()[0] == "depth=0 k=3 bounds=[10.0,160.0] c=1/16/15 marked=1"

    def test_empty_dump(self, config):
        assert InterpolationSearchTree(config).dump() == ""

    def test_corrupt_live_count_detected(self, config):
        tree = InterpolationSearchTree.from_sorted(SIXTEEN, config)
        find_node(tree.state, "root/1").s_live += 1
        with pytest.raises(InvariantViolation) as excinfo:
            tree.validate()
        assert excinfo.value.prop == "s_live consistency"
        assert excinfo.value.path == "root/1"

    def test_corrupt_id_table_detected(self, config):
        tree = InterpolationSearchTree.from_sorted(SIXTEEN, config)
        tree.state.root.id[0] = 2
        with pytest.raises(InvariantViolation) as excinfo:
            tree.validate()
        assert excinfo.value.prop == "ID table"
