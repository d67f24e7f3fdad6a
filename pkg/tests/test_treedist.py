import itertools
import random

import numpy as np
import pytest

from avscan.normalize import NormalizedNode
from avscan.treedist import (
    DistanceMatrix, build_cluster_tree, cluster, pairwise_distances,
    tree_edit_distance,
)

from conftest import segment_of
from oracles import brute_force_ted, random_tree


def leaf(label):
    return NormalizedNode("k", label, [])


def test_identity_distance_zero():
    rng = random.Random(1)
    for _ in range(20):
        t = random_tree(rng, 8)
        assert tree_edit_distance(t, t) == 0


def test_single_node_relabel():
    assert tree_edit_distance(leaf("x"), leaf("y")) == 1
    assert tree_edit_distance(leaf("x"), leaf("x")) == 0


def test_insert_cost():
    t1 = leaf("a")
    t2 = NormalizedNode("k", "a", [leaf("b"), leaf("c")])
    assert tree_edit_distance(t1, t2) == 2
    assert tree_edit_distance(t2, t1) == 2


def test_brute_force_oracle_small():
    rng = random.Random(99)
    for _ in range(200):
        t1 = random_tree(rng, 6)
        t2 = random_tree(rng, 6)
        assert tree_edit_distance(t1, t2) == brute_force_ted(t1, t2)


def test_pairwise_matches_direct_calls():
    segs = [segment_of(n) for n in ("CB03.sol", "CB09.sol", "CB10.sol")]
    dm = pairwise_distances(segs, ["a", "b", "c"])
    for (i, x), (j, y) in itertools.combinations(enumerate(segs), 2):
        assert dm.d[i, j] == tree_edit_distance(x.root, y.root)


def test_duplicate_segments_zero_offdiag():
    s = segment_of("CB09.sol")
    dm = pairwise_distances([s, s], ["a", "b"])
    assert dm.d[0, 1] == 0


def test_matrix_invariants_enforced():
    with pytest.raises(AssertionError):
        DistanceMatrix(labels=["a", "b"], d=np.array([[0, 1], [2, 0]]))
    with pytest.raises(AssertionError):
        DistanceMatrix(labels=["a", "b"], d=np.array([[1, 2], [2, 0]]))


def _random_matrix(rng, n):
    d = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = rng.randint(1, 40)
    return DistanceMatrix(labels=[f"s{i}" for i in range(n)], d=d)


def test_cutoff_zero_singletons_and_max_one_cluster():
    rng = random.Random(3)
    dm = _random_matrix(rng, 6)
    assert cluster(dm, 0) == [[f"s{i}"] for i in range(6)]
    everything = cluster(dm, int(dm.d.max()))
    assert everything == [sorted(dm.labels)]


def test_cluster_count_monotone_in_cutoff():
    rng = random.Random(5)
    for _ in range(20):
        dm = _random_matrix(rng, rng.randint(3, 8))
        prev = None
        for h in range(0, int(dm.d.max()) + 2):
            k = len(cluster(dm, h))
            if prev is not None:
                assert k <= prev
            prev = k


def test_permutation_invariance():
    rng = random.Random(8)
    segs = [segment_of(n) for n in ("CB03.sol", "CB09.sol", "CB10.sol", "CB11.sol")]
    ids = ["CB3", "CB9", "CB10", "CB11"]
    base = {frozenset(c) for c in cluster(pairwise_distances(segs, ids), 50)}
    for _ in range(5):
        order = list(range(4))
        rng.shuffle(order)
        dm = pairwise_distances([segs[i] for i in order], [ids[i] for i in order])
        got = {frozenset(c) for c in cluster(dm, 50)}
        assert got == base


def test_merge_heights_nondecreasing():
    rng = random.Random(13)
    for _ in range(10):
        dm = _random_matrix(rng, 7)
        tree = build_cluster_tree(dm)
        heights = [h for _, _, h in tree.merges]
        assert heights == sorted(heights)


def test_published_reference_matrix_groups_at_50():
    # reference pairwise distances reported for the CB3/CB9/CB10/CB11
    # corpus; cutting the complete-linkage dendrogram at 50 must group the
    # three clones and isolate CB3
    labels = ["CB3", "CB9", "CB10", "CB11"]
    d = np.array([
        [0, 52, 60, 57],
        [52, 0, 16, 7],
        [60, 16, 0, 23],
        [57, 7, 23, 0],
    ], dtype=np.int64)
    dm = DistanceMatrix(labels=labels, d=d)
    got = {frozenset(c) for c in cluster(dm, 50)}
    assert got == {frozenset({"CB9", "CB10", "CB11"}), frozenset({"CB3"})}
    tree = build_cluster_tree(dm)
    assert tree.merges[0][:2] == (("CB11",), ("CB9",))   # closest pair first


def test_complete_linkage_uses_max():
    # three points: a-b close, c far from b but nearer a; complete linkage
    # must delay c until the max distance is paid
    d = np.array([[0, 2, 5], [2, 0, 9], [5, 9, 0]], dtype=np.int64)
    dm = DistanceMatrix(labels=["a", "b", "c"], d=d)
    tree = build_cluster_tree(dm)
    assert tree.merges[0][2] == 2
    assert tree.merges[1][2] == 9          # max(5, 9), not min
    assert cluster(dm, 5) == [["a", "b"], ["c"]]
