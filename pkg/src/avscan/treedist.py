"""Tree edit distance and complete-linkage clustering over normalized
function segments.

The distance is the classic Zhang-Shasha ordered-tree edit distance with
unit insert/delete/relabel costs; two nodes relabel for free iff they agree
on (kind, label). Agglomeration is complete-linkage (cluster distance =
max pairwise member distance) with a deterministic tie rule.
"""

from dataclasses import dataclass, field

import numpy as np

from ._kernels import ted_kernel


def tree_arrays(root, vocab):
    """Postorder label ids, leftmost-leaf-descendant indices and keyroots."""
    post = []

    def visit(node):
        first_leaf = None
        for c in node.children:
            leaf = visit(c)
            if first_leaf is None:
                first_leaf = leaf
        idx = len(post)
        lm = idx if first_leaf is None else first_leaf
        key = (node.kind, node.label)
        if key not in vocab:
            vocab[key] = len(vocab)
        post.append((vocab[key], lm))
        return lm

    visit(root)
    labels = np.array([p[0] for p in post], dtype=np.int32)
    lmld = np.array([p[1] for p in post], dtype=np.int32)
    last_for_lm = {}
    for i, lm in enumerate(lmld):
        last_for_lm[int(lm)] = i
    keyroots = np.array(sorted(last_for_lm.values()), dtype=np.int32)
    return labels, lmld, keyroots


def tree_edit_distance(a, b):
    """Minimal unit-cost edit script length between two normalized trees."""
    vocab = {}
    l1, lm1, k1 = tree_arrays(a, vocab)
    l2, lm2, k2 = tree_arrays(b, vocab)
    return int(ted_kernel(l1, lm1, k1, l2, lm2, k2))


@dataclass
class DistanceMatrix:
    labels: list
    d: np.ndarray

    def __post_init__(self):
        n = len(self.labels)
        assert self.d.shape == (n, n)
        assert (self.d.diagonal() == 0).all(), "nonzero diagonal"
        assert (self.d == self.d.T).all(), "asymmetric distance matrix"
        assert (self.d >= 0).all(), "negative distance"

    def value(self, a, b):
        return int(self.d[self.labels.index(a), self.labels.index(b)])

    def to_json(self):
        return {"labels": list(self.labels), "distances": self.d.tolist()}


def pairwise_distances(segments, ids=None):
    """Full symmetric tree-edit-distance matrix over segments."""
    if ids is None:
        ids = [f"{i:03d}:{s.origin[0]}.{s.origin[1]}" for i, s in enumerate(segments)]
    if len(segments) != len(ids):
        raise ValueError("ids/segments length mismatch")
    vocab = {}
    arrays = [tree_arrays(s.root, vocab) for s in segments]
    n = len(segments)
    d = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            l1, lm1, k1 = arrays[i]
            l2, lm2, k2 = arrays[j]
            dist = int(ted_kernel(l1, lm1, k1, l2, lm2, k2))
            d[i, j] = dist
            d[j, i] = dist
    return DistanceMatrix(labels=list(ids), d=d)


@dataclass
class ClusterTree:
    leaves: list
    merges: list = field(default_factory=list)   # (left ids tuple, right ids tuple, height)

    def cut(self, height_cutoff):
        """Partition of leaves obtained by applying merges up to the cutoff."""
        clusters = {frozenset([x]) for x in self.leaves}
        for left, right, h in self.merges:
            if h > height_cutoff:
                break
            a, b = frozenset(left), frozenset(right)
            clusters.discard(a)
            clusters.discard(b)
            clusters.add(a | b)
        return sorted((sorted(c) for c in clusters), key=lambda c: c[0])

    def to_json(self):
        return {"leaves": list(self.leaves),
                "merges": [{"left": list(l), "right": list(r), "height": h}
                           for l, r, h in self.merges]}


def build_cluster_tree(dm):
    """Complete-linkage agglomeration over a DistanceMatrix. Equal-linkage
    ties merge the pair with the lexicographically smallest (min id, max id)."""
    labels = dm.labels
    index = {x: i for i, x in enumerate(labels)}
    active = [tuple([x]) for x in labels]
    merges = []

    def linkage(a, b):
        return max(int(dm.d[index[x], index[y]]) for x in a for y in b)

    while len(active) > 1:
        best = None
        for ai in range(len(active)):
            for bi in range(ai + 1, len(active)):
                a, b = active[ai], active[bi]
                h = linkage(a, b)
                members = a + b
                tie = (min(members), max(members))
                cand = (h, tie, ai, bi)
                if best is None or cand[:2] < best[:2]:
                    best = cand
        h, _, ai, bi = best
        a, b = active[ai], active[bi]
        left, right = sorted([a, b])
        merges.append((left, right, h))
        active = [c for k, c in enumerate(active) if k not in (ai, bi)]
        active.append(tuple(sorted(a + b)))
    return ClusterTree(leaves=sorted(labels), merges=merges)


def cluster(dm, height_cutoff):
    """Complete-linkage clusters after cutting the dendrogram at the cutoff."""
    return build_cluster_tree(dm).cut(height_cutoff)
