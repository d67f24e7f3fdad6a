import json
import random

import numpy as np
import pytest

from avscan.avs import (
    ALIGNMENT_PASSES, curate_avs, extract_avs, load_store,
    progressive_align, save_avs, signature_from_segment,
)
from avscan.errors import DegenerateCluster, EmptyCore
from avscan.normalize import NormalizedAstSegment, NormalizedNode, count_nodes, statement_key
from avscan.treedist import DistanceMatrix, pairwise_distances

from conftest import segment_of
from oracles import clone_family, three_way_lcs_length


def seg_from_keys(symbols, origin=("C", "f", None)):
    stmts = [NormalizedNode("exprstmt", "", [NormalizedNode("ident", s, [])])
             for s in symbols]
    root = NormalizedNode("function", "*", [NormalizedNode("block", "", stmts)])
    return NormalizedAstSegment(origin=origin, root=root, node_count=count_nodes(root))


def dm_for(segs, ids):
    return pairwise_distances(segs, ids)


def test_trio_aligns_closest_pair_first():
    segs = [segment_of(n) for n in ("CB09.sol", "CB11.sol", "CB10.sol")]
    ids = ["CB9", "CB11", "CB10"]
    dm = dm_for(segs, ids)
    assert dm.value("CB9", "CB11") < dm.value("CB9", "CB10") < dm.value("CB10", "CB11")
    ALIGNMENT_PASSES["count"] = 0
    slots = progressive_align(segs, dm, ids)
    assert ALIGNMENT_PASSES["count"] == 2          # n - 1 passes
    common = [s for s in slots if s.status == "common"]
    # common slots cover every instance
    for s in common:
        assert set(s.spans) == {0, 1, 2}
    gaps = [s for s in slots if s.status == "gap"]
    assert gaps, "moved/modified statements must fall out as gaps"
    for s in gaps:
        assert 0 < len(s.spans) < 3


def test_identical_pair_all_common():
    a = seg_from_keys("pqrst")
    b = seg_from_keys("pqrst")
    dm = DistanceMatrix(labels=["a", "b"], d=np.zeros((2, 2), dtype=np.int64))
    slots = progressive_align([a, b], dm, ["a", "b"])
    assert all(s.status == "common" for s in slots)
    assert len(slots) == 5


def test_degenerate_cluster_raises():
    empty = seg_from_keys([])
    other = seg_from_keys("ab")
    dm = DistanceMatrix(labels=["a", "b"], d=np.zeros((2, 2), dtype=np.int64))
    with pytest.raises(DegenerateCluster):
        progressive_align([empty, other], dm, ["a", "b"])


def test_alignment_passes_count_property():
    rng = random.Random(77)
    for n in (2, 3, 4, 5):
        segs = [seg_from_keys([rng.choice("abcdef") for _ in range(rng.randint(1, 6))])
                for _ in range(n)]
        d = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = rng.randint(1, 9)
        dm = DistanceMatrix(labels=[f"s{i}" for i in range(n)], d=d)
        ALIGNMENT_PASSES["count"] = 0
        progressive_align(segs, dm, list(dm.labels))
        assert ALIGNMENT_PASSES["count"] == n - 1


def test_three_way_oracle_on_clone_families():
    """On clone-family triples (shared ordered core + fresh-symbol noise)
    the progressive common core equals the exhaustive 3-way LCS."""
    rng = random.Random(101)
    for _ in range(60):
        seqs, core = clone_family(rng, core_len=rng.randint(1, 6))
        segs = [seg_from_keys(s) for s in seqs]
        d = np.zeros((3, 3), dtype=np.int64)
        for i in range(3):
            for j in range(i + 1, 3):
                d[i, j] = d[j, i] = abs(len(seqs[i]) - len(seqs[j])) + 1
        dm = DistanceMatrix(labels=["a", "b", "c"], d=d)
        slots = progressive_align(segs, dm, ["a", "b", "c"])
        commons = [s for s in slots if s.status == "common"]
        expect = three_way_lcs_length(*(tuple(s) for s in seqs))
        assert len(commons) == expect == len(core)


def test_common_core_is_subsequence_of_every_instance():
    rng = random.Random(202)
    for _ in range(100):
        seqs = [[rng.choice("abcd") for _ in range(rng.randint(1, 8))] for _ in range(3)]
        segs = [seg_from_keys(s) for s in seqs]
        d = np.zeros((3, 3), dtype=np.int64)
        for i in range(3):
            for j in range(i + 1, 3):
                d[i, j] = d[j, i] = rng.randint(1, 9)
        dm = DistanceMatrix(labels=["a", "b", "c"], d=d)
        slots = progressive_align(segs, dm, ["a", "b", "c"])
        for s in slots:
            if s.status != "common":
                continue
            # recorded positions strictly increase per instance (order kept)
            for inst, seqi in enumerate(seqs):
                assert seqi[s.spans[inst]] == json_label(s.key)
        commons = [s for s in slots if s.status == "common"]
        for inst in range(3):
            positions = [s.spans[inst] for s in commons]
            assert positions == sorted(positions)


def json_label(key):
    obj = json.loads(key)
    return obj["children"][0]["label"]


def test_extract_trio_avs_excludes_moved_and_modified(store):
    sig = next(s for s in store if s.id == "reentrancy-001-sale-core")
    assert sig.vuln_type == "Reentrancy"
    assert sig.min_core_statements == 7
    keys = [k[0] for k in sig.ir_signature.keys()]
    assert "LOOP" not in keys
    # the fee-transfer block (moved in CB10) and the reward division
    # (modified in CB11) are not part of the common core
    renders = [i.render() for i in sig.ir_signature.items]
    assert not any("transfer" in r for r in renders)
    assert len(sig.provenance) == 3


def test_singleton_cluster_yields_instance_itself():
    seg = segment_of("CB01.sol")
    dm = DistanceMatrix(labels=["cb1"], d=np.zeros((1, 1), dtype=np.int64))
    sig = extract_avs([seg], dm, "UnexpectedRevert", avs_id="x", ids=["cb1"])
    assert sig.min_core_statements == 4
    assert [statement_key(s) for s in sig.body.statements()] == \
        [statement_key(s) for s in seg.statements()]


def test_empty_core_raises():
    a = seg_from_keys("abc")
    b = seg_from_keys("xyz")
    d = np.array([[0, 5], [5, 0]], dtype=np.int64)
    dm = DistanceMatrix(labels=["a", "b"], d=d)
    with pytest.raises(EmptyCore):
        extract_avs([a, b], dm, "Reentrancy", avs_id="none", ids=["a", "b"])


def test_curate_identity_and_errors():
    seg = segment_of("CB01.sol")
    sig = signature_from_segment(seg, "UnexpectedRevert", "cb1-full")
    same = curate_avs(sig, [0, 1, 2, 3])
    assert [statement_key(s) for s in same.body.statements()] == \
        [statement_key(s) for s in sig.body.statements()]
    assert same.curated
    with pytest.raises(IndexError):
        curate_avs(sig, [])
    with pytest.raises(IndexError):
        curate_avs(sig, [9])


def test_fig10_style_curation(store):
    sig = next(s for s in store if s.id == "revert-001-bid-refund")
    assert sig.curated
    assert sig.min_core_statements == 3
    renders = [i.render() for i in sig.ir_signature.items]
    assert renders == [
        "CALL_BUILTIN[moneysend.send](*DEST* *VALUE*)",
        "REQUIRE(*RES*)",
        "ASSIGN(* = msg.sender)",
        "ASSIGN(* = msg.value)",
    ]


def test_core_soundness_on_bundled_store(store):
    """Every signature body statement appears, in order, in each provenance
    instance -- spot-checked here for the cluster-learned signatures."""
    trio = next(s for s in store if s.id == "reentrancy-001-sale-core")
    core_keys = [statement_key(s) for s in trio.body.statements()]
    for name in ("CB09.sol", "CB10.sol", "CB11.sol"):
        inst_keys = [statement_key(s) for s in segment_of(name).statements()]
        it = iter(inst_keys)
        assert all(any(k == x for x in it) for k in core_keys), name


def test_store_json_deterministic(tmp_path):
    seg = segment_of("CB03.sol", "regstDocs")
    sig = signature_from_segment(seg, "Reentrancy", "round-trip")
    p1 = save_avs(sig, tmp_path / "a")
    p2 = save_avs(sig, tmp_path / "b")
    assert p1.read_bytes() == p2.read_bytes()
    loaded = load_store(tmp_path / "a")[0]
    assert loaded.ir_signature.keys() == sig.ir_signature.keys()
    assert loaded.body.root.to_json() == sig.body.root.to_json()
    assert save_avs(loaded, tmp_path / "c").read_bytes() == p1.read_bytes()


def test_bundled_store_shape(store):
    counts = {}
    for s in store:
        counts[s.vuln_type] = counts.get(s.vuln_type, 0) + 1
    assert counts == {
        "Reentrancy": 20, "TxOriginAbuse": 5, "UncheckedLowLevelCall": 4,
        "UnexpectedRevert": 8, "SelfdestructAbuse": 5,
    }
    assert len(store) == 42
