"""Abstract vulnerability signatures: extraction from clusters of similar
normalized segments, curation, and the on-disk signature store.

Multi-instance alignment is progressive: the closest pair (by tree edit
distance) is aligned first, remaining instances fold into the running
consensus in order of increasing distance to the instances already
included, one LCS pass each, so a cluster of n instances costs exactly
n - 1 alignment passes. Alignment is statement-level: each top-level
statement serializes to a canonical string and statements are equal iff
the strings are.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._kernels import lcs_table_kernel
from .cfgir import IrInstruction, IrSequence, segment_sequence
from .errors import DegenerateCluster, EmptyCore
from .normalize import NormalizedAstSegment, NormalizedNode, count_nodes, statement_key
from .findings import VULN_TYPES

ALIGNMENT_PASSES = {"count": 0}    # instrumentation for the n-1 property


@dataclass
class AlignmentSlot:
    status: str                    # common / gap
    key: str
    spans: dict                    # instance index -> statement index


@dataclass
class AvsSignature:
    id: str
    vuln_type: str
    body: NormalizedAstSegment
    ir_signature: IrSequence
    provenance: list = field(default_factory=list)
    min_core_statements: int = 1
    curated: bool = False

    def to_json(self):
        return {
            "id": self.id,
            "vuln_type": self.vuln_type,
            "body": self.body.to_json(),
            "ir_signature": self.ir_signature.to_json(),
            "provenance": list(self.provenance),
            "min_core_statements": self.min_core_statements,
            "curated": self.curated,
        }

    @classmethod
    def from_json(cls, obj):
        body = NormalizedAstSegment.from_json(obj["body"])
        items = [IrInstruction(opcode=i["opcode"], tokens=tuple(i["tokens"]),
                               family=i.get("family", ""), sub=i.get("sub", ""))
                 for i in obj["ir_signature"]["items"]]
        return cls(
            id=obj["id"], vuln_type=obj["vuln_type"], body=body,
            ir_signature=IrSequence(items=items, origin=tuple(obj["ir_signature"]["origin"])),
            provenance=list(obj.get("provenance", [])),
            min_core_statements=obj.get("min_core_statements", 1),
            curated=obj.get("curated", False),
        )


def _stmt_keys(segment):
    return [statement_key(s) for s in segment.statements()]


def _lcs_pairs(keys_a, keys_b):
    """Index pairs of one maximal common subsequence of two key lists."""
    ALIGNMENT_PASSES["count"] += 1
    vocab = {}
    enc = []
    for keys in (keys_a, keys_b):
        arr = np.empty(len(keys), dtype=np.int32)
        for i, k in enumerate(keys):
            arr[i] = vocab.setdefault(k, len(vocab))
        enc.append(arr)
    a, b = enc
    table = lcs_table_kernel(a, b)
    i, j = len(a), len(b)
    pairs = []
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1] and table[i, j] == table[i - 1, j - 1] + 1:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif table[i - 1, j] >= table[i, j - 1]:
            i -= 1
        else:
            j -= 1
    return pairs[::-1]


def progressive_align(cluster, dm, ids=None):
    """Align cluster instances into common/gap slots. ``dm`` must carry a
    distance for every pair of instance ids (defaults: dm.labels order)."""
    if ids is None:
        ids = list(dm.labels)[:len(cluster)]
    if len(ids) != len(cluster):
        raise ValueError("ids/cluster length mismatch")
    keys = []
    for seg in cluster:
        k = _stmt_keys(seg)
        if not k:
            raise DegenerateCluster(f"instance {seg.origin} has no statements")
        keys.append(k)
    if len(cluster) == 1:
        return [AlignmentSlot("common", k, {0: i}) for i, k in enumerate(keys[0])]

    def dist(i, j):
        return dm.value(ids[i], ids[j])

    n = len(cluster)
    first = min(((i, j) for i in range(n) for j in range(i + 1, n)),
                key=lambda p: (dist(*p), min(ids[p[0]], ids[p[1]]), max(ids[p[0]], ids[p[1]])))
    included = [first[0], first[1]]
    pairs = _lcs_pairs(keys[first[0]], keys[first[1]])
    # consensus: list of (key, spans dict)
    consensus = [(keys[first[0]][ia], {first[0]: ia, first[1]: ib}) for ia, ib in pairs]

    remaining = [i for i in range(n) if i not in included]
    while remaining:
        nxt = min(remaining,
                  key=lambda r: (min(dist(r, i) for i in included), ids[r]))
        remaining.remove(nxt)
        pairs = _lcs_pairs([c[0] for c in consensus], keys[nxt])
        consensus = [(consensus[ci][0], {**consensus[ci][1], nxt: kj})
                     for ci, kj in pairs]
        included.append(nxt)

    slots = [AlignmentSlot("common", key, spans) for key, spans in consensus]
    for inst, inst_keys in enumerate(keys):
        matched = {s.spans[inst] for s in slots if inst in s.spans}
        for idx, key in enumerate(inst_keys):
            if idx not in matched:
                slots.append(AlignmentSlot("gap", key, {inst: idx}))
    return slots


def _body_from_statements(stmts, origin):
    root = NormalizedNode("function", "*", [NormalizedNode("block", "", list(stmts))])
    return NormalizedAstSegment(origin=origin, root=root, node_count=count_nodes(root))


def extract_avs(cluster, dm, vuln_type, avs_id=None, ids=None):
    """Derive one signature from a cluster: the statements common to every
    instance, reassembled in consensus order."""
    if vuln_type not in VULN_TYPES:
        raise ValueError(f"unknown vulnerability type {vuln_type!r}")
    slots = progressive_align(cluster, dm, ids)
    common = [s for s in slots if s.status == "common"]
    if not common:
        raise EmptyCore("cluster has no statements common to all instances")
    base = cluster[0]
    base_stmts = base.statements()
    first_idx = [s.spans[0] for s in common]
    stmts = [base_stmts[i] for i in first_idx]
    origin = ("<avs>", avs_id or "avs", None)
    body = _body_from_statements(stmts, origin)
    sig = AvsSignature(
        id=avs_id or f"{vuln_type.lower()}-{len(cluster)}x",
        vuln_type=vuln_type,
        body=body,
        ir_signature=segment_sequence(body),
        provenance=[f"{seg.origin[0]}.{seg.origin[1]}" for seg in cluster],
        min_core_statements=len(stmts),
    )
    return sig


def curate_avs(avs, keep):
    """Reduce a signature to the selected body statements (human curation)."""
    stmts = avs.body.statements()
    if not keep:
        raise IndexError("curated signature must keep at least one statement")
    for i in keep:
        if not (0 <= i < len(stmts)):
            raise IndexError(f"statement index {i} out of range 0..{len(stmts) - 1}")
    kept = [stmts[i] for i in sorted(set(keep))]
    body = _body_from_statements(kept, avs.body.origin)
    return AvsSignature(
        id=avs.id,
        vuln_type=avs.vuln_type,
        body=body,
        ir_signature=segment_sequence(body),
        provenance=list(avs.provenance) + ["curated"],
        min_core_statements=len(kept),
        curated=True,
    )


def signature_from_segment(segment, vuln_type, avs_id):
    """Singleton-cluster signature: the instance itself."""
    body = _body_from_statements(segment.statements(),
                                 ("<avs>", avs_id, None))
    return AvsSignature(
        id=avs_id, vuln_type=vuln_type, body=body,
        ir_signature=segment_sequence(body),
        provenance=[f"{segment.origin[0]}.{segment.origin[1]}"],
        min_core_statements=len(segment.statements()),
    )


def save_avs(avs, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{avs.id}.avs.json"
    path.write_text(json.dumps(avs.to_json(), sort_keys=True, indent=1) + "\n",
                    encoding="utf-8")
    return path


def load_store(directory):
    """All signatures in a directory, ordered by id."""
    directory = Path(directory)
    sigs = []
    for path in sorted(directory.glob("*.avs.json")):
        sigs.append(AvsSignature.from_json(json.loads(path.read_text(encoding="utf-8"))))
    sigs.sort(key=lambda s: s.id)
    return sigs
