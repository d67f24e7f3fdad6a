"""Per-function AST normalization.

Function bodies are abstracted into name- and constant-insensitive trees:
user identifiers and int/string/bytes literals collapse to ``*`` while
structure, built-in names (``msg.sender``, ``transfer``, ``require``, ...)
and operators survive. Two functions that differ only in naming or constant
choices normalize to identical trees, which is what both the clustering
distance and the signature bodies operate on.

Deliberate exceptions to plain ``*``:
  - address literals become ``*ADDR*`` (hard-coded payees must stay visible),
  - bool literals are kept (lock protocols are built from them),
  - user call names become ``*CALL*`` so call shape is preserved,
  - type names are retained.
"""

import hashlib
import json
from dataclasses import dataclass, field

from .frontend.nodes import Node

# Member names with built-in meaning; kept verbatim during normalization.
BUILTIN_MEMBERS = {
    "transfer", "send", "call", "callcode", "delegatecall", "value", "gas",
    "balance", "length", "push", "origin", "sender",
}

# Roots of built-in member chains (msg.sender, tx.origin, block.timestamp, ...).
BUILTIN_ROOTS = {"msg", "tx", "block", "this", "now"}

# Free functions with built-in meaning.
BUILTIN_FUNCS = {
    "require", "assert", "revert", "selfdestruct", "suicide", "keccak256",
    "sha3", "sha256", "ripemd160", "ecrecover", "addmod", "mulmod",
}

WILDCARD = "*"
ADDR_TOKEN = "*ADDR*"
CALL_TOKEN = "*CALL*"


@dataclass
class NormalizedNode:
    kind: str
    label: str
    children: list = field(default_factory=list)
    span: object = None           # internal only; never serialized

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def to_json(self):
        return {"kind": self.kind, "label": self.label,
                "children": [c.to_json() for c in self.children]}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["kind"], obj["label"],
                   [cls.from_json(c) for c in obj.get("children", [])])


@dataclass
class NormalizedAstSegment:
    origin: tuple                  # (contract name, function name, span or None)
    root: NormalizedNode
    node_count: int

    def statements(self):
        """Top-level statements of the body block."""
        body = segment_body(self.root)
        return list(body.children) if body is not None else []

    def to_json(self):
        span = self.origin[2]
        return {
            "origin": {
                "contract": self.origin[0],
                "function": self.origin[1],
                "span": span.to_json() if span is not None else None,
            },
            "node_count": self.node_count,
            "root": self.root.to_json(),
        }

    @classmethod
    def from_json(cls, obj):
        root = NormalizedNode.from_json(obj["root"])
        o = obj["origin"]
        return cls((o["contract"], o["function"], None), root, count_nodes(root))


def count_nodes(node):
    return sum(1 for _ in node.walk())


def segment_body(root):
    for c in root.children:
        if c.kind == "block":
            return c
    return None


class _Normalizer:
    """Applies the abstraction rules. ``type_names`` holds user-defined
    contract/struct/enum names so casts can be told apart from calls."""

    def __init__(self, type_names=frozenset()):
        self.type_names = set(type_names)

    def norm(self, node, in_callee=False):
        kind = node.kind
        label = node.label
        kids = node.children
        span = getattr(node, "span", None)

        if kind == "ident":
            nkind, nlabel = self._ident(label, in_callee)
            return NormalizedNode(nkind, nlabel, [], span)
        if kind == "member":
            base = kids[0]
            if base.kind == "ident" and base.label in BUILTIN_ROOTS:
                return NormalizedNode("member", label, [self.norm(base)], span)
            if label in BUILTIN_MEMBERS:
                new_label = label
            elif in_callee:
                new_label = CALL_TOKEN
            else:
                new_label = WILDCARD if label not in self.type_names else label
            return NormalizedNode("member", new_label, [self.norm(base)], span)
        if kind == "call":
            callee = self.norm(kids[0], in_callee=True)
            return NormalizedNode("call", "", [callee] + [self.norm(k) for k in kids[1:]], span)
        if kind == "lit_int" or kind == "lit_str":
            return NormalizedNode(kind, WILDCARD, [], span)
        if kind == "lit_addr":
            return NormalizedNode(kind, ADDR_TOKEN, [], span)
        if kind == "lit_bool":
            return NormalizedNode(kind, label, [], span)
        if kind == "type":
            return NormalizedNode(kind, label, [], span)
        if kind == "vardecl":
            return NormalizedNode(kind, WILDCARD, [self.norm(k) for k in kids], span)
        # Structural kinds: operators keep their labels, everything else
        # keeps kind + children.
        return NormalizedNode(kind, label, [self.norm(k) for k in kids], span)

    def _ident(self, label, in_callee):
        if label in BUILTIN_ROOTS or label in BUILTIN_FUNCS:
            return "ident", label
        if label in self.type_names:
            # user-type names stay visible; retyping the node lets downstream
            # lowering treat casts without a symbol table
            return "type", label
        if in_callee:
            return "ident", CALL_TOKEN
        return "ident", WILDCARD


def collect_type_names(unit):
    names = set()
    for c in unit.contracts:
        names.add(c.name)
        names.update(c.structs)
        names.update(c.enums)
    return names


def normalize_function(fn, owner, type_names=None):
    """Normalize one function into a NormalizedAstSegment.

    ``type_names`` defaults to the owner contract's own type names; pass
    ``collect_type_names(unit)`` to resolve cross-contract casts.
    """
    if type_names is None:
        type_names = {owner.name} | set(owner.structs) | set(owner.enums)
    nz = _Normalizer(type_names)
    children = []
    for p in fn.params:
        children.append(NormalizedNode("param", WILDCARD,
                                       [NormalizedNode("type", p.type_text, [])]))
    if fn.returns:
        children.append(NormalizedNode("returns", "",
                                       [NormalizedNode("type", t, []) for t in fn.returns]))
    body = fn.body if fn.body is not None else Node("block", "", [], fn.span)
    children.append(nz.norm(body))
    root = NormalizedNode("function", fn.name, children)
    return NormalizedAstSegment(
        origin=(owner.name, fn.name, fn.span), root=root, node_count=count_nodes(root))


def renormalize(segment):
    """Normalizing an already-normalized tree must be the identity."""
    nz = _Normalizer()
    root = _renorm_node(nz, segment.root)
    return NormalizedAstSegment(segment.origin, root, count_nodes(root))


def _renorm_node(nz, node, in_callee=False):
    if node.kind in ("param", "returns", "function"):
        return NormalizedNode(node.kind, node.label,
                              [_renorm_node(nz, c) for c in node.children])
    shim = Node(node.kind, node.label, node.children, None)
    return nz.norm(shim, in_callee=in_callee)


def segment_fingerprint(segment):
    """Stable content hash over the normalized tree (preorder)."""
    return tree_fingerprint(segment.root)


def tree_fingerprint(node):
    h = hashlib.sha256()
    _feed(h, node)
    return h.hexdigest()


def _feed(h, node):
    h.update(node.kind.encode())
    h.update(b"\x00")
    h.update(node.label.encode())
    h.update(b"\x01")
    h.update(str(len(node.children)).encode())
    h.update(b"\x02")
    for c in node.children:
        _feed(h, c)


def statement_key(node):
    """Canonical serialization of one statement subtree; alignment compares
    statements by this string."""
    return json.dumps(node.to_json(), sort_keys=True, separators=(",", ":"))
