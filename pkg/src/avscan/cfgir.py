"""AST -> CFG -> flattened IR sequences.

One statement becomes one CFG node holding a short list of IR instructions;
ifs become diamonds, loops get an explicit back edge, require/assert/revert
get an edge into a shared revert sink. Matching then works on the loop-free
BFS flattening of the graph.

Lowering always runs over a *normalized* function tree (see normalize.py),
so identifier abstraction is inherited from that layer; ``normalize_ir``
finishes the job by collapsing money-transfer destination/value operand
slots to the ``*DEST*`` / ``*VALUE*`` placeholders. The opcode vocabulary is
this project's own:

    DECL ASSIGN EXPR REQUIRE ASSERT IF LOOP RETURN REVERT
    CALL_BUILTIN(family=moneysend|lowcall|selfdestruct, sub=transfer|send|
                 value|call|callcode|delegatecall|selfdestruct)
    CALL_USER

``transfer``, ``send`` and ``.value(..)(..)`` all land in the moneysend
family, and moneysend equality ignores the sub tag, so a signature learned
on one spelling matches clones using another. ``transfer`` additionally
emits the implicit success check as a REQUIRE, mirroring its revert-on-
failure semantics. Low-level calls keep their sub tag in the equality key.
"""

from dataclasses import dataclass

from .frontend.nodes import FunctionDef
from .normalize import (
    NormalizedAstSegment, NormalizedNode, normalize_function, BUILTIN_ROOTS,
    BUILTIN_FUNCS,
)
from .errors import UnsupportedConstruct

DEST = "*DEST*"
VALUE = "*VALUE*"
RES = "*RES*"

MONEYSEND = "moneysend"
LOWCALL = "lowcall"
SELFDESTRUCT = "selfdestruct"


@dataclass
class IrInstruction:
    opcode: str
    tokens: tuple = ()
    family: str = ""
    sub: str = ""
    span: object = None

    def key(self):
        """Equality key used by LCS / inclusion matching. Moneysend subs
        are interchangeable; low-level-call subs are not."""
        sub = self.sub if self.family == LOWCALL else ""
        return (self.opcode, self.family, sub, self.tokens)

    def render(self):
        name = self.opcode
        if self.family:
            name += f"[{self.family}" + (f".{self.sub}" if self.sub else "") + "]"
        return name + "(" + " ".join(self.tokens) + ")"

    def to_json(self):
        return {"opcode": self.opcode, "tokens": list(self.tokens),
                "family": self.family, "sub": self.sub}


@dataclass
class CfgNode:
    id: int
    instructions: list
    span: object = None
    role: str = "stmt"            # stmt / entry / exit / revert-sink


@dataclass
class Cfg:
    nodes: list
    edges: list                   # (from_id, to_id, kind); kind: seq/true/false/back
    entry: int
    exit: int
    revert_sink: int
    origin: tuple = ("", "")

    def successors(self, nid, include_back=True):
        out = [(t, k) for f, t, k in self.edges if f == nid and (include_back or k != "back")]
        out.sort(key=lambda tk: tk[0])
        return out

    def node(self, nid):
        return self.nodes[nid]

    def to_dot(self):
        lines = [f'digraph "{self.origin[0]}.{self.origin[1]}" {{']
        for n in self.nodes:
            label = "\\n".join(i.render() for i in n.instructions) or n.role
            lines.append(f'  n{n.id} [shape=box label="{n.id}: {label}"];')
        for f, t, k in self.edges:
            style = ' [style=dashed label="back"]' if k == "back" else (
                f' [label="{k}"]' if k in ("true", "false") else "")
            lines.append(f"  n{f} -> n{t}{style};")
        lines.append("}")
        return "\n".join(lines)


@dataclass
class IrSequence:
    items: list
    origin: tuple = ("", "")

    def __len__(self):
        return len(self.items)

    def keys(self):
        return [i.key() for i in self.items]

    def to_json(self):
        return {"origin": list(self.origin), "items": [i.to_json() for i in self.items]}


class _Lowerer:
    def __init__(self, origin):
        self.nodes = []
        self.edges = []
        self.origin = origin
        self.loop_stack = []      # (header_id, break_attach_list)

    def new_node(self, items, span, role="stmt"):
        node = CfgNode(len(self.nodes), items, span, role)
        self.nodes.append(node)
        return node.id

    def connect(self, preds, target):
        for pid, kind in preds:
            self.edges.append((pid, target, kind))

    # -- expression lowering -------------------------------------------

    def tokens_of(self, node, acc):
        kind = node.kind
        if kind in ("ident", "type", "lit_int", "lit_str", "lit_addr", "lit_bool"):
            return [node.label]
        if kind == "member":
            base = node.children[0]
            if base.kind == "ident" and base.label in BUILTIN_ROOTS:
                return [f"{base.label}.{node.label}"]
            return self.tokens_of(base, acc) + [".", node.label]
        if kind == "index":
            return (self.tokens_of(node.children[0], acc) + ["["]
                    + self.tokens_of(node.children[1], acc) + ["]"])
        if kind in ("binop", "assign"):
            return (self.tokens_of(node.children[0], acc) + [node.label]
                    + self.tokens_of(node.children[1], acc))
        if kind == "unop":
            return [node.label] + self.tokens_of(node.children[0], acc)
        if kind == "postop":
            return self.tokens_of(node.children[0], acc) + [node.label]
        if kind == "ternary":
            c, a, b = node.children
            return (self.tokens_of(c, acc) + ["?"] + self.tokens_of(a, acc)
                    + [":"] + self.tokens_of(b, acc))
        if kind == "tuple":
            out = []
            for c in node.children:
                out += self.tokens_of(c, acc)
            return out
        if kind == "new":
            return ["new", node.label]
        if kind == "call":
            return self.lower_call(node, acc)
        raise UnsupportedConstruct(f"cannot lower expression kind {kind!r}")

    def lower_call(self, node, acc):
        callee, args = node.children[0], node.children[1:]
        span = getattr(node, "span", None)

        # .value(v)(args) chain: callee is itself a call whose callee is a
        # `value` member. Any such call moves ether.
        if (callee.kind == "call" and callee.children
                and callee.children[0].kind == "member"
                and callee.children[0].label == "value"):
            value_member = callee.children[0]
            dest = tuple(self.tokens_of(value_member.children[0], acc))
            vtoks = []
            for a in callee.children[1:]:
                vtoks += self.tokens_of(a, acc)
            for a in args:                       # evaluated for side effects only
                self.tokens_of(a, acc)
            acc.append(IrInstruction("CALL_BUILTIN", dest + tuple(vtoks),
                                     MONEYSEND, "value", span))
            return [RES]

        if callee.kind == "member":
            mlabel = callee.label
            base = callee.children[0]
            if mlabel == "transfer" and len(args) == 1:
                dest = tuple(self.tokens_of(base, acc))
                val = tuple(self.tokens_of(args[0], acc))
                acc.append(IrInstruction("CALL_BUILTIN", dest + val, MONEYSEND, "transfer", span))
                acc.append(IrInstruction("REQUIRE", (RES,), span=span))
                return [RES]
            if mlabel == "send" and len(args) == 1:
                dest = tuple(self.tokens_of(base, acc))
                val = tuple(self.tokens_of(args[0], acc))
                acc.append(IrInstruction("CALL_BUILTIN", dest + val, MONEYSEND, "send", span))
                return [RES]
            if mlabel in ("call", "callcode", "delegatecall"):
                dest = tuple(self.tokens_of(base, acc))
                for a in args:
                    self.tokens_of(a, acc)
                acc.append(IrInstruction("CALL_BUILTIN", dest, LOWCALL, mlabel, span))
                return [RES]
            toks = [*self.tokens_of(base, acc), ".", mlabel]
            for a in args:
                toks += self.tokens_of(a, acc)
            acc.append(IrInstruction("CALL_USER", tuple(toks), span=span))
            return [RES]

        if callee.kind == "type":                # cast: no call item
            toks = [callee.label]
            for a in args:
                toks += self.tokens_of(a, acc)
            return toks

        if callee.kind == "ident":
            name = callee.label
            if name in ("selfdestruct", "suicide"):
                dest = []
                for a in args:
                    dest += self.tokens_of(a, acc)
                acc.append(IrInstruction("CALL_BUILTIN", tuple(dest),
                                         SELFDESTRUCT, "selfdestruct", span))
                return [RES]
            if name in BUILTIN_FUNCS:            # keccak256 etc: pure, inline
                toks = [name]
                for a in args:
                    toks += self.tokens_of(a, acc)
                return toks
            toks = [name]
            for a in args:
                toks += self.tokens_of(a, acc)
            acc.append(IrInstruction("CALL_USER", tuple(toks), span=span))
            return [RES]

        # call on an arbitrary expression result
        toks = self.tokens_of(callee, acc)
        for a in args:
            toks += self.tokens_of(a, acc)
        acc.append(IrInstruction("CALL_USER", tuple(toks), span=span))
        return [RES]

    # -- statement lowering --------------------------------------------

    def simple_items(self, stmt):
        acc = []
        kind = stmt.kind
        span = getattr(stmt, "span", None)
        if kind == "exprstmt":
            expr = stmt.children[0]
            toks = self.tokens_of(expr, acc)
            if expr.kind == "assign":
                acc.append(IrInstruction("ASSIGN", tuple(toks), span=span))
            elif expr.kind in ("postop", "unop") and expr.label in ("++", "--", "delete"):
                acc.append(IrInstruction("ASSIGN", tuple(toks), span=span))
            elif toks == [RES]:
                pass                              # bare call: items already in acc
            else:
                acc.append(IrInstruction("EXPR", tuple(toks), span=span))
        elif kind == "vardecl":
            toks = []
            for c in stmt.children:
                toks += self.tokens_of(c, acc)
            acc.append(IrInstruction("DECL", tuple(toks), span=span))
        elif kind in ("require", "assert"):
            toks = []
            for c in stmt.children:
                toks += self.tokens_of(c, acc)
            acc.append(IrInstruction(kind.upper(), tuple(toks), span=span))
        elif kind in ("revert", "throw"):
            for c in stmt.children:
                self.tokens_of(c, acc)
            acc.append(IrInstruction("REVERT", (), span=span))
        elif kind == "return":
            toks = []
            for c in stmt.children:
                toks += self.tokens_of(c, acc)
            acc.append(IrInstruction("RETURN", tuple(toks), span=span))
        elif kind == "placeholder":
            acc.append(IrInstruction("EXPR", ("_",), span=span))
        elif kind == "opaque":
            acc.append(IrInstruction("EXPR", ("?",), span=span))
        elif kind in ("break", "continue"):
            pass
        else:
            raise UnsupportedConstruct(f"cannot lower statement kind {kind!r}")
        return acc

    def lower_stmt(self, stmt, preds, exit_id, sink_id):
        """Lower one statement; returns the attach points for the next one."""
        kind = stmt.kind
        span = getattr(stmt, "span", None)
        if kind == "block":
            for s in stmt.children:
                preds = self.lower_stmt(s, preds, exit_id, sink_id)
            return preds
        if kind == "if":
            cond = stmt.children[0]
            acc = []
            ctoks = self.tokens_of(cond, acc)
            acc.append(IrInstruction("IF", tuple(ctoks), span=span))
            nid = self.new_node(acc, span)
            self.connect(preds, nid)
            then_out = self.lower_stmt(stmt.children[1], [(nid, "true")], exit_id, sink_id)
            if len(stmt.children) > 2:
                else_out = self.lower_stmt(stmt.children[2], [(nid, "false")], exit_id, sink_id)
            else:
                else_out = [(nid, "false")]
            return then_out + else_out
        if kind == "while":
            cond, body = stmt.children
            acc = []
            ctoks = self.tokens_of(cond, acc)
            acc.append(IrInstruction("LOOP", tuple(ctoks), span=span))
            header = self.new_node(acc, span)
            self.connect(preds, header)
            breaks = []
            self.loop_stack.append((header, breaks))
            body_out = self.lower_stmt(body, [(header, "true")], exit_id, sink_id)
            self.loop_stack.pop()
            for pid, _ in body_out:
                self.edges.append((pid, header, "back"))
            return [(header, "false")] + breaks
        if kind == "for":
            init, cond, post, body = stmt.children
            if init.kind != "block" or init.children:
                preds = self.lower_stmt(init, preds, exit_id, sink_id)
            acc = []
            ctoks = self.tokens_of(cond, acc)
            acc.append(IrInstruction("LOOP", tuple(ctoks), span=span))
            header = self.new_node(acc, span)
            self.connect(preds, header)
            breaks = []
            self.loop_stack.append((header, breaks))
            body_out = self.lower_stmt(body, [(header, "true")], exit_id, sink_id)
            self.loop_stack.pop()
            if post.kind != "block" or post.children:
                body_out = self.lower_stmt(post, body_out, exit_id, sink_id)
            for pid, _ in body_out:
                self.edges.append((pid, header, "back"))
            return [(header, "false")] + breaks
        if kind == "break":
            nid = self.new_node([], span)
            self.connect(preds, nid)
            if self.loop_stack:
                self.loop_stack[-1][1].append((nid, "seq"))
            return []
        if kind == "continue":
            nid = self.new_node([], span)
            self.connect(preds, nid)
            if self.loop_stack:
                self.edges.append((nid, self.loop_stack[-1][0], "back"))
            return []

        items = self.simple_items(stmt)
        nid = self.new_node(items, span)
        self.connect(preds, nid)
        if kind in ("require", "assert"):
            self.edges.append((nid, sink_id, "seq"))
            return [(nid, "seq")]
        if kind in ("revert", "throw"):
            self.edges.append((nid, sink_id, "seq"))
            return []
        if kind == "return":
            self.edges.append((nid, exit_id, "seq"))
            return []
        return [(nid, "seq")]


def build_cfg(source, owner=None, type_names=None):
    """Build a CFG. ``source`` may be a FunctionDef (normalized internally;
    ``owner`` required), a NormalizedAstSegment, or a NormalizedNode body."""
    if isinstance(source, FunctionDef):
        seg = normalize_function(source, owner, type_names)
        root = seg.root
        origin = (owner.name, source.name)
    elif isinstance(source, NormalizedAstSegment):
        root = source.root
        origin = (source.origin[0], source.origin[1])
    elif isinstance(source, NormalizedNode):
        root = source
        origin = ("", root.label)
    else:
        raise TypeError(f"cannot build CFG from {type(source)!r}")

    body = None
    for c in root.children:
        if c.kind == "block":
            body = c
    if body is None:
        body = NormalizedNode("block", "", [])

    lo = _Lowerer(origin)
    entry = lo.new_node([], None, role="entry")
    exit_id = lo.new_node([], None, role="exit")
    sink_id = lo.new_node([], None, role="revert-sink")
    out = lo.lower_stmt(body, [(entry, "seq")], exit_id, sink_id)
    lo.connect(out, exit_id)
    return Cfg(nodes=lo.nodes, edges=lo.edges, entry=entry,
               exit=exit_id, revert_sink=sink_id, origin=origin)


def normalize_ir(cfg):
    """Collapse moneysend/lowcall/selfdestruct operand slots to *DEST* /
    *VALUE* placeholders. Idempotent; other instructions pass through."""
    nodes = []
    for n in cfg.nodes:
        items = []
        for ins in n.instructions:
            if ins.opcode == "CALL_BUILTIN":
                if ins.family == MONEYSEND:
                    toks = (DEST, VALUE)
                else:
                    toks = (DEST,)
                items.append(IrInstruction(ins.opcode, toks, ins.family, ins.sub, ins.span))
            else:
                items.append(ins)
        nodes.append(CfgNode(n.id, items, n.span, n.role))
    return Cfg(nodes=nodes, edges=list(cfg.edges), entry=cfg.entry,
               exit=cfg.exit, revert_sink=cfg.revert_sink, origin=cfg.origin)


def flatten(cfg):
    """Remove loop-back edges and emit node instructions in BFS order from
    the entry; ties resolve by ascending node id."""
    succ = {}
    for f, t, k in cfg.edges:
        if k == "back":
            continue
        succ.setdefault(f, []).append(t)
    order = []
    seen = {cfg.entry}
    queue = [cfg.entry]
    while queue:
        nid = queue.pop(0)
        order.append(nid)
        for t in sorted(succ.get(nid, [])):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    items = []
    for nid in order:
        items.extend(cfg.nodes[nid].instructions)
    return IrSequence(items=items, origin=cfg.origin)


def function_sequence(fn, owner, type_names=None):
    """Parse-to-sequence convenience: normalize, lower, placeholder-
    normalize and flatten one function."""
    return flatten(normalize_ir(build_cfg(fn, owner, type_names)))


def segment_sequence(segment):
    return flatten(normalize_ir(build_cfg(segment)))
