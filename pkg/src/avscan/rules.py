"""Base detection rules and the DM1-DM10 refinement filters.

Rules run over the raw (un-normalized) AST with a per-contract symbol
table, since they need identifier identity (which state variable is read,
whether a callee is hard-coded, ...). Statement order approximates
control-flow order: statements are numbered in a pre-order walk (then
before else, loop bodies once), matching the loop-free flattening used by
the matcher.

A "guard" for DM purposes is a require/assert (or an if whose body only
reverts) at an enclosing block level before the statement, or the
condition of an if/while enclosing it. Conditions of diamonds that rejoin
before the statement do not guard it.
"""

from dataclasses import dataclass, field

from .findings import Finding, DM_WIRING
from .normalize import BUILTIN_FUNCS, BUILTIN_ROOTS, collect_type_names

LOW_LEVEL = ("call", "callcode", "delegatecall", "send")


# -- symbol context ------------------------------------------------------

def _contains_addr_literal(expr):
    return expr is not None and any(n.kind == "lit_addr" for n in expr.walk())


@dataclass
class ContractContext:
    unit: object
    contract: object
    type_names: set
    state_names: set = field(default_factory=set)
    addr_state: set = field(default_factory=set)
    bool_state: set = field(default_factory=set)
    hardcoded_addr: set = field(default_factory=set)
    ctor_msgsender: set = field(default_factory=set)
    internal_called_from_public: set = field(default_factory=set)

    @classmethod
    def build(cls, unit, contract):
        ctx = cls(unit=unit, contract=contract, type_names=collect_type_names(unit))
        for sv in contract.state_vars:
            ctx.state_names.add(sv.name)
            t = sv.type_text
            if t == "address" or t in ctx.type_names:
                ctx.addr_state.add(sv.name)
            if t == "bool":
                ctx.bool_state.add(sv.name)
            if _contains_addr_literal(sv.initializer):
                ctx.hardcoded_addr.add(sv.name)
        for fn in contract.functions:
            if fn.body is None:
                continue
            for st in fn.body.walk():
                if st.kind == "exprstmt" and st.children and st.children[0].kind == "assign":
                    lhs, rhs = st.children[0].children
                    if lhs.kind == "ident" and lhs.label in ctx.state_names:
                        if fn.is_constructor:
                            if _is_msg_sender(rhs):
                                ctx.ctor_msgsender.add(lhs.label)
                            if _contains_addr_literal(rhs):
                                ctx.hardcoded_addr.add(lhs.label)
        # call graph at name granularity: which functions are reachable from
        # externally callable ones (DM3's "never called from a public function")
        public_like = [f for f in contract.functions
                       if f.body is not None and f.visibility in ("public", "external", "default")]
        for fn in public_like:
            for node in fn.body.walk():
                if node.kind == "call" and node.children:
                    callee = node.children[0]
                    name = callee.label if callee.kind in ("ident", "member") else ""
                    if name:
                        ctx.internal_called_from_public.add(name)
        return ctx

    def owner_like(self, name):
        stem = name.lower()
        return name in self.ctor_msgsender or "owner" in stem or "admin" in stem

    def modifier_identity_check(self, mod):
        """Modifier body compares msg.sender against state and can revert."""
        has_cmp = False
        can_revert = False
        for node in mod.body.walk():
            if node.kind in ("require", "assert"):
                can_revert = True
                if any(_identity_comparison(c) for c in node.children):
                    has_cmp = True
            if node.kind in ("revert", "throw"):
                can_revert = True
            if node.kind == "if" and _identity_comparison(node.children[0]):
                has_cmp = True
        return has_cmp and can_revert

    def modifier_txorigin_conditions(self, mod):
        out = []
        for node in mod.body.walk():
            if node.kind in ("require", "assert", "if", "while"):
                cond = node.children[0] if node.children else None
                if cond is not None and _mentions_tx_origin(cond):
                    out.append((cond, node.span))
        return out


def _is_msg_sender(expr):
    return (expr.kind == "member" and expr.label == "sender"
            and expr.children and expr.children[0].kind == "ident"
            and expr.children[0].label == "msg")


def _is_tx_origin(expr):
    return (expr.kind == "member" and expr.label == "origin"
            and expr.children and expr.children[0].kind == "ident"
            and expr.children[0].label == "tx")


def _mentions_tx_origin(expr):
    return any(_is_tx_origin(n) for n in expr.walk())


def _identity_comparison(expr):
    """Comparison of msg.sender (or tx.origin) against something else."""
    for n in expr.walk():
        if n.kind == "binop" and n.label in ("==", "!="):
            l, r = n.children
            if _is_msg_sender(l) or _is_msg_sender(r) or _is_tx_origin(l) or _is_tx_origin(r):
                return True
    return False


def _txorigin_vs_msgsender(expr):
    for n in expr.walk():
        if n.kind == "binop" and n.label in ("==", "!="):
            l, r = n.children
            if (_is_tx_origin(l) and _is_msg_sender(r)) or (_is_tx_origin(r) and _is_msg_sender(l)):
                return True
    return False


def _root_ident(expr):
    """Leftmost identifier a read/write/callee resolves to."""
    node = expr
    while True:
        if node.kind in ("member", "index", "postop", "unop"):
            node = node.children[0]
        elif node.kind == "call" and node.children:
            callee = node.children[0]
            if callee.kind == "type" and len(node.children) > 1:
                node = node.children[1]          # cast: look through
            else:
                node = callee
        else:
            break
    if node.kind == "ident":
        return node.label
    if _is_msg_sender(node):
        return "msg.sender"
    return None


# -- per-function linearized events --------------------------------------

@dataclass
class CallEvent:
    pos: int
    kind: str            # transfer / send / value / lowcall / user / selfdestruct
    sub: str
    name: str
    dest_root: str
    dest_expr: object
    value_expr: object
    argc: int
    checked: bool
    in_loop: bool
    enclosing_conds: list
    guards_before: list   # (pos, cond expr)
    span: object
    base_is_lowcall: bool = False


@dataclass
class FunctionAnalysis:
    fn: object
    calls: list = field(default_factory=list)
    reads: list = field(default_factory=list)     # (pos, state name)
    writes: list = field(default_factory=list)    # (pos, state name, simple lvalue, rhs, span)
    guards: list = field(default_factory=list)    # (pos, cond expr, depth, span)
    txorigin_conds: list = field(default_factory=list)  # (pos, cond, span)
    msgsender_locals: set = field(default_factory=set)
    loop_spans: list = field(default_factory=list)

    def state_writes(self, name):
        return [w for w in self.writes if w[1] == name]

    def loop_calls(self):
        return [c for c in self.calls if c.in_loop]


class _FnWalker:
    def __init__(self, ctx, fn):
        self.ctx = ctx
        self.fn = fn
        self.a = FunctionAnalysis(fn=fn)
        self.pos = 0
        self.loop_depth = 0
        self.cond_stack = []
        self.guard_stack = [[]]

    def run(self):
        if self.fn.body is not None:
            self.stmt(self.fn.body)
        return self.a

    # -- statements --

    def stmt(self, st):
        kind = st.kind
        self.pos += 1
        pos = self.pos
        if kind == "block":
            self.guard_stack.append([])
            for s in st.children:
                self.stmt(s)
            self.guard_stack.pop()
            return
        if kind == "if":
            cond = st.children[0]
            self.expr(cond, pos, st.span, checked=True)
            if _mentions_tx_origin(cond):
                self.a.txorigin_conds.append((pos, cond, st.span))
            if _is_guard_if(st):
                self.guard_stack[-1].append((pos, cond))
            self.cond_stack.append((pos, cond))
            self.stmt(st.children[1])
            if len(st.children) > 2:
                self.stmt(st.children[2])
            self.cond_stack.pop()
            return
        if kind in ("while", "for"):
            if kind == "while":
                cond, body = st.children
                init = post = None
            else:
                init, cond, post, body = st.children
            if init is not None:
                self.stmt(init)
            self.expr(cond, pos, st.span, checked=True)
            if _mentions_tx_origin(cond):
                self.a.txorigin_conds.append((pos, cond, st.span))
            self.a.loop_spans.append(st.span)
            self.cond_stack.append((pos, cond))
            self.loop_depth += 1
            self.stmt(body)
            if post is not None:
                self.stmt(post)
            self.loop_depth -= 1
            self.cond_stack.pop()
            return
        if kind in ("require", "assert"):
            for c in st.children:
                self.expr(c, pos, st.span, checked=True)
                if _mentions_tx_origin(c):
                    self.a.txorigin_conds.append((pos, c, st.span))
            self.a.guards.append((pos, st.children[0] if st.children else None,
                                  len(self.guard_stack), st.span))
            self.guard_stack[-1].append((pos, st.children[0] if st.children else None))
            return
        if kind == "vardecl":
            kids = st.children
            if len(kids) == 3:
                self.expr(kids[2], pos, st.span)
                if _is_msg_sender(kids[2]):
                    self.a.msgsender_locals.add(st.label)
            return
        if kind == "exprstmt":
            expr = st.children[0]
            if expr.kind == "assign":
                lhs, rhs = expr.children
                self.expr(rhs, pos, st.span)
                root = _root_ident(lhs)
                if lhs.kind != "ident":
                    self.expr(lhs, pos, st.span, lvalue_root=root)
                if root in self.ctx.state_names:
                    self.a.writes.append((pos, root, lhs.kind == "ident", rhs, st.span))
                elif root is not None and _is_msg_sender(rhs):
                    self.a.msgsender_locals.add(root)
            else:
                self.expr(expr, pos, st.span)
            return
        if kind in ("return", "revert", "throw"):
            for c in st.children:
                self.expr(c, pos, st.span)
            return
        # opaque / placeholder / break / continue: nothing to extract

    # -- expressions --

    def expr(self, node, pos, span, checked=False, lvalue_root=None):
        kind = node.kind
        if kind == "ident":
            if node.label in self.ctx.state_names and node.label != lvalue_root:
                self.a.reads.append((pos, node.label))
            return
        if kind == "call":
            self.call_event(node, pos, span, checked)
            return
        for c in node.children:
            self.expr(c, pos, span, checked=checked, lvalue_root=lvalue_root)

    def call_event(self, node, pos, span, checked):
        callee, args = node.children[0], node.children[1:]
        made = None
        if (callee.kind == "call" and callee.children
                and callee.children[0].kind == "member"
                and callee.children[0].label == "value"):
            vmember = callee.children[0]
            base = vmember.children[0]
            made = CallEvent(
                pos=pos, kind="value", sub="value", name="",
                dest_root=_root_ident(base), dest_expr=base,
                value_expr=callee.children[1] if len(callee.children) > 1 else None,
                argc=len(args), checked=checked, in_loop=self.loop_depth > 0,
                enclosing_conds=list(self.cond_stack),
                guards_before=self._guards_snapshot(), span=span,
                base_is_lowcall=(base.kind == "member" and base.label == "call"))
            self.expr(base, pos, span)
            for a in callee.children[1:]:
                self.expr(a, pos, span)
        elif callee.kind == "member":
            mlabel = callee.label
            base = callee.children[0]
            if mlabel == "transfer" and len(args) == 1:
                made = self._mk(pos, "transfer", "", base, args[0], args, checked, span)
            elif mlabel == "send" and len(args) == 1:
                made = self._mk(pos, "send", "", base, args[0], args, checked, span)
            elif mlabel in ("call", "callcode", "delegatecall"):
                made = self._mk(pos, "lowcall", mlabel, base, None, args, checked, span)
            else:
                made = self._mk(pos, "user", "", base, None, args, checked, span)
                made.name = mlabel
            self.expr(base, pos, span)
        elif callee.kind == "ident":
            name = callee.label
            if name in ("selfdestruct", "suicide"):
                made = self._mk(pos, "selfdestruct", "", args[0] if args else None,
                                None, args, checked, span)
            elif name in BUILTIN_FUNCS or name in BUILTIN_ROOTS:
                pass
            elif name in self.ctx.type_names:
                pass                                   # cast
            else:
                made = self._mk(pos, "user", "", None, None, args, checked, span)
                made.name = name
        else:
            self.expr(callee, pos, span, checked=checked)
        if made is not None:
            self.a.calls.append(made)
        for a in args:
            self.expr(a, pos, span)

    def _mk(self, pos, kind, sub, dest, value, args, checked, span):
        return CallEvent(
            pos=pos, kind=kind, sub=sub, name="",
            dest_root=_root_ident(dest) if dest is not None else None,
            dest_expr=dest, value_expr=value, argc=len(args), checked=checked,
            in_loop=self.loop_depth > 0, enclosing_conds=list(self.cond_stack),
            guards_before=self._guards_snapshot(), span=span)

    def _guards_snapshot(self):
        return [g for level in self.guard_stack for g in level]


def _is_guard_if(st):
    """if whose body does nothing but revert/throw acts as a guard."""
    body = st.children[1]
    stmts = body.children if body.kind == "block" else [body]
    return (len(st.children) == 2 and len(stmts) >= 1
            and all(s.kind in ("revert", "throw") for s in stmts))


def analyze_function(ctx, fn):
    return _FnWalker(ctx, fn).run()


def _extern_calls(analysis):
    """Eq-2 externCall: money-moving external calls, excluding the built-in
    send()/transfer() forms; user-defined transfer() counts."""
    out = []
    for c in analysis.calls:
        if c.kind == "value":
            out.append(c)
        elif c.kind == "lowcall":
            out.append(c)
        elif c.kind == "user" and c.name == "transfer":
            out.append(c)
    return out


def _moneysend_calls(analysis):
    return [c for c in analysis.calls if c.kind in ("transfer", "send", "value")]


# -- base rules ----------------------------------------------------------

def rule_unexpected_revert(ctx, fn, analysis):
    """Eq-1 pattern (state address refunded, then reassigned to the caller)
    plus the money-transfer-in-loop base."""
    out = []
    for c in _moneysend_calls(analysis):
        if c.dest_root in ctx.addr_state:
            for pos, name, simple, rhs, wspan in analysis.writes:
                if name == c.dest_root and pos > c.pos and _is_msg_sender(rhs):
                    out.append(Finding(
                        vuln_type="UnexpectedRevert", contract=ctx.contract.name,
                        function=fn.name, spans=[c.span, wspan], source="rule",
                        fired_rule="R_UnexpectedRevert",
                        evidence={"call": c, "analysis": analysis}))
                    break
    for c in _moneysend_calls(analysis):
        if c.in_loop:
            out.append(Finding(
                vuln_type="UnexpectedRevert", contract=ctx.contract.name,
                function=fn.name, spans=[c.span], source="rule",
                fired_rule="R_UnexpectedRevert",
                evidence={"call": c, "analysis": analysis, "loop": True}))
    return out


def rule_reentrancy(ctx, fn, analysis):
    """State touched, external money-moving call, same state written after."""
    out = []
    for c in _extern_calls(analysis):
        touched_before = {n for p, n in analysis.reads if p <= c.pos}
        touched_before |= {w[1] for w in analysis.writes if w[0] <= c.pos}
        witnesses = sorted(
            n for n in touched_before
            if any(w[0] > c.pos for w in analysis.state_writes(n)))
        if witnesses:
            wspans = [w[4] for n in witnesses for w in analysis.state_writes(n) if w[0] > c.pos]
            out.append(Finding(
                vuln_type="Reentrancy", contract=ctx.contract.name,
                function=fn.name, spans=[c.span] + wspans[:1], source="rule",
                fired_rule="R_ReentrancySlither",
                evidence={"call": c, "witnesses": witnesses, "analysis": analysis}))
    return out


def rule_tx_origin(ctx, fn, analysis):
    """tx.origin inside a control-flow condition, in the body or in an
    applied modifier; bare reads never fire."""
    out = []
    for pos, cond, span in analysis.txorigin_conds:
        out.append(Finding(
            vuln_type="TxOriginAbuse", contract=ctx.contract.name,
            function=fn.name, spans=[span], source="rule",
            fired_rule="R_TxOriginSmartCheck",
            evidence={"cond": cond, "analysis": analysis}))
    for mname in fn.applied_modifiers:
        mod = ctx.contract.modifier(mname)
        if mod is None:
            continue
        for cond, span in ctx.modifier_txorigin_conditions(mod):
            out.append(Finding(
                vuln_type="TxOriginAbuse", contract=ctx.contract.name,
                function=fn.name, spans=[span], source="rule",
                fired_rule="R_TxOriginSmartCheck",
                evidence={"cond": cond, "analysis": analysis, "modifier": mname}))
    return out


def rule_unchecked_llc(ctx, fn, analysis):
    """One of the four low-level calls with its boolean result unchecked.
    Money sends inside loops belong to the revert rule, not here."""
    out = []
    for c in analysis.calls:
        is_llc = (c.kind == "lowcall" or c.kind == "send"
                  or (c.kind == "value" and c.base_is_lowcall))
        if not is_llc or c.checked:
            continue
        if c.in_loop and c.kind in ("send", "value"):
            continue
        out.append(Finding(
            vuln_type="UncheckedLowLevelCall", contract=ctx.contract.name,
            function=fn.name, spans=[c.span], source="rule",
            fired_rule="R_UncheckedLLC",
            evidence={"call": c, "analysis": analysis}))
    return out


def rule_selfdestruct(ctx, fn, analysis):
    out = []
    for c in analysis.calls:
        if c.kind == "selfdestruct":
            out.append(Finding(
                vuln_type="SelfdestructAbuse", contract=ctx.contract.name,
                function=fn.name, spans=[c.span], source="rule",
                fired_rule="R_Selfdestruct",
                evidence={"call": c, "analysis": analysis}))
    return out


ALL_RULES = (rule_unexpected_revert, rule_reentrancy, rule_tx_origin,
             rule_unchecked_llc, rule_selfdestruct)


# -- defense mechanisms ---------------------------------------------------

def _evidence_calls(finding, analysis):
    c = finding.evidence.get("call")
    if c is not None:
        return [c]
    spans = finding.spans
    out = []
    for call in analysis.calls:
        if call.span is None:
            continue
        for sp in spans:
            if sp is not None and call.span.start < sp.end and sp.start < call.span.end:
                out.append(call)
                break
    return out


def _guard_conditions(call):
    """Conditions that actually dominate the call: enclosing if/while
    conditions plus require/assert-style guards recorded before it."""
    return [cond for _, cond in call.enclosing_conds] + \
           [cond for _, cond in call.guards_before]


def _dm1(ctx, finding, analysis):
    for call in _evidence_calls(finding, analysis):
        for cond in _guard_conditions(call):
            if cond is None:
                continue
            for n in cond.walk():
                if n.kind == "binop" and n.label in ("==", "!="):
                    l, r = n.children
                    for a, b in ((l, r), (r, l)):
                        if _is_msg_sender(a) and b.kind == "ident" and ctx.owner_like(b.label):
                            return True
    return False


def _dm2(ctx, finding, analysis):
    for call in _evidence_calls(finding, analysis):
        if call.dest_root in ctx.hardcoded_addr:
            return True
        if call.dest_expr is not None and _contains_addr_literal(call.dest_expr):
            return True
    return False


def _dm3(ctx, finding, analysis):
    fn = analysis.fn
    if fn.visibility in ("private", "internal"):
        name = fn.name
        if name and name not in ctx.internal_called_from_public:
            return True
    for mname in fn.applied_modifiers:
        mod = ctx.contract.modifier(mname)
        if mod is not None and ctx.modifier_identity_check(mod):
            return True
    return False


def _checked_false_guard(cond, name):
    """Guard shaped like !name (possibly conjoined)."""
    for n in cond.walk():
        if n.kind == "unop" and n.label == "!":
            inner = n.children[0]
            if inner.kind == "ident" and inner.label == name:
                return True
        if n.kind == "binop" and n.label == "==":
            l, r = n.children
            if (l.kind == "ident" and l.label == name and r.kind == "lit_bool" and r.label == "false") or \
               (r.kind == "ident" and r.label == name and l.kind == "lit_bool" and l.label == "false"):
                return True
    return False


def _dm4(ctx, finding, analysis):
    for call in _evidence_calls(finding, analysis):
        for b in sorted(ctx.bool_state):
            guarded = any(cond is not None and _checked_false_guard(cond, b)
                          for cond in _guard_conditions(call))
            if not guarded:
                continue
            set_true = any(w[0] < call.pos and w[3].kind == "lit_bool" and w[3].label == "true"
                           for w in analysis.state_writes(b))
            reset = any(w[0] > call.pos and w[3].kind == "lit_bool" and w[3].label == "false"
                        for w in analysis.state_writes(b))
            if set_true and reset:
                return True
    return False


def _dm5(ctx, finding, analysis):
    for call in _evidence_calls(finding, analysis):
        guarded_simple = set()
        for cond in _guard_conditions(call):
            if cond is None:
                continue
            for n in cond.walk():
                if n.kind == "ident" and n.label in ctx.state_names:
                    guarded_simple.add(n.label)
        relevant = {n for n in guarded_simple
                    if any(w[2] for w in analysis.state_writes(n))}
        if not relevant:
            continue
        ok = all(
            all(w[0] < call.pos for w in analysis.state_writes(n) if w[2])
            for n in relevant)
        if ok and any(analysis.state_writes(n) for n in relevant):
            return True
    return False


def _dm6(ctx, finding, analysis):
    for call in _evidence_calls(finding, analysis):
        if call.in_loop and call.kind in ("send", "value") and not call.checked:
            return True
    return False


def _dm7(ctx, finding, analysis):
    loop_sends = [c for c in analysis.calls
                  if c.in_loop and c.kind in ("transfer", "send", "value")]
    if not loop_sends:
        return False
    for c in loop_sends:
        root = c.dest_root
        if root == "msg.sender" or root in analysis.msgsender_locals:
            continue
        return False
    return True


def _dm8(ctx, finding, analysis):
    cond = finding.evidence.get("cond")
    if cond is not None:
        return _txorigin_vs_msgsender(cond)
    conds = [c for _, c, _ in analysis.txorigin_conds]
    return bool(conds) and all(_txorigin_vs_msgsender(c) for c in conds)


def _dm9(ctx, finding, analysis):
    calls = [c for c in _evidence_calls(finding, analysis)
             if c.kind in ("lowcall", "send") or (c.kind == "value" and c.base_is_lowcall)]
    return bool(calls) and all(c.checked for c in calls)


def _dm10(ctx, finding, analysis):
    for call in _evidence_calls(finding, analysis):
        if call.kind != "selfdestruct":
            continue
        if call.enclosing_conds or call.guards_before:
            return True
        for mname in analysis.fn.applied_modifiers:
            mod = ctx.contract.modifier(mname)
            if mod is not None and ctx.modifier_identity_check(mod):
                return True
    return False


DM_EVALUATORS = {
    "DM1": _dm1, "DM2": _dm2, "DM3": _dm3, "DM4": _dm4, "DM5": _dm5,
    "DM6": _dm6, "DM7": _dm7, "DM8": _dm8, "DM9": _dm9, "DM10": _dm10,
}


def apply_dms(finding, ctx, analysis, disabled=frozenset()):
    """Evaluate every DM wired to the finding's type; satisfied DMs append
    to suppressed_by (ascending DM order)."""
    for dm in DM_WIRING.get(finding.vuln_type, ()):
        if dm in disabled:
            continue
        if DM_EVALUATORS[dm](ctx, finding, analysis):
            finding.suppressed_by.append(dm)
    return finding
