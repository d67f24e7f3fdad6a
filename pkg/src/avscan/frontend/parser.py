"""Recursive-descent parser for the Solidity 0.4.x subset.

Covers the constructs that appear in pre-0.5.0 contracts: contract /
interface / library definitions, state variables, modifiers, constructors
(both ``constructor()`` and the legacy name-matching form), fallbacks,
low-level calls, ``.value(...)(...)`` chains, loops and the usual statement
forms. Inheritance lists and ``using ... for`` are parsed and ignored.

Statements the grammar cannot classify become opaque expression statements
with their spans preserved; each one is recorded in the unit's diagnostics
list so scans degrade gracefully instead of dropping code silently.
"""

from .lexer import tokenize
from .nodes import Node, Span, SourceUnit, ContractDef, FunctionDef, ModifierDef, StateVarDecl, ParamDecl
from ..errors import SolSyntaxError

VISIBILITY = {"public", "private", "internal", "external"}
MUTABILITY = {"payable", "view", "pure", "constant"}

# Binary operator precedence, low to high.
_BINOPS = [
    {"||"},
    {"&&"},
    {"==", "!="},
    {"<", ">", "<=", ">="},
    {"|"},
    {"^"},
    {"&"},
    {"<<", ">>"},
    {"+", "-"},
    {"*", "/", "%"},
    {"**"},
]

_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>="}


class _Parser:
    def __init__(self, text, path):
        self.text = text
        self.path = path
        self.toks = tokenize(text, path)
        self.pos = 0
        self.diagnostics = []

    # -- token helpers -------------------------------------------------

    def peek(self, off=0):
        p = min(self.pos + off, len(self.toks) - 1)
        return self.toks[p]

    def at(self, text, off=0):
        return self.peek(off).text == text

    def at_kind(self, kind, off=0):
        return self.peek(off).kind == kind

    def advance(self):
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text):
        t = self.peek()
        if t.text != text:
            raise SolSyntaxError(
                f"unexpected {t.text!r}", t.line, t.col, expected={text}, path=self.path)
        return self.advance()

    def expect_kind(self, kind):
        t = self.peek()
        if t.kind != kind:
            raise SolSyntaxError(
                f"unexpected {t.text!r}", t.line, t.col, expected={kind}, path=self.path)
        return self.advance()

    def span_from(self, start_tok):
        last = self.toks[max(self.pos - 1, 0)]
        return Span(start_tok.line, start_tok.col, start_tok.start, max(last.end, start_tok.end))

    def diag(self, tok, message):
        self.diagnostics.append(f"{self.path}:{tok.line}:{tok.col}: {message}")

    def skip_balanced(self, open_tok="{", close_tok="}"):
        depth = 0
        while not self.at_kind("eof"):
            t = self.advance()
            if t.text == open_tok:
                depth += 1
            elif t.text == close_tok:
                depth -= 1
                if depth <= 0:
                    return

    def skip_to_semicolon(self):
        while not self.at_kind("eof") and not self.at(";"):
            if self.at("{"):
                self.skip_balanced()
                continue
            self.advance()
        if self.at(";"):
            self.advance()

    # -- top level -----------------------------------------------------

    def parse_unit(self):
        unit = SourceUnit(path=self.path)
        while not self.at_kind("eof"):
            if self.at("pragma"):
                self.advance()
                parts = []
                while not self.at(";") and not self.at_kind("eof"):
                    parts.append(self.advance().text)
                if self.at(";"):
                    self.advance()
                unit.pragma = " ".join(parts)
            elif self.at("import"):
                tok = self.peek()
                self.skip_to_semicolon()
                self.diag(tok, "import directive ignored")
            elif self.peek().text in ("contract", "interface", "library"):
                unit.contracts.append(self.parse_contract())
            else:
                t = self.peek()
                raise SolSyntaxError(
                    f"unexpected {t.text!r} at top level", t.line, t.col,
                    expected={"contract", "interface", "library", "pragma"}, path=self.path)
        names = [c.name for c in unit.contracts]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            t = self.peek()
            raise SolSyntaxError(
                f"duplicate contract name {sorted(dupes)[0]!r}", t.line, t.col, path=self.path)
        unit.diagnostics = self.diagnostics
        return unit

    def parse_contract(self):
        start = self.peek()
        kind = self.advance().text
        name = self.expect_kind("ident").text
        if self.at("is"):
            self.advance()
            while True:
                self.parse_type_text()          # base name, possibly with ctor args
                if self.at("("):
                    self.skip_balanced("(", ")")
                if self.at(","):
                    self.advance()
                    continue
                break
        contract = ContractDef(name=name, kind=kind)
        self.expect("{")
        while not self.at("}") and not self.at_kind("eof"):
            self.parse_contract_part(contract)
        self.expect("}")
        contract.span = self.span_from(start)
        self._check_unique(contract)
        return contract

    def _check_unique(self, contract):
        fn_names = [f.name for f in contract.functions if f.name]
        for n in fn_names:
            if fn_names.count(n) > 1:
                raise SolSyntaxError(
                    f"duplicate function {n!r} in contract {contract.name}",
                    contract.span.line, contract.span.col, path=self.path)
        mod_names = [m.name for m in contract.modifiers]
        for n in mod_names:
            if mod_names.count(n) > 1:
                raise SolSyntaxError(
                    f"duplicate modifier {n!r} in contract {contract.name}",
                    contract.span.line, contract.span.col, path=self.path)

    def parse_contract_part(self, contract):
        t = self.peek()
        if t.text == "function":
            contract.functions.append(self.parse_function(contract))
        elif t.text == "constructor":
            contract.functions.append(self.parse_function(contract, constructor=True))
        elif t.text == "modifier":
            contract.modifiers.append(self.parse_modifier())
        elif t.text == "struct":
            self.parse_struct(contract)
        elif t.text == "enum":
            self.parse_enum(contract)
        elif t.text == "event":
            self.parse_event(contract)
        elif t.text == "using":
            self.skip_to_semicolon()
        elif t.text == ";":
            self.advance()
        else:
            contract.state_vars.append(self.parse_state_var())

    def parse_struct(self, contract):
        self.advance()
        name = self.expect_kind("ident").text
        fields = []
        self.expect("{")
        while not self.at("}") and not self.at_kind("eof"):
            self.parse_type_text()
            fields.append(self.expect_kind("ident").text)
            self.expect(";")
        self.expect("}")
        contract.structs[name] = fields

    def parse_enum(self, contract):
        self.advance()
        name = self.expect_kind("ident").text
        members = []
        self.expect("{")
        while not self.at("}") and not self.at_kind("eof"):
            members.append(self.expect_kind("ident").text)
            if self.at(","):
                self.advance()
        self.expect("}")
        contract.enums[name] = members

    def parse_event(self, contract):
        self.advance()
        name = self.expect_kind("ident").text
        self.skip_to_semicolon()
        contract.events.append(name)

    def parse_state_var(self):
        start = self.peek()
        type_text = self.parse_type_text()
        visibility = "none"
        is_constant = False
        while self.peek().text in VISIBILITY or self.at("constant"):
            w = self.advance().text
            if w == "constant":
                is_constant = True
            else:
                visibility = w
        name = self.expect_kind("ident").text
        init = None
        if self.at("="):
            self.advance()
            init = self.parse_expr()
        self.expect(";")
        return StateVarDecl(name=name, type_text=type_text, visibility=visibility,
                            is_constant=is_constant, initializer=init, span=self.span_from(start))

    def parse_type_text(self):
        """Consume a type expression and return its flat text form."""
        t = self.peek()
        if t.text == "mapping":
            self.advance()
            self.expect("(")
            key = self.parse_type_text()
            self.expect("=>")
            val = self.parse_type_text()
            self.expect(")")
            text = f"mapping({key}=>{val})"
        elif t.kind in ("type", "ident") or t.text == "address" or t.text == "var":
            text = self.advance().text
            while self.at("."):                  # qualified user type A.B
                self.advance()
                text += "." + self.expect_kind("ident").text
        else:
            raise SolSyntaxError(
                f"expected type, got {t.text!r}", t.line, t.col, expected={"type"}, path=self.path)
        while self.at("["):
            self.advance()
            inner = ""
            while not self.at("]") and not self.at_kind("eof"):
                inner += self.advance().text
            self.expect("]")
            text += f"[{inner}]"
        return text

    # -- functions / modifiers ------------------------------------------

    def parse_params(self):
        params = []
        self.expect("(")
        while not self.at(")") and not self.at_kind("eof"):
            start = self.peek()
            type_text = self.parse_type_text()
            while self.peek().text in ("memory", "storage", "calldata", "indexed"):
                self.advance()
            name = ""
            if self.at_kind("ident"):
                name = self.advance().text
            params.append(ParamDecl(name=name, type_text=type_text, span=self.span_from(start)))
            if self.at(","):
                self.advance()
        self.expect(")")
        return params

    def parse_function(self, contract, constructor=False):
        start = self.peek()
        self.advance()                            # 'function' or 'constructor'
        name = ""
        is_ctor = constructor
        if not constructor and (self.at_kind("ident") or self.at_kind("type")):
            name = self.advance().text
            if name == contract.name:             # legacy constructor form
                is_ctor = True
        params = self.parse_params()
        visibility = "default"
        mutability = "none"
        modifiers = []
        returns = []
        while True:
            t = self.peek()
            if t.text in VISIBILITY:
                visibility = self.advance().text
            elif t.text in MUTABILITY:
                w = self.advance().text
                mutability = {"constant": "view"}.get(w, w)
            elif t.text == "returns":
                self.advance()
                self.expect("(")
                while not self.at(")") and not self.at_kind("eof"):
                    returns.append(self.parse_type_text())
                    while self.peek().text in ("memory", "storage", "calldata"):
                        self.advance()
                    if self.at_kind("ident"):
                        self.advance()
                    if self.at(","):
                        self.advance()
                self.expect(")")
            elif t.kind == "ident":
                modifiers.append(self.advance().text)
                if self.at("("):
                    self.skip_balanced("(", ")")
            else:
                break
        body = None
        if self.at("{"):
            body = self.parse_block()
        else:
            self.expect(";")
        return FunctionDef(
            name="" if is_ctor else name,
            params=params, returns=returns, visibility=visibility,
            mutability=mutability, applied_modifiers=modifiers, body=body,
            span=self.span_from(start), is_constructor=is_ctor,
            is_fallback=(not is_ctor and name == "" and not params))

    def parse_modifier(self):
        start = self.peek()
        self.advance()
        name = self.expect_kind("ident").text
        params = []
        if self.at("("):
            params = self.parse_params()
        body = self.parse_block()
        return ModifierDef(name=name, params=params, body=body, span=self.span_from(start))

    # -- statements ------------------------------------------------------

    def parse_block(self):
        start = self.expect("{")
        stmts = []
        while not self.at("}") and not self.at_kind("eof"):
            stmts.append(self.parse_statement())
        self.expect("}")
        return Node("block", "", stmts, self.span_from(start))

    def parse_statement(self):
        t = self.peek()
        try:
            return self._statement_inner()
        except SolSyntaxError:
            # Degrade: record an opaque statement covering the failed region.
            self.pos = self.toks.index(t) if t in self.toks else self.pos
            self.diag(t, f"unrecognized statement starting at {t.text!r}")
            self.skip_to_semicolon()
            return Node("opaque", t.text, [], self.span_from(t))

    def _statement_inner(self):
        t = self.peek()
        if t.text == "{":
            return self.parse_block()
        if t.text == "if":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_statement()
            kids = [cond, then]
            if self.at("else"):
                self.advance()
                kids.append(self.parse_statement())
            return Node("if", "", kids, self.span_from(t))
        if t.text == "while":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self.parse_statement()
            return Node("while", "", [cond, body], self.span_from(t))
        if t.text == "for":
            self.advance()
            self.expect("(")
            init = None
            if not self.at(";"):
                init = self._simple_statement(consume_semi=False)
            self.expect(";")
            cond = None
            if not self.at(";"):
                cond = self.parse_expr()
            self.expect(";")
            post = None
            if not self.at(")"):
                post = Node("exprstmt", "", [self.parse_expr()], None)
            self.expect(")")
            body = self.parse_statement()
            kids = [init or Node("block", "", [], self.span_from(t)),
                    cond or Node("lit_bool", "true", [], self.span_from(t)),
                    post or Node("block", "", [], self.span_from(t)),
                    body]
            node = Node("for", "", kids, self.span_from(t))
            for k in kids:
                if k.span is None:
                    k.span = node.span
            if post is not None and post.span is None:
                post.span = post.children[0].span
            return node
        if t.text == "return":
            self.advance()
            kids = []
            if not self.at(";"):
                kids.append(self.parse_expr())
            self.expect(";")
            return Node("return", "", kids, self.span_from(t))
        if t.text in ("break", "continue"):
            self.advance()
            self.expect(";")
            return Node(t.text, "", [], self.span_from(t))
        if t.text == "throw":
            self.advance()
            self.expect(";")
            return Node("throw", "", [], self.span_from(t))
        if t.text == "emit":
            self.advance()
            expr = self.parse_expr()
            self.expect(";")
            return Node("exprstmt", "", [expr], self.span_from(t))
        if t.text == "delete":
            self.advance()
            target = self.parse_expr()
            self.expect(";")
            return Node("exprstmt", "", [Node("unop", "delete", [target], self.span_from(t))],
                        self.span_from(t))
        if t.text == "_" and self.peek(1).text == ";":
            self.advance()
            self.expect(";")
            return Node("placeholder", "_", [], self.span_from(t))
        return self._simple_statement(consume_semi=True)

    def _simple_statement(self, consume_semi):
        """Variable declaration or expression statement."""
        t = self.peek()
        if self._looks_like_vardecl():
            type_text = self.parse_type_text()
            while self.peek().text in ("memory", "storage", "calldata"):
                self.advance()
            name_tok = self.expect_kind("ident")
            kids = [Node("type", type_text, [], Span(t.line, t.col, t.start, name_tok.start)),
                    Node("ident", name_tok.text, [],
                         Span(name_tok.line, name_tok.col, name_tok.start, name_tok.end))]
            if self.at("="):
                self.advance()
                kids.append(self.parse_expr())
            if consume_semi:
                self.expect(";")
            return Node("vardecl", name_tok.text, kids, self.span_from(t))
        expr = self.parse_expr()
        if consume_semi:
            self.expect(";")
        node = Node("exprstmt", "", [expr], self.span_from(t))
        # require/assert/revert calls are first-class statement kinds.
        if expr.kind == "call" and expr.children and expr.children[0].kind == "ident":
            callee = expr.children[0].label
            if callee in ("require", "assert", "revert"):
                node = Node(callee, "", expr.children[1:], self.span_from(t))
        return node

    def _looks_like_vardecl(self):
        t = self.peek()
        if t.text in ("var", "mapping"):
            return True
        if t.kind == "type":
            nxt = self.peek(1)
            if nxt.text == "(":                  # cast expression like uint(x)
                return False
            return True
        if t.kind == "ident":
            # user-type declarations: Ident [storage] Ident, or A.B Ident
            off = 1
            while self.peek(off).text == "." and self.peek(off + 1).kind == "ident":
                off += 2
            while self.peek(off).text == "[":
                depth = 1
                off += 1
                while depth and self.peek(off).kind != "eof":
                    if self.peek(off).text == "[":
                        depth += 1
                    if self.peek(off).text == "]":
                        depth -= 1
                    off += 1
            if self.peek(off).text in ("memory", "storage", "calldata"):
                off += 1
            return self.peek(off).kind == "ident"
        return False

    # -- expressions -----------------------------------------------------

    def parse_expr(self):
        return self._assignment()

    def _assignment(self):
        left = self._ternary()
        t = self.peek()
        if t.text in _ASSIGN_OPS:
            op = self.advance().text
            right = self._assignment()
            span = Span(left.span.line, left.span.col, left.span.start, right.span.end)
            return Node("assign", op, [left, right], span)
        return left

    def _ternary(self):
        cond = self._binary(0)
        if self.at("?"):
            self.advance()
            a = self.parse_expr()
            self.expect(":")
            b = self.parse_expr()
            span = Span(cond.span.line, cond.span.col, cond.span.start, b.span.end)
            return Node("ternary", "", [cond, a, b], span)
        return cond

    def _binary(self, level):
        if level >= len(_BINOPS):
            return self._unary()
        left = self._binary(level + 1)
        while self.peek().text in _BINOPS[level]:
            op = self.advance().text
            right = self._binary(level + 1)
            span = Span(left.span.line, left.span.col, left.span.start, right.span.end)
            left = Node("binop", op, [left, right], span)
        return left

    def _unary(self):
        t = self.peek()
        if t.text in ("!", "~", "-", "+", "++", "--"):
            self.advance()
            operand = self._unary()
            return Node("unop", t.text, [operand],
                        Span(t.line, t.col, t.start, operand.span.end))
        if t.text == "new":
            self.advance()
            type_text = self.parse_type_text()
            node = Node("new", type_text, [], self.span_from(t))
            return self._postfix(node)
        return self._postfix(self._primary())

    def _postfix(self, node):
        while True:
            t = self.peek()
            if t.text == "(":
                self.advance()
                args = []
                while not self.at(")") and not self.at_kind("eof"):
                    args.append(self.parse_expr())
                    if self.at(","):
                        self.advance()
                end = self.expect(")")
                node = Node("call", "", [node] + args,
                            Span(node.span.line, node.span.col, node.span.start, end.end))
            elif t.text == ".":
                self.advance()
                member = self.peek()
                if member.kind not in ("ident", "type", "keyword"):
                    raise SolSyntaxError(
                        f"expected member name, got {member.text!r}",
                        member.line, member.col, expected={"identifier"}, path=self.path)
                self.advance()
                node = Node("member", member.text, [node],
                            Span(node.span.line, node.span.col, node.span.start, member.end))
            elif t.text == "[":
                self.advance()
                idx = self.parse_expr()
                end = self.expect("]")
                node = Node("index", "", [node, idx],
                            Span(node.span.line, node.span.col, node.span.start, end.end))
            elif t.text in ("++", "--"):
                self.advance()
                node = Node("postop", t.text, [node],
                            Span(node.span.line, node.span.col, node.span.start, t.end))
            else:
                return node

    def _primary(self):
        t = self.peek()
        span = Span(t.line, t.col, t.start, t.end)
        if t.kind == "number":
            self.advance()
            text = t.text
            if self.peek().text in ("wei", "szabo", "finney", "ether", "seconds",
                                    "minutes", "hours", "days", "weeks", "years"):
                unit = self.advance()
                span = Span(t.line, t.col, t.start, unit.end)
                text += " " + unit.text
            return Node("lit_int", text, [], span)
        if t.kind == "hexaddr":
            self.advance()
            return Node("lit_addr", t.text, [], span)
        if t.kind == "string":
            self.advance()
            return Node("lit_str", t.text, [], span)
        if t.text in ("true", "false"):
            self.advance()
            return Node("lit_bool", t.text, [], span)
        if t.kind == "type" or t.text == "address":
            self.advance()
            return Node("type", t.text, [], span)
        if t.kind == "ident" or t.text in ("this", "now", "msg", "tx", "block", "suicide", "selfdestruct"):
            self.advance()
            return Node("ident", t.text, [], span)
        if t.text == "(":
            self.advance()
            inner = [self.parse_expr()]
            while self.at(","):
                self.advance()
                inner.append(self.parse_expr())
            end = self.expect(")")
            if len(inner) == 1:
                node = inner[0]
                node.span = Span(t.line, t.col, t.start, end.end)
                return node
            return Node("tuple", "", inner, Span(t.line, t.col, t.start, end.end))
        raise SolSyntaxError(
            f"unexpected {t.text!r} in expression", t.line, t.col,
            expected={"identifier", "literal", "("}, path=self.path)


def parse_source(text, path="<source>"):
    """Parse ``text`` into a SourceUnit. Raises SolSyntaxError on failure."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    stripped = text.strip()
    if not stripped:
        return SourceUnit(path=path)
    return _Parser(text, path).parse_unit()


def enumerate_functions(unit):
    """All (contract, function) pairs in declaration order, fallbacks and
    constructors included."""
    out = []
    for contract in unit.contracts:
        for fn in contract.functions:
            out.append((contract, fn))
    return out
