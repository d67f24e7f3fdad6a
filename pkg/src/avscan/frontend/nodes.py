"""AST node types for the Solidity subset.

Statements and expressions share one generic ``Node`` shape (kind + label +
ordered children + span) so downstream passes (normalization, CFG lowering)
can walk everything uniformly. Declarations get typed containers.
"""

from dataclasses import dataclass, field

# Statement kinds
STMT_KINDS = {
    "block", "if", "while", "for", "require", "assert", "revert", "throw",
    "return", "break", "continue", "exprstmt", "vardecl", "opaque", "placeholder",
}

# Expression kinds
EXPR_KINDS = {
    "assign", "binop", "unop", "postop", "ternary", "call", "member", "index",
    "ident", "lit_int", "lit_str", "lit_addr", "lit_bool", "type", "new", "tuple",
}


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    start: int
    end: int

    def contains(self, other):
        return self.start <= other.start and other.end <= self.end

    def to_json(self):
        return {"line": self.line, "col": self.col, "start": self.start, "end": self.end}


@dataclass
class Node:
    kind: str
    label: str = ""
    children: list = field(default_factory=list)
    span: Span = None

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def __repr__(self):
        return f"Node({self.kind}:{self.label}, {len(self.children)} kids)"


@dataclass
class StateVarDecl:
    name: str
    type_text: str
    visibility: str          # public / private / internal / none
    is_constant: bool
    initializer: Node        # or None
    span: Span

    @property
    def is_address_like(self):
        t = self.type_text
        return t == "address" or (t not in _VALUE_TYPES and not t.startswith(("mapping", "uint", "int", "bytes", "bool", "string")))


_VALUE_TYPES = {"bool", "string"}


@dataclass
class ParamDecl:
    name: str
    type_text: str
    span: Span


@dataclass
class FunctionDef:
    name: str                        # empty for fallback; constructors carry the contract name rule below
    params: list                     # list of ParamDecl
    returns: list                    # list of type strings
    visibility: str                  # public/external/internal/private/default
    mutability: str                  # none/payable/view/pure (constant maps to view)
    applied_modifiers: list          # list of modifier name strings
    body: Node                       # block Node, or None for interface-style declarations
    span: Span
    is_constructor: bool = False
    is_fallback: bool = False


@dataclass
class ModifierDef:
    name: str
    params: list
    body: Node
    span: Span


@dataclass
class ContractDef:
    name: str
    kind: str                        # contract / interface / library
    state_vars: list = field(default_factory=list)
    functions: list = field(default_factory=list)
    modifiers: list = field(default_factory=list)
    enums: dict = field(default_factory=dict)      # name -> member list
    structs: dict = field(default_factory=dict)    # name -> field name list
    events: list = field(default_factory=list)
    span: Span = None

    def state_var(self, name):
        for sv in self.state_vars:
            if sv.name == name:
                return sv
        return None

    def modifier(self, name):
        for m in self.modifiers:
            if m.name == name:
                return m
        return None


@dataclass
class SourceUnit:
    path: str
    pragma: str = None
    contracts: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)   # strings, "path:line:col: message"
