"""Consistent identifier renaming and literal substitution over source
text, used by the name/constant-insensitivity properties.

Renames target user value names only (state variables, parameters,
locals); contract, function, modifier, struct and enum names stay put so
report identity is meaningful. Token-splice keeps everything else intact.
With ``same_length=True`` every replacement preserves byte offsets, so
reports must match byte-for-byte.
"""

import string

from avscan.frontend import parse_source
from avscan.frontend.lexer import tokenize, KEYWORDS, UNITS
from avscan.normalize import BUILTIN_FUNCS, BUILTIN_ROOTS, BUILTIN_MEMBERS

PROTECTED = KEYWORDS | UNITS | BUILTIN_FUNCS | BUILTIN_ROOTS | BUILTIN_MEMBERS | {"_"}


def renameable_names(text, path="<renaming>"):
    """State var, parameter and local names declared anywhere in the unit."""
    unit = parse_source(text, path)
    names = set()
    fixed = set()
    for c in unit.contracts:
        fixed.add(c.name)
        fixed.update(c.structs)
        fixed.update(c.enums)
        fixed.update(c.events)
        for m in c.modifiers:
            fixed.add(m.name)
            names.update(p.name for p in m.params if p.name)
        for sv in c.state_vars:
            names.add(sv.name)
        for fn in c.functions:
            fixed.add(fn.name)
            names.update(p.name for p in fn.params if p.name)
            if fn.body is None:
                continue
            for node in fn.body.walk():
                if node.kind == "vardecl":
                    names.add(node.label)
    return {n for n in names if n and n not in PROTECTED and n not in fixed}


def _fresh_name(rng, length, taken):
    while True:
        body = "".join(rng.choice(string.ascii_lowercase) for _ in range(max(length - 1, 1)))
        cand = ("v" + body)[:length] if length > 1 else rng.choice(string.ascii_lowercase)
        if cand not in taken and cand not in PROTECTED:
            return cand


def rename_map(text, rng, same_length=True):
    names = sorted(renameable_names(text))
    taken = set(names)
    mapping = {}
    for n in names:
        length = len(n) if same_length else rng.randint(3, 14)
        fresh = _fresh_name(rng, length, taken)
        taken.add(fresh)
        mapping[n] = fresh
    return mapping


def _subst_digits(rng, text, alphabet):
    out = []
    for ch in text:
        out.append(rng.choice(alphabet) if ch in alphabet else ch)
    return "".join(out)


def transform(text, rng, rename=True, literals=True, same_length=True, path="<renaming>"):
    """Apply a consistent rename plus literal substitution; returns new text."""
    mapping = rename_map(text, rng, same_length) if rename else {}
    toks = tokenize(text, path)
    pieces = []
    cursor = 0
    for t in toks:
        if t.kind == "eof":
            break
        pieces.append(text[cursor:t.start])
        rep = t.text
        if t.kind == "ident" and rep in mapping:
            rep = mapping[rep]
        elif literals and t.kind == "number":
            if rep.lower().startswith("0x"):
                rep = "0x" + _subst_digits(rng, rep[2:], "0123456789abcdef")
            else:
                body = _subst_digits(rng, rep, "123456789")
                rep = body
        elif literals and t.kind == "hexaddr":
            rep = "0x" + _subst_digits(rng, rep[2:], "0123456789abcdef")
        elif literals and t.kind == "string" and len(rep) > 2:
            inner = _subst_digits(rng, rep[1:-1], string.ascii_lowercase)
            rep = rep[0] + inner + rep[-1]
        pieces.append(rep)
        cursor = t.end
    pieces.append(text[cursor:])
    return "".join(pieces)
