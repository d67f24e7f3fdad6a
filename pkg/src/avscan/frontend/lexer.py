"""Tokenizer for the Solidity 0.4.x subset.

Every token carries line/column and byte offsets so AST spans can be
sliced back out of the original source text.
"""

from dataclasses import dataclass

from ..errors import SolSyntaxError

KEYWORDS = {
    "pragma", "import", "contract", "interface", "library", "is", "using", "for",
    "struct", "enum", "event", "modifier", "function", "constructor", "returns",
    "return", "if", "else", "while", "do", "break", "continue", "throw", "emit",
    "new", "delete", "mapping", "memory", "storage", "calldata", "public",
    "private", "internal", "external", "constant", "payable", "view", "pure",
    "anonymous", "indexed", "var", "true", "false",
}

# Elementary type names; sized variants (uint8..uint256, bytes1..bytes32, intN)
# are recognized by prefix in _is_type_name.
TYPE_NAMES = {"address", "bool", "string", "uint", "int", "byte", "bytes", "fixed", "ufixed"}

UNITS = {"wei", "szabo", "finney", "ether", "seconds", "minutes", "hours", "days", "weeks", "years"}

PUNCT = [
    ">>=", "<<=", "**", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=",
    "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<", ">>", "=>", "(", ")", "[",
    "]", "{", "}", ";", ",", ".", "?", ":", "=", "+", "-", "*", "/", "%", "!",
    "~", "&", "|", "^", "<", ">",
]


@dataclass(frozen=True)
class Token:
    kind: str          # "ident", "keyword", "type", "number", "string", "hexaddr", "punct", "eof"
    text: str
    line: int
    col: int
    start: int
    end: int


def _is_type_name(word):
    if word in TYPE_NAMES:
        return True
    for stem in ("uint", "int", "bytes", "fixed", "ufixed"):
        if word.startswith(stem) and word[len(stem):].isdigit():
            return True
    return False


def tokenize(text, path="<source>"):
    """Produce the token list for ``text``, ending with an EOF token."""
    toks = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def err(msg):
        raise SolSyntaxError(msg, line, col, path=path)

    while i < n:
        ch = text[i]
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            if j < 0:
                j = n
            col += j - i
            i = j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                err("unterminated block comment")
            for k in range(i, j + 2):
                if text[k] == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
            i = j + 2
            continue
        start, sline, scol = i, line, col
        if ch == '"' or ch == "'":
            quote = ch
            j = i + 1
            while j < n and text[j] != quote:
                if text[j] == "\\":
                    j += 1
                if j < n and text[j] == "\n":
                    err("unterminated string literal")
                j += 1
            if j >= n:
                err("unterminated string literal")
            j += 1
            toks.append(Token("string", text[start:j], sline, scol, start, j))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            if text.startswith("0x", i) or text.startswith("0X", i):
                j = i + 2
                while j < n and (text[j] in "0123456789abcdefABCDEF"):
                    j += 1
                word = text[start:j]
                # 20-byte hex constants are address literals; everything else
                # is an ordinary hex number.
                kind = "hexaddr" if len(word) == 42 else "number"
                toks.append(Token(kind, word, sline, scol, start, j))
            else:
                while j < n and (text[j].isdigit() or text[j] == "."):
                    j += 1
                if j < n and text[j] in "eE" and j + 1 < n and (text[j + 1].isdigit() or text[j + 1] == "+"):
                    j += 1
                    if text[j] == "+":
                        j += 1
                    while j < n and text[j].isdigit():
                        j += 1
                toks.append(Token("number", text[start:j], sline, scol, start, j))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_" or ch == "$":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_$"):
                j += 1
            word = text[start:j]
            if _is_type_name(word):
                kind = "type"
            elif word in KEYWORDS or word in UNITS:
                kind = "keyword"
            else:
                kind = "ident"
            toks.append(Token(kind, word, sline, scol, start, j))
            col += j - i
            i = j
            continue
        matched = None
        for p in PUNCT:
            if text.startswith(p, i):
                matched = p
                break
        if matched is None:
            err(f"unexpected character {ch!r}")
        toks.append(Token("punct", matched, sline, scol, start, start + len(matched)))
        i += len(matched)
        col += len(matched)

    toks.append(Token("eof", "", line, col, n, n))
    return toks
