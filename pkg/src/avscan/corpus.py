"""Desk-scale corpus similarity profiling.

Contracts from one account (one top-level directory) are concatenated in
alphabetical file order into a single text; pairwise similarity between
account texts is the Jaccard index over normalized token trigrams
(identifiers and literals collapse to ``*`` before shingling). The
histogram buckets each file at its maximum similarity to any other file.
"""

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .frontend.lexer import tokenize
from .errors import SolSyntaxError


@dataclass
class CorpusIndex:
    root: str
    accounts: dict = field(default_factory=dict)   # name -> sorted file list
    files: list = field(default_factory=list)      # (path, size, fingerprint)
    warnings: list = field(default_factory=list)

    @classmethod
    def build(cls, root):
        root = Path(root)
        idx = cls(root=str(root))
        for sub in sorted(p for p in root.iterdir() if p.is_dir()):
            sols = sorted(sub.glob("*.sol"), key=lambda p: p.name)
            if sols:
                idx.accounts[sub.name] = sols
        loose = sorted(root.glob("*.sol"), key=lambda p: p.name)
        for f in loose:
            idx.accounts.setdefault(f.stem, []).append(f)
        for name, paths in idx.accounts.items():
            for p in paths:
                data = p.read_bytes()
                idx.files.append((str(p), len(data), hashlib.sha256(data).hexdigest()))
        return idx

    def account_text(self, name):
        return "\n".join(p.read_text(encoding="utf-8") for p in self.accounts[name])


def normalized_trigrams(text, path="<text>"):
    toks = tokenize(text, path)
    norm = []
    for t in toks:
        if t.kind == "eof":
            break
        if t.kind in ("ident", "number", "string", "hexaddr"):
            norm.append("*")
        else:
            norm.append(t.text)
    return {tuple(norm[i:i + 3]) for i in range(len(norm) - 2)}


def trigram_jaccard(a, b):
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 0.0


@dataclass
class SimilarityHistogram:
    buckets: list                   # (lower %, upper %, count)
    total: int
    exact_duplicates: int

    def to_json(self):
        return {
            "total_files": self.total,
            "exact_duplicates": self.exact_duplicates,
            "buckets": [{"lower": lo, "upper": hi, "count": c}
                        for lo, hi, c in self.buckets],
        }


def similarity_histogram(root):
    """Max-pairwise-similarity histogram over per-account concatenated
    files, in 10% buckets."""
    idx = CorpusIndex.build(root)
    names = sorted(idx.accounts)
    profiles = {}
    for name in names:
        try:
            profiles[name] = normalized_trigrams(idx.account_text(name), name)
        except (SolSyntaxError, UnicodeDecodeError) as exc:
            idx.warnings.append(f"skipped account {name}: {exc}")
    usable = [n for n in names if n in profiles]
    best = {n: 0.0 for n in usable}
    exact = 0
    for i, a in enumerate(usable):
        for b in usable[i + 1:]:
            s = trigram_jaccard(profiles[a], profiles[b])
            if s > best[a]:
                best[a] = s
            if s > best[b]:
                best[b] = s
    for n in usable:
        if best[n] == 1.0:
            exact += 1
    counts = [0] * 10
    for n in usable:
        bucket = min(int(best[n] * 10), 9)
        counts[bucket] += 1
    buckets = [(lo * 10, lo * 10 + 10, counts[lo]) for lo in range(10)]
    hist = SimilarityHistogram(buckets=buckets, total=len(usable), exact_duplicates=exact)
    assert sum(c for _, _, c in hist.buckets) == hist.total
    return hist, idx.warnings
