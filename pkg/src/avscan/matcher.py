"""Signature-to-target code matching over flattened IR sequences.

The decision procedure: if the target is not much longer than the
signature, one direct LCS; otherwise a sliding window of width |sig|/eta
stepped by ``itv`` takes the best windowed LCS. If the best similarity
clears eta the match is accepted on the LCS path; otherwise an ordered
subsequence-inclusion check rescues clones whose common core is spread
across large gaps. Similarity is always the matched fraction *of the
signature*.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ._kernels import lcs_table_kernel
from .cfgir import function_sequence
from .errors import UnsupportedConstruct
from .findings import Finding
from .normalize import collect_type_names


@dataclass
class MatchConfig:
    eta: float = 0.7
    itv: int = None              # window step; default = half signature length

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise ValueError("eta must be in (0, 1]")
        if self.itv is not None and self.itv < 1:
            raise ValueError("itv must be >= 1")

    def step_for(self, sig_len):
        return self.itv if self.itv is not None else max(1, sig_len // 2)


@dataclass
class MatchResult:
    matched: bool
    method: str                  # lcs / windowed_lcs / inclusion / none
    similarity: float
    matched_span: list = field(default_factory=list)   # target item indices
    avs_id: str = ""


def _intern(*seqs):
    vocab = {}
    out = []
    for seq in seqs:
        ids = np.empty(len(seq), dtype=np.int32)
        for i, key in enumerate(seq):
            if key not in vocab:
                vocab[key] = len(vocab)
            ids[i] = vocab[key]
        out.append(ids)
    return out


def _traceback(table, a, b):
    """One maximal common subsequence; returns (a indices, b indices)."""
    i, j = len(a), len(b)
    ia, ib = [], []
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1] and table[i, j] == table[i - 1, j - 1] + 1:
            ia.append(i - 1)
            ib.append(j - 1)
            i -= 1
            j -= 1
        elif table[i - 1, j] >= table[i, j - 1]:
            i -= 1
        else:
            j -= 1
    return ia[::-1], ib[::-1]


def lcs_similarity(s1, s2):
    """sigma = |LCS| / |s1| plus the s2 indices of one maximal common
    subsequence. Items compare equal iff their IR keys are equal."""
    k1, k2 = s1.keys() if hasattr(s1, "keys") else list(s1), s2.keys() if hasattr(s2, "keys") else list(s2)
    if not k1:
        raise ValueError("signature sequence must be non-empty")
    a, b = _intern(k1, k2)
    table = lcs_table_kernel(a, b)
    _, ib = _traceback(table, a, b)
    return int(table[-1, -1]) / len(k1), ib


def is_included_by_order(s1, s2):
    """True iff s1 is a (not necessarily contiguous) subsequence of s2."""
    k1 = s1.keys() if hasattr(s1, "keys") else list(s1)
    k2 = s2.keys() if hasattr(s2, "keys") else list(s2)
    it = iter(k2)
    return all(any(x == y for y in it) for x in k1)


def _inclusion_span(k1, k2):
    out = []
    j = 0
    for x in k1:
        while j < len(k2) and k2[j] != x:
            j += 1
        if j >= len(k2):
            return None
        out.append(j)
        j += 1
    return out


def match_avs(avs, target, cfg):
    """Run the matching algorithm for one signature against one target
    sequence; reports the method that succeeded and statement positions."""
    sig_keys = avs.ir_signature.keys()
    tgt_keys = target.keys()
    if not sig_keys:
        raise ValueError(f"signature {avs.id} has an empty IR sequence")
    m = len(sig_keys)
    width = math.ceil(m / cfg.eta)
    threshold = math.ceil(cfg.eta * m)

    # Cheap sound reject: LCS length and inclusion are both bounded by the
    # multiset intersection, so a small intersection can never match.
    inter = sum((Counter(sig_keys) & Counter(tgt_keys)).values())
    if inter < threshold:
        return MatchResult(False, "none", 0.0, [], avs.id)

    a, b = _intern(sig_keys, tgt_keys)
    if len(tgt_keys) <= width:
        table = lcs_table_kernel(a, b)
        sigma = int(table[-1, -1]) / m
        if sigma >= cfg.eta:
            _, ib = _traceback(table, a, b)
            return MatchResult(True, "lcs", sigma, ib, avs.id)
        best_sigma, best_pos, best_width = sigma, 0, len(tgt_keys)
    else:
        step = cfg.step_for(m)
        best_sigma, best_pos, best_width = -1.0, 0, width
        pos = 0
        while pos <= len(tgt_keys):
            window = b[pos:pos + width]
            table = lcs_table_kernel(a, window)
            sigma = int(table[-1, -1]) / m
            if sigma > best_sigma:
                best_sigma, best_pos, best_width = sigma, pos, len(window)
            pos += step
        if best_sigma >= cfg.eta:
            window = b[best_pos:best_pos + best_width]
            table = lcs_table_kernel(a, window)
            _, ib = _traceback(table, a, window)
            return MatchResult(True, "windowed_lcs", best_sigma,
                               [best_pos + j for j in ib], avs.id)

    span = _inclusion_span(sig_keys, tgt_keys)
    if span is not None:
        return MatchResult(True, "inclusion", max(best_sigma, 0.0), span, avs.id)
    return MatchResult(False, "none", max(best_sigma, 0.0), [], avs.id)


def item_spans(sequence, indices):
    """Statement spans for matched item positions (deduplicated, ordered)."""
    spans = []
    seen = set()
    for i in indices:
        sp = sequence.items[i].span
        if sp is not None and (sp.start, sp.end) not in seen:
            seen.add((sp.start, sp.end))
            spans.append(sp)
    return spans


def scan_with_avs(store, unit, cfg):
    """Match every signature against every function; returns candidate
    findings (source "avs") and per-function warnings."""
    candidates = []
    warnings = []
    type_names = collect_type_names(unit)
    for contract in unit.contracts:
        for fn in contract.functions:
            if fn.body is None:
                continue
            try:
                seq = function_sequence(fn, contract, type_names)
            except UnsupportedConstruct as exc:
                warnings.append(
                    f"{unit.path}: skipped {contract.name}.{fn.name or '<special>'} "
                    f"from matching: {exc}")
                continue
            if not seq.items:
                continue
            for avs in store:
                result = match_avs(avs, seq, cfg)
                if result.matched:
                    candidates.append(Finding(
                        vuln_type=avs.vuln_type,
                        contract=contract.name,
                        function=fn.name,
                        spans=item_spans(seq, result.matched_span),
                        source="avs",
                        matched_avs=avs.id,
                        match_method=result.method,
                        similarity=result.similarity,
                    ))
    return candidates, warnings
