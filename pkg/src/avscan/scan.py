"""Combined rule + signature scanning and the JSON report."""

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import SolSyntaxError
from .findings import Finding
from .frontend import parse_source
from .matcher import MatchConfig, scan_with_avs
from .rules import ALL_RULES, ContractContext, analyze_function, apply_dms

SCHEMA_VERSION = 1


def _spans_overlap(a, b):
    return any(x is not None and y is not None and x.start < y.end and y.start < x.end
               for x in a for y in b)


def _merge_group(group):
    """Merge transitively span-overlapping candidates of one
    (contract, function, vuln_type) group into single findings."""
    pool = list(group)
    merged = []
    while pool:
        acc = pool.pop(0)
        changed = True
        while changed:
            changed = False
            for other in list(pool):
                if _spans_overlap(acc.spans, other.spans):
                    pool.remove(other)
                    acc = _merge_two(acc, other)
                    changed = True
        merged.append(acc)
    return merged


def _merge_two(a, b):
    spans = list(a.spans)
    seen = {(s.start, s.end) for s in spans}
    for s in b.spans:
        if (s.start, s.end) not in seen:
            spans.append(s)
            seen.add((s.start, s.end))
    spans.sort(key=lambda s: (s.start, s.end))
    source = a.source if a.source == b.source else "both"
    out = Finding(
        vuln_type=a.vuln_type, contract=a.contract, function=a.function,
        spans=spans, source=source,
        fired_rule=a.fired_rule or b.fired_rule,
        matched_avs=a.matched_avs or b.matched_avs,
        match_method=a.match_method or b.match_method,
        similarity=a.similarity if a.similarity is not None else b.similarity,
    )
    out.evidence = dict(b.evidence)
    out.evidence.update(a.evidence)
    return out


def scan_unit(unit, store, cfg=None, disable_dms=frozenset(),
              rules_only=False, avs_only=False):
    """Scan one parsed SourceUnit; returns (findings, warnings)."""
    cfg = cfg or MatchConfig()
    warnings = list(unit.diagnostics)
    candidates = []
    analyses = {}

    contexts = {c.name: ContractContext.build(unit, c) for c in unit.contracts}
    for contract in unit.contracts:
        ctx = contexts[contract.name]
        for fn in contract.functions:
            if fn.body is None:
                continue
            analysis = analyze_function(ctx, fn)
            analyses[(contract.name, fn.name)] = (ctx, analysis)
            if not avs_only:
                for rule in ALL_RULES:
                    candidates.extend(rule(ctx, fn, analysis))

    if not rules_only and store:
        avs_candidates, avs_warnings = scan_with_avs(store, unit, cfg)
        candidates.extend(avs_candidates)
        warnings.extend(avs_warnings)

    groups = {}
    for cand in candidates:
        groups.setdefault((cand.contract, cand.function, cand.vuln_type), []).append(cand)

    findings = []
    for key in sorted(groups):
        for finding in _merge_group(groups[key]):
            ctx_analysis = analyses.get((finding.contract, finding.function))
            if ctx_analysis is not None:
                apply_dms(finding, *ctx_analysis, disabled=disable_dms)
            findings.append(finding)
    findings.sort(key=Finding.sort_key)
    return findings, warnings


@dataclass
class Report:
    config: dict
    files: list = field(default_factory=list)    # (path, findings, warnings)
    errors: list = field(default_factory=list)

    def reported(self):
        return [(p, f) for p, fnds, _ in self.files for f in fnds if f.reported]

    def suppressed(self):
        return [(p, f) for p, fnds, _ in self.files for f in fnds if not f.reported]

    def to_json(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "config": self.config,
            "files": [
                {"path": p,
                 "findings": [f.to_json() for f in fnds],
                 "warnings": list(warns)}
                for p, fnds, warns in self.files
            ],
            "errors": list(self.errors),
        }

    def render_json(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def render_text(self):
        lines = []
        nrep = nsup = 0
        for path, fnds, warns in self.files:
            for f in fnds:
                state = "REPORTED " if f.reported else (
                    "suppressed[" + ",".join(f.suppressed_by) + "]")
                line = f.spans[0].line if f.spans else 0
                lines.append(f"{path}:{line}: {state} {f.vuln_type} "
                             f"in {f.contract}.{f.display_function()} ({f.source})")
                nrep += f.reported
                nsup += not f.reported
            for w in warns:
                lines.append(f"warning: {w}")
        for e in self.errors:
            lines.append(f"error: {e}")
        lines.append(f"{nrep} reported, {nsup} suppressed")
        return "\n".join(lines) + "\n"


def collect_sources(paths):
    """Expand files/directories into a sorted list of .sol files."""
    out = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            out.extend(sorted(p.rglob("*.sol")))
        elif p.exists():
            out.append(p)
        else:
            raise FileNotFoundError(str(p))
    return sorted(set(out))


def scan_paths(paths, store, cfg=None, disable_dms=frozenset(),
               rules_only=False, avs_only=False, config_echo=None):
    cfg = cfg or MatchConfig()
    report = Report(config=config_echo or {
        "eta": cfg.eta, "itv": cfg.itv,
        "rules_only": rules_only, "avs_only": avs_only,
        "disabled_dms": sorted(disable_dms),
        "signatures": len(store),
    })
    for path in collect_sources(paths):
        text = path.read_text(encoding="utf-8")
        try:
            unit = parse_source(text, str(path))
        except SolSyntaxError as exc:
            report.errors.append(str(exc))
            continue
        findings, warnings = scan_unit(unit, store, cfg, disable_dms,
                                       rules_only, avs_only)
        report.files.append((str(path), findings, warnings))
    return report
