"""Command-line entry points: scan, learn, match, similarity, dump."""

import argparse
import json
import sys
from pathlib import Path

from . import __version__, bundled_store_dir
import numpy as np

from .avs import extract_avs, load_store, save_avs
from .corpus import similarity_histogram
from .cfgir import build_cfg, normalize_ir, flatten, function_sequence
from .errors import EmptyCore, SolSyntaxError
from .findings import VULN_TYPES, DM_IDS
from .frontend import parse_source
from .matcher import MatchConfig, match_avs
from .normalize import collect_type_names, normalize_function, segment_fingerprint
from .scan import collect_sources, scan_paths
from .treedist import DistanceMatrix, pairwise_distances, build_cluster_tree

DEFAULTS = {"eta": 0.7, "cutoff": 50, "itv": None}


def read_config_file(path):
    """Flat key = value config; unknown keys are ignored."""
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line or "=" not in line:
            continue
        key, val = (x.strip() for x in line.split("=", 1))
        if key in ("eta",):
            out[key] = float(val)
        elif key in ("cutoff", "itv"):
            out[key] = int(val)
    return out


def _setting(args, cfgfile, key):
    cli_val = getattr(args, key, None)
    if cli_val is not None:
        return cli_val
    if key in cfgfile:
        return cfgfile[key]
    return DEFAULTS[key]


def _parse_dm_list(text):
    if text is None:
        return frozenset()
    if text.strip().lower() == "all":
        return frozenset(DM_IDS)
    picked = frozenset(x.strip() for x in text.split(",") if x.strip())
    unknown = picked - frozenset(DM_IDS)
    if unknown:
        raise SystemExit(f"unknown DM ids: {', '.join(sorted(unknown))}")
    return picked


def cmd_scan(args):
    cfgfile = read_config_file(args.config) if args.config else {}
    eta = _setting(args, cfgfile, "eta")
    itv = _setting(args, cfgfile, "itv")
    disabled = _parse_dm_list(args.disable_dm)
    store = []
    if not args.rules_only:
        store_dir = Path(args.avs_dir) if args.avs_dir else bundled_store_dir()
        store = load_store(store_dir)
    try:
        report = scan_paths(
            args.paths, store, MatchConfig(eta=eta, itv=itv),
            disable_dms=disabled, rules_only=args.rules_only, avs_only=args.avs_only)
    except FileNotFoundError as exc:
        print(f"avscan: no such path: {exc}", file=sys.stderr)
        return 2
    out = report.render_json() if args.format == "json" else report.render_text()
    sys.stdout.write(out)
    for err in report.errors:
        print(err, file=sys.stderr)
    if report.errors and not report.files:
        return 2
    return 1 if report.reported() else 0


def learn_segments(paths):
    """Parse labeled sources and return (segments, ids, diagnostics)."""
    segments, ids, diags = [], [], []
    seen = set()
    for path in paths:
        try:
            unit = parse_source(path.read_text(encoding="utf-8"), str(path))
        except SolSyntaxError as exc:
            diags.append(str(exc))
            continue
        diags.extend(unit.diagnostics)
        type_names = collect_type_names(unit)
        for contract in unit.contracts:
            for fn in contract.functions:
                if fn.body is None or not fn.body.children or fn.is_constructor:
                    continue
                seg = normalize_function(fn, contract, type_names)
                fp = segment_fingerprint(seg)
                if fp in seen:
                    diags.append(f"{path}: duplicate segment {contract.name}.{fn.name} skipped")
                    continue
                seen.add(fp)
                segments.append(seg)
                ids.append(f"{Path(path).stem}:{contract.name}.{fn.name}")
    return segments, ids, diags


def cmd_learn(args):
    cfgfile = read_config_file(args.config) if args.config else {}
    cutoff = _setting(args, cfgfile, "cutoff")
    try:
        paths = collect_sources([args.dir])
    except FileNotFoundError as exc:
        print(f"avscan: no such path: {exc}", file=sys.stderr)
        return 2
    segments, ids, diags = learn_segments(paths)
    for d in diags:
        print(d, file=sys.stderr)
    if not segments:
        return 2
    slug = args.vuln_type.lower()
    if len(segments) == 1:
        dm = DistanceMatrix(labels=[ids[0]], d=np.zeros((1, 1), dtype=np.int64))
        clusters = [[ids[0]]]
        audit = {"labels": [ids[0]], "distances": [[0]], "clusters": clusters}
    else:
        dm = pairwise_distances(segments, ids)
        tree = build_cluster_tree(dm)
        clusters = tree.cut(cutoff)
        audit = {"labels": dm.labels, "distances": dm.d.tolist(),
                 "clusters": clusters, "merges": tree.to_json()["merges"]}
    by_id = dict(zip(ids, segments))
    written = []
    for k, members in enumerate(clusters, 1):
        cluster_segs = [by_id[m] for m in members]
        avs_id = f"{args.prefix or slug}-{k:03d}"
        try:
            sig = extract_avs(cluster_segs, dm, args.vuln_type, avs_id=avs_id, ids=members)
        except EmptyCore:
            print(f"cluster {members} has no common core; skipped", file=sys.stderr)
            continue
        save_avs(sig, args.out)
        written.append(sig.id)
    audit["avs_written"] = written
    audit["cutoff"] = cutoff
    payload = json.dumps(audit, sort_keys=True, indent=2) + "\n"
    if args.audit:
        Path(args.audit).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    return 0 if written else 2


def cmd_match(args):
    store = load_store(args.avs_dir)
    if not store:
        print("avscan: empty signature store", file=sys.stderr)
        return 2
    cfg = MatchConfig(eta=args.eta if args.eta is not None else DEFAULTS["eta"],
                      itv=args.itv)
    results = []
    for path in collect_sources(args.paths):
        try:
            unit = parse_source(path.read_text(encoding="utf-8"), str(path))
        except SolSyntaxError as exc:
            print(exc, file=sys.stderr)
            continue
        type_names = collect_type_names(unit)
        for contract in unit.contracts:
            for fn in contract.functions:
                if fn.body is None:
                    continue
                seq = function_sequence(fn, contract, type_names)
                if not seq.items:
                    continue
                for avs in store:
                    r = match_avs(avs, seq, cfg)
                    if r.matched:
                        results.append({
                            "path": str(path), "contract": contract.name,
                            "function": fn.name, "avs": avs.id,
                            "method": r.method, "similarity": round(r.similarity, 4),
                            "matched_items": r.matched_span,
                        })
    sys.stdout.write(json.dumps({"matches": results}, sort_keys=True, indent=2) + "\n")
    return 0


def cmd_similarity(args):
    root = Path(args.dir)
    if not root.is_dir():
        print(f"avscan: no such directory: {root}", file=sys.stderr)
        return 2
    hist, warnings = similarity_histogram(root)
    for w in warnings:
        print(w, file=sys.stderr)
    sys.stdout.write(json.dumps(hist.to_json(), sort_keys=True, indent=2) + "\n")
    return 0


def cmd_dump(args):
    for path in collect_sources(args.paths):
        unit = parse_source(path.read_text(encoding="utf-8"), str(path))
        type_names = collect_type_names(unit)
        for contract in unit.contracts:
            for fn in contract.functions:
                if fn.body is None:
                    continue
                cfg = normalize_ir(build_cfg(fn, contract, type_names))
                if args.cfg:
                    sys.stdout.write(cfg.to_dot() + "\n")
                if args.ir:
                    seq = flatten(cfg)
                    sys.stdout.write(json.dumps(seq.to_json(), sort_keys=True) + "\n")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="avscan",
                                 description="Solidity vulnerability scanner: "
                                             "signature matching + refined rules")
    ap.add_argument("--version", action="version", version=f"avscan {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="scan sources for the five vulnerability types")
    p.add_argument("paths", nargs="+")
    p.add_argument("--avs-dir", help="signature store directory (default: bundled)")
    p.add_argument("--eta", type=float, default=None, help="similarity threshold")
    p.add_argument("--itv", type=int, default=None, help="window step")
    p.add_argument("--disable-dm", metavar="LIST", default=None,
                   help="comma-separated DM ids, or 'all'")
    p.add_argument("--rules-only", action="store_true")
    p.add_argument("--avs-only", action="store_true")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--config", help="key = value config file")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("learn", help="learn signatures from labeled vulnerable sources")
    p.add_argument("dir")
    p.add_argument("--vuln-type", required=True, choices=VULN_TYPES)
    p.add_argument("--cutoff", type=int, default=None, help="dendrogram cut height")
    p.add_argument("--out", required=True, help="output store directory")
    p.add_argument("--prefix", help="signature id prefix")
    p.add_argument("--audit", help="write distance/cluster audit JSON here")
    p.add_argument("--config", help="key = value config file")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("match", help="report raw signature matches per function")
    p.add_argument("paths", nargs="+")
    p.add_argument("--avs-dir", required=True)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--itv", type=int, default=None)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("similarity", help="per-account file similarity histogram")
    p.add_argument("dir")
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("dump", help="debug dumps of CFGs / IR sequences")
    p.add_argument("paths", nargs="+")
    p.add_argument("--dump-cfg", "--cfg", dest="cfg", action="store_true",
                   help="emit DOT graphs")
    p.add_argument("--dump-ir", "--ir", dest="ir", action="store_true",
                   help="emit IR sequences as JSON lines")
    p.set_defaults(func=cmd_dump)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
