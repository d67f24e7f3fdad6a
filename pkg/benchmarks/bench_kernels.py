#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot DP kernels on realistic shapes: LCS tables at matcher
window sizes, and Zhang-Shasha tree edit distance on normalized fixture
segments plus larger random trees.

    PYTHONPATH=src python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import random
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from avscan import fixture_dir
from avscan._kernels import numpy_backend
from avscan.frontend import parse_source
from avscan.normalize import collect_type_names, normalize_function, NormalizedNode
from avscan.treedist import tree_arrays

try:
    from avscan._kernels import numba_backend
except ImportError:
    numba_backend = None


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_lcs(rng, n_pairs, sig_len, win_len):
    pairs = []
    for _ in range(n_pairs):
        a = np.array([rng.randint(0, 20) for _ in range(sig_len)], dtype=np.int32)
        b = np.array([rng.randint(0, 20) for _ in range(win_len)], dtype=np.int32)
        pairs.append((a, b))

    def run(backend):
        for a, b in pairs:
            backend.lcs_table_kernel(a, b)

    return run


def random_tree(rng, n):
    nodes = [NormalizedNode("k", rng.choice("abcdef"), [])]
    for _ in range(n - 1):
        parent = rng.choice(nodes)
        child = NormalizedNode("k", rng.choice("abcdef"), [])
        parent.children.append(child)
        nodes.append(child)
    return nodes[0]


def bench_ted(tree_pairs):
    args_list = []
    for t1, t2 in tree_pairs:
        vocab = {}
        args_list.append(tree_arrays(t1, vocab) + tree_arrays(t2, vocab))

    def run(backend):
        for args in args_list:
            backend.ted_kernel(*args)

    return run


def fixture_segments():
    segs = []
    for path in sorted(fixture_dir().glob("CB*.sol")):
        unit = parse_source(path.read_text(), str(path))
        tn = collect_type_names(unit)
        for c in unit.contracts:
            for f in c.functions:
                if f.body is not None and f.body.children:
                    segs.append(normalize_function(f, c, tn))
    return segs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    opts = ap.parse_args()
    rng = random.Random(0)
    scale = 0.2 if opts.quick else 1.0

    workloads = []
    workloads.append(("LCS sig=12 win=18 x%d" % int(2000 * scale),
                      bench_lcs(rng, int(2000 * scale), 12, 18)))
    workloads.append(("LCS sig=50 win=72 x%d" % int(500 * scale),
                      bench_lcs(rng, int(500 * scale), 50, 72)))

    segs = fixture_segments()
    seg_pairs = [(a.root, b.root) for i, a in enumerate(segs) for b in segs[i + 1:]]
    workloads.append((f"TED fixture segments ({len(seg_pairs)} pairs)",
                      bench_ted(seg_pairs)))
    big = [(random_tree(rng, 120), random_tree(rng, 120))
           for _ in range(max(1, int(10 * scale)))]
    workloads.append((f"TED random 120-node trees ({len(big)} pairs)", bench_ted(big)))

    if numba_backend is not None:
        numba_backend.warmup()

    header = f"{'workload':42s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, run in workloads:
        t_np = timeit(run, numpy_backend, repeat=3)
        if numba_backend is not None:
            t_nb = timeit(run, numba_backend, repeat=3)
            print(f"{name:42s} {t_np * 1e3:9.1f}ms {t_nb * 1e3:9.1f}ms "
                  f"{t_np / t_nb:7.1f}x")
        else:
            print(f"{name:42s} {t_np * 1e3:9.1f}ms {'n/a':>10s} {'n/a':>8s}")


if __name__ == "__main__":
    main()
