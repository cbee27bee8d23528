"""Benchmark the compiled grid-search kernel against the pure-Python one.

Times the three kernel entry points on representative workloads and prints
per-candidate cost plus the speedup.  Both backends produce bit-identical
results; the wrapper checks that along the way.

Run from the repository root:

    python3 benchmarks/bench_kernel.py
    python3 benchmarks/bench_kernel.py --dim 8 --repeats 5
"""

import argparse
import importlib
import math
import sys
from time import perf_counter

import numpy as np

COMPLEX_VALS = np.array(
    [0, 1, -1, 1j, -1j, 1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], dtype=np.complex128
)
REAL_VALS = np.array([0.0, 1.0, -1.0])


def load_backends():
    backends = {}
    try:
        backends["compiled"] = importlib.import_module("coplab._gridsearch")
    except ImportError:
        print("note: compiled extension not built, timing python only")
    backends["python"] = importlib.import_module("coplab._gridsearch_py")
    return backends


def make_instance(rng, d, m=None):
    m = m or d + 4
    f = (rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))) * math.sqrt(0.5)
    u = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    g = f.conj().T @ u
    k = f.conj().T @ f
    gm = (k + k.conj().T) / 2.0
    c0 = float(np.real(np.vdot(u, u)))
    return c0, g, gm


def time_case(fn, args, repeats):
    best = math.inf
    result = None
    for _ in range(repeats):
        t0 = perf_counter()
        result = fn(*args)
        best = min(best, perf_counter() - t0)
    return best, result


def bench(dim, repeats, seed):
    rng = np.random.default_rng(seed)
    backends = load_backends()

    cases = []
    c0, g, gm = make_instance(rng, dim)
    cases.append(
        ("complex 9^%d" % dim, "gray_min_complex", (c0, g, gm, COMPLEX_VALS), 9**dim)
    )
    c0r, gr, gmr = make_instance(rng, dim)
    cases.append(
        (
            "real 3^%d" % dim,
            "gray_min_real",
            (c0r, np.ascontiguousarray(gr.real), np.ascontiguousarray(gmr.real), REAL_VALS),
            3**dim,
        )
    )
    c0k, gk, gmk = make_instance(rng, dim)
    k = 2
    n_subsets = math.comb(dim, k)
    cases.append(
        (
            "dkvp C(%d,%d) 9^%d" % (dim, k, k),
            "dkvp_min",
            (c0k, gk, gmk, k, COMPLEX_VALS),
            n_subsets * 9**k,
        )
    )

    width = max(len(label) for label, *_ in cases)
    for label, entry, args, candidates in cases:
        results = {}
        times = {}
        for name, mod in backends.items():
            elapsed, res = time_case(getattr(mod, entry), args, repeats)
            times[name] = elapsed
            results[name] = res
        if len(results) == 2:
            a, b = results["compiled"], results["python"]
            same = all(
                np.array_equal(x, y) if isinstance(x, np.ndarray) else x == y
                for x, y in zip(a, b)
            )
            if not same:
                print(f"MISMATCH on {label}: backends disagree", file=sys.stderr)
                return 1
        line = f"{label:<{width}}  candidates={candidates:>9d}"
        for name in ("compiled", "python"):
            if name in times:
                per = times[name] / candidates * 1e9
                line += f"  {name}: {times[name] * 1e3:8.2f} ms ({per:7.2f} ns/cand)"
        if "compiled" in times and times["compiled"] > 0:
            line += f"  speedup x{times['python'] / times['compiled']:.1f}"
        print(line)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dim", type=int, default=6, help="search dimension (default 6)")
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats, best kept")
    parser.add_argument("--seed", type=int, default=0, help="instance seed")
    args = parser.parse_args(argv)
    if args.dim < 2 or args.dim > 9:
        parser.error("--dim must be between 2 and 9")
    return bench(args.dim, args.repeats, args.seed)


if __name__ == "__main__":
    sys.exit(main())
