"""Compare the numba kernels with the numpy/python fallback.

Runs the same workload twice in fresh interpreters, once with
RANKENUM_DISABLE_NUMBA=1, and prints a side-by-side table:

    python benchmarks/bench_kernels.py --sizes 10000 100000
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workload(sizes, repeat, outputs, sort_n):
    import numpy as np

    from rankenum import backend_name
    from rankenum.enumerate import enumerate_transducer, preprocess
    from rankenum.fixtures import chain_transducer
    from rankenum.group_core import GeneratorBasis, IntGroup
    from rankenum.nsum_sort import SortParams, sort_nsums

    rng = np.random.default_rng(0)
    T = chain_transducer(4)
    preprocess(T, "ab" * 50)  # compile outside the timings
    res = {"backend": backend_name()}
    for n in sizes:
        doc = "".join(rng.choice(list("ab"), size=n))
        res[f"preprocess |D|={n}"] = _best(lambda: preprocess(T, doc), repeat)
    doc = "".join(rng.choice(list("ab"), size=sizes[0]))
    prep = preprocess(T, doc)
    for algo in ("simple", "epoch"):
        res[f"{outputs} outputs ({algo})"] = _best(
            lambda: sum(1 for _ in enumerate_transducer(T, doc, algo, limit=outputs, prepared=prep)), repeat)
    A = rng.multinomial(sort_n, [0.25] * 4, size=sort_n)[:, :3]
    basis = GeneratorBasis(IntGroup(), tuple(int(x) for x in rng.integers(-10**6, 10**6, size=3)))
    params = SortParams(small_threshold=0)
    sort_nsums(A[:64], basis, "rounding", params=params)
    for backend in ("baseline", "rounding"):
        res[f"sort N={sort_n} ({backend})"] = _best(lambda: sort_nsums(A, basis, backend, params=params), repeat)
    return res


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[10**4, 10**5])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--outputs", type=int, default=10**4)
    ap.add_argument("--sort-n", type=int, default=2**15)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.child:
        print(json.dumps(workload(args.sizes, args.repeat, args.outputs, args.sort_n)))
        return 0

    cmd = [sys.executable, __file__, "--child", "--repeat", str(args.repeat), "--outputs", str(args.outputs),
           "--sort-n", str(args.sort_n), "--sizes", *map(str, args.sizes)]
    results = []
    for disable in ("0", "1"):
        env = dict(os.environ, RANKENUM_DISABLE_NUMBA=disable)
        out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        results.append(json.loads(out.stdout.strip().splitlines()[-1]))
    fast, slow = results
    width = max(len(k) for k in fast)
    print(f"{'workload':<{width}}  {fast['backend']:>10}  {slow['backend']:>10}  speedup")
    for key in fast:
        if key == "backend":
            continue
        print(f"{key:<{width}}  {fast[key]:>9.3f}s  {slow[key]:>9.3f}s  {slow[key] / fast[key]:>6.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
