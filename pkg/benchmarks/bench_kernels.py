"""Time the compiled and pure-Python support-enumeration kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--sizes 16:3,20:4,24:4]

Each case is ``n:order`` on an ``(n // 2) x n`` Gaussian matrix.  The two
backends must agree on the extremes; the script exits nonzero otherwise.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from gomp_lab import kernels
from gomp_lab.harness.generators import gen_gaussian
from gomp_lab.rip import sample_supports


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _cases(spec):
    for item in spec.split(","):
        n, order = item.split(":")
        yield int(n), int(order)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", default="16:3,20:4,24:4,28:5")
    ap.add_argument("--samples", type=int, default=20000)
    args = ap.parse_args(argv)

    backends = sorted(kernels.BACKENDS)
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    if "compiled" not in kernels.BACKENDS:
        print("compiled extension not built; timing the python fallback only")
    header = f"{'case':<22}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}"
    print(header)
    ok = True
    for n, order in _cases(args.sizes):
        Phi = gen_gaussian(n // 2, n, seed=n * 100 + order)
        gram = np.ascontiguousarray(Phi.T @ Phi)
        supports = sample_supports(n, order, args.samples, seed=order)
        for label, call in (
            (f"exact n={n} k={order}", lambda k: k.enumerate_extremes(gram, order)),
            (f"sample n={n} k={order}", lambda k: k.sampled_extremes(gram, supports)),
        ):
            times, results = {}, {}
            for b in backends:
                times[b], results[b] = _time(lambda: call(kernels.get(b)), args.repeat)
            ref = results[backends[0]]
            for b in backends[1:]:
                got = results[b]
                if not (np.isclose(got[0], ref[0], rtol=0, atol=1e-12)
                        and np.isclose(got[1], ref[1], rtol=0, atol=1e-12)
                        and got[4] == ref[4]):
                    print(f"  MISMATCH {label}: {b} {got[:2]} vs {backends[0]} {ref[:2]}")
                    ok = False
            speed = (times["python"] / times["compiled"]) if "compiled" in times else float("nan")
            print(f"{label:<22}" + "".join(f"{times[b]:>11.4f}s" for b in backends)
                  + f"{speed:>9.1f}x")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
