"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from qvolk import kernels as kn
from qvolk.functions import parse_fn
from qvolk.integral import IntegralConfig, riemann_sum

M_WORD = 3**38          # > 2**31: forces 128-bit products in the compiled path
M_SMALL = 3**19


def _random(n, m, seed=0):
    rng = np.random.default_rng(seed)
    return kn.from_ints(rng.integers(0, 2**62, n, dtype=np.int64), m)


def cases():
    big = _random(3**12, M_WORD)
    big2 = _random(3**12, M_WORD, 1)
    small = _random(3**12, M_SMALL)
    f, g = _random(3**6, M_WORD), _random(3**6, M_WORD, 2)
    cfg = IntegralConfig.create(3, 30, 3, 9, 1, 1)
    func = parse_fn("x^3*chi(1,1) + exp(3)*qbr", p=3, n=1)
    return {
        "weighted_sum 3^12 (wide m)": lambda: kn.weighted_sum(big, 4, M_WORD),
        "weighted_sum 3^12 (m < 2^31)": lambda: kn.weighted_sum(small, 4, M_SMALL),
        "mulmod 3^12 (wide m)": lambda: kn.mulmod(big, big2, M_WORD),
        "geometric 3^12 (wide m)": lambda: kn.geometric(4, 3**12, M_WORD),
        "cross_sum 3^6 cyclic": lambda: kn.cross_sum(f, g, M_WORD, cyclic=True),
        "riemann_sum N=9 M=30": lambda: riemann_sum(func, cfg),
    }


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["python"] + (["cython"] if kn.compiled_available() else [])
    if len(backends) == 1:
        print("compiled kernels unavailable; timing the fallback only")
    table = cases()
    print(f"{'case':32}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, fn in table.items():
        times = []
        for b in backends:
            old = kn.use_backend(b)
            try:
                times.append(timed(fn, args.repeat))
            finally:
                kn.use_backend(old)
        row = f"{name:32}" + "".join(f"{t * 1e3:10.1f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
