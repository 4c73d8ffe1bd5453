"""Compare the compiled kernels against the pure-Python fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--sizes 100,1000,10000] [--repeats 5]

Times local_maxima_prominences, midrank, and spearman_rho on random
inputs and prints per-call medians plus the speedup of the compiled
implementation. Exits with a note if the compiled extension is not
available.
"""

import argparse
import statistics
import timeit

import numpy as np

from confusion_lens._kernels import _pykernels

try:
    from confusion_lens._kernels import _ckernels
except ImportError:
    _ckernels = None


def time_call(fn, args, repeats):
    # scale the inner loop so each sample takes a measurable amount of time
    number = max(1, int(10_000 / max(1, len(args[0]))))
    samples = timeit.repeat(lambda: fn(*args), number=number, repeat=repeats)
    return min(samples) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,1000,10000")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _ckernels is None:
        print("compiled kernels not built; showing pure-Python timings only")

    rng = np.random.default_rng(0)
    header = f"{'kernel':<28}{'n':>8}{'python':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        signal = list(rng.uniform(0, 10, size=n))
        values = rng.integers(0, max(2, n // 10), size=n).astype(float)
        x = rng.uniform(size=n)
        y = x + rng.normal(scale=0.5, size=n)
        cases = [
            ("local_maxima_prominences", (signal,)),
            ("midrank", (values,)),
            ("spearman_rho", (x, y)),
        ]
        for name, call_args in cases:
            py_t = time_call(getattr(_pykernels, name), call_args, args.repeats)
            if _ckernels is not None:
                c_t = time_call(getattr(_ckernels, name), call_args, args.repeats)
                print(f"{name:<28}{n:>8}{py_t*1e6:>10.1f}us{c_t*1e6:>10.1f}us"
                      f"{py_t/c_t:>9.1f}x")
            else:
                print(f"{name:<28}{n:>8}{py_t*1e6:>10.1f}us{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
