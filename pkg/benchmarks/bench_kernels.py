"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from dmelodies import _pykernels, kernels
from dmelodies.factor_space import cardinality

try:
    from dmelodies import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 20, size=1_000_000)
    y = rng.integers(0, 12, size=1_000_000)
    shape = (87 * 256 + 256 * 32,)
    p, g = rng.normal(size=shape), rng.normal(size=shape)

    def adam(impl):
        m, v, q = np.zeros(shape), np.zeros(shape), p.copy()
        for _ in range(50):
            kernels.adam_update(q, g, m, v, 0.9, 0.999, 1e-3, 1.0, 1e-8, impl=impl)

    return {
        "synth_token_ids (full dataset)": lambda impl: kernels.synth_token_ids(0, cardinality(), impl=impl),
        "joint_counts (1e6 pairs, 20x12)": lambda impl: kernels.joint_counts(x, y, 20, 12, impl=impl),
        "adam_update (50 steps, 30k params)": adam,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; only the numpy fallback is available")
    print(f"{'kernel':40s} {'numpy s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, fn in cases().items():
        t_np = best_of(lambda: fn(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:40s} {t_np:10.4f} {'-':>10s} {'-':>8s}")
            continue
        t_c = best_of(lambda: fn(_ckernels), args.repeat)
        print(f"{name:40s} {t_np:10.4f} {t_c:10.4f} {t_np / t_c:7.1f}x")


if __name__ == "__main__":
    main()
