"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call includes compilation (or a cache load) and is reported
separately.  Every pair of outputs is compared before timing.
"""
import argparse
import time

import numpy as np

from sparsespec import _kernels


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    q = rng.uniform(-5.0, 20.0, 8)
    mats = rng.normal(size=(200, 2, 2))
    t = np.arange(200_000) * (2 * np.pi / 200_000)
    return [
        ("rk4_transfer 8 pieces x 2048 steps", "rk4_transfer", (q, 0.125, 2048)),
        ("rk4_vop 8 pieces x 512 steps", "rk4_vop", (q, 0.125, 512)),
        ("circle_min_norm 200 mats x 2e5 angles", "circle_min_norm", (mats, np.cos(t), np.sin(t))),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    jit = _kernels.jit_kernels()
    if jit is None:
        raise SystemExit("numba is not installed")
    ref = _kernels.NUMPY_KERNELS
    print(f"{'kernel':40s} {'first jit':>10s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for label, name, fargs in cases():
        t0 = time.perf_counter()
        a = jit[name](*fargs)
        first = time.perf_counter() - t0
        b = ref[name](*fargs)
        for x, y in zip(np.atleast_1d(a) if name != "rk4_vop" else a,
                        np.atleast_1d(b) if name != "rk4_vop" else b):
            scale = max(1.0, float(np.max(np.abs(y))))
            assert np.max(np.abs(np.asarray(x) - np.asarray(y))) <= 1e-12 * scale, label
        t_jit = best_of(jit[name], fargs, args.repeat)
        t_np = best_of(ref[name], fargs, max(1, args.repeat // 2))
        print(f"{label:40s} {first:10.4f} {t_jit:10.5f} {t_np:10.5f} {t_np / t_jit:8.1f}x")


if __name__ == "__main__":
    main()
