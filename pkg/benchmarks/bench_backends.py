"""Benchmark the compiled kernels against the pure-numpy fallback.

Runs each hot kernel on identical inputs through both implementations,
checks that they agree, and prints a small table with the best wall time
of each and the resulting speedup.

Usage:
    python3 benchmarks/bench_backends.py [--m 100000] [--w 3] [--repeats 5]
"""

import argparse
import time

import numpy as np

from aclfdr import _kernels_py

try:
    from aclfdr import _kernels as _ext
except ImportError:
    _ext = None


def _best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _bench_windowed_logits(rng, m, w, repeats):
    width = 2 * w + 1
    gx = rng.normal(size=m)
    kx = np.full(m, -1.0)
    d_mean = rng.uniform(-0.5, 0.5, size=width)
    a = rng.normal(size=(width, width))
    d_cov = np.ascontiguousarray(0.5 * (a + a.T) * 0.1)
    args = (gx, kx, d_mean, d_cov, -2.0, 0.7)
    ref = _kernels_py.windowed_logits(*args)
    t_py = _best_time(lambda: _kernels_py.windowed_logits(*args), repeats)
    if _ext is None:
        return "windowed_logits", t_py, None, True
    out = np.asarray(_ext.windowed_logits(*args))
    agree = bool(np.max(np.abs(ref - out)) < 1e-10)
    t_ext = _best_time(lambda: _ext.windowed_logits(*args), repeats)
    return "windowed_logits", t_py, t_ext, agree


def _bench_simulate_states(rng, m, repeats):
    pi = np.array([0.3, 0.5, 0.15, 0.05])
    p = np.array([
        [0.6, 0.3, 0.05, 0.05],
        [0.1, 0.8, 0.05, 0.05],
        [0.25, 0.25, 0.4, 0.1],
        [0.2, 0.3, 0.1, 0.4],
    ])
    u = rng.random(m)
    ref = _kernels_py.simulate_states(pi, p, u)
    t_py = _best_time(lambda: _kernels_py.simulate_states(pi, p, u), repeats)
    if _ext is None:
        return "simulate_states", t_py, None, True
    out = np.asarray(_ext.simulate_states(pi, p, u))
    agree = bool(np.array_equal(ref, out))
    t_ext = _best_time(lambda: _ext.simulate_states(pi, p, u), repeats)
    return "simulate_states", t_py, t_ext, agree


def _bench_pair_counts(rng, m, w, repeats):
    theta = (rng.random(m) < 0.2).astype(np.int64)
    ref = _kernels_py.pair_counts(theta, w)
    t_py = _best_time(lambda: _kernels_py.pair_counts(theta, w), repeats)
    if _ext is None:
        return "pair_counts", t_py, None, True
    out = _ext.pair_counts(theta, w)
    agree = all(np.array_equal(np.asarray(a), np.asarray(b))
                for a, b in zip(ref, out))
    t_ext = _best_time(lambda: _ext.pair_counts(theta, w), repeats)
    return "pair_counts", t_py, t_ext, agree


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=100_000, help="input length")
    parser.add_argument("--w", type=int, default=3, help="half-window length")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats, best is reported")
    args = parser.parse_args(argv)

    rng = np.random.default_rng(20260815)
    rows = [
        _bench_windowed_logits(rng, args.m, args.w, args.repeats),
        _bench_simulate_states(rng, args.m, args.repeats),
        _bench_pair_counts(rng, args.m, args.w, args.repeats),
    ]

    ext_state = "built" if _ext is not None else "NOT BUILT (python fallback only)"
    print(f"m={args.m} w={args.w} repeats={args.repeats} "
          f"compiled extension: {ext_state}")
    header = f"{'kernel':<18} {'python':>12} {'cython':>12} {'speedup':>9} {'agree':>6}"
    print(header)
    print("-" * len(header))
    all_agree = True
    for name, t_py, t_ext, agree in rows:
        all_agree = all_agree and agree
        py_ms = f"{t_py * 1e3:.3f} ms"
        if t_ext is None:
            print(f"{name:<18} {py_ms:>12} {'-':>12} {'-':>9} {'-':>6}")
        else:
            ext_ms = f"{t_ext * 1e3:.3f} ms"
            speedup = f"{t_py / t_ext:.1f}x"
            print(f"{name:<18} {py_ms:>12} {ext_ms:>12} {speedup:>9} "
                  f"{'yes' if agree else 'NO':>6}")
    if not all_agree:
        print("MISMATCH: the implementations disagree; do not trust the timings")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
