"""Time the compiled kernels against the pure-Python fallback.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat N]``
"""
import argparse
import timeit

import numpy as np

from tullock import _pykernels

try:
    from tullock import _ckernels
except ImportError:
    _ckernels = None


def cases(m=200, trials=200_000, seed=0):
    rng = np.random.default_rng(seed)
    x = np.ascontiguousarray(np.sort(rng.uniform(0.1, 0.6, m))[::-1])
    c = np.ascontiguousarray(1.0 + np.arange(m) / m)
    f = np.ones(m)
    delta, V0 = 1.0 / m, 0.8
    hp = 2 * x
    xs = x * (1 + 1e-7)
    steps = np.ascontiguousarray(xs - x)
    r = _pykernels.collocation_residuals(x, c, f, delta, V0, hp)
    xi = np.linspace(0.1, 0.5, 64)
    S = rng.uniform(0.2, 1.0, trials)
    contrib = np.ascontiguousarray(rng.uniform(0, 1, (trials, 2)))
    u = rng.random(trials)
    return {
        f"collocation_residuals m={m}": lambda k: k.collocation_residuals(x, c, f, delta, V0, hp),
        f"collocation_fd_jacobian m={m}": lambda k: k.collocation_fd_jacobian(x, c, f, delta, V0, hp, 2 * xs, steps, r),
        f"mean_win_prob 64x{trials}": lambda k: k.mean_win_prob(xi, S),
        f"lottery_winners {trials}x2": lambda k: k.lottery_winners(contrib, u),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    print(f"{'kernel':<36}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, call in cases().items():
        best = {b: min(timeit.repeat(lambda: call(k), number=1, repeat=args.repeat)) for b, k in backends.items()}
        row = f"{name:<36}" + "".join(f"{t * 1e3:>10.2f}ms" for t in best.values())
        if "cython" in best:
            row += f"{best['python'] / best['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
