"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from fixedwidth import _backend
from fixedwidth.core import RngStream
from fixedwidth.samplers import MixtureParams


def cases(n):
    rng = np.random.default_rng(0)
    y = rng.standard_normal(n)
    b = int(np.sqrt(n))
    a = n // b
    steps = max(n // 20, 1000)
    u2 = RngStream(0, 1).uniforms(2 * steps).reshape(-1, 2)
    u4 = RngStream(0, 2).uniforms(4 * steps).reshape(-1, 4)
    g, d = MixtureParams().gibbs_vector(), MixtureParams().density_vector()
    return {
        f"bm_variance (n={n})": lambda k: k.bm_variance(y, b, a),
        f"indicator_bm_variance (n={n})": lambda k: k.indicator_bm_variance(y, 0.3, b, a),
        f"kde_at (n={n})": lambda k: k.kde_at(y, 0.3, 0.05),
        f"exp_indep_chain ({steps} steps)": lambda k: k.exp_indep_chain(1.0, u2),
        f"mixture_gibbs_chain ({steps} steps)": lambda k: k.mixture_gibbs_chain(2.0, 20.0, g, u4),
        f"mixture_rw_chain ({steps} steps)": lambda k: k.mixture_rw_chain(2.0, 20.0, d, True, 3.0, 30.0, u4),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = {"python": _backend.load("python")}
    try:
        backends["compiled"] = _backend.load("compiled")
    except ImportError:
        print("compiled extension not built; timing the Python kernels only")

    print(f"{'kernel':<40}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}")
    for label, fn in cases(args.n).items():
        times = {}
        for name, mod in backends.items():
            fn(mod)  # warm up
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{label:<40}" + "".join(f"{times[k] * 1e3:>12.2f}ms" for k in backends)
        if "compiled" in times:
            row += f"{times['python'] / times['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
