"""Time the numba kernels against their numpy fallbacks on Pima-sized inputs.

    python benchmarks/bench_kernels.py [--repeat N]

Both variants are imported directly, so MIMCS_DISABLE_NUMBA does not matter
here. The first numba call (compilation or cache load) is excluded.
"""
import argparse
import timeit

import numpy as np

from mimcs import kernels


def cases(rng):
    X = rng.normal(size=(690, 4))
    w = rng.dirichlet(np.ones(4))
    S = np.cov(rng.normal(size=(768, 8)).T, bias=True)
    S = 0.5 * (S + S.T)
    f = rng.normal(size=690)
    cls = (rng.random(690) < 0.35).astype(np.int64)
    y = np.where(X[:, 0] + 0.7 * rng.normal(size=690) > 0, 1.0, -1.0)
    K = np.exp(-0.5 * np.sqrt(kernels.pairwise_sqdist_np(X, w)))
    return {
        "jacobi 8x8": ("jacobi_eigh", (S, 1e-12, 100)),
        "pairwise sqdist 690x4": ("pairwise_sqdist", (X, w)),
        "cross sqdist 78x690": ("weighted_sqdist", (X[:78].copy(), X, w)),
        "parzen posteriors l=690": ("parzen_posteriors", (f, cls, 2, f, 0.3, False)),
        "smo n=690 C=10": ("smo_solve", (K, y, 10.0, 1e-3, 1_000_000)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
    for label, (name, inputs) in cases(rng).items():
        nb = getattr(kernels, name + "_nb")
        npf = getattr(kernels, name + "_np")
        nb(*inputs)
        t_nb = min(timeit.repeat(lambda: nb(*inputs), number=1, repeat=args.repeat))
        t_np = min(timeit.repeat(lambda: npf(*inputs), number=1, repeat=args.repeat))
        print(f"{label:<26}{1e3 * t_nb:>10.2f}{1e3 * t_np:>10.2f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
