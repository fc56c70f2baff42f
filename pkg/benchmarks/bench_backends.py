"""Compare the compiled fold-loss kernel against the numpy fallback.

Usage: python benchmarks/bench_backends.py [--n 5000] [--dim 10] [--reps 200]

Times full repetitions (fold plan + K discriminant fits + losses) through
each backend on the same synthetic corpus and reports repetitions/second and
the largest aggregated-score discrepancy between the two.
"""

import argparse
import time

import numpy as np

from slakit import backend, dataset, engine, pca


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--k", type=int, default=5)
    args = ap.parse_args()

    ds = dataset.make_gaussian_mixture(args.n, args.dim, 0.1, 1.81, seed=1)
    noisy, _ = dataset.inject_noise(ds, 0.01, seed=1)
    x = np.ascontiguousarray(pca.transform(pca.fit_pca(noisy.features, args.dim), noisy.features))
    cfg = engine.EngineConfig(k_folds=args.k)

    names = ["python"] + (["compiled"] if backend.HAVE_COMPILED else [])
    boards, rates = {}, {}
    for name in names:
        kernel = backend.get_backend(name)
        # warm up
        engine.run(x, noisy.labels, cfg, 3, master_seed=2, kernel=kernel)
        t0 = time.perf_counter()
        boards[name] = engine.run(
            x, noisy.labels, cfg, args.reps, master_seed=2, kernel=kernel
        )
        dt = time.perf_counter() - t0
        rates[name] = args.reps / dt
        print(f"{name:>8}: {args.reps} repetitions in {dt:6.2f}s  ({rates[name]:8.1f} reps/s)")

    if len(names) == 2:
        speedup = rates["compiled"] / rates["python"]
        diff = np.abs(boards["python"].scores() - boards["compiled"].scores()).max()
        print(f"speedup: {speedup:.2f}x   max |score difference|: {diff:.2e}")
    else:
        print("compiled kernel not built; only the fallback was timed")


if __name__ == "__main__":
    main()
