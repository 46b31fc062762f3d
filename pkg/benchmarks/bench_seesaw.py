"""Benchmark the two seesaw backends (pure numpy vs numba JIT).

Times `seesaw_numpy` against `seesaw_numba` on identical restart batches and
checks that the best CHSH values agree. Run from the repository root:

    python3 benchmarks/bench_seesaw.py --restarts 64 --states 50
"""
import argparse
import time

import numpy as np

from icolab._seesaw import HAS_NUMBA, seesaw_numba, seesaw_numpy
from icolab.bell import correlation_matrix
from icolab.sampling import random_two_qubit_state


def _bloch_seeds(rng: np.ndarray, restarts: int) -> tuple[np.ndarray, np.ndarray]:
    v = rng.normal(size=(2, restarts, 3))
    return v[0] / np.linalg.norm(v[0], axis=1, keepdims=True), v[1] / np.linalg.norm(
        v[1], axis=1, keepdims=True
    )


def bench(fn, mats, seeds, max_iter, tol, repeats):
    best = np.empty(len(mats))
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        for i, t in enumerate(mats):
            b0, b1 = seeds[i]
            s, *_ = fn(t, b0.copy(), b1.copy(), max_iter, tol)
            best[i] = s.max()
        timings.append(time.perf_counter() - start)
    return min(timings), best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--states", type=int, default=50, help="random two-qubit states")
    ap.add_argument("--restarts", type=int, default=64, help="seesaw restarts per state")
    ap.add_argument("--max-iter", type=int, default=200)
    ap.add_argument("--tol", type=float, default=1e-12)
    ap.add_argument("--repeats", type=int, default=5, help="timing repeats (min reported)")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    mats = [correlation_matrix(random_two_qubit_state(rng)) for _ in range(args.states)]
    seeds = [_bloch_seeds(rng, args.restarts) for _ in mats]

    t_np, best_np = bench(seesaw_numpy, mats, seeds, args.max_iter, args.tol, args.repeats)
    print(f"numpy : {t_np:.4f} s  ({args.states} states x {args.restarts} restarts)")

    if not HAS_NUMBA:
        print("numba : not installed (pip install icolab[jit])")
        return 0

    seesaw_numba(mats[0], *(x.copy() for x in seeds[0]), args.max_iter, args.tol)  # compile
    t_nb, best_nb = bench(seesaw_numba, mats, seeds, args.max_iter, args.tol, args.repeats)
    gap = float(np.abs(best_np - best_nb).max())
    print(f"numba : {t_nb:.4f} s  (speedup x{t_np / t_nb:.2f})")
    print(f"agreement: max |S_numpy - S_numba| = {gap:.3e}")
    return 0 if gap < 1e-9 else 1


if __name__ == "__main__":
    raise SystemExit(main())
