"""Wall-clock comparison of the compiled and numpy back ends.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from hipster.kernels import backends


def _cases():
    sym = (np.array([-1, 1], dtype=np.int64), np.array([0.5, 0.5]))
    lazy = (np.array([0, 1], dtype=np.int64), np.array([0.5, 0.5]))
    rng = np.random.default_rng(0)
    tree_x = rng.integers(-3, 4, (2048, 256)).astype(np.int64)
    tree_u = rng.random(2048 * 255)
    u0 = np.ones(64)
    return {
        "evolve sym n=1e5": lambda k: k.evolve(np.array([1.0]), 0, *sym, 10 ** 5, False, 1e-30),
        "evolve tal n=1e5": lambda k: k.evolve(np.array([1.0]), 0, *lazy, 10 ** 5, False, 1e-30),
        "scheme pme M=8 n=2e4": lambda k: k.scheme_run(u0, 0, np.zeros(1), np.array([0.0, 0.0, 0.5]),
                                                       1 / 64, 1 / 8, 2 * 10 ** 4),
        "tree_reduce 2048 x 2^8": lambda k: k.tree_reduce(tree_x.copy(), tree_u, False, sym[0], np.cumsum(sym[1])),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    mods = backends()
    names = sorted(mods)
    print(f"{'case':28s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for case, fn in _cases().items():
        times = {}
        for name in names:
            best = float("inf")
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                fn(mods[name])
                best = min(best, time.perf_counter() - t0)
            times[name] = best
        row = f"{case:28s}" + "".join(f"{times[n]:11.3f}s" for n in names)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
