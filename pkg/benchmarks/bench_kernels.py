"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from granular_kinetics import kernels
from granular_kinetics.verify import random_admissible_state


def cases(m=10, n=6, seed=0):
    rng = np.random.default_rng(seed)
    f = random_admissible_state(rng, m, n)
    speeds = np.linspace(0.0, 1.0, n)
    phi = rng.random(m + 1)
    inflow = np.full(n, 0.4 / n)
    alpha = rng.random(m)
    rho = f.sum(axis=1)
    row = f[0] / f[0].sum() * 0.4
    return {
        "game_table": lambda b: b.game_table(n, 0.61, 0.3, 0.8),
        "local_gain": lambda b: b.local_gain(f, alpha, rho, phi[1:], rho),
        "euler_step": lambda b: b.euler_step(f, speeds, phi, inflow, alpha, 0.5, 1.0, 0.15),
        "homogeneous_relax(1e4 steps)": lambda b: b.homogeneous_relax(
            row.copy(), 1.0, 0.4, 1.0, 1.0, 0.5 / 0.16, 0.0, 0.0, 10_000),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("-m", type=int, default=10)
    parser.add_argument("-n", type=int, default=6)
    args = parser.parse_args(argv)
    backends = kernels.backends()
    names = [b.__name__.rsplit(".", 1)[-1] for b in backends]
    print(f"selected backend: {kernels.BACKEND}; m={args.m} n={args.n}")
    print(f"{'kernel':30s}" + "".join(f"{n:>16s}" for n in names) + "     speedup")
    for label, fn in cases(args.m, args.n).items():
        best = []
        for b in backends:
            timer = timeit.Timer(lambda: fn(b))
            number, _ = timer.autorange()
            best.append(min(timer.repeat(args.repeat, number)) / number)
        speed = f"{best[0] / best[-1]:10.1f}x" if len(best) > 1 else ""
        print(f"{label:30s}" + "".join(f"{t * 1e6:13.2f} us" for t in best) + speed)


if __name__ == "__main__":
    main()
