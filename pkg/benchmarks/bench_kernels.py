"""Time each hot kernel under both backends.

    python benchmarks/bench_kernels.py [--repeat 3]

Prints one row per kernel: best-of-N wall time for the numpy fallback and
the compiled extension, and their ratio.
"""
import argparse
import timeit

import numpy as np

from mzsphere._backend import available_backends
from mzsphere.sphere import gen_random_uniform


def cases():
    pts = np.ascontiguousarray(gen_random_uniform(2000, 2, seed=1).points)
    probes = np.ascontiguousarray(gen_random_uniform(20000, 2, seed=2).points)
    rng = np.random.default_rng(3)
    X = rng.standard_normal((250, 200))
    gram = X.T @ X
    return [
        ("closest_pair m=2000", lambda k: k.closest_pair(pts)),
        ("nearest_index 20000x2000", lambda k: k.nearest_index(probes, pts)),
        ("riesz_energy m=2000", lambda k: k.riesz_energy(pts, 1.0)),
        ("riesz_energy_grad m=2000", lambda k: k.riesz_energy_grad(pts, 1.0)),
        ("jacobi_eigenvalues n=200", lambda k: k.jacobi_eigenvalues(np.array(gram, order="C"), 1e-12, 100)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available_backends()
    names = [n for n in ("python", "compiled") if n in backends]
    print(f"{'kernel':<28}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, fn in cases():
        times = [min(timeit.repeat(lambda: fn(backends[n]), number=1, repeat=args.repeat)) for n in names]
        row = f"{label:<28}" + "".join(f"{t:>11.4f}s" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
