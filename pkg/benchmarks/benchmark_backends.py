"""Timing comparison of the compiled and pure-Python path kernels.

Both kernels follow the same draw protocol, so outputs are bit-identical;
this script checks that first and then times each on the same workload.

Run: python3 benchmarks/benchmark_backends.py [--paths N]
"""

import argparse
import time

import numpy as np

from levytails.process_model import (BrownianDrift, CompoundPoissonDiscrete,
                                     DiscreteAtoms, Gaussian, ModelSpec,
                                     PoissonJump)
from levytails.simulator import SimConfig, backend, simulate_stopped


def demo_spec():
    """Three-state model exercising diffusion, jumps, and transition jumps."""
    gen = [[-1.2, 0.8, 0.4],
           [0.5, -0.9, 0.4],
           [0.3, 0.6, -0.9]]
    exps = [
        BrownianDrift(mu=-0.2, sigma2=1.0),
        PoissonJump(gamma=0.7, h=0.5),
        CompoundPoissonDiscrete(gamma=0.4, atoms=((-0.5, 0.5), (0.8, 0.5))),
    ]
    jumps = {(0, 1): DiscreteAtoms(atoms=((0.3, 1.0),)),
             (1, 0): Gaussian(mean=0.0, variance=0.04)}
    return ModelSpec(varpi=[0.5, 0.3, 0.2], generator=gen, exponents=exps,
                     phi=[0.6, 0.4, 0.5], jumps=jumps)


def run(spec, n_paths, seed, which):
    cfg = SimConfig(n_paths=n_paths, seed=seed)
    t0 = time.perf_counter()
    out = simulate_stopped(spec, cfg, backend=which)
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=20240901)
    args = ap.parse_args()

    spec = demo_spec()
    print(f"default backend: {backend()}")
    print(f"paths: {args.paths}")

    t_py, out_py = run(spec, args.paths, args.seed, "python")
    print(f"python kernel:  {t_py:8.3f} s "
          f"({args.paths / t_py:,.0f} paths/s)")

    if backend() != "cython":
        print("compiled kernel unavailable in this build; nothing to compare")
        return

    t_cy, out_cy = run(spec, args.paths, args.seed, "cython")
    print(f"cython kernel:  {t_cy:8.3f} s "
          f"({args.paths / t_cy:,.0f} paths/s)")

    same = (np.array_equal(out_py.path_values, out_cy.path_values,
                           equal_nan=True)
            and np.array_equal(out_py.path_censored, out_cy.path_censored)
            and np.array_equal(out_py.path_states, out_cy.path_states))
    print(f"bit-identical outputs: {same}")
    print(f"speedup: x{t_py / t_cy:.1f}")
    if not same:
        raise SystemExit("kernel outputs diverged")


if __name__ == "__main__":
    main()
