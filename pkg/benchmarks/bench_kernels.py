#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure numpy fallback.

Loads both backend instances side by side via load_kernels, times each
hot kernel on a medium-sized workload (best of --repeat after a warmup
pass that also absorbs JIT compilation), and prints a speedup table.
The warmup results double as an equivalence check.

Usage:
    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from tripodsim import kernels
from tripodsim.profiles import BoundaryProfile, Grid, Profile, Segment


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def reduced_workload():
    boundary = BoundaryProfile(
        theta0=Profile(0.3, (Segment("ramp", 4.0, 2.0, 0.5),)),
        phi0=Profile(0.5, (Segment("bump", 10.0, 3.0, 0.4),)),
        beta=0.4)
    grid = Grid(0.01, 0.01, 24.0, 10.0, store_every=200)
    w = grid.w_axis()
    theta0 = boundary.theta0(w)
    phi0 = boundary.phi0(w)
    args = (theta0, phi0, boundary.beta, grid.dw, grid.dzeta,
            grid.n_zeta, grid.store_every, 1e-3)
    return lambda mod: mod.reduced_march(*args)


def oracle_workload():
    tau = np.arange(0, 2001) * 0.05
    theta = Profile(0.2, (Segment("ramp", 30.0, 20.0, 0.5),))(tau)
    phi = np.full_like(tau, 0.4)
    omega0 = np.stack([np.sin(theta) * np.cos(phi),
                       np.cos(theta) * np.cos(phi),
                       np.sin(phi)], axis=1).astype(np.complex128)
    a_init = np.array([0.0, np.cos(0.3), -np.sin(0.3), 0.0],
                      dtype=np.complex128)
    args = (omega0, a_init, 1.0, 0.05, 60, 0.05, 20)
    return lambda mod: mod.oracle_march(*args)


def atom_workload():
    tau = np.arange(0, 40001) * 0.01
    omega = np.stack([0.6 * np.cos(0.02 * tau),
                      0.6 * np.sin(0.02 * tau),
                      np.full_like(tau, 0.5)], axis=1).astype(np.complex128)
    a_init = np.array([0.0, 1.0, 0.0, 0.0], dtype=np.complex128)
    return lambda mod: mod.atom_traj(omega, a_init, 0.01)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5,
                    help="timing repeats per kernel (best is reported)")
    args = ap.parse_args(argv)

    np_mod = kernels.load_kernels("numpy")
    if not kernels.HAS_NUMBA:
        print("numba is not installed; timing the numpy path only")
        nb_mod = None
    else:
        nb_mod = kernels.load_kernels("numba")

    cases = (("reduced_march", reduced_workload()),
             ("oracle_march", oracle_workload()),
             ("atom_traj", atom_workload()))

    print(f"{'kernel':<14} {'numpy [s]':>10} {'numba [s]':>10} "
          f"{'speedup':>8}   max |diff|")
    for name, run in cases:
        ref = run(np_mod)  # warmup doubles as the reference result
        t_np = _best_of(lambda: run(np_mod), args.repeat)
        if nb_mod is None:
            print(f"{name:<14} {t_np:>10.4f} {'-':>10} {'-':>8}")
            continue
        out = run(nb_mod)  # first call compiles
        if isinstance(ref, tuple):
            diff = max(_max_abs(r, o) for r, o in zip(ref[:3], out[:3]))
        else:
            diff = _max_abs(ref, out)
        t_nb = _best_of(lambda: run(nb_mod), args.repeat)
        print(f"{name:<14} {t_np:>10.4f} {t_nb:>10.4f} "
              f"{t_np / t_nb:>7.1f}x   {diff:.2e}")


if __name__ == "__main__":
    main()
