#!/usr/bin/env python3
"""Truncated Wigner versus the exact Kerr solution.

Runs the single-mode Kerr model with the Wigner engine over a window of
dephasing times and prints <X> against the closed-form coherent-state
mean.  Truncated Wigner is accurate while chi*nbar*t is small; the
printout makes the breakdown visible once the window is pushed.

Usage: python3 scripts/wigner_vs_exact.py [--alpha 2.0] [--chi 0.05]
"""

import argparse

import numpy as np

from qphase.fock import kerr_oracle
from qphase.wigner import run_wigner_x


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--alpha", type=float, default=2.0)
    parser.add_argument("--chi", type=float, default=0.05)
    parser.add_argument("--t-max", type=float, default=2.0)
    parser.add_argument("--points", type=int, default=21)
    parser.add_argument("--trajectories", type=int, default=5000)
    parser.add_argument("--dt", type=float, default=0.005)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()

    dt = args.dt
    times = np.round(np.linspace(0.0, args.t_max, args.points) / dt) * dt
    times[0] = 0.0
    result = run_wigner_x(
        [args.alpha], [[args.chi]], times, args.trajectories, args.seed, dt
    )
    nbar = args.alpha**2
    print(f"# alpha={args.alpha} chi={args.chi} nbar={nbar} "
          f"trajectories={args.trajectories}")
    print(f"{'t':>8}  {'chi*n*t':>8}  {'<X>_W':>10}  {'bar':>9}  {'exact':>10}  {'dev':>9}")
    for i, t in enumerate(times):
        exact = kerr_oracle([args.alpha], [[args.chi]], t)["a"][0].real
        mean = result.mean("X")[i].real
        print(
            f"{t:8.3f}  {args.chi * nbar * t:8.3f}  {mean:10.5f}  "
            f"{result.error('X')[i]:9.2e}  {exact:10.5f}  {abs(mean - exact):9.2e}"
        )
    window = times * args.chi * nbar <= 0.2
    devs = np.abs(result.mean("X").real - np.array(
        [kerr_oracle([args.alpha], [[args.chi]], t)["a"][0].real for t in times]
    ))
    print()
    print(f"max deviation inside chi*nbar*t <= 0.2: {devs[window].max():.2e}")
    print(f"max deviation overall               : {devs.max():.2e}")


if __name__ == "__main__":
    main()
