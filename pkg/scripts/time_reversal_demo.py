#!/usr/bin/env python3
"""Positive-P time-reversal demonstration.

Evolves a coherent state under the single-mode Kerr Hamiltonian, flips
the Hamiltonian sign at tau_r, and prints the <X> trace with CLT bars.
The mean returns to its starting value while the sampling error keeps
growing -- the classic signature that the doubled phase space encodes
the full quantum dynamics, not a mean-field caricature.

Usage: python3 scripts/time_reversal_demo.py [--alpha 10] [--chi 0.01]
"""

import argparse

from qphase.plusp import time_reversal_test


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--alpha", type=float, default=10.0)
    parser.add_argument("--chi", type=float, default=0.01)
    parser.add_argument("--reversal-time", type=float, default=0.5)
    parser.add_argument("--trajectories", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--dt", type=float, default=0.002)
    args = parser.parse_args()

    report = time_reversal_test(
        alpha0=args.alpha,
        chi=args.chi,
        reversal_time=args.reversal_time,
        trajectory_count=args.trajectories,
        seed=args.seed,
        dt=args.dt,
    )
    print(f"# alpha0={args.alpha} chi={args.chi} tau_r={args.reversal_time} "
          f"trajectories={args.trajectories}")
    print(f"{'t':>8}  {'<X>':>12}  {'bar':>10}")
    for t, x, e in zip(report.times, report.x_mean, report.x_error):
        print(f"{t:8.4f}  {x:12.6f}  {e:10.2e}")
    print()
    print(f"initial <X>          : {report.initial_x:.6f}")
    print(f"recovery residual    : {report.recovery_residual:.6f}")
    print(f"endpoint CLT bar     : {report.residual_bar:.6f}")
    print(f"recovered within 2bar: {report.recovery_residual <= 2 * report.residual_bar}")
    print(f"error bar grows      : {report.error_growth}")
    print(f"diverged trajectories: {report.diverged}")
    if report.inconclusive:
        print("NOTE: sampling error ceiling hit -- result inconclusive")


if __name__ == "__main__":
    main()
