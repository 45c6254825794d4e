#!/usr/bin/env python3
"""Range-closure probe on the ball + line instance.

For ``w = (2, 1)`` the displacement range of a unit ball against the e1 axis
comes arbitrarily close to ``w`` without reaching it.  The shifted solutions
``x_n`` grow like ``(2 n^2)^(1/3)`` while ``x_n / n^2`` still goes to zero;
the table shows both.  A second target far from the range is probed for
contrast.

    python scripts/probe_sweep.py --max-exp 16
"""
from __future__ import annotations

import argparse

import numpy as np

from drrange.regression import catalog_instance
from drrange.splitting import ProbeConfig, log2_schedule, probe_range_membership


def table(inst, w, schedule):
    res = probe_range_membership(inst, w, ProbeConfig(n_schedule=schedule))
    print(f"w = {w}: {res.verdict.value}, residual estimate {res.residual_estimate}")
    print(f"{'n':>8s} {'|x_n|':>12s} {'(2n^2)^(1/3)':>14s} {'|x_n|/n^2':>12s}")
    for n, xn, s in zip(res.n_schedule, res.iterate_norms, res.scaled_norms):
        print(f"{n:8d} {xn:12.4f} {(2.0 * n * n) ** (1 / 3):14.4f} {s:12.3e}")
    print()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-exp", type=int, default=16, help="largest n is 2**max_exp")
    args = ap.parse_args()
    inst = catalog_instance("ball_line")
    schedule = log2_schedule(2, 2**args.max_exp)
    table(inst, np.array([2.0, 1.0]), schedule)
    table(inst, np.array([0.0, 3.0]), schedule)


if __name__ == "__main__":
    main()
