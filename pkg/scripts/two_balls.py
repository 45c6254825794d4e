#!/usr/bin/env python3
"""Inconsistent feasibility with two disjoint balls.

Iterates DR on the normal cones of two unit balls, prints both estimates of
the minimal displacement vector with its split into v_D and v_R, and
optionally writes the trace.

    python scripts/two_balls.py --gap 4 --steps 10000 --out runs/two_balls
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

import numpy as np

from drrange import numerics as nx
from drrange import operators as op
from drrange.splitting import DrInstance, estimate_v, estimate_vD_vR, iterate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gap", type=float, default=4.0, help="distance between the ball centres")
    ap.add_argument("--steps", type=int, default=10_000)
    ap.add_argument("--x0", type=float, nargs=2, default=(0.0, 7.0))
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    inst = DrInstance(op.normal_cone(nx.Ball([0, 0], 1)), op.normal_cone(nx.Ball([args.gap, 0], 1)))
    t = time.perf_counter()
    trace = iterate(inst, np.array(args.x0), args.steps)
    est = estimate_v(trace)
    split = estimate_vD_vR(inst, trace)
    dt = time.perf_counter() - t

    expected = np.array([-(args.gap - 2.0) if args.gap > 2 else 0.0, 0.0])
    print(f"steps {args.steps} in {dt:.3f}s")
    print(f"v (differences)  {est.v}   error {np.linalg.norm(est.v - expected):.2e}")
    print(f"v (Cesaro)       {est.cesaro}   gap {est.gap:.2e}")
    print(f"v_D {split.v_D}  v_R {split.v_R}  <v_D, v_R> {split.orthogonality_defect:.1e}")
    norms = trace.diff_norms
    for k in (1, 10, 100, 1000, args.steps):
        if k <= len(norms):
            print(f"  |x_{k - 1} - x_{k}| = {norms[k - 1]:.6f}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        trace.to_csv(args.out / "trace.csv")
        print(f"wrote {args.out / 'trace.csv'}")


if __name__ == "__main__":
    main()
