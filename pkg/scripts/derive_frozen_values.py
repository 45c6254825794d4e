#!/usr/bin/env python3
"""Derive the frozen expected values used by the test suite.

Every value is computed here from first principles with plain numpy (grid
search, brute-force nearest points, hand-written matrices) and never through
the ``drrange`` package, so the tests compare the package against an
independent computation.  The closed-form value is stored next to the
brute-force confirmation and its discrepancy.

    python scripts/derive_frozen_values.py            # rewrite tests/frozen_values.json
    python scripts/derive_frozen_values.py --check    # only report discrepancies
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "tests" / "frozen_values.json"


def disk_points(center, radius, n=801):
    """Dense grid of a closed disk (boundary circle included)."""
    t = np.linspace(-radius, radius, n)
    X, Y = np.meshgrid(t, t)
    P = np.stack([X.ravel(), Y.ravel()], axis=1)
    P = P[np.einsum("ij,ij->i", P, P) <= radius**2]
    ang = np.linspace(0, 2 * np.pi, 20 * n, endpoint=False)
    ring = radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return np.vstack([P, ring]) + np.asarray(center, dtype=float)


def nearest(points, x):
    d = np.linalg.norm(points - x, axis=1)
    return points[int(np.argmin(d))]


def entry(exact, brute):
    exact, brute = np.asarray(exact, dtype=float), np.asarray(brute, dtype=float)
    return {"value": exact.tolist(), "brute_force": brute.tolist(),
            "discrepancy": float(np.max(np.abs(exact - brute)))}


def derive() -> dict:
    out = {}

    # projection of (3, 4) onto the unit disk
    out["ball_projection_3_4"] = entry([0.6, 0.8], nearest(disk_points([0, 0], 1), [3, 4]))

    # projection of (7, 3) onto unit disk + e1 axis: scan the e1 offset and the disk
    disk = disk_points([0, 0], 1, 401)
    best, bd = None, np.inf
    for t in np.linspace(0, 14, 1401):
        p = nearest(disk + [t, 0], [7, 3])
        d = np.linalg.norm(p - [7, 3])
        if d < bd:
            best, bd = p, d
    out["ball_plus_line_projection_7_3"] = entry([7.0, 1.0], best)

    # nearest point of Ball((0,0),2) cap Ball((2,0),2) to (1, 5)
    lens = disk_points([0, 0], 2, 1201)
    lens = lens[np.linalg.norm(lens - [2, 0], axis=1) <= 2 + 1e-12]
    out["lens_projection_1_5"] = entry([1.0, np.sqrt(3.0)], nearest(lens, [1, 5]))

    # two unit balls at (0,0) and (4,0): D = ball1 - ball2, v = P_D(0)
    b1 = disk_points([0, 0], 1, 161)
    b2 = disk_points([4, 0], 1, 161)
    rng = np.random.default_rng(0)
    diffs = b1[rng.integers(len(b1), size=400_000)] - b2[rng.integers(len(b2), size=400_000)]
    # plus the differences of boundary points facing each other, which contain the optimum
    ang = np.linspace(-0.3, 0.3, 601)
    face1 = np.stack([np.cos(ang), np.sin(ang)], 1)
    face2 = np.array([4, 0]) + np.stack([-np.cos(ang), np.sin(ang)], 1)
    diffs = np.vstack([diffs, (face1[:, None, :] - face2[None, :, :]).reshape(-1, 2)])
    out["two_balls_v"] = entry([-2.0, 0.0], nearest(diffs, [0, 0]))
    x = np.zeros(2)
    pa = nearest(b1, x)
    Tx = x - pa + nearest(b2, 2 * pa - x)
    out["two_balls_displacement_at_origin"] = entry([-3.0, 0.0], x - Tx)
    # residual of w = (5, 0): w minus its nearest point in D
    out["two_balls_probe_residual_5_0"] = entry([7.0, 0.0], np.array([5.0, 0.0]) - nearest(diffs, [5, 0]))

    # three intervals: minimise sum of squared distances over t, then v_D blockwise
    ivals = [(0, 1), (2, 3), (5, 6)]
    ts = np.linspace(-10, 10, 200_001)
    cost = sum((np.clip(ts, lo, hi) - ts) ** 2 for lo, hi in ivals)
    t_star = ts[int(np.argmin(cost))]
    vd = [np.clip(t_star, lo, hi) - t_star for lo, hi in ivals]
    out["product_intervals_v"] = entry([-2.0, 0.0, 2.0], vd)

    # parallel lines y=0 and y=1: D = line - line = {y = -1}
    xs = np.linspace(-5, 5, 1001)
    D = np.stack([xs, np.full_like(xs, -1.0)], 1)
    out["shifted_subspaces_vD"] = entry([0.0, -1.0], nearest(D, [0, 0]))

    # orthogonal affine pair: ((0,1) + span e1) cap ((3,0) + span e2)
    M = np.array([[1.0, 0.0], [0.0, -1.0]])   # s*e1 + (0,1) = t*e2 + (3,0)
    s, t = np.linalg.solve(M, np.array([3.0, -1.0]))
    out["affine_singleton_image"] = entry([3.0, 1.0], [s, 1.0])

    # rotator against the e1 axis: Id - T = (Id - R_B R_A)/2 with R_A = -rot, R_B = 2 P - Id
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    P = np.array([[1.0, 0.0], [0.0, 0.0]])
    IdT = 0.5 * (np.eye(2) - (2 * P - np.eye(2)) @ (-rot))
    out["rotator_line_matrix"] = entry([[0.5, -0.5], [-0.5, 0.5]], IdT)

    # ball + line, nearest point to (0, 5)
    strip = np.stack(np.meshgrid(np.linspace(-3, 3, 601), np.linspace(-1, 1, 201)), -1).reshape(-1, 2)
    out["ball_plus_line_projection_0_5"] = entry([0.0, 1.0], nearest(strip, [0, 5]))

    # skew rotator resolvent (Id - S)/2 at e1, computed by solving (Id + S) y = e1
    y = np.linalg.solve(np.eye(2) + rot, np.array([1.0, 0.0]))
    out["skew_resolvent_e1"] = entry([0.5, -0.5], y)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()
    vals = derive()
    for k, v in vals.items():
        print(f"{k:36s} discrepancy {v['discrepancy']:.2e}")
    if not args.check:
        OUT.write_text(json.dumps(vals, indent=2, sort_keys=True) + "\n")
        print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
