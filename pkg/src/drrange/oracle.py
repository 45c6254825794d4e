"""Brute-force cross-checks that do not share code paths with the closed forms.

Displacement images are sampled on deterministic grids, graph pairs are
matched by nearest neighbours, and projections are recomputed with generic
scipy solvers.  Everything here is meant for tests and experiment scripts.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
from scipy.spatial import cKDTree

from . import numerics as nx
from .splitting import DrInstance, displacement

DENSE_GRID_MAX_DIM = 4


class CloudTag(str, enum.Enum):
    DISPLACEMENT_IMAGE = "DisplacementImage"
    GRAPH_MATCHED = "GraphMatched"
    GRID_PROJECTION = "GridProjection"


@dataclass(frozen=True, eq=False)
class SampleCloud:
    points: np.ndarray
    origin_tag: CloudTag
    partial: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("cloud points must be a 2-D array")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"w{i}" for i in range(self.dim)])
            w.writerows(self.points.tolist())


@dataclass(frozen=True)
class GridSpec:
    """Deterministic sampling grid ``linspace(lo, hi, num)^d`` plus Gaussian points."""

    lo: float = -3.0
    hi: float = 3.0
    num: int = 21
    n_gaussian: int = 200
    seed: int = 0
    max_points: int = 200_000

    def points(self, dim: int) -> tuple[np.ndarray, bool]:
        rng = np.random.default_rng(self.seed)
        parts, partial = [], False
        if dim <= DENSE_GRID_MAX_DIM:
            axis = np.linspace(self.lo, self.hi, self.num)
            n_grid = self.num ** dim
            if n_grid > self.max_points:
                partial = True
            grid = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
            parts.append(grid[: self.max_points])
        half = 0.5 * (self.hi - self.lo)
        parts.append(rng.normal(scale=half, size=(self.n_gaussian, dim)))
        return np.vstack(parts), partial


def sample_displacement_image(inst: DrInstance, grid: GridSpec | None = None) -> SampleCloud:
    """``x - Tx`` over a grid of starting points."""
    grid = grid or GridSpec()
    X, partial = grid.points(inst.dim)
    W = displacement(inst, X)
    return SampleCloud(W, CloudTag.DISPLACEMENT_IMAGE, partial, {"n_grid_points": len(X)})


# dyadic step 0.25, so integer shifts between the two key sets match exactly
MATCH_GRID = GridSpec(lo=-4.0, hi=4.0, num=33, n_gaussian=0)


def _lattice(grid: GridSpec, dim: int) -> np.ndarray:
    axis = np.linspace(grid.lo, grid.hi, grid.num)
    return np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)


def match_graph_pairs(inst: DrInstance, grid: GridSpec | None = None, tol: float | None = None) -> SampleCloud:
    """Displacement values ``a - b`` built from graph points alone.

    Graph points of each operator come from its resolvent on a lattice
    (``(J x, x - J x)``).  A pair ``(a, a*)``, ``(b, b*)`` qualifies when
    ``a - a* = b + b*`` holds within ``tol``; then ``a - b = a* + b*``.  The
    two operators are evaluated separately, so nothing here calls the
    DR operator.
    """
    if inst.dim > DENSE_GRID_MAX_DIM:
        raise ValueError("graph matching is limited to dimension 4")
    grid = grid or MATCH_GRID
    L = _lattice(grid, inst.dim)
    a = inst.opA.resolvent(L)
    a_star = L - a
    b = inst.opB.resolvent(L)
    b_star = L - b
    key_a = a - a_star
    key_b = b + b_star
    scale = max(1.0, float(np.abs(np.vstack([key_a, key_b])).max()))
    tol = 1e-3 * scale if tol is None else tol
    dist, idx = cKDTree(key_b).query(key_a, k=1, distance_upper_bound=tol)
    hit = np.isfinite(dist)
    ia, ib = np.flatnonzero(hit), idx[hit]
    w = a[ia] - b[ib]
    x = a[ia] + a_star[ia]
    meta = {
        "tol": tol,
        "mismatch": dist[hit],
        "x": x,
        "n_candidates": len(L),
    }
    return SampleCloud(w if len(w) else np.zeros((0, inst.dim)), CloudTag.GRAPH_MATCHED, False, meta)


def one_sided_distance(P, Q) -> float:
    """``max_{p in P} dist(p, Q)`` for finite point sets."""
    P, Q = np.atleast_2d(P), np.atleast_2d(Q)
    if len(P) == 0:
        return 0.0
    return float(cKDTree(Q).query(P, k=1)[0].max())


def hausdorff(P, Q) -> float:
    return max(one_sided_distance(P, Q), one_sided_distance(Q, P))


# ---------------------------------------------------------------------------
# numeric projections

_SOLVER_OPTS = {"ftol": 1e-15, "maxiter": 500}


def _sq(x):
    def f(y):
        r = y - x
        return r @ r, 2.0 * r
    return f


def _ball_constraint(center, radius):
    return {
        "type": "ineq",
        "fun": lambda y: radius**2 - (y - center) @ (y - center),
        "jac": lambda y: -2.0 * (y - center),
    }


def _numeric_point(S: nx.ConvexSet, x: np.ndarray) -> np.ndarray:
    d = x.shape[0]
    if isinstance(S, nx.WholeSpace):
        return x.copy()
    if isinstance(S, nx.Singleton):
        return S.point.copy()
    if isinstance(S, nx.ShiftedSet):
        return S.shift + _numeric_point(S.base, x - S.shift)
    if isinstance(S, nx.AffineSubspace):
        if S.rank == 0:
            return S.anchor.copy()
        t = np.linalg.lstsq(S.basis, x - S.anchor, rcond=None)[0]
        return S.anchor + S.basis @ t
    if isinstance(S, (nx.Box, nx.Orthant)):
        if isinstance(S, nx.Box):
            lo, hi = S.lower, S.upper
        else:
            lo = np.where(S.signs > 0, 0.0, -np.inf)
            hi = np.where(S.signs > 0, np.inf, 0.0)
        bounds = [(None if np.isinf(l) else l, None if np.isinf(h) else h) for l, h in zip(lo, hi)]
        res = scipy.optimize.minimize(_sq(x), np.zeros(d), jac=True, method="L-BFGS-B", bounds=bounds,
                                      options={"ftol": 1e-15, "gtol": 1e-12})
        return res.x
    if isinstance(S, nx.Ray):
        dvec = S.direction
        res = scipy.optimize.minimize(lambda t: ((t[0] * dvec - x) @ (t[0] * dvec - x), 2 * dvec @ (t[0] * dvec - x)),
                                      np.zeros(1), jac=True, method="L-BFGS-B", bounds=[(0, None)],
                                      options={"ftol": 1e-15, "gtol": 1e-12})
        return res.x[0] * dvec
    if isinstance(S, nx.Ball):
        y0 = S.center.copy()
        res = scipy.optimize.minimize(_sq(x), y0, jac=True, method="SLSQP",
                                      constraints=[_ball_constraint(S.center, S.radius)], options=_SOLVER_OPTS)
        return res.x
    if isinstance(S, nx.Halfspace):
        a, b = S.normal, S.offset
        con = {"type": "ineq", "fun": lambda y: b - a @ y, "jac": lambda y: -a}
        res = scipy.optimize.minimize(_sq(x), np.zeros(d), jac=True, method="SLSQP", constraints=[con],
                                      options=_SOLVER_OPTS)
        return res.x
    if isinstance(S, nx.SumBallSubspace):
        # variables (y, t): y in the ball, point = y + Q t
        Q = S.subspace.basis
        k = Q.shape[1]

        def f(z):
            r = z[:d] + Q @ z[d:] - x
            return r @ r, np.concatenate([2 * r, 2 * Q.T @ r])

        con = {
            "type": "ineq",
            "fun": lambda z: S.ball.radius**2 - (z[:d] - S.ball.center) @ (z[:d] - S.ball.center),
            "jac": lambda z: np.concatenate([-2 * (z[:d] - S.ball.center), np.zeros(k)]),
        }
        z0 = np.concatenate([S.ball.center, np.zeros(k)])
        res = scipy.optimize.minimize(f, z0, jac=True, method="SLSQP", constraints=[con], options=_SOLVER_OPTS)
        return res.x[:d] + Q @ res.x[d:]
    raise TypeError(f"no numeric projection for {type(S).__name__}")


def numeric_project(target, x) -> np.ndarray:
    """Projection of ``x`` by brute force.

    ``target`` is a :class:`SampleCloud` or point array (nearest sample) or a
    catalog set (generic constrained solve).
    """
    x = nx.as_point(x)
    if isinstance(target, (SampleCloud, np.ndarray)):
        pts = target.points if isinstance(target, SampleCloud) else np.atleast_2d(target)
        if len(pts) == 0:
            raise ValueError("cannot project onto an empty cloud")
        return pts[int(np.argmin(np.linalg.norm(pts - x, axis=1)))].copy()
    if not isinstance(target, nx.ConvexSet):
        raise TypeError("target must be a cloud or a catalog set")
    return _numeric_point(target, x)


def project_box_plus_subspace(box: nx.Box, subspace: nx.AffineSubspace, x) -> np.ndarray:
    """Projection onto ``box + subspace`` by bounded-variable least squares.

    This set has no closed-form projection in the catalog (it is the
    difference set of a lifted product instance), so it is only available here.
    """
    x = nx.as_point(x, box.dim)
    d = box.dim
    Q = subspace.basis
    A = np.hstack([np.eye(d), Q])
    lb = np.concatenate([box.lower, np.full(Q.shape[1], -np.inf)])
    ub = np.concatenate([box.upper, np.full(Q.shape[1], np.inf)])
    res = scipy.optimize.lsq_linear(A, x - subspace.anchor, bounds=(lb, ub), method="bvls", tol=1e-14)
    return subspace.anchor + A @ res.x
