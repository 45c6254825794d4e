"""Vector helpers and a catalog of closed convex sets in R^d.

Every set exposes an exact projection, a membership test, its recession cone
and (for cones) its polar.  Projections broadcast over leading axes, so a
batch of points with shape ``(n, d)`` is projected row by row.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, NotACone, NotConverged

GS_DROP_TOL = 1e-12
MEMBER_TOL = 1e-9


# ---------------------------------------------------------------------------
# points


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Return ``x`` as a finite float vector, checking its length against ``dim``."""
    p = np.array(x, dtype=float)
    if p.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {p.shape}")
    if dim is not None and p.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite coordinates")
    return p


def as_points(x, dim: int | None = None) -> np.ndarray:
    """Like :func:`as_point` but also accepts a batch of shape ``(n, d)``."""
    p = np.asarray(x, dtype=float)
    if p.ndim not in (1, 2):
        raise DimensionError(f"expected a vector or a batch of vectors, got shape {p.shape}")
    if dim is not None and p.shape[-1] != dim:
        raise DimensionError(f"expected dimension {dim}, got {p.shape[-1]}")
    return p


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _norm(x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(x, axis=-1, keepdims=True)


def orthonormalize(vectors, dim: int | None = None) -> np.ndarray:
    """Modified Gram-Schmidt on the columns of ``vectors``.

    Columns whose residual falls below ``GS_DROP_TOL`` (relative to their
    original norm, or absolutely for tiny inputs) are dropped.  The result has
    shape ``(d, k)`` with orthonormal columns.
    """
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if dim is not None and V.size == 0:
        return np.zeros((dim, 0))
    d = V.shape[0]
    basis: list[np.ndarray] = []
    for j in range(V.shape[1]):
        v = V[:, j].copy()
        scale = max(np.linalg.norm(v), 1.0)
        for _ in range(2):  # one reorthogonalisation pass
            for q in basis:
                v -= (q @ v) * q
        nv = np.linalg.norm(v)
        if nv > GS_DROP_TOL * scale:
            basis.append(v / nv)
    if not basis:
        return np.zeros((d, 0))
    return np.stack(basis, axis=1)


def orthogonal_complement(Q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of span(Q)."""
    d, k = Q.shape
    full = orthonormalize(np.hstack([Q, np.eye(d)]))
    return full[:, k:]


# ---------------------------------------------------------------------------
# set catalog


class ConvexSet:
    """Nonempty closed convex subset of R^d."""

    dim: int

    def project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x: np.ndarray, tol: float = MEMBER_TOL) -> bool:
        """True iff every point (row) of ``x`` lies within ``tol`` of the set."""
        x = np.asarray(x, dtype=float)
        return bool(np.all(_norm(x - self.project(x)) <= tol))

    def is_cone(self) -> bool:
        return False

    def is_bounded(self) -> bool:
        return False

    def has_interior(self) -> bool:
        return False

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexSet):
    dim: int

    def project(self, x):
        return np.array(x, dtype=float)

    def contains(self, x, tol=MEMBER_TOL):
        return True

    def is_cone(self):
        return True

    def has_interior(self):
        return True

    def to_dict(self):
        return {"type": "whole_space", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Singleton(ConvexSet):
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", _frozen(self.point))

    @property
    def dim(self):
        return self.point.shape[0]

    def project(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.point, x.shape).copy()

    def is_cone(self):
        return not np.any(self.point)

    def is_bounded(self):
        return True

    def has_interior(self):
        return self.dim == 0

    def to_dict(self):
        return {"type": "singleton", "point": self.point.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", _frozen(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    def project(self, x):
        y = np.asarray(x, dtype=float) - self.center
        r = _norm(y)
        scale = np.where(r > self.radius, self.radius / np.where(r > 0, r, 1.0), 1.0)
        return self.center + y * scale

    def is_bounded(self):
        return True

    def has_interior(self):
        return True

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class AffineSubspace(ConvexSet):
    """``anchor + span(basis)``; the basis is orthonormalised on construction."""

    anchor: np.ndarray
    basis: np.ndarray = field(default=None)

    def __post_init__(self):
        anchor = np.array(self.anchor, dtype=float)
        d = anchor.shape[0]
        B = np.zeros((d, 0)) if self.basis is None else np.asarray(self.basis, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if B.shape[0] != d and B.size:
            raise DimensionError("basis rows must match anchor dimension")
        Q = orthonormalize(B, dim=d) if B.size else np.zeros((d, 0))
        object.__setattr__(self, "anchor", _frozen(anchor))
        object.__setattr__(self, "basis", _frozen(Q))

    @property
    def dim(self):
        return self.anchor.shape[0]

    @property
    def rank(self):
        return self.basis.shape[1]

    def project(self, x):
        y = np.asarray(x, dtype=float) - self.anchor
        Q = self.basis
        return self.anchor + (y @ Q) @ Q.T

    def _normal_residual(self, x):
        y = np.asarray(x, dtype=float) - self.anchor
        return y - (y @ self.basis) @ self.basis.T

    def is_linear(self):
        return bool(np.linalg.norm(self._normal_residual(np.zeros(self.dim))) <= GS_DROP_TOL)

    def is_cone(self):
        return self.is_linear()

    def is_bounded(self):
        return self.rank == 0

    def has_interior(self):
        return self.rank == self.dim

    def to_dict(self):
        return {"type": "affine", "anchor": self.anchor.tolist(), "basis": self.basis.T.tolist()}


def _bound_to_json(b):
    return None if np.isinf(b) else float(b)


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    """Coordinatewise bounds; entries may be infinite."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float)
        hi = np.array(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionError("box bounds must be vectors of equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise ValueError("box requires lower <= upper")
        if np.any(lo == np.inf) or np.any(hi == -np.inf):
            raise ValueError("box would be empty")
        object.__setattr__(self, "lower", _frozen(lo))
        object.__setattr__(self, "upper", _frozen(hi))

    @property
    def dim(self):
        return self.lower.shape[0]

    def project(self, x):
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def is_cone(self):
        return bool(np.all(np.isin(self.lower, [0.0, -np.inf])) and np.all(np.isin(self.upper, [0.0, np.inf])))

    def is_bounded(self):
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    def has_interior(self):
        return bool(np.all(self.lower < self.upper))

    def to_dict(self):
        return {
            "type": "box",
            "lower": [_bound_to_json(b) for b in self.lower],
            "upper": [_bound_to_json(b) for b in self.upper],
        }


@dataclass(frozen=True, eq=False)
class Ray(ConvexSet):
    """``{t * direction : t >= 0}``; the direction is normalised."""

    direction: np.ndarray

    def __post_init__(self):
        d = np.array(self.direction, dtype=float)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("ray direction must be nonzero")
        object.__setattr__(self, "direction", _frozen(d / n))

    @property
    def dim(self):
        return self.direction.shape[0]

    def project(self, x):
        t = np.maximum(np.asarray(x, dtype=float) @ self.direction, 0.0)
        return t[..., None] * self.direction

    def is_cone(self):
        return True

    def has_interior(self):
        return self.dim == 1

    def to_dict(self):
        return {"type": "ray", "direction": self.direction.tolist()}


@dataclass(frozen=True, eq=False)
class Halfspace(ConvexSet):
    """``{x : <normal, x> <= offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        a = np.array(self.normal, dtype=float)
        if not np.any(a):
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", _frozen(a))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.normal.shape[0]

    def project(self, x):
        x = np.asarray(x, dtype=float)
        a = self.normal
        excess = np.maximum(x @ a - self.offset, 0.0)
        return x - (excess / (a @ a))[..., None] * a

    def is_cone(self):
        return self.offset == 0.0

    def has_interior(self):
        return True

    def to_dict(self):
        return {"type": "halfspace", "normal": self.normal.tolist(), "offset": self.offset}


@dataclass(frozen=True, eq=False)
class Orthant(ConvexSet):
    """Signed orthant: coordinate i satisfies ``signs[i] * x[i] >= 0``."""

    signs: np.ndarray

    def __post_init__(self):
        s = np.array(self.signs, dtype=float)
        if s.ndim != 1 or not np.all(np.isin(s, [-1.0, 1.0])):
            raise ValueError("orthant signs must be +1 or -1")
        object.__setattr__(self, "signs", _frozen(s))

    @property
    def dim(self):
        return self.signs.shape[0]

    def project(self, x):
        s = self.signs
        return s * np.maximum(s * np.asarray(x, dtype=float), 0.0)

    def is_cone(self):
        return True

    def has_interior(self):
        return True

    def to_dict(self):
        return {"type": "orthant", "signs": [int(v) for v in self.signs]}


@dataclass(frozen=True, eq=False)
class SumBallSubspace(ConvexSet):
    """Minkowski sum ``ball + U`` of a ball and a linear subspace.

    An affine subspace is accepted; its anchor is folded into the ball centre.
    """

    ball: Ball
    subspace: AffineSubspace

    def __post_init__(self):
        if self.ball.dim != self.subspace.dim:
            raise DimensionError("ball and subspace dimensions differ")
        if not self.subspace.is_linear():
            anchor = self.subspace.anchor
            object.__setattr__(self, "ball", Ball(self.ball.center + anchor, self.ball.radius))
            object.__setattr__(self, "subspace", AffineSubspace(np.zeros(self.dim), self.subspace.basis))

    @property
    def dim(self):
        return self.ball.dim

    def _split(self, x):
        y = np.asarray(x, dtype=float) - self.ball.center
        Q = self.subspace.basis
        along = (y @ Q) @ Q.T
        return along, y - along

    def project(self, x):
        along, across = self._split(x)
        r = _norm(across)
        rad = self.ball.radius
        scale = np.where(r > rad, rad / np.where(r > 0, r, 1.0), 1.0)
        return self.ball.center + along + across * scale

    def has_interior(self):
        return True

    def to_dict(self):
        return {"type": "sum_ball_subspace", "ball": self.ball.to_dict(), "subspace": self.subspace.to_dict()}


@dataclass(frozen=True, eq=False)
class ShiftedSet(ConvexSet):
    """``shift + base``."""

    base: ConvexSet
    shift: np.ndarray

    def __post_init__(self):
        s = np.array(self.shift, dtype=float)
        if s.shape != (self.base.dim,):
            raise DimensionError("shift dimension differs from base set")
        object.__setattr__(self, "shift", _frozen(s))

    @property
    def dim(self):
        return self.base.dim

    def project(self, x):
        return self.shift + self.base.project(np.asarray(x, dtype=float) - self.shift)

    def is_cone(self):
        return not np.any(self.shift) and self.base.is_cone()

    def is_bounded(self):
        return self.base.is_bounded()

    def has_interior(self):
        return self.base.has_interior()

    def to_dict(self):
        return {"type": "shifted", "base": self.base.to_dict(), "shift": self.shift.tolist()}


# ---------------------------------------------------------------------------
# constructors with light normalisation


def affine(anchor, basis=None) -> ConvexSet:
    """Affine subspace, collapsed to a singleton or the whole space at the extremes."""
    A = AffineSubspace(anchor, basis)
    if A.rank == 0:
        return Singleton(A.anchor)
    if A.rank == A.dim:
        return WholeSpace(A.dim)
    return A


def span(*vectors) -> ConvexSet:
    vs = np.array(vectors, dtype=float)
    return affine(np.zeros(vs.shape[1]), vs.T)


def zero(dim: int) -> Singleton:
    return Singleton(np.zeros(dim))


def set_from_dict(spec: dict) -> ConvexSet:
    """Inverse of ``ConvexSet.to_dict``."""
    kind = spec.get("type")
    if kind == "whole_space":
        return WholeSpace(int(spec["dim"]))
    if kind == "singleton":
        return Singleton(spec["point"])
    if kind == "ball":
        return Ball(spec["center"], spec["radius"])
    if kind == "affine":
        anchor = spec["anchor"]
        basis = spec.get("basis") or []
        B = np.array(basis, dtype=float).T if len(basis) else None
        return AffineSubspace(anchor, B)
    if kind == "box":
        lo = [-np.inf if b is None else float(b) for b in spec["lower"]]
        hi = [np.inf if b is None else float(b) for b in spec["upper"]]
        return Box(lo, hi)
    if kind == "ray":
        return Ray(spec["direction"])
    if kind == "halfspace":
        return Halfspace(spec["normal"], spec["offset"])
    if kind == "orthant":
        return Orthant(spec["signs"])
    if kind == "sum_ball_subspace":
        sub = set_from_dict(spec["subspace"])
        if not isinstance(sub, AffineSubspace):
            raise ValueError("sum_ball_subspace needs an affine subspace component")
        return SumBallSubspace(set_from_dict(spec["ball"]), sub)
    if kind == "shifted":
        return ShiftedSet(set_from_dict(spec["base"]), spec["shift"])
    raise ValueError(f"unknown set type {kind!r}")


# ---------------------------------------------------------------------------
# operations


def _check_dim(S: ConvexSet, x) -> np.ndarray:
    x = as_points(x)
    if x.shape[-1] != S.dim:
        raise DimensionError(f"point has dimension {x.shape[-1]}, set has {S.dim}")
    return x


def project(S: ConvexSet, x) -> np.ndarray:
    """Nearest point of ``S`` to ``x`` (row-wise for batches)."""
    return S.project(_check_dim(S, x))


def contains(S: ConvexSet, x, tol: float = MEMBER_TOL) -> bool:
    return S.contains(_check_dim(S, x), tol)


def distance(S: ConvexSet, x) -> np.ndarray:
    x = _check_dim(S, x)
    return np.linalg.norm(x - S.project(x), axis=-1)


def _cone_kinds(lower, upper):
    # 0: {0}, 1: [0, inf), -1: (-inf, 0], 2: R
    kinds = []
    for lo, hi in zip(lower, upper):
        if lo == -np.inf and hi == np.inf:
            kinds.append(2)
        elif lo == -np.inf:
            kinds.append(-1)
        elif hi == np.inf:
            kinds.append(1)
        else:
            kinds.append(0)
    return kinds


def _box_cone(kinds) -> ConvexSet:
    """Catalog descriptor for a coordinate cone given per-coordinate kinds."""
    d = len(kinds)
    kinds = list(kinds)
    if all(k == 0 for k in kinds):
        return zero(d)
    if all(k == 2 for k in kinds):
        return WholeSpace(d)
    eye = np.eye(d)
    if all(k in (0, 2) for k in kinds):
        return affine(np.zeros(d), eye[:, [i for i, k in enumerate(kinds) if k == 2]])
    signed = [i for i, k in enumerate(kinds) if k in (1, -1)]
    if len(signed) == 1 and all(k in (0, 1, -1) for k in kinds):
        i = signed[0]
        return Ray(kinds[i] * eye[i])
    if all(k in (1, -1) for k in kinds):
        return Orthant(kinds)
    lo = np.array([{0: 0.0, 1: 0.0, -1: -np.inf, 2: -np.inf}[k] for k in kinds])
    hi = np.array([{0: 0.0, 1: np.inf, -1: 0.0, 2: np.inf}[k] for k in kinds])
    return Box(lo, hi)


def recession_cone(S: ConvexSet) -> ConvexSet:
    """Directions ``d`` with ``S + t d`` inside ``S`` for all ``t >= 0``."""
    d = S.dim
    if isinstance(S, (Singleton, Ball)):
        return zero(d)
    if isinstance(S, (WholeSpace, Ray, Orthant)):
        return S
    if isinstance(S, AffineSubspace):
        return affine(np.zeros(d), S.basis)
    if isinstance(S, SumBallSubspace):
        return affine(np.zeros(d), S.subspace.basis)
    if isinstance(S, Halfspace):
        return Halfspace(S.normal, 0.0)
    if isinstance(S, Box):
        return _box_cone(_cone_kinds(S.lower, S.upper))
    if isinstance(S, ShiftedSet):
        return recession_cone(S.base)
    raise TypeError(f"no recession cone rule for {type(S).__name__}")


def polar_cone(K: ConvexSet) -> ConvexSet:
    """``{u : <u, k> <= 0 for all k in K}`` for a closed convex cone ``K``."""
    if not K.is_cone():
        raise NotACone(f"{type(K).__name__} is not a cone")
    d = K.dim
    if isinstance(K, ShiftedSet):
        return polar_cone(K.base)
    if isinstance(K, WholeSpace):
        return zero(d)
    if isinstance(K, Singleton):
        return WholeSpace(d)
    if isinstance(K, AffineSubspace):
        return affine(np.zeros(d), orthogonal_complement(K.basis))
    if isinstance(K, Ray):
        return Halfspace(K.direction, 0.0)
    if isinstance(K, Halfspace):
        return Ray(K.normal)
    if isinstance(K, Orthant):
        return Orthant(-K.signs)
    if isinstance(K, Box):
        swap = {0: 2, 2: 0, 1: -1, -1: 1}
        return _box_cone([swap[k] for k in _cone_kinds(K.lower, K.upper)])
    raise TypeError(f"no polar rule for {type(K).__name__}")


def reflect(S: ConvexSet) -> ConvexSet:
    """The set ``-S``."""
    if isinstance(S, WholeSpace):
        return S
    if isinstance(S, Singleton):
        return Singleton(-S.point)
    if isinstance(S, Ball):
        return Ball(-S.center, S.radius)
    if isinstance(S, AffineSubspace):
        return AffineSubspace(-S.anchor, S.basis)
    if isinstance(S, Box):
        return Box(-S.upper, -S.lower)
    if isinstance(S, Ray):
        return Ray(-S.direction)
    if isinstance(S, Halfspace):
        return Halfspace(-S.normal, S.offset)
    if isinstance(S, Orthant):
        return Orthant(-S.signs)
    if isinstance(S, SumBallSubspace):
        return SumBallSubspace(reflect(S.ball), S.subspace)
    if isinstance(S, ShiftedSet):
        return ShiftedSet(reflect(S.base), -S.shift)
    raise TypeError(f"no reflection rule for {type(S).__name__}")


def translate(S: ConvexSet, p) -> ConvexSet:
    """The set ``p + S``, kept in closed form where the variant allows it."""
    p = as_point(p, S.dim)
    if not np.any(p) or isinstance(S, WholeSpace):
        return S
    if isinstance(S, Singleton):
        return Singleton(S.point + p)
    if isinstance(S, Ball):
        return Ball(S.center + p, S.radius)
    if isinstance(S, AffineSubspace):
        return AffineSubspace(S.anchor + p, S.basis)
    if isinstance(S, Box):
        return Box(S.lower + p, S.upper + p)
    if isinstance(S, Halfspace):
        return Halfspace(S.normal, S.offset + S.normal @ p)
    if isinstance(S, SumBallSubspace):
        return SumBallSubspace(Ball(S.ball.center + p, S.ball.radius), S.subspace)
    if isinstance(S, ShiftedSet):
        return translate(S.base, S.shift + p)
    return ShiftedSet(S, p)


def project_intersection(
    sets: Sequence[ConvexSet], x, tol: float = 1e-12, max_iter: int = 100_000
) -> np.ndarray:
    """Projection onto the intersection of ``sets`` by Dykstra's algorithm.

    Stops when a full sweep moves the iterate (and the correction terms) by
    less than ``tol``.  Raises :class:`NotConverged` otherwise.
    """
    sets = list(sets)
    if not sets:
        raise ValueError("need at least one set")
    x = as_point(x, sets[0].dim)
    for S in sets:
        if S.dim != x.shape[0]:
            raise DimensionError("sets have inconsistent dimensions")
    active = [S for S in sets if not isinstance(S, WholeSpace)]
    if not active:
        return x.copy()
    if len(active) == 1:
        return active[0].project(x)
    incr = [np.zeros_like(x) for _ in active]
    cur = x.copy()
    for _ in range(max_iter):
        start = cur.copy()
        moved = 0.0
        for i, S in enumerate(active):
            y = cur + incr[i]
            nxt = S.project(y)
            new_incr = y - nxt
            moved = max(moved, np.linalg.norm(new_incr - incr[i]))
            incr[i] = new_incr
            cur = nxt
        if np.linalg.norm(cur - start) < tol and moved < tol:
            return cur
    residual = max(distance(S, cur) for S in active)
    raise NotConverged("Dykstra iteration budget exhausted", last_iterate=cur, residual=float(residual))
