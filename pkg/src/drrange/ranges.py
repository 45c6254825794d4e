"""Domain/range sets of an operator pair and the decomposition of ``v``.

``D = dom A - dom B`` and ``R = ran A + ran B``.  Their closures are built in
closed form when the catalog allows it; ``v_D`` and ``v_R`` are the
projections of the origin onto them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics as nx
from .errors import DescriptorMissing, InexactRangePair, NotConverged
from .operators import MonotoneOp, Rectangular
from .splitting import DrInstance

AFFINE_DOM_RAN = "AffineDomRan"
CONE_POLAR_CLOSED = "ConePolarClosed"
BOUNDED_DOM_OR_RAN = "BoundedDomOrRan"
FULL_DOM_OR_RAN = "FullDomOrRan"
RECTANGULAR_FAT_SETS = "RectangularFatSets"
NORMAL_CONE_PAIR = "NormalConePair"
FINITE_DIM_FALLBACK = "FiniteDimFallback"
NO_CONDITION = "NoConditionHolds"

# order in which classify_conditions tests the tags
CONDITION_ORDER = (
    BOUNDED_DOM_OR_RAN,
    FULL_DOM_OR_RAN,
    AFFINE_DOM_RAN,
    CONE_POLAR_CLOSED,
    RECTANGULAR_FAT_SETS,
    NORMAL_CONE_PAIR,
    FINITE_DIM_FALLBACK,
)


# ---------------------------------------------------------------------------
# Minkowski arithmetic on catalog descriptors


def _as_box(S: nx.ConvexSet):
    """Coordinate bounds for axis-aligned sets, else None."""
    d = S.dim
    if isinstance(S, nx.Box):
        return S.lower, S.upper
    if isinstance(S, nx.WholeSpace):
        return np.full(d, -np.inf), np.full(d, np.inf)
    if isinstance(S, nx.Singleton):
        return S.point, S.point
    if isinstance(S, nx.Orthant):
        return np.where(S.signs > 0, 0.0, -np.inf), np.where(S.signs > 0, np.inf, 0.0)
    if isinstance(S, nx.Ray):
        nz = np.flatnonzero(np.abs(S.direction) > 1e-15)
        if nz.size != 1:
            return None
        lo, hi = np.zeros(d), np.zeros(d)
        i = nz[0]
        if S.direction[i] > 0:
            hi[i] = np.inf
        else:
            lo[i] = -np.inf
        return lo, hi
    if isinstance(S, nx.AffineSubspace):
        P = S.basis @ S.basis.T
        diag = np.diag(P)
        if not (np.allclose(P, np.diag(diag), atol=1e-12) and np.allclose(diag * (1 - diag), 0.0, atol=1e-12)):
            return None
        free = diag > 0.5
        lo = np.where(free, -np.inf, S.anchor)
        hi = np.where(free, np.inf, S.anchor)
        return lo, hi
    if isinstance(S, nx.Halfspace):
        nz = np.flatnonzero(np.abs(S.normal) > 1e-15)
        if nz.size != 1:
            return None
        i = nz[0]
        lo, hi = np.full(d, -np.inf), np.full(d, np.inf)
        bound = S.offset / S.normal[i]
        if S.normal[i] > 0:
            hi[i] = bound
        else:
            lo[i] = bound
        return lo, hi
    return None


def _box_to_catalog(lo, hi) -> nx.ConvexSet:
    with np.errstate(invalid="ignore"):
        if np.all(np.isinf(lo)) and np.all(np.isinf(hi)):
            return nx.WholeSpace(len(lo))
        if np.all(lo == hi):
            return nx.Singleton(lo)
    B = nx.Box(lo, hi)
    return nx.recession_cone(B) if B.is_cone() else B


def _support(S: nx.ConvexSet, a: np.ndarray) -> float | None:
    """``sup_{s in S} <a, s>`` for bounded catalog sets."""
    if isinstance(S, nx.Singleton):
        return float(a @ S.point)
    if isinstance(S, nx.Ball):
        return float(a @ S.center + S.radius * np.linalg.norm(a))
    if isinstance(S, nx.Box) and S.is_bounded():
        return float(np.sum(np.maximum(a * S.lower, a * S.upper)))
    if isinstance(S, nx.ShiftedSet):
        inner = _support(S.base, a)
        return None if inner is None else inner + float(a @ S.shift)
    return None


def _sum_ordered(S1: nx.ConvexSet, S2: nx.ConvexSet):
    d = S1.dim
    if isinstance(S1, nx.WholeSpace):
        return S1
    if isinstance(S1, nx.Singleton):
        return nx.translate(S2, S1.point)
    if isinstance(S1, nx.ShiftedSet):
        inner = minkowski_sum(S1.base, S2)
        return None if inner is None else nx.translate(inner, S1.shift)
    if isinstance(S1, nx.Ball) and isinstance(S2, nx.Ball):
        return nx.Ball(S1.center + S2.center, S1.radius + S2.radius)
    if isinstance(S1, nx.AffineSubspace) and isinstance(S2, nx.AffineSubspace):
        return nx.affine(S1.anchor + S2.anchor, np.hstack([S1.basis, S2.basis]))
    if isinstance(S1, nx.Ball) and isinstance(S2, nx.AffineSubspace):
        if S2.rank == d:
            return nx.WholeSpace(d)
        return nx.SumBallSubspace(nx.Ball(S1.center + S2.anchor, S1.radius), S2)
    if isinstance(S1, nx.SumBallSubspace) and isinstance(S2, nx.Ball):
        return nx.SumBallSubspace(nx.Ball(S1.ball.center + S2.center, S1.ball.radius + S2.radius), S1.subspace)
    if isinstance(S1, nx.SumBallSubspace) and isinstance(S2, nx.AffineSubspace):
        Q = nx.orthonormalize(np.hstack([S1.subspace.basis, S2.basis]), dim=d)
        if Q.shape[1] == d:
            return nx.WholeSpace(d)
        return nx.SumBallSubspace(nx.Ball(S1.ball.center + S2.anchor, S1.ball.radius), nx.AffineSubspace(np.zeros(d), Q))
    if isinstance(S1, nx.SumBallSubspace) and isinstance(S2, nx.SumBallSubspace):
        partial = minkowski_sum(S1, S2.ball)
        return minkowski_sum(partial, S2.subspace)
    if isinstance(S1, nx.Halfspace):
        a = S1.normal
        if isinstance(S2, nx.Halfspace):
            cos = a @ S2.normal / (np.linalg.norm(a) * np.linalg.norm(S2.normal))
            if cos > 1 - 1e-12:
                k = np.linalg.norm(a) / np.linalg.norm(S2.normal)
                return nx.Halfspace(a, S1.offset + k * S2.offset)
            return nx.WholeSpace(d)
        if isinstance(S2, nx.Ray):
            return S1 if a @ S2.direction <= 1e-15 else nx.WholeSpace(d)
        if isinstance(S2, nx.AffineSubspace):
            if np.linalg.norm(a @ S2.basis) > 1e-12 * np.linalg.norm(a):
                return nx.WholeSpace(d)
            return nx.Halfspace(a, S1.offset + a @ S2.anchor)
        if isinstance(S2, nx.SumBallSubspace):
            if np.linalg.norm(a @ S2.subspace.basis) > 1e-12 * np.linalg.norm(a):
                return nx.WholeSpace(d)
            return minkowski_sum(S1, S2.ball)
        h = _support(S2, a)
        if h is not None:
            return nx.Halfspace(a, S1.offset + h)
    b1, b2 = _as_box(S1), _as_box(S2)
    if b1 is not None and b2 is not None:
        with np.errstate(invalid="ignore"):
            lo, hi = b1[0] + b2[0], b1[1] + b2[1]
        return _box_to_catalog(lo, hi)
    return None


def minkowski_sum(S1: nx.ConvexSet, S2: nx.ConvexSet) -> nx.ConvexSet | None:
    """Closure of ``S1 + S2`` as a catalog descriptor, or None without a closed form."""
    if S1.dim != S2.dim:
        raise ValueError("dimension mismatch in Minkowski sum")
    out = _sum_ordered(S1, S2)
    if out is None:
        out = _sum_ordered(S2, S1)
    return out


def sample_set(S: nx.ConvexSet, n: int, rng: np.random.Generator, scale: float = 5.0) -> np.ndarray:
    """Points of ``S``: projections of Gaussian points plus points pulled inward."""
    g = rng.normal(scale=scale, size=(n, S.dim))
    p = S.project(g)
    inner = S.project(0.5 * (p + S.project(np.zeros(S.dim))))
    return np.vstack([p, inner])


# ---------------------------------------------------------------------------
# range pairs


@dataclass(frozen=True, eq=False)
class RangePair:
    """Closures of ``D = dom A - dom B`` and ``R = ran A + ran B``.

    When ``exact`` is false at least one of the descriptors had no closed form;
    the corresponding ``*_cloud`` holds sampled points of the set instead.
    """

    D_descr: nx.ConvexSet | None
    R_descr: nx.ConvexSet | None
    exact: bool
    D_cloud: np.ndarray | None = field(default=None, repr=False)
    R_cloud: np.ndarray | None = field(default=None, repr=False)

    def contains(self, w, tol: float = nx.MEMBER_TOL) -> bool:
        if not self.exact:
            raise InexactRangePair("membership needs closed-form descriptors")
        return self.D_descr.contains(w, tol) and self.R_descr.contains(w, tol)


def _need(op: MonotoneOp):
    if op.dom is None or op.ran is None:
        raise DescriptorMissing(f"{op.label} carries no domain/range descriptor")


def build_range_pair(inst: DrInstance, n_samples: int = 60, seed: int = 0) -> RangePair:
    A, B = inst.opA, inst.opB
    _need(A)
    _need(B)
    D = minkowski_sum(A.dom, nx.reflect(B.dom))
    R = minkowski_sum(A.ran, B.ran)
    if D is not None and R is not None:
        return RangePair(D, R, True)
    rng = np.random.default_rng(seed)

    def cloud(S1, S2, sign):
        p1 = sample_set(S1, n_samples, rng)
        p2 = sample_set(S2, n_samples, rng)
        return (p1[:, None, :] + sign * p2[None, :, :]).reshape(-1, inst.dim)

    return RangePair(
        D, R, False,
        D_cloud=None if D is not None else cloud(A.dom, B.dom, -1.0),
        R_cloud=None if R is not None else cloud(A.ran, B.ran, 1.0),
    )


def compute_vD_vR(pair: RangePair) -> tuple[np.ndarray, np.ndarray]:
    """``(v_D, v_R)``: projections of the origin onto ``cl D`` and ``cl R``."""
    if not pair.exact:
        raise InexactRangePair("v_D and v_R need closed-form descriptors")
    o = np.zeros(pair.D_descr.dim)
    return pair.D_descr.project(o), pair.R_descr.project(o)


# ---------------------------------------------------------------------------
# sufficient conditions


def _is_affine(S) -> bool:
    return isinstance(S, (nx.AffineSubspace, nx.Singleton, nx.WholeSpace))


def _is_full(S) -> bool:
    return isinstance(S, nx.WholeSpace)


def range_identity_premise(inst: DrInstance) -> str | None:
    """Which hypothesis guarantees ``cl ran(Id - T) = cl(D cap R)``, if any.

    Returns ``"BothRectangular"``, ``"FullDomainRectangular"``,
    ``"FullRangeRectangular"`` or None.
    """
    ops = (inst.opA, inst.opB)
    rect = [op.rectangular is Rectangular.YES for op in ops]
    if all(rect):
        return "BothRectangular"
    for op, r in zip(ops, rect):
        if r and op.dom is not None and _is_full(op.dom):
            return "FullDomainRectangular"
    for op, r in zip(ops, rect):
        if r and op.ran is not None and _is_full(op.ran):
            return "FullRangeRectangular"
    return None


def classify_conditions(inst: DrInstance, pair: RangePair) -> str:
    """First recognised sufficient condition for ``v = v_D + v_R``.

    The tag is decided from descriptor variants and rectangularity flags only.
    ``FiniteDimFallback`` is returned when none of the structural tags match
    but the range identity itself is guaranteed (every instance here is
    finite-dimensional); otherwise ``NoConditionHolds``.
    """
    ops = (inst.opA, inst.opB)
    for op in ops:
        _need(op)
    if any(op.dom.is_bounded() or op.ran.is_bounded() for op in ops):
        return BOUNDED_DOM_OR_RAN
    if any(_is_full(op.dom) or _is_full(op.ran) for op in ops):
        return FULL_DOM_OR_RAN
    if any(_is_affine(op.dom) and _is_affine(op.ran) for op in ops):
        return AFFINE_DOM_RAN
    if all(op.normal_set is not None and op.normal_set.is_cone() for op in ops):
        # polars of catalog cones are polyhedral, so their sum is closed
        return CONE_POLAR_CLOSED
    rect = all(op.rectangular is Rectangular.YES for op in ops)
    if rect and pair.exact and pair.D_descr.has_interior() and pair.R_descr.has_interior():
        return RECTANGULAR_FAT_SETS
    if all(op.normal_set is not None for op in ops):
        return NORMAL_CONE_PAIR
    if range_identity_premise(inst) is not None:
        return FINITE_DIM_FALLBACK
    return NO_CONDITION


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class DisplacementReport:
    v: np.ndarray
    v_D: np.ndarray
    v_R: np.ndarray
    condition: str | None
    premise: str | None
    orthogonality_defect: float
    sum_defect: float
    intersection_defect: float
    closure_gap_note: str
    tol: float = 1e-3

    @property
    def ok(self) -> bool:
        return self.condition in (None, NO_CONDITION) or self.sum_defect <= self.tol

    def to_dict(self) -> dict:
        return {
            "v": self.v.tolist(),
            "v_D": self.v_D.tolist(),
            "v_R": self.v_R.tolist(),
            "condition": self.condition,
            "premise": self.premise,
            "orthogonality_defect": self.orthogonality_defect,
            "sum_defect": self.sum_defect,
            "intersection_defect": self.intersection_defect,
            "closure_gap_note": self.closure_gap_note,
            "tol": self.tol,
            "ok": self.ok,
        }


def check_decomposition(pair: RangePair, v_est, condition: str | None = None,
                        premise: str | None = None, tol: float = 1e-3) -> DisplacementReport:
    """Compare an estimate of ``v`` with ``v_D + v_R`` and with ``P_{cl D cap cl R}(0)``."""
    v_D, v_R = compute_vD_vR(pair)
    v_est = nx.as_point(v_est, pair.D_descr.dim)
    s = v_D + v_R
    try:
        p = nx.project_intersection([pair.D_descr, pair.R_descr], np.zeros_like(s))
        inter = float(np.linalg.norm(p - s))
        gap = float(np.linalg.norm(v_est - p))
        note = (f"|v - P(clD cap clR)(0)| = {gap:.3e}; a gap well above the estimator "
                f"tolerance would indicate cl(D cap R) smaller than clD cap clR")
    except NotConverged as exc:
        inter = float("nan")
        note = f"projection onto clD cap clR did not settle (residual {exc.residual:.3e})"
    return DisplacementReport(
        v=v_est,
        v_D=v_D,
        v_R=v_R,
        condition=condition,
        premise=premise,
        orthogonality_defect=float(abs(v_D @ v_R)),
        sum_defect=float(np.linalg.norm(v_est - s)),
        intersection_defect=inter,
        closure_gap_note=note,
        tol=tol,
    )


def diagnose(inst: DrInstance, x0=None, steps: int = 10_000, tol: float = 1e-3) -> DisplacementReport:
    """Iterate, estimate ``v`` and build the full decomposition report."""
    from .splitting import estimate_v, iterate

    x0 = np.zeros(inst.dim) if x0 is None else x0
    trace = iterate(inst, x0, steps)
    est = estimate_v(trace)
    pair = build_range_pair(inst)
    tag = classify_conditions(inst, pair)
    return check_decomposition(pair, est.v, condition=tag, premise=range_identity_premise(inst), tol=tol)
