"""Maximally monotone operators represented by their resolvents.

An operator is never stored as a set-valued map.  What the splitting code
needs is ``J_A = (Id + A)^{-1}`` at unit parameter, plus optional closed-form
descriptors for ``cl dom A`` and ``cl ran A`` and a flag recording whether the
operator is rectangular (3* monotone).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import scipy.linalg

from . import numerics as nx
from .errors import ConstructionError, DimensionError, OperatorError


class Rectangular(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True, eq=False)
class MonotoneOp:
    """A maximally monotone operator on R^dim.

    ``resolvent`` maps an array with last axis ``dim`` to an array of the same
    shape.  ``inverse`` optionally gives ``J_{A^{-1}}`` through its own closed
    form; when it is missing ``x - J_A x`` is used.  ``normal_set`` is set when
    the operator is the normal cone of that set; range classification uses it.
    """

    resolvent: Callable[[np.ndarray], np.ndarray]
    dim: int
    dom: nx.ConvexSet | None = None
    ran: nx.ConvexSet | None = None
    rectangular: Rectangular = Rectangular.UNKNOWN
    label: str = "op"
    normal_set: nx.ConvexSet | None = None
    spec: dict | None = None
    inverse: Callable[[np.ndarray], np.ndarray] | None = None

    def __repr__(self):
        return f"MonotoneOp({self.label}, dim={self.dim}, rectangular={self.rectangular.value})"


@dataclass(frozen=True)
class GraphPoint:
    primal: np.ndarray
    dual: np.ndarray


def _eval(op: MonotoneOp, x) -> tuple[np.ndarray, np.ndarray]:
    x = nx.as_points(x)
    if x.shape[-1] != op.dim:
        raise DimensionError(f"{op.label}: expected dimension {op.dim}, got {x.shape[-1]}")
    try:
        y = op.resolvent(x)
    except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
        raise OperatorError(f"{op.label}: resolvent evaluation failed: {exc}") from exc
    return x, y


def resolvent(op: MonotoneOp, x) -> np.ndarray:
    return _eval(op, x)[1]


def reflected_resolvent(op: MonotoneOp, x) -> np.ndarray:
    x, y = _eval(op, x)
    return 2.0 * y - x


def inverse_resolvent(op: MonotoneOp, x) -> np.ndarray:
    """``J_{A^{-1}} x``, from the operator's own oracle if it has one, else ``x - J_A x``."""
    if op.inverse is None:
        x, y = _eval(op, x)
        return x - y
    x = nx.as_points(x)
    if x.shape[-1] != op.dim:
        raise DimensionError(f"{op.label}: expected dimension {op.dim}, got {x.shape[-1]}")
    try:
        return op.inverse(x)
    except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
        raise OperatorError(f"{op.label}: inverse resolvent evaluation failed: {exc}") from exc


def inverse_oracle(op: MonotoneOp) -> Callable[[np.ndarray], np.ndarray]:
    """A callable for ``J_{A^{-1}}`` (the closed form if known)."""
    if op.inverse is not None:
        return op.inverse
    J = op.resolvent
    return lambda x: x - J(x)


def minty_graph_point(op: MonotoneOp, x) -> GraphPoint:
    """The graph point ``(J_A x, x - J_A x)``."""
    x, y = _eval(op, x)
    return GraphPoint(y, x - y)


def invert(op: MonotoneOp) -> MonotoneOp:
    return MonotoneOp(
        resolvent=inverse_oracle(op),
        inverse=op.resolvent,
        dim=op.dim,
        dom=op.ran,
        ran=op.dom,
        rectangular=op.rectangular,
        label=f"inv({op.label})",
        spec={"op": "invert", "of": op.spec} if op.spec else None,
    )


def dual_negate(op: MonotoneOp) -> MonotoneOp:
    """The operator ``(-Id) o A^{-1} o (-Id)``; its resolvent is ``x + J_A(-x)``."""
    J = op.resolvent
    Jinv = inverse_oracle(op)
    return MonotoneOp(
        resolvent=lambda x: -Jinv(-x),
        inverse=lambda x: -J(-x),
        dim=op.dim,
        dom=None if op.ran is None else nx.reflect(op.ran),
        ran=None if op.dom is None else nx.reflect(op.dom),
        rectangular=op.rectangular,
        label=f"dualneg({op.label})",
        spec={"op": "dual_negate", "of": op.spec} if op.spec else None,
    )


def relabel(op: MonotoneOp, label: str) -> MonotoneOp:
    return replace(op, label=label)


# ---------------------------------------------------------------------------
# catalog


def normal_cone(S: nx.ConvexSet, label: str | None = None) -> MonotoneOp:
    """``N_S``, whose resolvent is the projection onto ``S``.

    ``cl ran N_S`` is the polar of the recession cone of ``S``.  For a cone the
    inverse resolvent is the projection onto the polar cone (Moreau).
    """
    inverse = nx.polar_cone(S).project if S.is_cone() else None
    return MonotoneOp(
        resolvent=S.project,
        inverse=inverse,
        dim=S.dim,
        dom=S,
        ran=nx.polar_cone(nx.recession_cone(S)),
        rectangular=Rectangular.YES,
        label=label or f"N[{type(S).__name__}]",
        normal_set=S,
        spec={"op": "normal_cone", "set": S.to_dict()},
    )


def skew_matrix(gamma: float, dim: int, sign: float = 1.0) -> np.ndarray:
    """Block-diagonal ``S`` with 2x2 blocks ``[[0, -sqrt(g)], [sqrt(g), 0]]``, so ``S^2 = -g Id``."""
    if dim % 2:
        raise ConstructionError("skew rotator needs an even dimension")
    if not gamma > 0:
        raise ConstructionError("gamma must be positive")
    s = np.sqrt(gamma)
    block = np.array([[0.0, -s], [s, 0.0]])
    return sign * np.kron(np.eye(dim // 2), block)


def skew_rotator(gamma: float = 1.0, dim: int = 2, sign: float = 1.0) -> MonotoneOp:
    """The linear skew operator ``sign * S``; ``J = (Id - sign*S) / (1 + gamma)``.

    Skew operators are never rectangular (their quadratic form vanishes while
    the graph is a full-dimensional subspace).
    """
    if sign not in (1, -1, 1.0, -1.0):
        raise ConstructionError("sign must be +1 or -1")
    S = skew_matrix(gamma, dim, sign)
    J = (np.eye(dim) - S) / (1.0 + gamma)
    # S^{-1} = -S/gamma, so J_{S^{-1}} = (gamma Id + S) / (1 + gamma)
    Jinv = (gamma * np.eye(dim) + S) / (1.0 + gamma)
    return MonotoneOp(
        resolvent=lambda x: x @ J.T,
        inverse=lambda x: x @ Jinv.T,
        dim=dim,
        dom=nx.WholeSpace(dim),
        ran=nx.WholeSpace(dim),
        rectangular=Rectangular.NO,
        label=f"skew(g={gamma:g},{'+' if sign > 0 else '-'})",
        spec={"op": "skew_rotator", "gamma": gamma, "dim": dim, "sign": int(sign)},
    )


def affine_normal(u, u_perp, U) -> MonotoneOp:
    """``u + N_{u_perp + U}`` for a linear subspace ``U`` with ``u in U`` and ``u_perp in U^perp``.

    ``U`` is a list of spanning vectors.  The resolvent is ``x -> P_{u_perp+U}(x - u)``.
    """
    u = nx.as_point(u)
    u_perp = nx.as_point(u_perp, u.shape[0])
    d = u.shape[0]
    rows = np.asarray(U, dtype=float)
    if rows.size == 0:
        Q = np.zeros((d, 0))
    else:
        rows = np.atleast_2d(rows)
        if rows.shape[1] != d:
            raise ConstructionError("basis vectors of U must have the dimension of u")
        Q = nx.orthonormalize(rows.T, dim=d)
    Qc = nx.orthogonal_complement(Q)
    if np.linalg.norm(u @ Qc) > 1e-10:
        raise ConstructionError("u must lie in U")
    if np.linalg.norm(u_perp @ Q) > 1e-10:
        raise ConstructionError("u_perp must lie in the orthogonal complement of U")
    dom = nx.affine(u_perp, Q)
    ran = nx.affine(u, Qc)

    def J(x):
        return dom.project(x - u)

    perp = nx.AffineSubspace(np.zeros(d), Qc) if Qc.shape[1] else nx.zero(d)

    return MonotoneOp(
        resolvent=J,
        inverse=lambda x: u + perp.project(x) - u_perp,
        dim=d,
        dom=dom,
        ran=ran,
        rectangular=Rectangular.YES,
        label="affine_normal",
        spec={"op": "affine_normal", "u": u.tolist(), "u_perp": u_perp.tolist(), "U": Q.T.tolist()},
    )


def psd_linear(M, label: str = "linear") -> MonotoneOp:
    """Linear operator ``x -> M x`` with ``M + M^T`` positive semidefinite.

    The resolvent solves ``(I + M) y = x`` with an LU factorisation computed once.
    """
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConstructionError("M must be square")
    d = M.shape[0]
    sym = 0.5 * (M + M.T)
    lam_min = np.linalg.eigvalsh(sym).min() if d else 0.0
    if lam_min < -1e-12 * max(1.0, np.abs(M).max()):
        raise ConstructionError("M + M^T is not positive semidefinite")
    lu = scipy.linalg.lu_factor(np.eye(d) + M)
    # column space of M is the range
    U_, s, _ = np.linalg.svd(M)
    rank = int(np.sum(s > 1e-12 * max(1.0, s.max(initial=0.0))))
    ran = nx.affine(np.zeros(d), U_[:, :rank])
    symmetric = np.allclose(M, M.T, atol=1e-14)

    def J(x):
        return scipy.linalg.lu_solve(lu, np.asarray(x).T).T

    return MonotoneOp(
        resolvent=J,
        inverse=lambda x: J(x) @ M.T,
        dim=d,
        dom=nx.WholeSpace(d),
        ran=ran,
        rectangular=Rectangular.YES if symmetric else Rectangular.UNKNOWN,
        label=label,
        spec={"op": "psd_linear", "M": M.tolist()},
    )


def soft_threshold(x, weight: float):
    return np.sign(x) * np.maximum(np.abs(x) - weight, 0.0)


def prox_of(kind: str, dim: int | None = None, **params) -> MonotoneOp:
    """Subdifferential of a simple convex function, via its prox.

    kind ``"indicator"`` (``set=``), ``"quadratic"`` (``center=``, f = 0.5 |x - c|^2)
    or ``"l1"`` (``weight=``, ``dim=``).  Subdifferentials are always rectangular.
    """
    if kind == "indicator":
        op = normal_cone(params["set"])
        return replace(op, label=f"prox[indicator {type(params['set']).__name__}]",
                       spec={"op": "prox_of", "f": {"kind": "indicator", "set": params["set"].to_dict()}})
    if kind == "quadratic":
        c = nx.as_point(params["center"])
        d = c.shape[0]
        return MonotoneOp(
            resolvent=lambda x: 0.5 * (x + c),
            inverse=lambda x: 0.5 * (x - c),
            dim=d,
            dom=nx.WholeSpace(d),
            ran=nx.WholeSpace(d),
            rectangular=Rectangular.YES,
            label="prox[quadratic]",
            spec={"op": "prox_of", "f": {"kind": "quadratic", "center": c.tolist()}},
        )
    if kind == "l1":
        w = float(params.get("weight", 1.0))
        if w < 0:
            raise ConstructionError("l1 weight must be nonnegative")
        if dim is None:
            raise ConstructionError("l1 prox needs dim")
        ran = nx.zero(dim) if w == 0 else nx.Box(-w * np.ones(dim), w * np.ones(dim))
        return MonotoneOp(
            resolvent=lambda x: soft_threshold(x, w),
            inverse=lambda x: np.clip(x, -w, w),
            dim=dim,
            dom=nx.WholeSpace(dim),
            ran=ran,
            rectangular=Rectangular.YES,
            label="prox[l1]",
            spec={"op": "prox_of", "dim": dim, "f": {"kind": "l1", "weight": w}},
        )
    raise ConstructionError(f"unknown function kind {kind!r}")


def op_from_dict(spec: dict, dim: int | None = None) -> MonotoneOp:
    """Build an operator from its instance-file description."""
    name = spec.get("op")
    if name == "normal_cone":
        return normal_cone(nx.set_from_dict(spec["set"]))
    if name == "skew_rotator":
        return skew_rotator(float(spec.get("gamma", 1.0)), int(spec.get("dim", dim or 2)), float(spec.get("sign", 1)))
    if name == "affine_normal":
        return affine_normal(spec["u"], spec["u_perp"], spec["U"])
    if name == "psd_linear":
        return psd_linear(spec["M"])
    if name == "prox_of":
        f = dict(spec["f"])
        kind = f.pop("kind")
        if "set" in f:
            f["set"] = nx.set_from_dict(f["set"])
        return prox_of(kind, dim=spec.get("dim", dim), **f)
    if name == "invert":
        return invert(op_from_dict(spec["of"], dim))
    if name == "dual_negate":
        return dual_negate(op_from_dict(spec["of"], dim))
    if name == "product":
        from .product import lift

        return lift([op_from_dict(f, dim) for f in spec["factors"]]).lifted.opA
    raise ConstructionError(f"unknown operator constructor {name!r}")
