"""The Douglas-Rachford operator, its displacement map and their diagnostics.

For an ordered pair ``(A, B)`` the operator is ``T = Id - J_A + J_B R_A``.
Everything here broadcasts over a leading batch axis unless stated otherwise.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from . import numerics as nx
from .errors import ConditionNotMet, DimensionError, InternalInconsistency, NumericalBreakdown
from .operators import MonotoneOp, dual_negate, inverse_oracle, invert

DISPLACEMENT_AGREE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DrInstance:
    opA: MonotoneOp
    opB: MonotoneOp
    dim: int | None = None
    label: str = "instance"

    def __post_init__(self):
        if self.opA.dim != self.opB.dim:
            raise DimensionError("operators act on spaces of different dimension")
        if self.dim is None:
            object.__setattr__(self, "dim", self.opA.dim)
        elif self.dim != self.opA.dim:
            raise DimensionError("instance dimension differs from operator dimension")


def _check(inst: DrInstance, x) -> np.ndarray:
    x = nx.as_points(x)
    if x.shape[-1] != inst.dim:
        raise DimensionError(f"expected dimension {inst.dim}, got {x.shape[-1]}")
    return x


def _stages(inst: DrInstance, x: np.ndarray):
    ja = inst.opA.resolvent(x)
    ra = 2.0 * ja - x
    jb = inst.opB.resolvent(ra)
    return ja, ra, jb


def dr_apply(inst: DrInstance, x) -> np.ndarray:
    """``T x = x - J_A x + J_B R_A x``."""
    x = _check(inst, x)
    ja, _, jb = _stages(inst, x)
    return x - ja + jb


def displacement_forms(inst: DrInstance, x) -> tuple[np.ndarray, np.ndarray]:
    """``(J_A x - J_B R_A x, J_{A^-1} x + J_{B^-1} R_A x)``; both equal ``x - Tx``."""
    x = _check(inst, x)
    ja, ra, jb = _stages(inst, x)
    # the dual form goes through the inverse-resolvent oracles, which are
    # independent closed forms for most catalog operators
    return ja - jb, inverse_oracle(inst.opA)(x) + inverse_oracle(inst.opB)(ra)


def displacement(inst: DrInstance, x, check: bool = True) -> np.ndarray:
    """``x - Tx`` computed through the primal form.

    With ``check`` the dual form is evaluated too; a disagreement larger than
    ``1e-9 (1 + |x|)`` means a resolvent oracle is broken.
    """
    first, second = displacement_forms(inst, x)
    if check:
        x = np.asarray(x, dtype=float)
        gap = np.linalg.norm(first - second, axis=-1)
        bound = DISPLACEMENT_AGREE_TOL * (1.0 + np.linalg.norm(x, axis=-1))
        if np.any(gap > bound):
            raise InternalInconsistency(f"displacement forms disagree by {float(np.max(gap)):.3e}")
    return first


# ---------------------------------------------------------------------------
# iteration


@dataclass(frozen=True, eq=False)
class IterationTrace:
    """Governing sequence ``x_n = T^n x_0`` and its shadows.

    ``governing``, ``shadowA`` and ``shadowAinv`` have ``step_count + 1`` rows,
    ``differences`` has ``step_count`` rows.
    """

    governing: np.ndarray
    shadowA: np.ndarray
    shadowAinv: np.ndarray
    differences: np.ndarray
    diff_monotone: bool
    first_increase: int | None = None

    @property
    def step_count(self) -> int:
        return self.differences.shape[0]

    @property
    def diff_norms(self) -> np.ndarray:
        return np.linalg.norm(self.differences, axis=1)

    def to_csv(self, path) -> None:
        d = self.governing.shape[1]
        norms = self.diff_norms
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step"] + [f"x{i}" for i in range(d)] + [f"shadowA{i}" for i in range(d)] + ["diff_norm"])
            for n in range(self.governing.shape[0]):
                dn = repr(float(norms[n])) if n < len(norms) else ""
                w.writerow([n] + [repr(float(v)) for v in self.governing[n]]
                           + [repr(float(v)) for v in self.shadowA[n]] + [dn])


def iterate(inst: DrInstance, x0, n_steps: int) -> IterationTrace:
    """Run ``n_steps`` Douglas-Rachford steps from ``x0``."""
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    x = nx.as_point(x0, inst.dim)
    d = inst.dim
    gov = np.empty((n_steps + 1, d))
    shA = np.empty((n_steps + 1, d))
    JA, JB = inst.opA.resolvent, inst.opB.resolvent
    gov[0] = x
    for n in range(n_steps):
        ja = JA(x)
        shA[n] = ja
        x = x - ja + JB(2.0 * ja - x)
        if not np.all(np.isfinite(x)):
            raise NumericalBreakdown(f"non-finite iterate at step {n + 1}", step=n + 1)
        gov[n + 1] = x
    shA[n_steps] = JA(x)
    diffs = gov[:-1] - gov[1:]
    norms = np.linalg.norm(diffs, axis=1)
    # per-step slack scales with the iterate size: rounding in x_n - x_{n+1}
    slack = 1e-12 * np.maximum(1.0, np.linalg.norm(gov[1:-1], axis=1))
    bad = np.nonzero(norms[1:] > norms[:-1] + slack)[0]
    return IterationTrace(
        governing=gov,
        shadowA=shA,
        shadowAinv=gov - shA,
        differences=diffs,
        diff_monotone=bad.size == 0,
        first_increase=int(bad[0]) + 1 if bad.size else None,
    )


@dataclass(frozen=True)
class VEstimate:
    """Minimal displacement vector estimate.

    ``v`` is the last difference ``x_N - x_{N+1}`` (the primary value) and
    ``cesaro`` the averaged displacement ``(x_0 - x_N) / N``.
    """

    v: np.ndarray
    cesaro: np.ndarray
    gap: float
    tol: float
    steps: int

    @property
    def verdict(self) -> str:
        return "Converged" if self.gap <= self.tol else "Inconclusive"

    def to_dict(self) -> dict:
        return {"v": self.v.tolist(), "cesaro": self.cesaro.tolist(), "gap": self.gap,
                "tol": self.tol, "steps": self.steps, "verdict": self.verdict}


def estimate_v(trace: IterationTrace, tol: float = 1e-2, min_steps: int = 100) -> VEstimate:
    N = trace.step_count
    if N < min_steps:
        raise ValueError(f"need at least {min_steps} steps, trace has {N}")
    v = trace.differences[-1].copy()
    cesaro = (trace.governing[0] - trace.governing[-1]) / N
    return VEstimate(v=v, cesaro=cesaro, gap=float(np.linalg.norm(v - cesaro)), tol=tol, steps=N)


@dataclass(frozen=True)
class VSplit:
    v_D: np.ndarray
    v_R: np.ndarray
    v: np.ndarray
    condition: str
    orthogonality_defect: float
    sum_defect: float

    def to_dict(self) -> dict:
        return {"v_D": self.v_D.tolist(), "v_R": self.v_R.tolist(), "v": self.v.tolist(),
                "condition": self.condition, "orthogonality_defect": self.orthogonality_defect,
                "sum_defect": self.sum_defect}


def estimate_vD_vR(inst: DrInstance, trace: IterationTrace, min_steps: int = 100) -> VSplit:
    """Split the minimal displacement vector along the shadow sequences.

    ``v_R`` is the limit of ``J_A x_n - J_A x_{n+1}`` and ``v_D`` that of the
    ``J_{A^{-1}}`` shadows.  Refuses unless a sufficient condition for
    ``v = v_D + v_R`` is recognised for the instance.
    """
    from .ranges import NO_CONDITION, build_range_pair, classify_conditions

    if trace.step_count < min_steps:
        raise ValueError(f"need at least {min_steps} steps, trace has {trace.step_count}")
    tag = classify_conditions(inst, build_range_pair(inst))
    if tag == NO_CONDITION:
        raise ConditionNotMet(
            "no recognised sufficient condition makes v = v_D + v_R; "
            "the shadow limits need not split the minimal displacement vector"
        )
    v_R = trace.shadowA[-2] - trace.shadowA[-1]
    v_D = trace.shadowAinv[-2] - trace.shadowAinv[-1]
    v = trace.differences[-1]
    return VSplit(
        v_D=v_D,
        v_R=v_R,
        v=v.copy(),
        condition=tag,
        orthogonality_defect=float(abs(v_D @ v_R)),
        sum_defect=float(np.linalg.norm(v - v_D - v_R)),
    )


# ---------------------------------------------------------------------------
# range membership probe


class Verdict(str, enum.Enum):
    IN_CLOSURE = "InClosure"
    NOT_IN_CLOSURE = "NotInClosure"
    INCONCLUSIVE = "Inconclusive"


DEFAULT_SCHEDULE = tuple(2**k for k in range(1, 15))


@dataclass(frozen=True)
class ProbeConfig:
    n_schedule: tuple[int, ...] = DEFAULT_SCHEDULE
    inner_tol: float = 1e-10
    inner_max: int = 2000
    abs_tol: float = 1e-6
    stable_rel: float = 0.01


@dataclass(frozen=True)
class MembershipProbeResult:
    w: np.ndarray
    n_schedule: list
    scaled_norms: list
    iterate_norms: list
    residuals: list
    inner_converged: list
    verdict: Verdict
    residual_estimate: np.ndarray
    solutions: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "w": self.w.tolist(),
            "n_schedule": list(self.n_schedule),
            "scaled_norms": list(self.scaled_norms),
            "iterate_norms": list(self.iterate_norms),
            "residuals": list(self.residuals),
            "inner_converged": list(self.inner_converged),
            "verdict": self.verdict.value,
            "residual_estimate": self.residual_estimate.tolist(),
        }


def _shifted_residual(inst, w, eps, x):
    return eps * x + displacement(inst, x, check=False) - w


def solve_shifted(inst: DrInstance, w, eps: float, x_init, tol: float, max_iter: int):
    """Solve ``(1 + eps) x - T x = w``.

    The map ``x -> (w + T x) / (1 + eps)`` is a contraction with factor
    ``1 / (1 + eps)``, which is far too slow for small ``eps``; the root is
    located with Powell's hybrid method and the contraction is only used to
    polish.  Returns ``(x, residual_norm, converged, evaluations)``.
    """
    w = nx.as_point(w, inst.dim)
    x = nx.as_point(x_init, inst.dim)
    fun = lambda z: _shifted_residual(inst, w, eps, z)
    res = np.linalg.norm(fun(x))
    evals = 1

    def floor(z):
        # rounding floor of the residual evaluation at the current magnitude
        return 64 * np.finfo(float).eps * (1.0 + np.linalg.norm(z) + np.linalg.norm(w))

    for _ in range(8):
        if res <= max(tol, floor(x)) or evals >= max_iter:
            break
        sol = scipy.optimize.root(fun, x, method="hybr",
                                  options={"xtol": 1e-15, "maxfev": max(10, max_iter - evals)})
        evals += int(sol.nfev)
        cand = sol.x
        r_c = np.linalg.norm(fun(cand))
        if r_c < res:
            x, res = cand, r_c
        else:
            break
    # contraction polish: never increases the distance to the root
    T_over = 1.0 / (1.0 + eps)
    while res > max(tol, floor(x)) and evals < max_iter:
        x = T_over * (w + dr_apply(inst, x))
        res = np.linalg.norm(fun(x))
        evals += 1
    return x, float(res), bool(res <= max(tol, floor(x))), evals


def probe_range_membership(inst: DrInstance, w, config: ProbeConfig | None = None, **overrides) -> MembershipProbeResult:
    """Test whether ``w`` lies in the closure of ``ran(Id - T)``.

    For each ``n`` in the schedule, ``x_n`` solves ``w = (1 + 1/n^2) x_n - T x_n``,
    i.e. ``(x_n, w - x_n / n^2)`` is on the graph of ``Id - T``.  Then ``w`` is
    in the closure of the range exactly when ``x_n / n^2 -> 0``.
    """
    cfg = config or ProbeConfig()
    if overrides:
        cfg = ProbeConfig(**{**cfg.__dict__, **overrides})
    sched = [int(n) for n in cfg.n_schedule]
    if any(b <= a for a, b in zip(sched, sched[1:])) or not sched or sched[0] < 1:
        raise ValueError("n_schedule must be strictly increasing positive integers")
    w = nx.as_point(w, inst.dim)
    sols, scaled, norms, resids, flags = [], [], [], [], []
    prev = []
    for n in sched:
        eps = 1.0 / (n * n)
        starts = [np.zeros(inst.dim)]
        if prev:
            m, x_m = prev[-1]
            starts += [x_m, x_m * (n / m) ** 2]
        x0 = min(starts, key=lambda s: np.linalg.norm(_shifted_residual(inst, w, eps, s)))
        x, r, ok, _ = solve_shifted(inst, w, eps, x0, cfg.inner_tol / (n * n), cfg.inner_max)
        prev.append((n, x))
        sols.append(x)
        nrm = float(np.linalg.norm(x))
        norms.append(nrm)
        scaled.append(nrm / (n * n))
        resids.append(r)
        flags.append(ok)
    verdict = Verdict.INCONCLUSIVE
    if scaled[-1] < cfg.abs_tol:
        verdict = Verdict.IN_CLOSURE
    elif len(scaled) >= 3:
        last = scaled[-3:]
        stable = all(abs(a - b) < cfg.stable_rel * max(a, b) for i, a in enumerate(last) for b in last[i + 1:])
        if stable and min(last) > 10 * cfg.abs_tol:
            verdict = Verdict.NOT_IN_CLOSURE
    n_last = sched[-1]
    return MembershipProbeResult(
        w=w,
        n_schedule=sched,
        scaled_norms=scaled,
        iterate_norms=norms,
        residuals=resids,
        inner_converged=flags,
        verdict=verdict,
        residual_estimate=sols[-1] / (n_last * n_last),
        solutions=np.array(sols),
    )


# ---------------------------------------------------------------------------
# algebraic identities


@dataclass(frozen=True)
class LemmaTerms:
    lhs: np.ndarray
    rhs: np.ndarray
    square: np.ndarray
    scale: np.ndarray

    @property
    def defect(self) -> np.ndarray:
        return np.abs(self.lhs - self.rhs - self.square)

    @property
    def slack(self) -> np.ndarray:
        return self.lhs - self.rhs


def lemma_terms(inst: DrInstance, a, b, a_star, x) -> LemmaTerms:
    """Both sides of the graph inequality linking ``Id - T`` with ``A`` and ``B``.

    ``lhs = <x - (a + a*), x - Tx - (a - b)>`` and
    ``rhs = <J_A x - a, J_{A^-1} x - a*> + <J_B R_A x - b, J_{B^-1} R_A x - (a - a* - b)>``.
    Their difference is exactly ``|x - Tx - (a - b)|^2``.
    """
    x = _check(inst, x)
    a, b, a_star = (np.asarray(v, dtype=float) for v in (a, b, a_star))
    ja, ra, jb = _stages(inst, x)
    disp = ja - jb
    dot = lambda p, q: np.sum(p * q, axis=-1)
    lhs = dot(x - (a + a_star), disp - (a - b))
    ja_inv = inverse_oracle(inst.opA)(x)
    jb_inv = inverse_oracle(inst.opB)(ra)
    rhs = dot(ja - a, ja_inv - a_star) + dot(jb - b, jb_inv - (a - a_star - b))
    sq = dot(disp - (a - b), disp - (a - b))
    scale = 1.0 + sum(dot(v, v) for v in (x, a, b, a_star, ja, jb))
    return LemmaTerms(lhs=lhs, rhs=rhs, square=sq, scale=scale)


def check_lemma_identity(inst: DrInstance, a, b, a_star, x) -> float:
    """Largest ``|lhs - rhs - |x - Tx - (a - b)|^2|`` over the batch."""
    return float(np.max(lemma_terms(inst, a, b, a_star, x).defect))


def self_dual_instance(inst: DrInstance) -> DrInstance:
    return DrInstance(invert(inst.opA), dual_negate(inst.opB), inst.dim, label=f"dual({inst.label})")


def check_self_duality(inst: DrInstance, x) -> float:
    """``max |T_(A,B) x - T_(A^-1, B^-dual) x|``."""
    diff = dr_apply(inst, x) - dr_apply(self_dual_instance(inst), x)
    return float(np.max(np.linalg.norm(diff, axis=-1)))


def check_complement_identity(inst: DrInstance, x) -> float:
    """``max |T_(A,B) x - (x - T_(A,B^-1) x)|``."""
    x = _check(inst, x)
    other = DrInstance(inst.opA, invert(inst.opB), inst.dim)
    diff = dr_apply(inst, x) - (x - dr_apply(other, x))
    return float(np.max(np.linalg.norm(diff, axis=-1)))


def is_firmly_nonexpansive(f, x, y, tol: float = 1e-10) -> bool:
    """``<f x - f y, x - y> >= |f x - f y|^2`` row-wise, up to ``tol``."""
    fx, fy = f(x), f(y)
    d = fx - fy
    lhs = np.sum(d * (x - y), axis=-1)
    rhs = np.sum(d * d, axis=-1)
    return bool(np.all(lhs >= rhs - tol * (1.0 + rhs)))


def log2_schedule(lo: int, hi: int) -> tuple[int, ...]:
    return tuple(2**k for k in range(int(math.log2(lo)), int(math.log2(hi)) + 1))
