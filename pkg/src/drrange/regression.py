"""Named instance catalog and the built-in regression checks.

Each check recomputes a closed-form fact about a small instance and reports
its largest defect.  ``verify_examples`` runs them all; the CLI exposes it as
``verify-examples``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numerics as nx
from . import operators as op
from . import oracle
from .product import ProductInstance, lift
from .ranges import AFFINE_DOM_RAN, build_range_pair, classify_conditions
from .splitting import (DrInstance, ProbeConfig, Verdict, displacement, dr_apply, estimate_v, iterate,
                        log2_schedule, probe_range_membership)

FAULTS = ("gamma_mismatch",)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    build: Callable[[], DrInstance | ProductInstance]
    x0: tuple[float, ...]
    note: str = ""

    def instance(self) -> DrInstance:
        built = self.build()
        return built.lifted if isinstance(built, ProductInstance) else built


def _e1_line():
    return nx.span([1.0, 0.0])


def _affine_singleton_pair():
    A = op.affine_normal([2.0, 0.0], [0.0, 1.0], [[1.0, 0.0]])
    B = op.affine_normal([1.0, 0.0], [0.0, 0.0], [[1.0, 0.0]])
    return DrInstance(A, B, label="affine_singleton")


_ENTRIES = [
    CatalogEntry("two_balls", lambda: DrInstance(op.normal_cone(nx.Ball([0, 0], 1)),
                                                 op.normal_cone(nx.Ball([4, 0], 1)), label="two_balls"),
                 (0.0, 7.0), "disjoint unit balls, v = (-2, 0)"),
    CatalogEntry("consistent_balls", lambda: DrInstance(op.normal_cone(nx.Ball([0, 0], 1)),
                                                        op.normal_cone(nx.Ball([1, 0], 1)), label="consistent_balls"),
                 (3.0, 2.0), "overlapping balls, v = 0"),
    CatalogEntry("skew_pair", lambda: DrInstance(op.skew_rotator(1.0, 2, 1), op.skew_rotator(1.0, 2, -1),
                                                 label="skew_pair"),
                 (1.0, 1.0), "(S, -S) with S^2 = -Id, T = Id"),
    CatalogEntry("rotator_line", lambda: DrInstance(op.skew_rotator(1.0, 2, 1), op.normal_cone(_e1_line()),
                                                    label="rotator_line"),
                 (1.0, 2.0), "rotator against the e1 axis"),
    CatalogEntry("affine_singleton", _affine_singleton_pair, (0.5, -1.0),
                 "orthogonal affine-normal pair, ran(Id - T) = {(3, 1)}"),
    CatalogEntry("shifted_subspaces", lambda: DrInstance(op.normal_cone(_e1_line()),
                                                         op.normal_cone(nx.affine([0, 1], [[1.0], [0.0]])),
                                                         label="shifted_subspaces"),
                 (2.0, 3.0), "parallel lines, v = (0, -1)"),
    CatalogEntry("ball_line", lambda: DrInstance(op.normal_cone(nx.Ball([0, 0], 1)), op.normal_cone(_e1_line()),
                                                 label="ball_line"),
                 (1.0, 5.0), "unit ball against the e1 axis"),
    CatalogEntry("cone_pair", lambda: DrInstance(op.normal_cone(nx.Ray([1, 0])), op.normal_cone(nx.Ray([0, 1])),
                                                 label="cone_pair"),
                 (1.0, -2.0), "two rays meeting at the origin"),
    CatalogEntry("quadratic_l1", lambda: DrInstance(op.prox_of("quadratic", center=[3.0, -1.0]),
                                                    op.prox_of("l1", dim=2, weight=0.5), label="quadratic_l1"),
                 (0.0, 0.0), "smooth quadratic plus l1 penalty"),
    CatalogEntry("ball_halfspace", lambda: DrInstance(op.normal_cone(nx.Ball([0, 0], 1)),
                                                      op.normal_cone(nx.Halfspace([1, 1], -3)), label="ball_halfspace"),
                 (0.0, 0.0), "ball and a halfspace that misses it"),
    CatalogEntry("product_intervals", lambda: lift([op.normal_cone(nx.Box([a], [a + 1])) for a in (0.0, 2.0, 5.0)]),
                 (0.0, 0.0, 0.0), "three intervals lifted to R^3, v = (-2, 0, 2)"),
]

CATALOG: dict[str, CatalogEntry] = {e.name: e for e in _ENTRIES}


def catalog_instance(name: str) -> DrInstance:
    return CATALOG[name].instance()


def catalog_operators() -> list[op.MonotoneOp]:
    """Every distinct operator used in the catalog, including the lifted ones."""
    ops = []
    for e in _ENTRIES:
        inst = e.instance()
        ops.extend([inst.opA, inst.opB])
    return ops


# ---------------------------------------------------------------------------
# checks


@dataclass
class ExampleResult:
    name: str
    passed: bool
    max_defect: float
    tol: float
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def row(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name:<42s} max_defect={self.max_defect:.3e}  (tol {self.tol:.0e})"

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "max_defect": self.max_defect, "tol": self.tol,
                "detail": self.detail}


def _points(n, dim, seed, scale=5.0):
    return np.random.default_rng(seed).normal(scale=scale, size=(n, dim))


def check_skew_pair_identity(gamma_mismatch: float = 0.0, seed: int = 0) -> ExampleResult:
    """``(S, -S)`` with ``S^2 = -gamma Id`` gives ``T = Id``."""
    B = op.skew_rotator(1.0 + gamma_mismatch, 2, -1)
    inst = DrInstance(op.skew_rotator(1.0, 2, 1), B)
    X = _points(1000, 2, seed)
    d = float(np.linalg.norm(dr_apply(inst, X) - X, axis=1).max())
    return ExampleResult("skew pair gives the identity", d <= 1e-12, d, 1e-12)


def check_rotator_line(seed: int = 0) -> ExampleResult:
    """Rotator against a line: ``Id - T`` is half the projector onto ``R (1, -1)``."""
    inst = catalog_instance("rotator_line")
    M = displacement(inst, np.eye(2)).T
    expected = 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]])
    d_mat = float(np.abs(M - expected).max())
    cloud = oracle.sample_displacement_image(inst, oracle.GridSpec(seed=seed))
    line = nx.span([1.0, -1.0])
    d_img = float(nx.distance(line, cloud.points).max())
    ok = d_mat <= 1e-12 and d_img <= 1e-9
    return ExampleResult("rotator vs line displacement matrix", ok, max(d_mat, d_img), 1e-9,
                         detail={"matrix_defect": d_mat, "image_line_defect": d_img})


def check_affine_orthogonal() -> ExampleResult:
    """Orthogonal affine-normal pair: image is ``{(3, 1)}`` and matches graph pairs."""
    inst = catalog_instance("affine_singleton")
    img = oracle.sample_displacement_image(inst)
    d_img = float(np.linalg.norm(img.points - [3.0, 1.0], axis=1).max())
    matched = oracle.match_graph_pairs(inst)
    d_match = oracle.hausdorff(img.points, matched.points) if len(matched) else np.inf
    tag = classify_conditions(inst, build_range_pair(inst))
    ok = d_img <= 1e-9 and d_match <= 1e-4 and tag == AFFINE_DOM_RAN
    return ExampleResult("affine normal orthogonal case", ok, max(d_img, d_match), 1e-9,
                         detail={"image_defect": d_img, "matched_distance": d_match, "n_matched": len(matched),
                                 "condition": tag})


def check_ball_line_closure() -> ExampleResult:
    """``(2, 1)`` is in the closure of ``ran(Id - T)`` for ball and line, but the shifted solutions blow up."""
    inst = catalog_instance("ball_line")
    res = probe_range_membership(inst, [2.0, 1.0], ProbeConfig(n_schedule=log2_schedule(2, 2**16)))
    final = res.scaled_norms[-1]
    big = res.iterate_norms[-1]
    ok = res.verdict is Verdict.IN_CLOSURE and final <= 1e-6 and big > 1e3
    return ExampleResult("ball plus line closure without attainment", ok, final, 1e-6,
                         detail={"verdict": res.verdict.value, "final_iterate_norm": big})


def check_bounded_set_ranges(seed: int = 0) -> ExampleResult:
    """Bounded ``U`` and a line ``V``: ``ran(Id - T)`` sits in ``U - V`` and ``ran T`` in ``U - (rec V)^polar``."""
    U = nx.Ball([0.0, 0.0], 1.0)
    V = nx.affine([0.0, 3.0], [[1.0], [0.0]])
    inst = DrInstance(op.normal_cone(U), op.normal_cone(V))
    X = _points(2000, 2, seed, scale=10.0)
    diff = nx.SumBallSubspace(nx.Ball([0.0, -3.0], 1.0), nx.span([1.0, 0.0]))
    ranT = nx.SumBallSubspace(U, nx.polar_cone(nx.recession_cone(V)))
    d1 = float(nx.distance(diff, displacement(inst, X)).max())
    d2 = float(nx.distance(ranT, dr_apply(inst, X)).max())
    v = estimate_v(iterate(inst, [0.0, 0.0], 2000)).v
    d3 = float(np.linalg.norm(v - diff.project(np.zeros(2))))
    ok = d1 <= 1e-9 and d2 <= 1e-9 and d3 <= 1e-3
    return ExampleResult("bounded set ranges", ok, max(d1, d2, d3), 1e-3,
                         detail={"displacement_inclusion": d1, "ranT_inclusion": d2, "v_error": d3})


def verify_examples(fault: str | None = None) -> list[ExampleResult]:
    """Run every regression check; ``fault`` injects a known defect for negative testing."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    checks = [
        lambda: check_skew_pair_identity(0.25 if fault == "gamma_mismatch" else 0.0),
        check_rotator_line,
        check_affine_orthogonal,
        check_ball_line_closure,
        check_bounded_set_ranges,
    ]
    out = []
    for c in checks:
        t = time.perf_counter()
        r = c()
        r.seconds = time.perf_counter() - t
        out.append(r)
    return out
