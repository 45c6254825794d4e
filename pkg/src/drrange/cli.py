"""Command-line entry point: ``drrange {run,diagnose,probe,verify-examples}``.

Instance files are JSON::

    {"schema": 1, "dim": 2,
     "A": {"op": "normal_cone", "set": {"type": "ball", "center": [0, 0], "radius": 1}},
     "B": {"op": "normal_cone", "set": {"type": "ball", "center": [4, 0], "radius": 1}},
     "run": {"x0": [0, 7], "steps": 10000, "tol": 0.01},
     "probe": {"w": [-3, 0]}}

A ``"product": {"factors": [...]}`` entry replaces ``A`` and ``B``; factor
``i`` then owns coordinates ``[i*d, (i+1)*d)`` of the lifted space.

Exit codes: 0 ok, 1 failed regression check, 2 unreadable instance,
3 numerical failure, 4 missing or non-closed-form descriptor.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ranges, regression
from .errors import (ConditionNotMet, ConstructionError, DescriptorMissing, DimensionError, DrError,
                     InexactRangePair)
from .operators import op_from_dict
from .product import ProductInstance, lift
from .splitting import DrInstance, ProbeConfig, estimate_v, iterate, probe_range_membership

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_NUMERIC, EXIT_DESCRIPTOR = 0, 1, 2, 3, 4


class InstanceError(DrError):
    """Malformed instance file; the message names the offending key."""


@dataclass
class InstanceFile:
    instance: DrInstance
    product: ProductInstance | None
    dim: int
    run: dict = field(default_factory=dict)
    probe: dict = field(default_factory=dict)
    diagnose: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)


def _op_at(spec, where: str, dim):
    if not isinstance(spec, dict):
        raise InstanceError(f"{where}: operator spec must be an object")
    try:
        return op_from_dict(spec, dim)
    except (ConstructionError, DimensionError, KeyError, TypeError, ValueError) as exc:
        detail = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
        raise InstanceError(f"{where}: {detail}") from exc


def parse_instance(data: dict) -> InstanceFile:
    if not isinstance(data, dict):
        raise InstanceError("top level: expected an object")
    if data.get("schema") != SCHEMA_VERSION:
        raise InstanceError(f"schema: expected {SCHEMA_VERSION}, got {data.get('schema')!r}")
    dim = data.get("dim")
    product = None
    if "product" in data:
        factors = data["product"].get("factors") if isinstance(data["product"], dict) else None
        if not isinstance(factors, list):
            raise InstanceError("product.factors: expected a list of operator specs")
        ops = [_op_at(f, f"product.factors[{i}]", dim) for i, f in enumerate(factors)]
        try:
            product = lift(ops)
        except ConstructionError as exc:
            raise InstanceError(f"product: {exc}") from exc
        inst = product.lifted
    else:
        for key in ("A", "B"):
            if key not in data:
                raise InstanceError(f"{key}: missing operator spec")
        opA, opB = _op_at(data["A"], "A", dim), _op_at(data["B"], "B", dim)
        try:
            inst = DrInstance(opA, opB)
        except DimensionError as exc:
            raise InstanceError(f"A/B: {exc}") from exc
    if dim is not None and product is None and dim != inst.dim:
        raise InstanceError(f"dim: file says {dim}, operators act on R^{inst.dim}")
    return InstanceFile(inst, product, inst.dim, data.get("run", {}), data.get("probe", {}),
                        data.get("diagnose", {}), data.get("outputs", ["summary", "trace"]))


def load_instance(path) -> InstanceFile:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InstanceError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_instance(data)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True)


def _emit(payload: dict, out: Path | None, name: str) -> None:
    text = _dump(payload)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text + "\n")
    print(text)


def _x0(inf: InstanceFile, seed: int | None) -> np.ndarray:
    """Starting point: ``run.x0`` if given, a seeded Gaussian with ``--seed``, else the origin."""
    if "x0" in inf.run:
        x0 = np.asarray(inf.run["x0"], dtype=float)
        if x0.shape != (inf.dim,):
            raise InstanceError(f"run.x0: expected {inf.dim} coordinates")
        return x0
    if seed is not None:
        return np.random.default_rng(seed).normal(size=inf.dim)
    return np.zeros(inf.dim)


def cmd_run(inf: InstanceFile, args) -> int:
    steps = args.steps or int(inf.run.get("steps", 10_000))
    tol = args.tol if args.tol is not None else float(inf.run.get("tol", 1e-2))
    fp_tol = float(inf.run.get("fixed_point_tol", 1e-8))
    trace = iterate(inf.instance, _x0(inf, args.seed), steps)
    est = estimate_v(trace, tol=tol, min_steps=min(100, steps))
    norms = trace.diff_norms
    summary = {
        "instance": inf.instance.label,
        "dim": inf.dim,
        "steps": steps,
        "estimate": est.to_dict(),
        "v": est.v.tolist(),
        "fixed_point_residual": float(norms[-1]),
        "converged": bool(norms[-1] <= fp_tol),
        "max_diff_norm": float(norms.max()),
        "diff_monotone": trace.diff_monotone,
        "final_iterate": trace.governing[-1].tolist(),
        "final_shadow": trace.shadowA[-1].tolist(),
    }
    if args.out is not None and "trace" in inf.outputs:
        args.out.mkdir(parents=True, exist_ok=True)
        trace.to_csv(args.out / "trace.csv")
    _emit(summary, args.out, "summary.json")
    return EXIT_OK


def cmd_diagnose(inf: InstanceFile, args) -> int:
    steps = args.steps or int(inf.run.get("steps", 10_000))
    tol = args.tol if args.tol is not None else float(inf.diagnose.get("tol", 1e-3))
    report = ranges.diagnose(inf.instance, _x0(inf, args.seed), steps=steps, tol=tol)
    _emit(report.to_dict(), args.out, "report.json")
    return EXIT_OK


def cmd_probe(inf: InstanceFile, args) -> int:
    w = args.w if args.w is not None else inf.probe.get("w")
    if w is None:
        raise InstanceError("probe.w: no target given (use --w or the probe section)")
    w = np.asarray(w, dtype=float)
    if w.shape != (inf.dim,):
        raise InstanceError(f"probe.w: expected {inf.dim} coordinates")
    overrides = {k: inf.probe[k] for k in ("inner_tol", "inner_max", "abs_tol", "stable_rel") if k in inf.probe}
    if "n_schedule" in inf.probe:
        overrides["n_schedule"] = tuple(int(n) for n in inf.probe["n_schedule"])
    if args.tol is not None:
        overrides["abs_tol"] = args.tol
    res = probe_range_membership(inf.instance, w, ProbeConfig(**overrides))
    _emit(res.to_dict(), args.out, "probe.json")
    return EXIT_OK


def cmd_verify_examples(args) -> int:
    results = regression.verify_examples(fault=args.inject_fault)
    for r in results:
        print(r.row())
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "verify.json").write_text(_dump([r.to_dict() for r in results]) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def _vector(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a vector: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drrange", description="Douglas-Rachford range and displacement diagnostics.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="directory for output files")
    common.add_argument("--steps", type=int, default=None, help="number of DR iterations")
    common.add_argument("--tol", type=float, default=None, help="override the command's main tolerance")
    common.add_argument("--seed", type=int, default=None, help="draw a seeded random starting point when the file has no x0")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "iterate and estimate v"), ("diagnose", "decompose v into v_D and v_R"),
                        ("probe", "test membership in the closure of ran(Id - T)")):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("instance", type=Path, help="instance JSON file")
        if name == "probe":
            sp.add_argument("--w", type=_vector, default=None, help="target vector, e.g. '-3,0'")
    ve = sub.add_parser("verify-examples", parents=[common], help="run the built-in regression checks")
    ve.add_argument("--inject-fault", choices=regression.FAULTS, default=None, help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        if args.command == "verify-examples":
            return cmd_verify_examples(args)
        inf = load_instance(args.instance)
        return {"run": cmd_run, "diagnose": cmd_diagnose, "probe": cmd_probe}[args.command](inf, args)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DescriptorMissing, InexactRangePair, ConditionNotMet) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DESCRIPTOR
    except (DrError, ValueError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
