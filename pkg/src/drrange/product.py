"""Product-space lifting of m operators to a two-operator problem.

Factor ``i`` owns coordinates ``[i*d, (i+1)*d)`` of the lifted space.  The
first lifted operator applies each factor blockwise; the second is the normal
cone of the diagonal, whose resolvent replaces every block by the block mean.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics as nx
from .errors import ConstructionError, DimensionError
from .operators import MonotoneOp, Rectangular, normal_cone
from .splitting import DrInstance


@dataclass(frozen=True, eq=False)
class ProductInstance:
    factors: tuple[MonotoneOp, ...]
    lifted: DrInstance

    @property
    def m(self) -> int:
        return len(self.factors)

    @property
    def block_dim(self) -> int:
        return self.factors[0].dim

    def blocks(self, x) -> np.ndarray:
        """Reshape lifted points ``(..., m*d)`` to ``(..., m, d)``."""
        x = np.asarray(x, dtype=float)
        return x.reshape(x.shape[:-1] + (self.m, self.block_dim))


def diagonal(m: int, d: int) -> nx.AffineSubspace:
    """The diagonal ``{(x, ..., x)}`` in ``(R^d)^m``."""
    Q = np.kron(np.ones((m, 1)), np.eye(d)) / np.sqrt(m)
    return nx.AffineSubspace(np.zeros(m * d), Q)


def _product_set(sets: list[nx.ConvexSet | None]) -> nx.ConvexSet | None:
    """Cartesian product of box-representable sets, else None."""
    from .ranges import _as_box, _box_to_catalog

    bounds = []
    for S in sets:
        b = None if S is None else _as_box(S)
        if b is None:
            return None
        bounds.append(b)
    lo = np.concatenate([b[0] for b in bounds])
    hi = np.concatenate([b[1] for b in bounds])
    return _box_to_catalog(lo, hi)


def lift(factors) -> ProductInstance:
    """Lift ``A_1, ..., A_m`` on ``R^d`` to ``(A_1 x ... x A_m, N_Delta)`` on ``R^{md}``."""
    factors = tuple(factors)
    if len(factors) < 2:
        raise ConstructionError("product lifting needs at least two factors")
    d = factors[0].dim
    if any(f.dim != d for f in factors):
        raise ConstructionError("all factors must share one dimension")
    bad = [f.label for f in factors if f.rectangular is not Rectangular.YES]
    if bad:
        raise ConstructionError(f"factors must be rectangular; not flagged so: {bad}")
    m = len(factors)

    def blockwise(maps):
        def apply(x):
            x = np.asarray(x, dtype=float)
            xb = x.reshape(x.shape[:-1] + (m, d))
            out = np.empty_like(xb)
            for i, g in enumerate(maps):
                out[..., i, :] = g(xb[..., i, :])
            return out.reshape(x.shape)
        return apply

    inverse = blockwise([f.inverse for f in factors]) if all(f.inverse for f in factors) else None
    specs = [f.spec for f in factors]
    opA = MonotoneOp(
        resolvent=blockwise([f.resolvent for f in factors]),
        inverse=inverse,
        dim=m * d,
        dom=_product_set([f.dom for f in factors]),
        ran=_product_set([f.ran for f in factors]),
        rectangular=Rectangular.YES,
        label="product(" + ",".join(f.label for f in factors) + ")",
        spec={"op": "product", "factors": specs} if all(specs) else None,
    )
    opB = normal_cone(diagonal(m, d), label="N[diagonal]")
    return ProductInstance(factors, DrInstance(opA, opB, label=f"lifted[m={m}]"))


def block_mean_deviation(x, m: int) -> np.ndarray:
    """``x - P_Delta x``: each block minus the mean of the blocks."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] % m:
        raise DimensionError("lifted dimension is not divisible by m")
    xb = x.reshape(x.shape[:-1] + (m, -1))
    return (xb - xb.mean(axis=-2, keepdims=True)).reshape(x.shape)


def delta_perp_check(u, m: int, tol: float = 1e-12) -> bool:
    """True iff the blocks of ``u`` sum to zero, i.e. ``u`` is orthogonal to the diagonal."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] % m:
        raise DimensionError("lifted dimension is not divisible by m")
    s = u.reshape(u.shape[:-1] + (m, -1)).sum(axis=-2)
    return bool(np.all(np.linalg.norm(s, axis=-1) <= tol))
