import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from drrange import numerics as nx
from drrange import operators as op
from drrange.errors import ConstructionError, DimensionError, OperatorError
from drrange.regression import catalog_operators

coords = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def all_ops():
    extra = [
        op.psd_linear([[2.0, 1.0], [-1.0, 0.5]]),
        op.psd_linear([[1.0, 0.0], [0.0, 0.0]]),
        op.prox_of("indicator", set=nx.Orthant([1.0, 1.0])),
        op.invert(op.normal_cone(nx.Ball([1.0, 1.0], 2.0))),
        op.dual_negate(op.skew_rotator(2.0, 2, 1)),
        op.skew_rotator(0.5, 4, -1),
    ]
    return catalog_operators() + extra


OPS = all_ops()


def test_resolvent_examples(frozen):
    np.testing.assert_allclose(op.resolvent(op.normal_cone(nx.Ball([0, 0], 1)), [3.0, 4.0]), [0.6, 0.8])
    np.testing.assert_allclose(op.resolvent(op.skew_rotator(1.0), [1.0, 0.0]), frozen["skew_resolvent_e1"],
                               atol=1e-15)
    np.testing.assert_allclose(op.resolvent(op.prox_of("quadratic", center=[2.0, 0.0]), [0.0, 0.0]), [1.0, 0.0])


def test_reflected_resolvent_examples():
    np.testing.assert_allclose(op.reflected_resolvent(op.skew_rotator(1.0), [1.0, 0.0]), [0.0, -1.0], atol=1e-15)
    np.testing.assert_allclose(op.reflected_resolvent(op.normal_cone(nx.WholeSpace(2)), [3.0, -2.0]), [3.0, -2.0])
    np.testing.assert_allclose(op.reflected_resolvent(op.normal_cone(nx.Ball([0, 0], 1)), [3.0, 4.0]),
                               [-1.8, -2.4], atol=1e-15)


def test_inverse_resolvent_examples():
    np.testing.assert_allclose(op.inverse_resolvent(op.normal_cone(nx.Ball([0, 0], 1)), [3.0, 4.0]), [2.4, 3.2],
                               atol=1e-15)
    np.testing.assert_allclose(op.inverse_resolvent(op.skew_rotator(1.0), [1.0, 0.0]), [0.5, 0.5], atol=1e-15)


@pytest.mark.parametrize("A", OPS, ids=lambda A: A.label)
def test_inverse_resolvent_identity(A, rng):
    X = rng.normal(scale=10, size=(1000, A.dim))
    err = np.linalg.norm(op.resolvent(A, X) + op.inverse_resolvent(A, X) - X, axis=1)
    assert err.max() <= 1e-12 * max(1.0, np.abs(X).max()) / 10


@pytest.mark.parametrize("A", OPS, ids=lambda A: A.label)
def test_resolvent_firmly_nonexpansive(A, rng):
    X, Y = rng.normal(scale=5, size=(2, 1000, A.dim))
    JX, JY = A.resolvent(X), A.resolvent(Y)
    lhs = np.sum((JX - JY) * (X - Y), axis=1)
    rhs = np.sum((JX - JY) ** 2, axis=1)
    assert np.all(lhs >= rhs - 1e-10)


@pytest.mark.parametrize("A", OPS, ids=lambda A: A.label)
def test_minty_graph_is_monotone(A, rng):
    g = op.minty_graph_point(A, rng.normal(scale=5, size=(100, A.dim)))
    dp = g.primal[:, None, :] - g.primal[None, :, :]
    dd = g.dual[:, None, :] - g.dual[None, :, :]
    assert np.sum(dp * dd, axis=-1).min() >= -1e-10


@pytest.mark.parametrize("A", [A for A in OPS if A.dom is not None], ids=lambda A: A.label)
def test_resolvent_lands_in_domain(A, rng):
    X = rng.normal(scale=5, size=(200, A.dim))
    assert A.dom.contains(A.resolvent(X), tol=1e-9)
    assert A.ran.contains(X - A.resolvent(X), tol=1e-9)


def test_minty_point_examples():
    g = op.minty_graph_point(op.normal_cone(nx.Ball([0, 0], 1)), [3.0, 4.0])
    np.testing.assert_allclose(g.primal, [0.6, 0.8])
    np.testing.assert_allclose(g.dual, [2.4, 3.2], atol=1e-15)
    np.testing.assert_allclose(g.dual, 4 * g.primal, atol=1e-14)
    g = op.minty_graph_point(op.normal_cone(nx.span([1.0, 0.0])), [3.0, 4.0])
    np.testing.assert_allclose(g.primal, [3.0, 0.0])
    np.testing.assert_allclose(g.dual, [0.0, 4.0])


@given(x=arrays(np.float64, 2, elements=coords))
def test_invert_of_subspace_normal_is_complement_projection(x):
    inv = op.invert(op.normal_cone(nx.span([1.0, 2.0])))
    perp = nx.span([2.0, -1.0])
    np.testing.assert_allclose(inv.resolvent(x), perp.project(x), atol=1e-12 * (1 + np.abs(x).max()))


@pytest.mark.parametrize("A", OPS[:8], ids=lambda A: A.label)
def test_transforms_are_involutions(A, rng):
    X = rng.normal(scale=5, size=(100, A.dim))
    np.testing.assert_allclose(op.invert(op.invert(A)).resolvent(X), A.resolvent(X), atol=1e-12)
    np.testing.assert_allclose(op.dual_negate(op.dual_negate(A)).resolvent(X), A.resolvent(X), atol=1e-12)


def test_invert_quadratic():
    q = op.invert(op.prox_of("quadratic", center=[0.0, 0.0]))
    np.testing.assert_allclose(q.resolvent(np.array([2.0, 0.0])), [1.0, 0.0])


def test_dual_negate_examples(rng):
    U = nx.span([1.0, 1.0])
    X = rng.normal(size=(100, 2))
    np.testing.assert_allclose(op.dual_negate(op.normal_cone(U)).resolvent(X), nx.span([1.0, -1.0]).project(X),
                               atol=1e-14)
    S = op.skew_matrix(1.0, 2)
    np.testing.assert_allclose(op.dual_negate(op.skew_rotator(1.0)).resolvent(X), X @ ((np.eye(2) + S) / 2).T,
                               atol=1e-14)
    # general gamma: the dual negation of S is -S/gamma, whose resolvent is (gamma Id + S)/(1 + gamma)
    g = 3.0
    S = op.skew_matrix(g, 2)
    np.testing.assert_allclose(op.dual_negate(op.skew_rotator(g)).resolvent(X), X @ ((g * np.eye(2) + S) / (1 + g)).T,
                               atol=1e-14)


def test_transforms_keep_rectangular_flag():
    A = op.skew_rotator()
    assert op.invert(A).rectangular is op.Rectangular.NO
    assert op.dual_negate(op.normal_cone(nx.Ball([0, 0], 1))).rectangular is op.Rectangular.YES


def test_catalog_examples():
    A = op.affine_normal([1.0, 0.0], [0.0, 1.0], [1.0, 0.0])
    x = np.array([3.0, -2.0])
    np.testing.assert_allclose(A.resolvent(x), nx.affine([0, 1], [[1.0], [0.0]]).project(x - [1, 0]))
    np.testing.assert_allclose(op.prox_of("l1", dim=2, weight=1.0).resolvent(np.array([2.5, -0.3])), [1.5, 0.0])
    np.testing.assert_allclose(op.normal_cone(nx.Ball([4, 0], 1)).resolvent(np.zeros(2)), [3.0, 0.0])


def test_affine_normal_resolvent_inverts_the_operator(rng):
    """``y = J(x)`` must satisfy ``x - y - u`` normal to the affine set at ``y``."""
    u, up = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    A = op.affine_normal(u, up, [1.0, 0.0])
    X = rng.normal(scale=4, size=(100, 2))
    Y = A.resolvent(X)
    np.testing.assert_allclose(Y[:, 1], 1.0)
    np.testing.assert_allclose((X - Y - u)[:, 0], 0.0, atol=1e-14)


def test_skew_rotator_is_skew(rng):
    S = op.skew_matrix(2.5, 4)
    np.testing.assert_allclose(S @ S, -2.5 * np.eye(4), atol=1e-14)
    X = rng.normal(size=(100, 4))
    assert np.abs(np.sum(X * (X @ S.T), axis=1)).max() <= 1e-12


def test_rectangular_operators_have_bounded_below_products(rng):
    """Necessary condition for 3* monotonicity on a bounded sample of the graph."""
    A = op.normal_cone(nx.Ball([0, 0], 1))
    g = op.minty_graph_point(A, rng.normal(scale=5, size=(400, 2)))
    y = nx.Ball([0, 0], 1).project(rng.normal(size=(20, 2)))
    z = rng.normal(scale=3, size=(20, 2))
    vals = np.einsum("ijk,ijk->ij", g.primal[:, None] - y[None], g.dual[:, None] - z[None])
    assert np.isfinite(vals.min()) and vals.min() > -50


def test_construction_errors():
    with pytest.raises(ConstructionError):
        op.skew_rotator(1.0, 3)
    with pytest.raises(ConstructionError):
        op.skew_rotator(-1.0)
    with pytest.raises(ConstructionError):
        op.psd_linear([[-1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ConstructionError):
        op.affine_normal([0.0, 1.0], [0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ConstructionError):
        op.affine_normal([1.0, 0.0], [1.0, 1.0], [1.0, 0.0])
    with pytest.raises(ConstructionError):
        op.op_from_dict({"op": "bogus"})


def test_dimension_and_oracle_errors():
    with pytest.raises(DimensionError):
        op.resolvent(op.skew_rotator(), [1.0, 2.0, 3.0])
    broken = op.MonotoneOp(resolvent=lambda x: np.linalg.solve(np.zeros((2, 2)), x.T).T, dim=2)
    with pytest.raises(OperatorError):
        op.resolvent(broken, [1.0, 1.0])


def test_psd_linear_symmetric_flag_and_range():
    A = op.psd_linear([[1.0, 0.0], [0.0, 0.0]])
    assert A.rectangular is op.Rectangular.YES
    assert A.ran.contains(np.array([5.0, 0.0])) and not A.ran.contains(np.array([0.0, 1.0]))
    assert op.psd_linear([[1.0, 1.0], [-1.0, 1.0]]).rectangular is op.Rectangular.UNKNOWN


@pytest.mark.parametrize("A", [A for A in OPS if A.spec is not None], ids=lambda A: A.label)
def test_spec_round_trip(A, rng):
    B = op.op_from_dict(A.spec, A.dim)
    X = rng.normal(size=(20, A.dim))
    np.testing.assert_allclose(B.resolvent(X), A.resolvent(X), atol=1e-14)
