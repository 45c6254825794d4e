import numpy as np
import pytest

from drrange import numerics as nx
from drrange import oracle
from drrange.regression import catalog_instance
from drrange.splitting import displacement

from test_numerics import catalog_sets


def test_image_cloud_examples():
    c = oracle.sample_displacement_image(catalog_instance("rotator_line"))
    assert nx.distance(nx.span([1.0, -1.0]), c.points).max() <= 1e-9
    c = oracle.sample_displacement_image(catalog_instance("skew_pair"))
    assert np.abs(c.points).max() <= 1e-12
    c = oracle.sample_displacement_image(catalog_instance("affine_singleton"))
    assert np.linalg.norm(c.points - [3.0, 1.0], axis=1).max() <= 1e-9


def test_dense_grid_budget_flags_partial():
    grid = oracle.GridSpec(num=30, max_points=1000)
    c = oracle.sample_displacement_image(catalog_instance("product_intervals"), grid)
    assert c.partial and len(c) == 1000 + grid.n_gaussian


def test_matched_pairs_orthogonal_case():
    inst = catalog_instance("affine_singleton")
    m = oracle.match_graph_pairs(inst)
    img = oracle.sample_displacement_image(inst)
    assert len(m) > 0
    assert oracle.hausdorff(m.points, img.points) <= 1e-6
    np.testing.assert_allclose(displacement(inst, m.meta["x"]), m.points, atol=1e-12)


def test_matched_pairs_two_balls_lie_in_D():
    m = oracle.match_graph_pairs(catalog_instance("two_balls"))
    assert len(m) > 0
    assert nx.Ball([-4.0, 0.0], 2.0).contains(m.points, tol=1e-12)


def test_matched_pairs_consistent_contains_zero():
    m = oracle.match_graph_pairs(catalog_instance("consistent_balls"))
    assert np.linalg.norm(m.points, axis=1).min() == 0.0


def test_no_matches_is_a_valid_empty_cloud():
    m = oracle.match_graph_pairs(catalog_instance("two_balls"), tol=1e-30,
                                 grid=oracle.GridSpec(lo=-1.13, hi=0.71, num=7, n_gaussian=0))
    assert m.points.shape[1] == 2


def test_numeric_project_examples(frozen, rng):
    B1 = nx.Ball([0, 0], 1)
    t = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    circle = np.stack([np.cos(t), np.sin(t)], axis=1)
    pts = (circle[:, None, :] - (circle + [4, 0])[None, :, :]).reshape(-1, 2)
    assert np.linalg.norm(oracle.numeric_project(pts, [0, 0]) - frozen["two_balls_v"]) <= 1e-2
    np.testing.assert_allclose(oracle.numeric_project(B1, [3, 4]), frozen["ball_projection_3_4"], atol=1e-8)
    strip = nx.SumBallSubspace(B1, nx.span([1.0, 0.0]))
    cloud = rng_points(strip, rng, scale=3)
    assert np.linalg.norm(oracle.numeric_project(cloud, [0, 5]) - frozen["ball_plus_line_projection_0_5"]) <= 1e-2


def rng_points(S, rng, n=20000, scale=1.5):
    c = S.project(np.zeros(S.dim))
    return S.project(c + rng.uniform(-scale, scale, size=(n, S.dim)) * 1.2)


def test_numeric_project_errors():
    with pytest.raises(ValueError):
        oracle.numeric_project(np.zeros((0, 2)), [0, 0])


@pytest.mark.parametrize("S", catalog_sets(), ids=lambda S: type(S).__name__)
def test_numeric_project_agrees_with_closed_form(S, rng):
    X = rng.normal(scale=4, size=(100, 2))
    err = max(np.linalg.norm(oracle.numeric_project(S, x) - S.project(x)) for x in X)
    assert err <= 1e-6


def test_box_plus_subspace_projection(rng):
    box = nx.Box([0.0, 2.0, 5.0], [1.0, 3.0, 6.0])
    diag = nx.AffineSubspace(np.zeros(3), np.ones((3, 1)) / np.sqrt(3))
    p = oracle.project_box_plus_subspace(box, diag, np.zeros(3))
    np.testing.assert_allclose(p, [-2.0, 0.0, 2.0], atol=1e-9)


def test_cloud_csv(tmp_path):
    c = oracle.sample_displacement_image(catalog_instance("two_balls"), oracle.GridSpec(num=3, n_gaussian=0))
    c.to_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "w0,w1" and len(lines) == 10
