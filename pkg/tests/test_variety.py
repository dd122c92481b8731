from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lnelab.norms import NormSpec
from lnelab.variety import (
    Constraint,
    ImplicitGerm,
    ProjectionError,
    SamplingError,
    SparsePolynomial,
    evaluate,
    project_to_variety,
    sample_ball,
    sample_section_slice,
    sample_sphere_slice,
    slice_dimension,
)

from .conftest import P


def test_evaluate_examples():
    f = P(3, [(1, (2, 0, 0)), (1, (0, 3, 0)), (1, (0, 0, 3))])
    assert evaluate(f, [1, 1, 1]) == 3
    assert evaluate(f, [0, 0, 0]) == 0
    g = P(3, [(1, (2, 0, 0)), (-1, (0, 2, 0)), (1, (0, 0, 3))])
    assert evaluate(g, [1, 1, 0]) == 0


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(P(3, [(1, (1, 0, 0))]), [1.0, 2.0])


def test_polynomial_merges_terms_and_drops_zeros():
    f = P(2, [(1, (1, 0)), (2, (1, 0)), (3, (0, 1)), (-3, (0, 1))])
    assert f.terms == ((3.0, (1, 0)),)
    assert f.degree == 1


def test_polynomial_gradient_matches_finite_differences(rng):
    f = P(3, [(1, (2, 0, 0)), (-2, (1, 1, 1)), (0.5, (0, 0, 4))])
    X = rng.normal(size=(5, 3))
    G = f.gradient(X)
    h = 1e-6
    for i in range(3):
        E = np.zeros(3)
        E[i] = h
        fd = (f(X + E) - f(X - E)) / (2 * h)
        np.testing.assert_allclose(G[:, i], fd, rtol=1e-6, atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=6),
       st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_polynomial_eval_matches_direct_sum(terms, x):
    f = P(2, [(c, (a, b)) for c, a, b in terms])
    direct = sum(c * x[0] ** a * x[1] ** b for c, a, b in terms)
    assert evaluate(f, x) == pytest.approx(direct, abs=1e-9)


def test_polynomial_dict_roundtrip():
    f = P(3, [(1.5, (2, 0, 1)), (-1, (0, 3, 0))])
    assert SparsePolynomial.from_dict(3, f.to_dict()) == f


def test_germ_rejects_off_variety_basepoint():
    with pytest.raises(ValueError):
        ImplicitGerm.hypersurface(P(2, [(1, (0, 1)), (-1, (0, 0))]))


def test_germ_roundtrip(horn):
    assert ImplicitGerm.from_dict(horn.to_dict()) == horn
    assert horn.fingerprint() == ImplicitGerm.from_dict(horn.to_dict()).fingerprint()


def test_project_horn_seed(horn):
    x = project_to_variety(horn, [0.1, 0.1, 0.1])
    assert abs(x[0] ** 2 + x[1] ** 2 - x[2] ** 3) <= 1e-10


def test_project_fixed_point(horn):
    x = project_to_variety(horn, [0.1, 0.1, 0.1])
    y = project_to_variety(horn, x)
    assert np.linalg.norm(y - x) <= 1e-12


def test_project_with_negative_z_fails(horn):
    # x^2 + y^2 >= 0 forces z^3 >= 0, so nothing with z < 0 lies on X besides
    # points where z -> 0; clamp z to [-2, -0.5]
    with pytest.raises(ProjectionError):
        project_to_variety(horn, [0.0, 0.0, -1.0], bounds=([-2, -2, -2], [2, 2, -0.5]))


def test_sample_ball_on_line(xaxis):
    c = sample_ball(xaxis, 1.0, 100, 0)
    assert len(c) == 100
    assert np.all(np.abs(c.points[:, 1]) <= 1e-9)
    assert np.all(np.linalg.norm(c.points, axis=1) <= 1.0 + 1e-12)
    assert len(np.unique(c.points, axis=0)) == 100


def test_sample_ball_brieskorn(b233):
    c = sample_ball(b233, 0.5, 2000, 0)
    assert len(c) >= 1900
    assert np.all(b233.contains(c.points))
    assert np.all(np.linalg.norm(c.points, axis=1) <= 0.5 + 1e-12)


def test_sample_ball_isolated_point_fails():
    g = ImplicitGerm.hypersurface(P(3, [(1, (2, 0, 0)), (1, (0, 2, 0)), (1, (0, 0, 2))]))
    with pytest.raises(SamplingError):
        sample_ball(g, 0.5, 200, 0)


def test_sample_ball_deterministic(b233):
    a = sample_ball(b233, 0.3, 300, 7)
    b = sample_ball(b233, 0.3, 300, 7)
    assert np.array_equal(a.points, b.points)


def test_cone_slice_two_circles(cone):
    c = sample_sphere_slice(cone, None, 0.3, 400, 0)
    z = c.points[:, 2]
    assert np.allclose(np.abs(z), 0.3 / np.sqrt(2), atol=1e-8)
    assert (z > 0).any() and (z < 0).any()
    assert np.allclose(np.linalg.norm(c.points, axis=1), 0.3, rtol=1e-6)


def test_max_norm_slice_on_cube(b233):
    nm = NormSpec.max_v([1, 1, 1])
    c = sample_sphere_slice(b233, nm, 0.2, 300, 0)
    assert len(c) > 0
    assert np.allclose(np.abs(c.points).max(axis=1), 0.2, rtol=1e-6)
    assert np.all(b233.contains(c.points))


def test_line_slice_two_points(xaxis):
    c = sample_sphere_slice(xaxis, None, 1.0, 20, 0)
    xs = np.unique(np.round(c.points[:, 0], 9))
    assert np.allclose(sorted(xs), [-1.0, 1.0])
    assert np.allclose(c.points[:, 1], 0)


def test_slice_membership_and_edges(b233):
    c = sample_sphere_slice(b233, None, 0.1, 500, 3)
    assert c.edges is not None  # one-dimensional: traced polyline
    assert np.all(b233.contains(c.points))
    assert np.allclose(np.linalg.norm(c.points, axis=1), 0.1, rtol=1e-6)
    seg = np.linalg.norm(c.points[c.edges[:, 0]] - c.points[c.edges[:, 1]], axis=1)
    assert seg.max() < 0.1


def test_slice_dimension(b233, plane):
    con = Constraint(b233, "sphere_slice", 0.1, norm=NormSpec.euclidean())
    c = sample_sphere_slice(b233, None, 0.1, 50, 0)
    assert slice_dimension(con, c.points[0]) == 1


def test_section_slice_horn_circle(horn):
    c = sample_section_slice(horn, [0, 0, 1], 0.09, 300, 0)
    r = np.linalg.norm(c.points[:, :2], axis=1)
    assert np.allclose(c.points[:, 2], 0.09, atol=1e-7)
    assert np.allclose(r, 0.09**1.5, rtol=1e-5)


def test_empty_slice_raises():
    g = ImplicitGerm.hypersurface(P(3, [(1, (2, 0, 0)), (1, (0, 2, 0)), (1, (0, 0, 2))]))
    with pytest.raises(SamplingError):
        sample_sphere_slice(g, None, 0.2, 100, 0)


def test_random_slice_method_membership(horn):
    c = sample_sphere_slice(horn, None, 0.2, 200, 0, method="random")
    assert c.edges is None
    assert np.all(horn.contains(c.points))
    assert np.allclose(np.linalg.norm(c.points, axis=1), 0.2, rtol=1e-6)
