from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lnelab.norms import NormSpec

vec3 = st.tuples(*[st.floats(-10, 10, allow_nan=False)] * 3).map(np.array)


def test_values():
    x = np.array([1.0, -2.0, 0.5])
    assert NormSpec.euclidean()(x) == pytest.approx(np.sqrt(5.25))
    assert NormSpec.max_v([1, 1, 2])(x) == 2.0
    assert NormSpec.max_v([1, 0.5, 4])(x) == 2.0
    assert NormSpec.one_p(2, split=1)(x) == pytest.approx(np.hypot(2.0, 0.5))
    assert NormSpec.b_one(4, split=2)(x) == pytest.approx((1 + 16) ** 0.25)


def test_vectorised_matches_rows(rng):
    X = rng.normal(size=(20, 3))
    for nm in (NormSpec.euclidean(), NormSpec.max_v([1, 2, 3]), NormSpec.one_p(4), NormSpec.b_one(2)):
        v = nm(X)
        assert v.shape == (20,)
        assert np.allclose(v, [nm(x) for x in X])


@pytest.mark.parametrize("kw", [
    dict(variant="max_v", weights=(1.0, 0.0, 1.0)),
    dict(variant="one_p", p=3, split=1),
    dict(variant="b_one", p=4, split=0),
    dict(variant="taxicab"),
])
def test_invalid_specs(kw):
    with pytest.raises(ValueError):
        NormSpec(**kw)


def test_weight_count_mismatch():
    with pytest.raises(ValueError):
        NormSpec.max_v([1, 1])(np.ones(3))


def test_dict_roundtrip():
    for nm in (NormSpec.euclidean(), NormSpec.max_v([1, 1, 2]), NormSpec.one_p(2, 1), NormSpec.b_one(6)):
        assert NormSpec.from_dict(nm.to_dict()) == nm
        assert nm.label()


@settings(max_examples=60, deadline=None)
@given(vec3, vec3, st.floats(-5, 5, allow_nan=False))
def test_norm_axioms(x, y, s):
    for nm in (NormSpec.euclidean(), NormSpec.max_v([1, 1, 2]), NormSpec.one_p(4), NormSpec.b_one(4)):
        assert nm(x) >= 0
        assert nm(s * x) == pytest.approx(abs(s) * nm(x), rel=1e-9, abs=1e-12)
        assert nm(x + y) <= nm(x) + nm(y) + 1e-9


def test_active_piece_on_cube():
    nm = NormSpec.max_v([1, 1, 1])
    pts = np.array([[1.0, 0.2, 0.3], [0.1, -1.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.allclose(nm(pts), 1.0)
    pcs = nm.pieces(3)
    act = [pcs[i] for i in nm.active_piece(pts)]
    assert [(p.index[0], p.sign) for p in act] == [(0, 1), (1, -1), (2, 1)]
