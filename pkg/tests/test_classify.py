from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from lnelab.classify import (
    BrieskornParams,
    CriterionInapplicable,
    brieskorn_as_horn,
    brieskorn_germ,
    classify_brieskorn,
    classify_horn,
    cone_lne_check,
    cross_check_theorem,
    horn_germ,
)
from lnelab.harness import corpus
from lnelab.linkscan import default_schedule
from lnelab.variety import sample_sphere_slice


def reference_lne(a, b, c):
    """Straight transcription of the Brieskorn case list, sorted a <= b <= c."""
    a, b, c = sorted((a, b, c))
    even = lambda v: v % 2 == 0
    if even(a) and even(b) and even(c):
        return True
    if not even(a):
        return True
    if a == b and even(a) and not even(c):
        return True
    return False


@pytest.mark.parametrize("abc,lne,line", [
    ((2, 2, 2), True, "LNE (clause i)"),
    ((2, 4, 6), True, "LNE (clause i)"),
    ((2, 2, 4), True, "LNE (clause i)"),
    ((3, 4, 5), True, "LNE (clause ii)"),
    ((3, 3, 3), True, "LNE (clause ii)"),
    ((2, 2, 3), True, "LNE (clause iii)"),
    ((4, 4, 7), True, "LNE (clause iii)"),
    ((2, 3, 3), False, "non-LNE (clause 1)"),
    ((2, 3, 4), False, "non-LNE (clause 1)"),
    ((2, 4, 5), False, "non-LNE (clause 2)"),
    ((4, 6, 9), False, "non-LNE (clause 2)"),
])
def test_spot_rows(abc, lne, line):
    v = classify_brieskorn(abc)
    assert v.lne is lne
    assert v.line() == line
    assert (v.witness is None) == lne


def test_exhaustive_up_to_twelve():
    triples = list(itertools.combinations_with_replacement(range(1, 13), 3))
    assert len(triples) == 364
    for t in triples:
        v = classify_brieskorn(t, with_witness=False)
        assert v.lne == reference_lne(*t), t


def test_params_sorted_and_validated():
    assert BrieskornParams(5, 2, 4) == BrieskornParams(2, 4, 5)
    assert classify_brieskorn((5, 2, 4)).clause == "n2"
    for bad in [(0, 2, 3), (2, 2.5, 3), (-1, 2, 3), (True, 2, 3)]:
        with pytest.raises(ValueError):
            BrieskornParams(*bad)


def test_horn_examples():
    v = classify_horn(3, 2, 2)
    assert v.lne and v.clause == "horn"
    assert "cone" in classify_horn(2, 2, 3).notes[0]
    for args in [(1, 2, 2), (3, 3, 2), (3, 2, 1)]:
        with pytest.raises(CriterionInapplicable):
            classify_horn(*args)
    with pytest.raises(ValueError):
        classify_horn(0, 2, 2)


def test_brieskorn_as_horn_consistent():
    for a in (2, 4, 6):
        for c in range(a, 14):
            if c % 2:
                (m, p, n), _ = brieskorn_as_horn((a, a, c))
                assert classify_horn(m, p, n).lne == classify_brieskorn((a, a, c)).lne
            else:
                with pytest.raises(CriterionInapplicable):
                    brieskorn_as_horn((a, a, c))
    with pytest.raises(CriterionInapplicable):
        brieskorn_as_horn((2, 4, 5))


def test_germ_builders():
    g = brieskorn_germ(2, 3, 3)
    assert g.ambient_dim == 3
    assert np.all(g.contains(np.array([[0.0, 1.0, -1.0], [1.0, -1.0, 0.0]])))
    h = horn_germ(3, 2, 2)
    # x0 is the last coordinate: x1^2 + x2^2 = x0^3
    assert np.all(h.contains(np.array([[0.0, 1.0, 1.0], [0.6, 0.8, 1.0]])))


def test_cone_link_check(cone):
    link = sample_sphere_slice(cone, None, 1.0, 400, 0)
    v = cone_lne_check(link, germ=cone)
    assert v.verdict == "LNE-evidence"
    assert v.n_components == 2
    assert v.d0 == pytest.approx(math.sqrt(2), rel=1e-3)
    assert max(v.per_component) == pytest.approx(math.pi / 2, rel=0.02)


def test_plane_link_check(plane):
    v = cone_lne_check(sample_sphere_slice(plane, None, 1.0, 400, 0), germ=plane)
    assert v.verdict == "LNE-evidence"
    assert v.n_components == 1 and v.d0 == math.inf


def test_two_planes_link_check():
    g = corpus.two_planes()
    v = cone_lne_check(sample_sphere_slice(g, None, 1.0, 600, 0), germ=g)
    assert v.verdict == "LNE-evidence"
    assert v.n_components == 2
    assert v.d0 == pytest.approx(math.sqrt(2), rel=1e-2)


def test_cross_check_line_agrees(line3):
    rep = cross_check_theorem(line3, default_schedule(line3.domain_radius), budget=200, ball_budget=800, seed=0)
    assert rep.status == "agree"
    assert rep.a_lne and rep.b_lne
    assert rep.route_b.separation_K == pytest.approx(2.0, rel=1e-6)
