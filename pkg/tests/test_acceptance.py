"""End-to-end acceptance checks, one test per criterion.

Each test records a ``CRITERION n: PASS|FAIL ...`` line that is printed in
the terminal summary (and immediately, when run with ``-s``).  Run with

    pytest tests/test_acceptance.py -v
    python3 tests/test_acceptance.py
"""

from __future__ import annotations

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from lnelab.arcs import (
    MonomialArc,
    eval_arc,
    hausdorff_distance,
    limit_record,
    probe_direction,
    tangent_cone_sample,
    tord_inner,
    tord_outer,
    witness_arcs_brieskorn,
    witness_arcs_superisolated,
)
from lnelab.classify import brieskorn_germ, classify_brieskorn, cross_check_theorem, horn_germ
from lnelab.geodesy import ConnectionRule, build_graph, inner_distance
from lnelab.harness import corpus
from lnelab.linkscan import default_schedule, llne_verdict, norm_invariance_check, sweep
from lnelab.norms import NormSpec

from . import conftest

T5 = [0.2, 0.1, 0.05, 0.025, 0.0125]
WITNESS_BUDGET = 20_000


def record(n: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}"
    conftest.CRITERIA_LINES.append(line)
    print(line)


# ---- 1 ---------------------------------------------------------------------


def _parity_rule(a, b, c):
    ev = lambda v: v % 2 == 0
    if ev(a) and ev(b) and ev(c):
        return "i"
    if not ev(a):
        return "ii"
    if a == b and not ev(c):
        return "iii"
    if not ev(b):
        return "n1"
    return "n2"  # a < b, both even, c odd


def test_criterion_1_brieskorn_table():
    start = time.perf_counter()
    triples = list(itertools.combinations_with_replacement(range(1, 13), 3))
    mismatches = [t for t in triples if classify_brieskorn(t, with_witness=False).clause != _parity_rule(*t)]
    spots = {(2, 3, 3): (False, "n1"), (3, 4, 5): (True, "ii"), (2, 2, 3): (True, "iii"),
             (2, 4, 5): (False, "n2"), (2, 2, 2): (True, "i")}
    bad_spots = [t for t, (lne, cl) in spots.items()
                 if (classify_brieskorn(t, with_witness=False).lne, classify_brieskorn(t, with_witness=False).clause)
                 != (lne, cl)]
    elapsed = time.perf_counter() - start
    ok = len(triples) == 364 and not mismatches and not bad_spots and elapsed < 1.0
    record(1, ok, f"{len(triples)} triples, {len(mismatches)} mismatches, spot rows ok={not bad_spots}, "
                  f"{elapsed:.3f}s")
    assert ok


# ---- 2, 3, 4 -----------------------------------------------------------------


def _witness(n, germ, w, target, tol):
    start = time.perf_counter()
    pr = probe_direction(germ, w.plus, w.minus, T5, WITNESS_BUDGET, 0, mode=w.probe_mode, norm=w.probe_norm)
    elapsed = time.perf_counter() - start
    ok = abs(pr.divergence_slope - target) <= tol and pr.evidence and elapsed < 300 and len(pr.ratio_curve) >= 4
    record(n, ok, f"{w.germ_label}: slope {pr.divergence_slope:.3f} +- {pr.slope_stderr:.3f} "
                  f"(target {target} +- {tol}), {len(pr.ratio_curve)} scales, {pr.curve.dropped and 'dropped ' + str(pr.curve.dropped) or 'none dropped'}, "
                  f"mode {w.probe_mode}, {elapsed:.0f}s")
    return ok


@pytest.mark.slow
def test_criterion_2_witness_clause_1():
    assert _witness(2, brieskorn_germ(2, 3, 3), witness_arcs_brieskorn(2, 3, 3), -0.5, 0.15)


@pytest.mark.slow
def test_criterion_3_witness_clause_2():
    w = witness_arcs_brieskorn(2, 4, 5)
    assert float(w.ratio_slope) == -1.25
    assert _witness(3, brieskorn_germ(2, 4, 5), w, -1.25, 0.25)


@pytest.mark.slow
def test_criterion_4_superisolated():
    assert _witness(4, corpus.superisolated_real(), witness_arcs_superisolated(), -0.5, 0.15)


# ---- 5 ---------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_5_horn_positive_control():
    start = time.perf_counter()
    g = horn_germ(3, 2, 2)
    sw = sweep(g, per_slice_count=1000, seed=0)
    v = llne_verdict(sw)
    cs = [r.constant for r in sw.records]
    within = all(np.isfinite(c) and 0.5 * math.pi / 2 <= c <= 2 * math.pi / 2 for c in cs)
    elapsed = time.perf_counter() - start
    ok = abs(v.slope) <= 0.10 and v.slope_stderr <= 0.05 and within and elapsed < 300
    record(5, ok, f"horn: slope {v.slope:.4f} stderr {v.slope_stderr:.4f}, constants "
                  f"[{min(cs):.4f}, {max(cs):.4f}] vs pi/2, {elapsed:.0f}s")
    assert ok


# ---- 6 ---------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_6_theorem_cross_check():
    rows, all_agree = [], True
    for entry in corpus.algebraic_cross_check_corpus():
        g = corpus.generate_corpus(entry)
        rep = cross_check_theorem(g, default_schedule(g.domain_radius), 1000, 0, ball_budget=4000,
                                  exact=corpus.exact_verdict(entry))
        all_agree &= rep.status == "agree" and not rep.exact_conflicts
        rows.append(f"{entry.name}={rep.a_lne}/{rep.b_lne}")
    sp = corpus.generate_corpus(next(e for e in corpus.default_corpus() if e.name == "spiral"))
    rep = cross_check_theorem(sp, [0.4, 0.2, 0.1, 0.05], seed=0, oracle=corpus.spiral_oracle_constant)
    ra = rep.route_a
    spiral_ok = (ra.classification == "diverging" and abs(ra.slope + 1.0) <= 0.2
                 and abs(ra.oracle_slope + 1.0) <= 0.2 and rep.route_b.classification == "bounded"
                 and rep.status == "disagree")
    ok = all_agree and spiral_ok
    record(6, ok, f"{', '.join(rows)}; spiral route A slope {ra.slope:.3f} (oracle {ra.oracle_slope:.3f}), "
                  f"route B {rep.route_b.classification}: {rep.status}")
    assert ok


# ---- 7 ---------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_7_norm_invariance():
    norms = [NormSpec.euclidean(), NormSpec.max_v([1, 1, 2])]
    parts, ok = [], True
    for name, g, want in (("horn", horn_germ(3, 2, 2), "bounded"), ("b233", brieskorn_germ(2, 3, 3), "diverging")):
        rep = norm_invariance_check(g, norms, budget=1000, seed=0)
        ok &= rep.agree and rep.classification == want
        slopes = "/".join(f"{v.slope:.3f}" for v in rep.verdicts.values())
        parts.append(f"{name} {rep.classification} (slopes {slopes})")
    record(7, ok, "; ".join(parts))
    assert ok


# ---- 8 ---------------------------------------------------------------------


def _brute_force_from(points, edges, i):
    """Minimum simple-path length from node i to every node, by exhaustive DFS."""
    n = len(points)
    adj = {k: [] for k in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    best = [math.inf] * n

    def dfs(node, seen, length):
        best[node] = min(best[node], length)
        for nb in adj[node]:
            if nb not in seen:
                seen.add(nb)
                dfs(nb, seen, length + float(np.linalg.norm(points[node] - points[nb])))
                seen.remove(nb)

    dfs(i, {i}, 0.0)
    return best


def test_criterion_8_oracle_equivalence():
    rng = np.random.default_rng(2024)
    graph_bad = 0
    for _ in range(200):
        n = int(rng.integers(1, 11))
        pts = rng.random((n, int(rng.integers(1, 4))))
        rule = ConnectionRule.epsilon(float(rng.uniform(0.1, 0.9)))
        g = build_graph(pts, rule)
        E = g.edges
        for i in range(n):
            refs = _brute_force_from(pts, E, i)
            for j in range(i, n):
                d, ref = inner_distance(g, i, j), refs[j]
                if not (d == ref or (math.isfinite(ref) and abs(d - ref) <= 1e-12 * max(1.0, ref))):
                    graph_bad += 1

    pairs = [witness_arcs_brieskorn(*abc) for abc in ((2, 3, 3), (2, 4, 5))] + [witness_arcs_superisolated()]
    tord_bad = []
    for w in pairs:
        sym = tord_outer(w.plus, w.minus)
        reg = tord_outer(w.plus, w.minus, T5)
        if abs(reg.order - sym.order) > 2 * reg.stderr + 1e-12:
            tord_bad.append(w.germ_label)

    errors = {}
    t = np.array(T5)
    plane = corpus.plane()
    base = MonomialArc.from_terms([[(1, 1)], [], []])
    for e in (Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)):
        other = MonomialArc.from_terms([[(1, 1)], [(1, e), (0.5, e + 1)], []])
        outer = tord_outer(base, other, T5).order
        inner = tord_inner(plane, base, other, T5, budget=2000, seed=0, mode="ball").order
        errors[str(e)] = max(abs(outer - float(e)), abs(inner - float(e)))
    est_ok = max(errors.values()) <= 0.05

    ok = graph_bad == 0 and not tord_bad and est_ok
    record(8, ok, f"200 clouds: {graph_bad} mismatches; witness regression within 2 stderr: {not tord_bad}; "
                  f"estimator errors " + ", ".join(f"{k}:{v:.4f}" for k, v in errors.items()))
    assert ok


# ---- 9 ---------------------------------------------------------------------


def _half_circle(n=4000):
    # {x = 0, y + z <= 0} on the unit sphere
    th = np.linspace(0.75 * np.pi, 1.75 * np.pi, n)
    return np.column_stack([np.zeros(n), np.cos(th), np.sin(th)])


@pytest.mark.slow
def test_criterion_9_tangent_cone():
    g = brieskorn_germ(2, 3, 3)
    ts = [0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625]
    tc = tangent_cone_sample(g, ts, count=1000, seed=0)
    noise = 2 * np.pi / 1000
    succ_ok = tc.decreasing(noise)
    half = _half_circle()
    to_half = [hausdorff_distance(c.points, half) for c in tc.clouds]
    max_x = [float(np.abs(c.points[:, 0]).max()) for c in tc.clouds]
    toward = all(b <= a + noise for a, b in zip(to_half, to_half[1:])) and to_half[-1] < to_half[0]
    rec = limit_record(tc)
    stable = rec.stable and np.isfinite(rec.constant)
    ok = succ_ok and toward and max_x[-1] < max_x[0] and stable
    record(9, ok, "successive " + ", ".join(f"{d:.3f}" for d in tc.successive)
                  + "; to half circle {x=0, y+z<=0} " + ", ".join(f"{d:.3f}" for d in to_half)
                  + f"; limit constant {rec.constant:.2f} stable={rec.stable}")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v", "-s"]))
