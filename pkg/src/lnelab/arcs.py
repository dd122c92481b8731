"""Monomial arcs, contact orders and witness pairs.

An arc is a curve ``t -> gamma(t)`` whose coordinates are finite sums
``sum c_k t^{e_k}`` with non-negative rational exponents.  Two arcs through p
have outer contact order ``tord`` (vanishing order of their Euclidean
distance) and inner contact order ``tord_X`` (the same for the inner
distance).  A germ fails to be LNE exactly when some pair of arcs has
``tord_X < tord``; the ratio inner/outer then blows up like
``t^(tord_X - tord)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import brentq
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .geodesy import ConnectionRule, GeodesicGraph, build_graph, median_spacing, prune_shortcuts
from .norms import NormSpec
from .variety import (
    Constraint,
    ImplicitGerm,
    SampleCloud,
    SamplingError,
    sample_ball,
    sample_sphere_slice,
)

__all__ = [
    "MonomialArc",
    "OrderEstimate",
    "DirectionProbe",
    "WitnessPair",
    "ArcOffVariety",
    "TangentConeSample",
    "eval_arc",
    "fit_order",
    "tord_outer",
    "tord_outer_by_distance",
    "tord_inner",
    "inner_ratio_curve",
    "probe_direction",
    "witness_arcs_brieskorn",
    "witness_arcs_superisolated",
    "tangent_cone_sample",
    "hausdorff_distance",
    "limit_record",
]

INF_ORDER = math.inf


class ArcOffVariety(ValueError):
    """An arc point does not satisfy the germ's equations."""


def _frac(e) -> Fraction:
    if isinstance(e, Fraction):
        return e
    if isinstance(e, (tuple, list)):
        return Fraction(int(e[0]), int(e[1]))
    if isinstance(e, float):
        return Fraction(e).limit_denominator(10**6)
    return Fraction(e)


@dataclass(frozen=True)
class MonomialArc:
    """Per coordinate a finite sum of ``coeff * t**exponent``, t in [0, domain_max].

    Exponents are exact fractions; the base of every power is t >= 0, so
    fractional exponents never meet a negative base.
    """

    components: tuple[tuple[tuple[float, Fraction], ...], ...]
    domain_max: float = 1.0

    def __post_init__(self):
        if not self.domain_max > 0:
            raise ValueError("domain_max must be positive")
        comps = []
        for comp in self.components:
            merged: dict[Fraction, float] = {}
            for c, e in comp:
                e = _frac(e)
                if e < 0:
                    raise ValueError(f"negative exponent {e}")
                merged[e] = merged.get(e, 0.0) + float(c)
            comps.append(tuple(sorted(((c, e) for e, c in merged.items() if c != 0.0), key=lambda ce: ce[1])))
        if not comps:
            raise ValueError("an arc needs at least one coordinate")
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def from_terms(cls, components: Sequence[Sequence], domain_max: float = 1.0) -> "MonomialArc":
        return cls(tuple(tuple((float(c), _frac(e)) for c, e in comp) for comp in components), domain_max)

    @property
    def dim(self) -> int:
        return len(self.components)

    def __call__(self, t) -> np.ndarray:
        return eval_arc(self, t)

    def __sub__(self, other: "MonomialArc") -> "MonomialArc":
        if other.dim != self.dim:
            raise ValueError("arcs live in different dimensions")
        comps = [a + tuple((-c, e) for c, e in b) for a, b in zip(self.components, other.components)]
        return MonomialArc(tuple(comps), min(self.domain_max, other.domain_max))

    def initial_point(self) -> np.ndarray:
        return np.array([sum(c for c, e in comp if e == 0) for comp in self.components], dtype=float)

    def lowest_order(self) -> Fraction | float:
        """Smallest exponent carrying a nonzero coefficient (inf for the zero arc)."""
        es = [e for comp in self.components for _, e in comp]
        return min(es) if es else INF_ORDER

    def leading_term(self) -> tuple[Fraction, np.ndarray]:
        """Lowest positive exponent of gamma - gamma(0) and its coefficient vector."""
        es = [e for comp in self.components for c, e in comp if e > 0]
        if not es:
            raise ValueError("constant arc has no leading term")
        e0 = min(es)
        v = np.array([sum(c for c, e in comp if e == e0) for comp in self.components], dtype=float)
        return e0, v

    def direction(self) -> np.ndarray:
        _, v = self.leading_term()
        return v / np.linalg.norm(v)

    def to_dict(self) -> dict:
        return {
            "domain_max": self.domain_max,
            "components": [
                [{"coeff": c, "exponent_num": e.numerator, "exponent_den": e.denominator} for c, e in comp]
                for comp in self.components
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MonomialArc":
        comps = tuple(
            tuple((float(m["coeff"]), Fraction(int(m["exponent_num"]), int(m.get("exponent_den", 1)))) for m in comp)
            for comp in d["components"]
        )
        return cls(comps, float(d.get("domain_max", 1.0)))

    def __str__(self) -> str:
        def term(c, e):
            if e == 0:
                return f"{c:g}"
            pw = "t" if e == 1 else f"t^{e}"
            return pw if c == 1 else (f"-{pw}" if c == -1 else f"{c:g}*{pw}")

        return "(" + ", ".join(" + ".join(term(c, e) for c, e in comp) or "0" for comp in self.components) + ")"


def eval_arc(arc: MonomialArc, t) -> np.ndarray:
    """Point gamma(t); vectorised over an array of t (one row per t)."""
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 0) or np.any(ta > arc.domain_max):
        raise ValueError(f"t outside [0, {arc.domain_max}]")
    flat = np.atleast_1d(ta)
    out = np.zeros((len(flat), arc.dim))
    for i, comp in enumerate(arc.components):
        for c, e in comp:
            out[:, i] += c * (np.ones_like(flat) if e == 0 else flat ** float(e))
    return out[0] if ta.ndim == 0 else out


@dataclass(frozen=True)
class OrderEstimate:
    order: float
    stderr: float
    window: tuple[float, ...]
    method: str  # symbolic_exact or regression
    power_law: bool = True
    values: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {"order": self.order, "stderr": self.stderr, "window": list(self.window),
                "method": self.method, "power_law": self.power_law}


def fit_order(t, values, *, min_points: int = 4, curvature_tol: float = 0.02) -> OrderEstimate:
    """Slope of log(values) against log(t), dropping the largest t while the
    log-log data bend (lowest-order term not yet dominant).

    Bending is measured as the largest deviation of a quadratic fit from the
    straight one over the window.  If the data still bend when only
    ``min_points`` values are left, ``power_law`` is False.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = np.isfinite(v) & (v > 0) & (t > 0)
    t, v = t[keep], v[keep]
    order = np.argsort(-t)
    t, v = t[order], v[order]
    if len(t) < min(min_points, 2):
        return OrderEstimate(math.nan, math.nan, tuple(t), "regression", False, tuple(v))
    x_all, y_all = np.log(t), np.log(v)
    start = 0
    while True:
        x, y = x_all[start:], y_all[start:]
        A = np.column_stack([np.ones_like(x), x])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = y - A @ coef
        n = len(x)
        if n > 2:
            s2 = float(resid @ resid) / (n - 2)
            se = math.sqrt(s2 / float(((x - x.mean()) ** 2).sum()))
        else:
            se = math.inf
        bent = False
        if n >= 3:
            q = np.polyfit(x, y, 2)
            dev = np.abs(np.polyval(q, x) - A @ coef).max()
            rms_lin = math.sqrt(float(resid @ resid) / n)
            rq = y - np.polyval(q, x)
            rms_quad = math.sqrt(float(rq @ rq) / n)
            # curvature counts when it is large against the scatter, or when
            # the quadratic explains most of what the line leaves over
            bent = dev > curvature_tol and (dev > 1.5 * rms_lin or rms_quad <= 0.5 * rms_lin)
        if not bent:
            return OrderEstimate(float(coef[1]), float(se), tuple(np.exp(x)), "regression", True, tuple(np.exp(y)))
        if n - 1 < min_points:
            return OrderEstimate(float(coef[1]), float(se), tuple(np.exp(x)), "regression", False, tuple(np.exp(y)))
        start += 1


def _check_t_list(t_list) -> np.ndarray:
    t = np.asarray(t_list, dtype=float)
    if len(t) < 4:
        raise ValueError("need at least 4 values of t")
    if np.any(np.diff(t) >= 0) or np.any(t <= 0):
        raise ValueError("t values must be positive and strictly decreasing")
    return t


def tord_outer(arc1: MonomialArc, arc2: MonomialArc, t_list: Sequence[float] | None = None) -> OrderEstimate:
    """Outer contact order of two arcs.

    Without ``t_list`` it is the lowest exponent of the componentwise
    difference after cancellation (``inf`` for identical arcs).  With
    ``t_list`` it is the log-log slope of ``||gamma1 - gamma2||``.
    """
    if arc1.dim != arc2.dim:
        raise ValueError("arcs live in different dimensions")
    if t_list is None:
        diff = arc1 - arc2
        o = diff.lowest_order()
        val = float(o) if o != INF_ORDER else INF_ORDER
        return OrderEstimate(val, 0.0, (), "symbolic_exact")
    t = _check_t_list(t_list)
    d = np.linalg.norm(eval_arc(arc1, t) - eval_arc(arc2, t), axis=1)
    if np.all(d == 0):
        return OrderEstimate(INF_ORDER, 0.0, tuple(t), "regression")
    return fit_order(t, d)


def _time_at_norm(arc: MonomialArc, s: float, p: np.ndarray) -> float:
    f = lambda t: float(np.linalg.norm(eval_arc(arc, t) - p)) - s
    hi = arc.domain_max
    if f(hi) < 0:
        raise ValueError(f"arc does not reach distance {s} from the basepoint")
    return brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-14)


def tord_outer_by_distance(arc1: MonomialArc, arc2: MonomialArc, s_list: Sequence[float]) -> OrderEstimate:
    """Outer order after reparametrising both arcs by distance to the basepoint."""
    s = _check_t_list(s_list)
    p = arc1.initial_point()
    pts1 = np.array([eval_arc(arc1, _time_at_norm(arc1, si, p)) for si in s])
    pts2 = np.array([eval_arc(arc2, _time_at_norm(arc2, si, p)) for si in s])
    return fit_order(s, np.linalg.norm(pts1 - pts2, axis=1))


# --------------------------------------------------------------------------
# inner distances between arc points
# --------------------------------------------------------------------------


def _check_on_variety(germ: ImplicitGerm, pts: np.ndarray):
    ok = germ.contains(pts)
    if not np.all(ok):
        bad = pts[~ok][0]
        raise ArcOffVariety(f"arc point {bad} is not on {germ.ref} (residuals {germ.residuals(bad)})")


def _with_points(graph: GeodesicGraph, extra: np.ndarray, radius: float) -> tuple[GeodesicGraph, list[int]]:
    """Add nodes joined to all existing nodes within ``radius``."""
    P = np.asarray(graph.node_points)
    n = len(P)
    tree = cKDTree(P)
    A = graph.adjacency.tolil(copy=True)
    A.resize((n + len(extra), n + len(extra)))
    new = []
    for k, x in enumerate(extra):
        i = n + k
        for j in tree.query_ball_point(x, radius):
            w = max(float(np.linalg.norm(P[j] - x)), np.finfo(float).tiny)
            A[i, j] = w
            A[j, i] = w
        new.append(i)
    for k in range(len(extra)):
        for m in range(k):
            d = float(np.linalg.norm(extra[k] - extra[m]))
            if d <= radius:
                A[n + k, n + m] = A[n + m, n + k] = max(d, np.finfo(float).tiny)
    pts = np.vstack([P, extra])
    pts.setflags(write=False)
    return GeodesicGraph(pts, A.tocsr(), graph.rule, graph.pruned), new


def _split_into_polyline(graph: GeodesicGraph, extra: np.ndarray) -> tuple[GeodesicGraph, list[int]]:
    """Insert points on a traced polyline: each joins the two ends of its nearest edge."""
    P = np.asarray(graph.node_points)
    E = graph.edges
    n = len(P)
    A = graph.adjacency.tolil(copy=True)
    A.resize((n + len(extra), n + len(extra)))
    tree = cKDTree(P)
    new = []
    for k, x in enumerate(extra):
        i = n + k
        _, j = tree.query(x)
        inc = E[(E[:, 0] == j) | (E[:, 1] == j)]
        best, best_d = None, math.inf
        for a, b in inc:
            u, v = P[a], P[b]
            seg = v - u
            L2 = float(seg @ seg)
            s = 0.0 if L2 == 0 else float(np.clip((x - u) @ seg / L2, 0, 1))
            d = float(np.linalg.norm(u + s * seg - x))
            if d < best_d:
                best, best_d = (a, b), d
        ends = best if best is not None else (j,)
        for m in ends:
            w = max(float(np.linalg.norm(P[m] - x)), np.finfo(float).tiny)
            A[i, m] = w
            A[m, i] = w
        new.append(i)
    pts = np.vstack([P, extra])
    pts.setflags(write=False)
    return GeodesicGraph(pts, A.tocsr(), graph.rule, graph.pruned), new


def _inner_pair(germ: ImplicitGerm, a: np.ndarray, b: np.ndarray, t: float, budget: int, seed: int,
                mode: str, norm: NormSpec | None) -> tuple[float, float]:
    """Inner distance estimate between a and b, and the distance from the
    arc points to the nearest sample (the snapping distance)."""
    p = germ.p
    if mode == "link":
        level = norm(a - p)
        cloud = sample_sphere_slice(germ, norm, level, budget, seed)
        graph = build_graph(cloud)
        snap = float(cKDTree(cloud.points).query(np.vstack([a, b]))[0].max())
        if graph.rule.kind == "traced":
            graph, (ia, ib) = _split_into_polyline(graph, np.vstack([a, b]))
        else:
            graph = prune_shortcuts(graph, cloud.constraint)
            graph, (ia, ib) = _with_points(graph, np.vstack([a, b]), graph.rule.param)
    else:
        r = min(1.5 * max(np.linalg.norm(a - p), np.linalg.norm(b - p)), germ.domain_radius)
        cloud = sample_ball(germ, r, budget, seed)
        rule = ConnectionRule.default_for(cloud.points)
        snap = float(cKDTree(cloud.points).query(np.vstack([a, b]))[0].max())
        graph, (ia, ib) = _with_points(build_graph(cloud, rule), np.vstack([a, b]), rule.param)
        graph = prune_shortcuts(graph, cloud.constraint)
    d = dijkstra(graph.adjacency, directed=False, indices=ia)[ib]
    return float(d), snap


@dataclass(frozen=True)
class RatioCurve:
    t: tuple[float, ...]
    inner: tuple[float, ...]
    outer: tuple[float, ...]
    dropped: tuple[float, ...] = ()

    @property
    def ratio(self) -> tuple[float, ...]:
        return tuple(i / o for i, o in zip(self.inner, self.outer))


def _resolve_mode(mode: str, germ: ImplicitGerm, a: np.ndarray, b: np.ndarray, norm: NormSpec | None):
    if mode not in ("auto", "ball", "link"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode != "auto":
        return mode
    nm = norm or NormSpec.euclidean()
    na, nb = nm(a - germ.p), nm(b - germ.p)
    return "link" if abs(na - nb) <= 1e-9 * max(na, nb) else "ball"


def inner_ratio_curve(
    germ: ImplicitGerm,
    arc1: MonomialArc,
    arc2: MonomialArc,
    t_list: Sequence[float],
    budget: int = 20000,
    seed: int = 0,
    *,
    mode: str = "auto",
    norm: NormSpec | None = None,
    snap_fraction: float = 0.1,
) -> RatioCurve:
    """Inner and outer distances of the arc points at each t.

    ``mode="ball"`` samples X in a ball around p of 1.5 times the arcs'
    distance and inserts the two arc points as extra nodes; ``"link"`` uses
    the norm slice through the arc points (they must share a norm level).
    A t is dropped when the nearest sample lies farther than
    ``snap_fraction * t`` from an arc point, or the points are not connected.
    """
    t = _check_t_list(t_list)
    if arc1.dim != germ.ambient_dim or arc2.dim != germ.ambient_dim:
        raise ValueError("arc dimension does not match the germ")
    A, B = eval_arc(arc1, t), eval_arc(arc2, t)
    _check_on_variety(germ, np.vstack([A, B]))
    nm = norm or NormSpec.euclidean()
    keep_t, inner, outer, dropped = [], [], [], []
    for k, (tk, a, b) in enumerate(zip(t, A, B)):
        m = _resolve_mode(mode, germ, a, b, nm)
        if m == "link" and abs(nm(a - germ.p) - nm(b - germ.p)) > 1e-9 * nm(a - germ.p):
            raise ValueError("link mode needs both arc points on the same norm level")
        try:
            d, snap = _inner_pair(germ, a, b, tk, budget, seed + 104729 * k, m, nm)
        except SamplingError:
            dropped.append(float(tk))
            continue
        if not np.isfinite(d) or snap > snap_fraction * tk:
            dropped.append(float(tk))
            continue
        keep_t.append(float(tk))
        inner.append(d)
        outer.append(float(np.linalg.norm(a - b)))
    return RatioCurve(tuple(keep_t), tuple(inner), tuple(outer), tuple(dropped))


def tord_inner(
    germ: ImplicitGerm,
    arc1: MonomialArc,
    arc2: MonomialArc,
    t_list: Sequence[float],
    budget: int = 20000,
    seed: int = 0,
    *,
    mode: str = "auto",
    norm: NormSpec | None = None,
) -> OrderEstimate:
    """Inner contact order: log-log slope of the graph inner distance."""
    curve = inner_ratio_curve(germ, arc1, arc2, t_list, budget, seed, mode=mode, norm=norm)
    return fit_order(curve.t, curve.inner)


@dataclass(frozen=True)
class DirectionProbe:
    direction: np.ndarray
    arc_pair: tuple[MonomialArc, MonomialArc]
    ratio_curve: tuple[tuple[float, float], ...]
    divergence_slope: float
    slope_stderr: float
    evidence: bool
    inner_order: OrderEstimate | None = None
    outer_order: OrderEstimate | None = None
    curve: RatioCurve | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "direction": list(map(float, self.direction)),
            "arcs": [str(self.arc_pair[0]), str(self.arc_pair[1])],
            "ratio_curve": [list(r) for r in self.ratio_curve],
            "divergence_slope": self.divergence_slope,
            "slope_stderr": self.slope_stderr,
            "evidence": self.evidence,
        }


def probe_direction(
    germ: ImplicitGerm,
    arc1: MonomialArc,
    arc2: MonomialArc,
    t_list: Sequence[float],
    budget: int = 20000,
    seed: int = 0,
    *,
    mode: str = "auto",
    norm: NormSpec | None = None,
    slope_threshold: float = -0.2,
) -> DirectionProbe:
    """Ratio inner/outer along two arcs leaving p in the same direction.

    Evidence that the direction is a non-LNE direction is a fitted slope of
    log(ratio) against log t at most ``slope_threshold`` and more than two
    standard errors away from zero.
    """
    if not np.allclose(arc1.initial_point(), germ.p) or not np.allclose(arc2.initial_point(), germ.p):
        raise ValueError("both arcs must start at the basepoint")
    v1, v2 = arc1.direction(), arc2.direction()
    if not np.allclose(v1, v2, atol=1e-9):
        raise ValueError(f"arcs leave p in different directions {v1} and {v2}")
    curve = inner_ratio_curve(germ, arc1, arc2, t_list, budget, seed, mode=mode, norm=norm)
    fit = fit_order(curve.t, curve.ratio)
    evidence = bool(fit.power_law is not None and np.isfinite(fit.order)
                    and fit.order <= slope_threshold and abs(fit.order) > 2 * fit.stderr)
    return DirectionProbe(
        v1, (arc1, arc2), tuple(zip(curve.t, curve.ratio)), fit.order, fit.stderr, evidence,
        inner_order=fit_order(curve.t, curve.inner), outer_order=fit_order(curve.t, curve.outer), curve=curve,
    )


# --------------------------------------------------------------------------
# witness library
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessPair:
    plus: MonomialArc
    minus: MonomialArc
    outer_order: Fraction
    inner_order: Fraction
    ratio_slope: Fraction
    clause: str
    germ_label: str
    probe_mode: str = "ball"
    probe_norm: NormSpec | None = None

    def predictions(self) -> tuple[Fraction, Fraction, Fraction]:
        return self.outer_order, self.inner_order, self.ratio_slope


def witness_arcs_brieskorn(a: int, b: int, c: int, domain_max: float = 1.0) -> WitnessPair:
    """Arc pair showing x^a + y^b + z^c is not LNE.

    a even, b odd:             (+-t^(b/a), -t, 0); orders b/a (outer), 1 (inner).
    a, b even, a < b, c odd:   (+-2^(-1/a) t^(c/a), 2^(-1/b) t^(c/b), -t);
                               orders c/a (outer), c/b (inner).
    Raises ValueError for the LNE triples.
    """
    from .classify import BrieskornParams, classify_brieskorn

    prm = BrieskornParams(a, b, c)
    a, b, c = prm.a, prm.b, prm.c
    clause = classify_brieskorn(prm, with_witness=False).clause
    label = f"x^{a}+y^{b}+z^{c}"
    if clause == "n1":
        e = Fraction(b, a)
        plus = MonomialArc.from_terms([[(1.0, e)], [(-1.0, 1)], []], domain_max)
        minus = MonomialArc.from_terms([[(-1.0, e)], [(-1.0, 1)], []], domain_max)
        return WitnessPair(plus, minus, e, Fraction(1), 1 - e, clause, label)
    if clause == "n2":
        ea, eb = Fraction(c, a), Fraction(c, b)
        ca, cb = 2.0 ** (-1.0 / a), 2.0 ** (-1.0 / b)
        plus = MonomialArc.from_terms([[(ca, ea)], [(cb, eb)], [(-1.0, 1)]], domain_max)
        minus = MonomialArc.from_terms([[(-ca, ea)], [(cb, eb)], [(-1.0, 1)]], domain_max)
        # the pair lies on one level of the (b,1)-norm, where the link is an
        # oval pinched to width ~t^(c/a) with length ~t^(c/b)
        return WitnessPair(plus, minus, ea, eb, eb - ea, clause, label, "link", NormSpec.b_one(b))
    raise ValueError(f"({a},{b},{c}) is LNE (clause {clause}); there is no witness pair")


def witness_arcs_superisolated(domain_max: float = 1.0) -> WitnessPair:
    """(+-t^(3/2), 0, -t) on x^2 - y^2 + z^3 = 0."""
    e = Fraction(3, 2)
    plus = MonomialArc.from_terms([[(1.0, e)], [], [(-1.0, 1)]], domain_max)
    minus = MonomialArc.from_terms([[(-1.0, e)], [], [(-1.0, 1)]], domain_max)
    return WitnessPair(plus, minus, e, Fraction(1), 1 - e, "superisolated", "x^2-y^2+z^3")


# --------------------------------------------------------------------------
# tangent cone
# --------------------------------------------------------------------------


def hausdorff_distance(A, B) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.size == 0 or B.size == 0:
        raise ValueError("Hausdorff distance needs two nonempty clouds")
    if A.shape[1] != B.shape[1]:
        raise ValueError("clouds live in different dimensions")
    dab = cKDTree(B).query(A)[0].max()
    dba = cKDTree(A).query(B)[0].max()
    return float(max(dab, dba))


@dataclass(frozen=True)
class TangentConeSample:
    t: tuple[float, ...]
    clouds: tuple[SampleCloud, ...]  # rescaled (X_t - p)/t, on the unit sphere
    successive: tuple[float, ...]  # Hausdorff distance between consecutive clouds
    germ: ImplicitGerm | None = field(default=None, compare=False, repr=False)
    seed: int = 0

    @property
    def limit(self) -> SampleCloud:
        return self.clouds[-1]

    def decreasing(self, noise: float = 0.0) -> bool:
        d = self.successive
        return all(b <= a + noise for a, b in zip(d, d[1:]))


def tangent_cone_sample(
    germ: ImplicitGerm,
    t_list: Sequence[float],
    count: int = 1000,
    seed: int = 0,
    *,
    norm: NormSpec | None = None,
) -> TangentConeSample:
    """Rescaled links (X_t - p)/t for decreasing t and their successive
    Hausdorff distances.  The last cloud approximates the link of the
    tangent cone; it keeps any polyline edges, so it can go straight to
    ``geodesy.build_graph``."""
    t = np.asarray(t_list, dtype=float)
    if len(t) < 2 or np.any(np.diff(t) >= 0):
        raise ValueError("t_list must be decreasing with at least two values")
    clouds = tuple(_rescaled_link(germ, norm, float(tk), count, seed + 31 * k) for k, tk in enumerate(t))
    succ = tuple(hausdorff_distance(a.points, b.points) for a, b in zip(clouds, clouds[1:]))
    return TangentConeSample(tuple(map(float, t)), clouds, succ, germ, seed)


def _rescaled_link(germ: ImplicitGerm, norm, t: float, count: int, seed: int) -> SampleCloud:
    c = sample_sphere_slice(germ, norm, t, count, seed)
    return SampleCloud((c.points - germ.p) / t, germ.ref, 1.0, "sphere_slice", c.rng_seed,
                       count, norm=c.norm, edges=c.edges)


def limit_record(tc: TangentConeSample, pair_budget: int = 4_000_000):
    """Components, LNE constant and stability of the last rescaled link.

    Stability compares against a fresh link at the same t with twice the
    points (for random clouds, against a halved connection radius).
    """
    from .linkscan import slice_record

    lim = tc.limit
    resample = None
    if tc.germ is not None and lim.edges is not None:
        k = len(tc.t) - 1
        resample = lambda m: _rescaled_link(tc.germ, lim.norm, tc.t[-1], m, tc.seed + 31 * k + 1)
    return slice_record(1.0, lim, pair_budget=pair_budget, seed=tc.seed, resample=resample)
