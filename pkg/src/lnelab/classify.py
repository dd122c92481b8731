"""Exact LNE criteria and the two-route numerical cross-check.

Exact side: the Brieskorn classification of ``x^a + y^b + z^c`` by parity,
and the horn criterion for ``x0^m = x1^p + ... + xn^p``.  Numerical side:
the cone check on a unit link and a comparison of the direct ball estimate
(route A) with the link criterion (route B: uniformly LNE links plus
components separated at a rate proportional to t).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geodesy import (
    DEFAULT_PAIR_BUDGET,
    CloudGerm,
    build_graph,
    lne_constant,
    prune_shortcuts,
)
from .linkscan import (
    BOUNDED_SLOPE,
    BOUNDED_STDERR,
    DIVERGING_SLOPE,
    LlneVerdict,
    SliceRecord,
    SliceSweep,
    fit_power_law,
    llne_verdict,
    slice_record,
    sweep,
    validate_schedule,
)
from .norms import NormSpec
from .variety import ImplicitGerm, SampleCloud, SamplingError, SparsePolynomial, sample_ball, sample_sphere_slice

__all__ = [
    "BrieskornParams",
    "ExactVerdict",
    "CriterionInapplicable",
    "ConeVerdict",
    "RouteA",
    "CrossCheckReport",
    "CLAUSE_TEXT",
    "brieskorn_clauses",
    "classify_brieskorn",
    "classify_horn",
    "brieskorn_as_horn",
    "brieskorn_germ",
    "horn_germ",
    "cone_lne_check",
    "direct_ball_trend",
    "cloud_sweep",
    "cross_check_theorem",
]

CLAUSE_TEXT = {
    "i": "a, b, c all even: X = {0}, LNE",
    "ii": "a odd: LNE",
    "iii": "a = b even, c odd: LNE",
    "n1": "a even, b odd: not LNE, arcs (+-t^(b/a), -t, 0)",
    "n2": "a < b both even, c odd: not LNE, arcs (+-2^(-1/a) t^(c/a), 2^(-1/b) t^(c/b), -t)",
    "horn": "x0^m = x1^p + ... + xn^p with p even, p <= m, n >= 2: LNE",
}

# clause tag -> short label used in verdict lines
CLAUSE_LABEL = {"i": "i", "ii": "ii", "iii": "iii", "n1": "1", "n2": "2", "horn": "horn"}


class CriterionInapplicable(ValueError):
    """Parameters fall outside the hypotheses of an exact criterion."""


@dataclass(frozen=True)
class BrieskornParams:
    """Exponents of x^a + y^b + z^c, stored sorted so that a <= b <= c."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        vals = []
        for v in (self.a, self.b, self.c):
            if isinstance(v, bool) or int(v) != v or int(v) < 1:
                raise ValueError(f"Brieskorn exponents must be positive integers, got {v!r}")
            vals.append(int(v))
        a, b, c = sorted(vals)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    def label(self) -> str:
        return f"x^{self.a}+y^{self.b}+z^{self.c}"


@dataclass(frozen=True)
class ExactVerdict:
    lne: bool
    clause: str
    germ_label: str
    citation: str
    witness: object | None = field(default=None, compare=False)
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.clause in ("i", "ii", "iii", "horn") and not self.lne:
            raise ValueError(f"clause {self.clause} is an LNE clause")
        if self.clause in ("n1", "n2") and self.lne:
            raise ValueError(f"clause {self.clause} is a non-LNE clause")

    def line(self) -> str:
        head = "LNE" if self.lne else "non-LNE"
        return f"{head} (clause {CLAUSE_LABEL[self.clause]})"

    def to_dict(self) -> dict:
        d = {"germ": self.germ_label, "lne": self.lne, "clause": self.clause,
             "verdict": self.line(), "citation": self.citation, "notes": list(self.notes)}
        if self.witness is not None:
            w = self.witness
            d["witness"] = {"plus": w.plus.to_dict(), "minus": w.minus.to_dict(),
                            "outer_order": str(w.outer_order), "inner_order": str(w.inner_order),
                            "ratio_slope": str(w.ratio_slope)}
        return d


def brieskorn_clauses(a: int, b: int, c: int) -> dict[str, bool]:
    """Each clause predicate evaluated on its own (a <= b <= c assumed).

    Kept independent of the decision order so exclusivity can be checked.
    """
    ev = lambda k: k % 2 == 0
    return {
        "i": ev(a) and ev(b) and ev(c),
        "ii": not ev(a),
        "iii": ev(a) and a == b and not ev(c),
        "n1": ev(a) and not ev(b),
        "n2": ev(a) and ev(b) and a < b and not ev(c),
    }


def classify_brieskorn(p: BrieskornParams | Sequence[int], with_witness: bool = True) -> ExactVerdict:
    if not isinstance(p, BrieskornParams):
        p = BrieskornParams(*p)
    fired = [k for k, v in brieskorn_clauses(p.a, p.b, p.c).items() if v]
    if len(fired) != 1:  # cannot happen for a <= b <= c; kept as a guard
        raise AssertionError(f"clauses {fired} fired for {p}")
    clause = fired[0]
    lne = clause in ("i", "ii", "iii")
    notes = ("the real zero set is the single point 0",) if clause == "i" else ()
    witness = None
    if not lne and with_witness:
        from .arcs import witness_arcs_brieskorn

        witness = witness_arcs_brieskorn(p.a, p.b, p.c)
    return ExactVerdict(lne, clause, p.label(), CLAUSE_TEXT[clause], witness, notes)


def classify_horn(m: int, p: int, n: int) -> ExactVerdict:
    """Horn criterion for x0^m = x1^p + ... + xn^p."""
    for name, v in (("m", m), ("p", p), ("n", n)):
        if isinstance(v, bool) or int(v) != v or int(v) < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    m, p, n = int(m), int(p), int(n)
    problems = []
    if n < 2:
        problems.append("n < 2")
    if p > m:
        problems.append("p > m")
    if p % 2:
        problems.append("p odd")
    if problems:
        raise CriterionInapplicable(f"horn criterion does not cover (m,p,n)=({m},{p},{n}): {', '.join(problems)}")
    notes = ("m = p: X is a cone",) if m == p else ()
    label = f"x0^{m} = " + " + ".join(f"x{i}^{p}" for i in range(1, n + 1))
    return ExactVerdict(True, "horn", label, CLAUSE_TEXT["horn"], None, notes)


def brieskorn_as_horn(p: BrieskornParams | Sequence[int]) -> tuple[tuple[int, int, int], str]:
    """Rewrite x^a + y^a + z^c = 0 (a even, c odd) as the horn
    x0^c = x^a + y^a with x0 = -z.  Returns (m, p, n) and the substitution."""
    if not isinstance(p, BrieskornParams):
        p = BrieskornParams(*p)
    if not (p.a == p.b and p.a % 2 == 0):
        raise CriterionInapplicable(f"{p.label()} is not of the form x^a + y^a + z^c with a even")
    if p.c % 2 == 0:
        raise CriterionInapplicable(f"{p.label()}: c even, x0^c = -(x^a + y^a) has no horn form")
    return (p.c, p.a, 2), "x0 = -z turns z^c into -x0^c (c odd)"


def brieskorn_germ(a: int, b: int, c: int) -> ImplicitGerm:
    prm = BrieskornParams(a, b, c)
    poly = SparsePolynomial.from_terms(3, [(1.0, (prm.a, 0, 0)), (1.0, (0, prm.b, 0)), (1.0, (0, 0, prm.c))])
    return ImplicitGerm.hypersurface(poly, name=f"brieskorn({prm.a},{prm.b},{prm.c})")


def horn_germ(m: int, p: int, n: int) -> ImplicitGerm:
    """x1^p + ... + xn^p - x0^m = 0 with x0 as the last coordinate."""
    terms = []
    for i in range(n):
        e = [0] * (n + 1)
        e[i] = p
        terms.append((1.0, tuple(e)))
    e = [0] * (n + 1)
    e[n] = m
    terms.append((-1.0, tuple(e)))
    return ImplicitGerm.hypersurface(SparsePolynomial.from_terms(n + 1, terms), name=f"horn({m},{p},{n})")


# --------------------------------------------------------------------------
# cone criterion
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeVerdict:
    verdict: str  # LNE-evidence, non-LNE-evidence, inconclusive
    n_components: int
    d0: float
    per_component: tuple[float, ...]
    stable: bool
    record: SliceRecord | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "n_components": self.n_components, "d0": self.d0,
                "per_component": list(self.per_component), "stable": self.stable}


def cone_lne_check(
    link: SampleCloud,
    budget: int = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
    *,
    germ: ImplicitGerm | None = None,
    max_constant: float = 1e3,
    min_d0: float = 1e-3,
) -> ConeVerdict:
    """Numerical reading of the cone criterion on a unit link L: cone(L) is
    LNE iff L has finitely many components, d0(L) > 0, and each component's
    cone is LLNE (for a cone, every link is a scaled copy, so this reduces to
    a finite constant on L).

    With ``germ`` the stability check resamples the link at twice the count.
    """
    resample = None
    if germ is not None:
        norm = link.norm or NormSpec.euclidean()
        resample = lambda m: sample_sphere_slice(germ, norm, 1.0, m, seed + 1)
    rec = slice_record(1.0, link, pair_budget=budget, seed=seed, resample=resample)
    if rec.empty or not rec.stable:
        verdict = "inconclusive"
    elif rec.n_components >= 1 and rec.d0 > min_d0 and max(rec.per_component or (rec.constant,)) < max_constant:
        verdict = "LNE-evidence"
    else:
        verdict = "non-LNE-evidence"
    return ConeVerdict(verdict, rec.n_components, rec.d0, tuple(rec.per_component), rec.stable, rec)


# --------------------------------------------------------------------------
# theorem cross-check
# --------------------------------------------------------------------------


def _trend(ts, cs, bounded_slope=BOUNDED_SLOPE, bounded_stderr=BOUNDED_STDERR, diverging_slope=DIVERGING_SLOPE):
    slope, se = fit_power_law(ts, cs)
    if not np.isfinite(slope):
        return "inconclusive", slope, se
    if abs(slope) <= bounded_slope and se <= bounded_stderr:
        return "bounded", slope, se
    if slope <= diverging_slope and abs(slope) > 2 * se:
        return "diverging", slope, se
    return "inconclusive", slope, se


@dataclass(frozen=True)
class RouteA:
    classification: str
    slope: float
    slope_stderr: float
    schedule: tuple[float, ...]
    constants: tuple[float, ...]
    oracle_constants: tuple[float, ...] = ()
    oracle_slope: float = math.nan

    def to_dict(self) -> dict:
        d = {"classification": self.classification, "slope": self.slope, "slope_stderr": self.slope_stderr,
             "schedule": list(self.schedule), "constants": list(self.constants)}
        if self.oracle_constants:
            d["oracle_constants"] = list(self.oracle_constants)
            d["oracle_slope"] = self.oracle_slope
        return d


def _shell_mask(points: np.ndarray, p: np.ndarray, t: float, inner: float) -> np.ndarray:
    r = np.linalg.norm(points - p, axis=1)
    return (r >= inner * t) & (r <= t)


def direct_ball_trend(
    germ,
    schedule: Sequence[float],
    budget: int = 4000,
    seed: int = 0,
    *,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    shell: float = 0.5,
    margin: float = 1.25,
    oracle=None,
) -> RouteA:
    """Route A: LNE constants of ball clouds over shrinking radii.

    At radius t the constant is taken over pairs with both points in the
    shell ``shell*t <= |q - p| <= t``; paths may use the whole ball, which
    is sampled out to ``margin*t`` so that shell pairs never sit on the rim
    of the sample.  Pairs close to p are exactly where a fixed-size sample
    loses resolution, while the shell still sees every scale once the
    schedule is swept.
    ``oracle(t, cloud, mask)``, if given, supplies an exact constant on the
    same pairs for comparison.
    """
    schedule = validate_schedule(schedule)
    cs, oc = [], []
    for k, t in enumerate(schedule):
        s = seed + 7919 * k
        if isinstance(germ, CloudGerm):
            cloud = germ.ball(margin * t)
            graph = build_graph(cloud)
        else:
            cloud = sample_ball(germ, min(margin * t, germ.domain_radius), budget, s)
            graph = prune_shortcuts(build_graph(cloud), cloud.constraint)
        mask = _shell_mask(np.asarray(graph.node_points), germ.p, t, shell)
        est = lne_constant(graph, pair_budget, s, node_mask=mask, scale=t)
        cs.append(est.constant if est.defined else math.nan)
        if oracle is not None:
            oc.append(float(oracle(t, cloud, mask)))
    ok = [i for i, c in enumerate(cs) if np.isfinite(c)]
    ts_ok = [schedule[i] for i in ok]
    cls, slope, se = _trend(ts_ok, [cs[i] for i in ok]) if len(ok) >= 3 else ("inconclusive", math.nan, math.nan)
    oslope = fit_power_law(schedule, oc)[0] if oc else math.nan
    return RouteA(cls, slope, se, tuple(schedule), tuple(cs), tuple(oc), oslope)


def cloud_sweep(germ: CloudGerm, schedule: Sequence[float], seed: int = 0, *, width: float | None = None) -> SliceSweep:
    """Link sweep on a cloud germ, slicing the given points instead of resampling."""
    schedule = validate_schedule(schedule)
    records = []
    for k, t in enumerate(schedule):
        c = germ.sphere_slice(t, width)
        if len(c) == 0:
            records.append(SliceRecord(t, 0, 0, math.nan, math.nan, False, empty=True, note="empty slice"))
            continue
        if len(c) == 1:
            records.append(SliceRecord(t, 1, 1, 1.0, math.inf, True, discrete=True, per_component=(1.0,),
                                       note="single point"))
            continue
        records.append(slice_record(t, c, seed=seed + 7919 * k, check_stability=False))
    return SliceSweep(germ.ref, None, tuple(schedule), tuple(records), seed=seed)


@dataclass(frozen=True)
class CrossCheckReport:
    germ: str
    route_a: RouteA
    route_b: LlneVerdict
    agree: bool
    status: str  # agree, disagree, degraded
    exact: ExactVerdict | None = None
    exact_conflicts: tuple[str, ...] = ()
    note: str = ""
    sweep: SliceSweep | None = field(default=None, compare=False, repr=False)

    @property
    def a_lne(self) -> str:
        return {"bounded": "LNE", "diverging": "non-LNE"}.get(self.route_a.classification, "inconclusive")

    @property
    def b_lne(self) -> str:
        return self.route_b.lne_evidence

    def to_dict(self) -> dict:
        return {
            "germ": self.germ,
            "status": self.status,
            "agree": self.agree,
            "route_a": self.route_a.to_dict(),
            "route_b": self.route_b.to_dict(),
            "exact": self.exact.to_dict() if self.exact else None,
            "exact_conflicts": list(self.exact_conflicts),
            "note": self.note,
        }


def cross_check_theorem(
    germ,
    schedule: Sequence[float],
    budget: int = 1000,
    seed: int = 0,
    *,
    ball_budget: int = 4000,
    norm: NormSpec | None = None,
    exact: ExactVerdict | None = None,
    oracle=None,
    parallel: bool = True,
) -> CrossCheckReport:
    """Compare route A (direct ball trend) with route B (link sweep plus
    separation).  Both routes run independently; an inconclusive route
    degrades the report instead of being resolved.  Where an exact verdict is
    supplied, each route is compared to it and conflicts are listed (the
    exact verdict is never overridden)."""
    schedule = validate_schedule(schedule)

    def route_a():
        return direct_ball_trend(germ, schedule, ball_budget, seed, oracle=oracle)

    def route_b():
        if isinstance(germ, CloudGerm):
            sw = cloud_sweep(germ, schedule, seed)
        else:
            sw = sweep(germ, norm, schedule, budget, seed)
        return sw, llne_verdict(sw)

    if parallel:
        with ThreadPoolExecutor(max_workers=2) as ex:
            fa, fb = ex.submit(route_a), ex.submit(route_b)
            ra, (sw, rb) = fa.result(), fb.result()
    else:
        ra, (sw, rb) = route_a(), route_b()

    a_lne = {"bounded": "LNE", "diverging": "non-LNE"}.get(ra.classification, "inconclusive")
    b_lne = rb.lne_evidence
    if "inconclusive" in (a_lne, b_lne):
        status, agree = "degraded", False
    else:
        agree = a_lne == b_lne
        status = "agree" if agree else "disagree"
    conflicts = []
    if exact is not None:
        want = "LNE" if exact.lne else "non-LNE"
        for name, got in (("route A", a_lne), ("route B", b_lne)):
            if got not in ("inconclusive", want):
                conflicts.append(f"{name} says {got}, exact classifier says {want}")
    note = ""
    if isinstance(germ, CloudGerm):
        note = "cloud germ outside the subanalytic hypothesis; the link criterion need not apply"
    return CrossCheckReport(germ.ref, ra, rb, agree, status, exact, tuple(conflicts), note, sw)
