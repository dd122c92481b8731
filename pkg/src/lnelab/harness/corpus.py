"""Example germs: algebraic entries as ImplicitGerms, the rest as clouds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..classify import (
    CriterionInapplicable,
    ExactVerdict,
    brieskorn_germ,
    classify_brieskorn,
    classify_horn,
    horn_germ,
)
from ..geodesy import CloudGerm
from ..variety import ImplicitGerm, SparsePolynomial

__all__ = [
    "Expected",
    "CorpusEntry",
    "GENERATORS",
    "generate_corpus",
    "default_corpus",
    "algebraic_cross_check_corpus",
    "spiral",
    "spiral_arc_length",
    "spiral_oracle_constant",
    "horns_union",
]


@dataclass(frozen=True)
class Expected:
    lne: bool | None
    source: str  # exact, asserted
    citation: str
    llne: bool | None = None


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    generator: str
    params: dict = field(default_factory=dict)
    expected: Expected | None = None

    def to_dict(self) -> dict:
        e = self.expected
        return {
            "name": self.name,
            "generator": self.generator,
            "params": dict(self.params),
            "expected": None if e is None else {"lne": e.lne, "llne": e.llne, "source": e.source, "citation": e.citation},
        }


def _poly(n, terms):
    return SparsePolynomial.from_terms(n, terms)


def superisolated_real() -> ImplicitGerm:
    return ImplicitGerm.hypersurface(_poly(3, [(1, (2, 0, 0)), (-1, (0, 2, 0)), (1, (0, 0, 3))]), name="superisolated")


def cusp_curve() -> ImplicitGerm:
    """{x = 0} ∩ {x^2 + y^2 = z^3}: the cusp y^2 = z^3 in the plane x = 0."""
    eqs = (_poly(3, [(1, (1, 0, 0))]), _poly(3, [(1, (2, 0, 0)), (1, (0, 2, 0)), (-1, (0, 0, 3))]))
    return ImplicitGerm(eqs, np.zeros(3), name="cusp_curve")


def line() -> ImplicitGerm:
    """{y = z = 0} in R^3."""
    return ImplicitGerm((_poly(3, [(1, (0, 1, 0))]), _poly(3, [(1, (0, 0, 1))])), np.zeros(3), name="line")


def plane() -> ImplicitGerm:
    return ImplicitGerm.hypersurface(_poly(3, [(1, (0, 0, 1))]), name="plane")


def cone() -> ImplicitGerm:
    return ImplicitGerm.hypersurface(_poly(3, [(1, (2, 0, 0)), (1, (0, 2, 0)), (-1, (0, 0, 2))]), name="cone")


def two_planes() -> ImplicitGerm:
    """{x3 = x4 = 0} ∪ {x1 = x2 = 0} in R^4, meeting only at 0."""
    eqs = tuple(
        _poly(4, [(1, tuple(1 if k in (i, j) else 0 for k in range(4)))]) for i in (0, 1) for j in (2, 3)
    )
    return ImplicitGerm(eqs, np.zeros(4), name="two_planes")


def spiral(turns: int = 40, points_per_turn: int = 126) -> CloudGerm:
    """Polyline through f(x) = x e^{2 pi i / x} for 1/(turns+1) <= x <= 1.

    Nodes are uniform in u = 1/x, which makes the step a fixed fraction of
    the local radius (about 2 pi x / points_per_turn).
    """
    if turns < 1 or points_per_turn < 8:
        raise ValueError("spiral needs turns >= 1 and points_per_turn >= 8")
    u = np.linspace(1.0, turns + 1.0, turns * points_per_turn + 1)
    x = 1.0 / u
    pts = np.column_stack([x * np.cos(2 * np.pi * u), x * np.sin(2 * np.pi * u)])
    n = len(pts)
    edges = np.column_stack([np.arange(n - 1), np.arange(1, n)])
    return CloudGerm(pts, np.zeros(2), edges, name=f"spiral({turns})")


def _spiral_primitive(x):
    # d/dx of this is |f'(x)| = sqrt(1 + 4 pi^2 / x^2)
    a = 2 * np.pi
    r = np.sqrt(x * x + a * a)
    return r - a * np.log((a + r) / x)


def spiral_arc_length(x1, x2):
    """Exact length of the spiral between parameters x1 and x2."""
    return np.abs(_spiral_primitive(np.asarray(x2, dtype=float)) - _spiral_primitive(np.asarray(x1, dtype=float)))


def spiral_oracle_constant(t, cloud, mask, chunk: int = 512) -> float:
    """Largest exact arc-length / chord ratio over the masked nodes of a
    spiral ball cloud.  A node's parameter x is its distance to 0."""
    P = np.asarray(cloud.points)[np.asarray(mask)]
    if len(P) < 2:
        return math.nan
    S = _spiral_primitive(np.linalg.norm(P, axis=1))
    best = 1.0
    for s in range(0, len(P), chunk):
        A = P[s : s + chunk]
        E = np.linalg.norm(A[:, None, :] - P[None, :, :], axis=2)
        L = np.abs(S[s : s + chunk, None] - S[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            R = np.where(E > 0, L / E, 0.0)
        best = max(best, float(R.max()))
    return best


def horns_union(J: int = 6, per_horn: int = 1500, line_points: int = 400, seed: int = 0) -> CloudGerm:
    """Points on the z-axis and on horns x^2 + (z - 1/j)^2 = y^3, 1 <= j <= J.

    Horn j lives on 0 <= y <= (1/(4j(j-1)))^(2/3), which keeps neighbouring
    horns apart; that bound is infinite for j = 1, where y <= (1/8)^(2/3)
    is used instead.
    """
    if J < 2:
        raise ValueError("horns_union needs a finite truncation J >= 2")
    rng = np.random.default_rng(seed)
    parts = [np.column_stack([np.zeros(line_points), np.zeros(line_points), np.linspace(-1.0, 1.2, line_points)])]
    for j in range(1, J + 1):
        ymax = (1.0 / (4 * j * (j - 1))) ** (2 / 3) if j > 1 else (1.0 / 8) ** (2 / 3)
        y = ymax * rng.random(per_horn) ** (2 / 5)  # denser near the tip
        y[0] = 0.0
        th = rng.uniform(0, 2 * np.pi, per_horn)
        r = y**1.5
        parts.append(np.column_stack([r * np.cos(th), y, 1.0 / j + r * np.sin(th)]))
    return CloudGerm(np.vstack(parts), np.zeros(3), None, name=f"horns_union({J})")


GENERATORS = {
    "brieskorn": lambda a, b, c: brieskorn_germ(a, b, c),
    "horn": lambda m, p, n: horn_germ(m, p, n),
    "superisolated_real": lambda: superisolated_real(),
    "cusp_curve": lambda: cusp_curve(),
    "spiral": lambda turns=40: spiral(turns),
    "horns_union": lambda J=6: horns_union(J),
    "line": lambda: line(),
    "plane": lambda: plane(),
    "cone": lambda: cone(),
    "two_planes": lambda: two_planes(),
}


def generate_corpus(entry: CorpusEntry):
    """ImplicitGerm for algebraic entries, CloudGerm for the spiral and horns."""
    try:
        gen = GENERATORS[entry.generator]
    except KeyError:
        raise ValueError(f"unknown generator {entry.generator!r}") from None
    try:
        return gen(**entry.params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {entry.generator}: {exc}") from None


def exact_verdict(entry: CorpusEntry) -> ExactVerdict | None:
    """Exact classifier verdict where one applies."""
    if entry.generator == "brieskorn":
        return classify_brieskorn((entry.params["a"], entry.params["b"], entry.params["c"]))
    if entry.generator == "horn":
        try:
            return classify_horn(entry.params["m"], entry.params["p"], entry.params["n"])
        except CriterionInapplicable:
            return None
    return None


def _exact(entry_gen, params):
    e = CorpusEntry("", entry_gen, params)
    v = exact_verdict(e)
    return Expected(v.lne, "exact", v.citation)


def default_corpus() -> list[CorpusEntry]:
    b = lambda a, bb, c: {"a": a, "b": bb, "c": c}
    h = {"m": 3, "p": 2, "n": 2}
    return [
        CorpusEntry("line", "line", {}, Expected(True, "asserted", "smooth germ")),
        CorpusEntry("plane", "plane", {}, Expected(True, "asserted", "smooth germ")),
        CorpusEntry("cone", "cone", {}, Expected(True, "asserted", "cone over two circles at positive distance")),
        CorpusEntry("horn", "horn", h, _exact("horn", h)),
        CorpusEntry("brieskorn_233", "brieskorn", b(2, 3, 3), _exact("brieskorn", b(2, 3, 3))),
        CorpusEntry("brieskorn_245", "brieskorn", b(2, 4, 5), _exact("brieskorn", b(2, 4, 5))),
        CorpusEntry("brieskorn_345", "brieskorn", b(3, 4, 5), _exact("brieskorn", b(3, 4, 5))),
        CorpusEntry("superisolated", "superisolated_real", {},
                    Expected(False, "asserted", "x^2 - y^2 + z^3 is not LNE: arcs (+-t^(3/2), 0, -t)")),
        CorpusEntry("cusp_curve", "cusp_curve", {},
                    Expected(False, "asserted", "section x = 0 of the LNE horn x^2 + y^2 = z^3 is a cusp")),
        CorpusEntry("two_planes", "two_planes", {}, Expected(True, "asserted", "cone over two disjoint great circles")),
        CorpusEntry("spiral", "spiral", {"turns": 40},
                    Expected(False, "asserted", "spiral x e^(2 pi i/x): not LNE, every link LNE; outside subanalytic hypothesis",
                             llne=True)),
        CorpusEntry("horns_union", "horns_union", {"J": 6},
                    Expected(True, "asserted", "line plus horns: LNE at 0, links at t = 1/j not LNE (truncated at J)",
                             llne=False)),
    ]


def algebraic_cross_check_corpus() -> list[CorpusEntry]:
    """The six algebraic germs used for the route A / route B comparison."""
    names = {"line", "plane", "cone", "horn", "brieskorn_233", "superisolated"}
    return [e for e in default_corpus() if e.name in names]
