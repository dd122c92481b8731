"""Link sweeps: LNE constants of the slices X_t over a schedule of radii.

A germ is LNE exactly when its links are LNE with one constant for all small
t and distinct link components stay at least K t apart.  Both conditions are
estimated here from finitely many radii, so every verdict is statistical:
``bounded`` and ``diverging`` come from a log-log fit of the per-slice
constant against t, with a dead zone in between reported as ``inconclusive``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import linregress

from .geodesy import (
    DEFAULT_PAIR_BUDGET,
    ComponentPartition,
    LneEstimate,
    StabilityReport,
    build_graph,
    components,
    lne_constant,
    prune_shortcuts,
    two_scale_validate,
)
from .norms import NormSpec
from .variety import ImplicitGerm, SampleCloud, SamplingError, sample_section_slice, sample_sphere_slice

__all__ = [
    "SliceRecord",
    "SliceSweep",
    "LlneVerdict",
    "NormAgreement",
    "default_schedule",
    "validate_schedule",
    "sweep",
    "section_sweep",
    "llne_verdict",
    "fit_power_law",
    "norm_invariance_check",
    "slice_record",
]

BOUNDED_SLOPE = 0.1
BOUNDED_STDERR = 0.05
DIVERGING_SLOPE = -0.2
MIN_RECORDS = 4
DISCRETE_MAX = 8


def default_schedule(domain_radius: float = 1.0, levels: int = 6) -> list[float]:
    """t_k = t0 2^-k with t0 = domain_radius / 4."""
    t0 = domain_radius / 4.0
    return [t0 * 2.0**-k for k in range(levels)]


def validate_schedule(schedule: Sequence[float], limit: float | None = None) -> list[float]:
    sched = [float(t) for t in schedule]
    if not sched:
        raise ValueError("empty schedule")
    if any(not t > 0 for t in sched):
        raise ValueError("schedule radii must be positive")
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise ValueError("schedule must be strictly decreasing")
    if limit is not None and sched[0] > limit:
        raise ValueError(f"schedule starts at {sched[0]:g}, beyond the domain radius {limit:g}")
    return sched


@dataclass(frozen=True)
class SliceRecord:
    t: float
    n_samples: int
    n_components: int
    constant: float  # max over components; nan when empty
    d0: float  # inf for a single component, nan when empty
    stable: bool
    empty: bool = False
    discrete: bool = False
    per_component: tuple[float, ...] = ()
    resolution_limited: bool = False
    estimate: LneEstimate | None = field(default=None, compare=False, repr=False)
    partition: ComponentPartition | None = field(default=None, compare=False, repr=False)
    stability: StabilityReport | None = field(default=None, compare=False, repr=False)
    note: str = ""

    @property
    def usable(self) -> bool:
        return not self.empty and self.stable and np.isfinite(self.constant)

    def row(self) -> dict:
        return {
            "t": self.t,
            "n_samples": self.n_samples,
            "n_components": self.n_components,
            "C_t": self.constant,
            "d0": self.d0,
            "stable": int(self.stable),
        }


@dataclass(frozen=True)
class SliceSweep:
    germ_ref: str
    norm: NormSpec | None
    schedule: tuple[float, ...]
    records: tuple[SliceRecord, ...]
    kind: str = "sphere_slice"
    direction: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        validate_schedule(self.schedule)
        if len(self.records) != len(self.schedule):
            raise ValueError("one record per radius is required")

    def rows(self) -> list[dict]:
        return [r.row() for r in self.records]


@dataclass(frozen=True)
class LlneVerdict:
    classification: str  # bounded, diverging, inconclusive
    slope: float
    slope_stderr: float
    uniform_constant_estimate: float
    separation_K: float  # inf when every usable slice is connected
    separation_ok: bool
    records_used: int
    reason: str = ""

    @property
    def lne_evidence(self) -> str:
        """Combined reading of the link criterion: LNE needs bounded links and
        separated components."""
        if self.classification == "inconclusive":
            return "inconclusive"
        if self.classification == "bounded" and self.separation_ok:
            return "LNE"
        return "non-LNE"

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "slope": self.slope,
            "slope_stderr": self.slope_stderr,
            "uniform_constant_estimate": self.uniform_constant_estimate,
            "separation_K": self.separation_K,
            "separation_ok": self.separation_ok,
            "records_used": self.records_used,
            "lne_evidence": self.lne_evidence,
            "reason": self.reason,
        }


def _discrete_record(t: float, cloud: SampleCloud) -> SliceRecord:
    pts = cloud.points
    n = len(pts)
    if n >= 2:
        diff = pts[:, None, :] - pts[None, :, :]
        D = np.linalg.norm(diff, axis=2)
        d0 = float(D[np.triu_indices(n, 1)].min())
    else:
        d0 = math.inf
    return SliceRecord(t, n, n, 1.0, d0, True, discrete=True, per_component=(1.0,) * n,
                       note="zero-dimensional slice: singleton components")


def slice_record(
    t: float,
    cloud: SampleCloud,
    *,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
    check_stability: bool = True,
    resample=None,
) -> SliceRecord:
    """Graph, components, constant and stability for one slice cloud."""
    if len(cloud) < DISCRETE_MAX and cloud.edges is None:
        return _discrete_record(t, cloud)
    graph = build_graph(cloud)
    if cloud.constraint is not None:
        graph = prune_shortcuts(graph, cloud.constraint)
    part = components(graph)
    est = lne_constant(graph, pair_budget, seed, scale=t)
    per = tuple(est.per_component.get(k, 1.0) for k in range(part.component_count))
    stab = None
    stable = est.defined
    if check_stability and est.defined:
        prune = cloud.constraint if cloud.edges is None else None
        stab = two_scale_validate(cloud, graph.rule, pair_budget=pair_budget, seed=seed,
                                  resample=resample, prune=prune)
        stable = stab.stable
    const = est.constant if est.defined else 1.0
    return SliceRecord(t, len(cloud), part.component_count, const, part.d0, bool(stable),
                       per_component=per, resolution_limited=est.resolution_limited,
                       estimate=est, partition=part, stability=stab)


def _run(germ, schedule, per_slice_count, seed, pair_budget, check_stability, sampler, **meta):
    records = []
    for k, t in enumerate(schedule):
        s = seed + 7919 * k
        try:
            cloud = sampler(t, per_slice_count, s)
        except SamplingError as exc:
            records.append(SliceRecord(t, exc.found, 0, math.nan, math.nan, False, empty=True, note=str(exc)))
            continue
        resample = None
        if cloud.edges is not None:
            resample = lambda m, _t=t, _s=s: sampler(_t, m, _s)
        records.append(slice_record(t, cloud, pair_budget=pair_budget, seed=s,
                                    check_stability=check_stability, resample=resample))
    return SliceSweep(germ.ref, records=tuple(records), schedule=tuple(schedule), seed=seed, **meta)


def sweep(
    germ: ImplicitGerm,
    norm: NormSpec | None = None,
    schedule: Sequence[float] | None = None,
    per_slice_count: int = 1000,
    seed: int = 0,
    *,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    check_stability: bool = True,
) -> SliceSweep:
    """Per-radius link statistics over a decreasing schedule.

    Slices that come back empty are recorded as such.  Slices with fewer than
    eight random points are treated as zero-dimensional: every point is its
    own component with constant 1, and only the separation d0 is informative.
    """
    norm = norm or NormSpec.euclidean()
    schedule = validate_schedule(schedule or default_schedule(germ.domain_radius), germ.domain_radius)

    def sampler(t, m, s):
        return sample_sphere_slice(germ, norm, t, m, s)

    return _run(germ, schedule, per_slice_count, seed, pair_budget, check_stability, sampler,
                norm=norm, kind="sphere_slice")


def section_sweep(
    germ: ImplicitGerm,
    direction: Sequence[float],
    schedule: Sequence[float] | None = None,
    per_slice_count: int = 1000,
    seed: int = 0,
    *,
    radius: float | None = None,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    check_stability: bool = True,
) -> SliceSweep:
    """Sweep over hyperplane sections X ∩ {<w, x - p> = t} (inside ``radius``)."""
    w = np.asarray(direction, dtype=float)
    if not np.linalg.norm(w) > 0:
        raise ValueError("direction must be nonzero")
    w = w / np.linalg.norm(w)
    schedule = validate_schedule(schedule or default_schedule(germ.domain_radius), germ.domain_radius)

    def sampler(t, m, s):
        return sample_section_slice(germ, w, t, m, s, radius=radius)

    return _run(germ, schedule, per_slice_count, seed, pair_budget, check_stability, sampler,
                norm=None, kind="section_slice", direction=tuple(w))


def fit_power_law(t, values) -> tuple[float, float]:
    """Slope and standard error of log(values) against log(t)."""
    x = np.log(np.asarray(t, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if len(x) < 2:
        return math.nan, math.nan
    if np.ptp(y) == 0:
        return 0.0, 0.0
    if len(x) == 2:
        return float((y[1] - y[0]) / (x[1] - x[0])), math.inf
    fit = linregress(x, y)
    return float(fit.slope), float(fit.stderr)


def llne_verdict(
    sw: SliceSweep,
    *,
    bounded_slope: float = BOUNDED_SLOPE,
    bounded_stderr: float = BOUNDED_STDERR,
    diverging_slope: float = DIVERGING_SLOPE,
    min_records: int = MIN_RECORDS,
) -> LlneVerdict:
    """Classify the per-slice constants of a sweep.

    bounded: |slope| <= 0.1 and stderr <= 0.05; diverging: slope <= -0.2 and
    |slope| > 2 stderr; otherwise inconclusive.  If most usable slices have
    their worst pair at the graph's resolution limit (as next to a cusp, where
    the true constant is infinite), the slices themselves are not LNE and the
    sweep is called diverging.  The separation constant K is the least d0/t
    over slices with several components; it fails when d0/t itself tends to 0
    (positive slope of log(d0/t), or a value below 1e-3).
    """
    used = sorted((r for r in sw.records if r.usable), key=lambda r: -r.t)
    n = len(used)
    seps = [(r.t, r.d0 / r.t) for r in used if r.n_components >= 2 and np.isfinite(r.d0)]
    if seps:
        K = min(v for _, v in seps)
        ok = K > 1e-3
        if len(seps) >= 3 and K > 0:
            s, se = fit_power_law([a for a, _ in seps], [max(v, 1e-300) for _, v in seps])
            if s > 0.2 and s > 2 * se:
                ok = False
    else:
        K, ok = math.inf, True
    if n < min_records:
        return LlneVerdict("inconclusive", math.nan, math.nan, math.nan, K, ok, n,
                           f"only {n} usable slices (need {min_records})")
    ts = [r.t for r in used]
    cs = [r.constant for r in used]
    slope, se = fit_power_law(ts, cs)
    limited = sum(r.resolution_limited for r in used)
    if limited > n / 2 and max(cs) > 10:
        return LlneVerdict("diverging", slope, se, math.nan, K, ok, n,
                           f"{limited}/{n} slices have their worst pair at the resolution limit")
    if abs(slope) <= bounded_slope and se <= bounded_stderr:
        return LlneVerdict("bounded", slope, se, float(max(cs)), K, ok, n)
    if slope <= diverging_slope and abs(slope) > 2 * se:
        return LlneVerdict("diverging", slope, se, math.nan, K, ok, n)
    return LlneVerdict("inconclusive", slope, se, math.nan, K, ok, n, "slope in the dead zone or too noisy")


@dataclass(frozen=True)
class NormAgreement:
    classification: str  # bounded, diverging, inconclusive, disagree
    agree: bool
    verdicts: dict
    sweeps: dict = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "agree": self.agree,
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
        }


def norm_invariance_check(
    germ: ImplicitGerm,
    norms: Sequence[NormSpec],
    schedule: Sequence[float] | None = None,
    budget: int = 1000,
    seed: int = 0,
    **kw,
) -> NormAgreement:
    """Run a sweep per norm and compare bounded/diverging classifications.

    Slopes may differ between norms; only the classification has to match.
    Any inconclusive verdict makes the whole report inconclusive.
    """
    if len(norms) < 2:
        raise ValueError("need at least two norms to compare")
    verdicts, sweeps = {}, {}
    for nm in norms:
        sw = sweep(germ, nm, schedule, budget, seed, **kw)
        sweeps[nm.label()] = sw
        verdicts[nm.label()] = llne_verdict(sw)
    classes = {v.classification for v in verdicts.values()}
    if "inconclusive" in classes:
        return NormAgreement("inconclusive", False, verdicts, sweeps)
    if len(classes) == 1:
        return NormAgreement(classes.pop(), True, verdicts, sweeps)
    return NormAgreement("disagree", False, verdicts, sweeps)
