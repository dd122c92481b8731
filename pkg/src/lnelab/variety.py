"""Real algebraic germs given by polynomial systems, and samplers on them.

Sample points are produced by throwing random ambient seeds into the region of
interest and pulling them onto the variety with a damped-free Gauss-Newton
iteration (minimum-norm steps).  Slices add one more equation, the active
smooth piece of a norm sphere or a hyperplane, to the system.  Oversampled
point sets are thinned to a near-uniform subset, which keeps proximity graphs
built on them free of large holes.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .norms import LevelPiece, NormSpec

__all__ = [
    "SparsePolynomial",
    "ImplicitGerm",
    "SampleCloud",
    "ProjectionError",
    "SamplingError",
    "Constraint",
    "evaluate",
    "project_points",
    "project_to_variety",
    "sample_ball",
    "sample_sphere_slice",
    "sample_section_slice",
    "thin_points",
    "trace_slice",
    "slice_dimension",
]

DEFAULT_RESIDUAL_TOL = 1e-9
DEFAULT_SLICE_TOL = 1e-6
DEFAULT_COND_CAP = 1e12
DEFAULT_STEP_TOL = 1e-12


class ProjectionError(RuntimeError):
    """Gauss-Newton projection did not reach the variety."""

    def __init__(self, reason: str, point=None):
        super().__init__(reason)
        self.reason = reason
        self.point = point


class SamplingError(RuntimeError):
    """A sampler found too few points on the requested region."""

    def __init__(self, message: str, found: int = 0):
        super().__init__(message)
        self.found = found


@dataclass(frozen=True)
class SparsePolynomial:
    """Polynomial with real coefficients stored as (coefficient, exponents) terms.

    Like terms are merged and zero coefficients dropped at construction, so two
    polynomials compare equal iff they have the same terms.
    """

    ambient_dim: int
    terms: tuple[tuple[float, tuple[int, ...]], ...]

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise ValueError("ambient_dim must be positive")
        merged: dict[tuple[int, ...], float] = {}
        for coeff, exps in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.ambient_dim:
                raise ValueError(f"exponent vector {exps} has wrong length for dimension {self.ambient_dim}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            merged[exps] = merged.get(exps, 0.0) + float(coeff)
        clean = tuple(sorted(((c, e) for e, c in merged.items() if c != 0.0), key=lambda ce: ce[1]))
        object.__setattr__(self, "terms", clean)
        E = np.array([e for _, e in clean], dtype=float).reshape(len(clean), self.ambient_dim)
        c = np.array([c for c, _ in clean], dtype=float)
        object.__setattr__(self, "_E", E)
        object.__setattr__(self, "_c", c)

    @classmethod
    def from_terms(cls, ambient_dim: int, terms: Sequence) -> "SparsePolynomial":
        return cls(ambient_dim, tuple((float(c), tuple(e)) for c, e in terms))

    @classmethod
    def from_dict(cls, ambient_dim: int, d: dict) -> "SparsePolynomial":
        return cls(ambient_dim, tuple((float(t["coeff"]), tuple(t["exponents"])) for t in d["terms"]))

    def to_dict(self) -> dict:
        return {"terms": [{"coeff": c, "exponents": list(e)} for c, e in self.terms]}

    @property
    def coeff_norm(self) -> float:
        return float(np.linalg.norm(self._c)) if len(self._c) else 0.0

    @property
    def degree(self) -> int:
        return int(self._E.sum(axis=1).max()) if len(self.terms) else 0

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for _, e in self.terms}
        return len(degs) <= 1

    def __call__(self, X) -> np.ndarray | float:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = np.atleast_2d(X)
        if X2.shape[1] != self.ambient_dim:
            raise ValueError(f"point dimension {X2.shape[1]} != ambient_dim {self.ambient_dim}")
        if not self.terms:
            out = np.zeros(len(X2))
        else:
            out = np.prod(X2[:, None, :] ** self._E[None], axis=2) @ self._c
        return float(out[0]) if single else out

    def gradient(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = self.ambient_dim
        G = np.zeros((len(X), n))
        for i in range(n):
            e_i = self._E[:, i]
            live = e_i > 0
            if not live.any():
                continue
            Ei = self._E[live].copy()
            Ei[:, i] -= 1
            G[:, i] = np.prod(X[:, None, :] ** Ei[None], axis=2) @ (self._c[live] * e_i[live])
        return G

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = "xyzw" if self.ambient_dim <= 4 else None
        parts = []
        for c, e in self.terms:
            mono = []
            for i, k in enumerate(e):
                v = names[i] if names else f"x{i}"
                if k == 1:
                    mono.append(v)
                elif k > 1:
                    mono.append(f"{v}^{k}")
            body = "*".join(mono)
            coef = f"{c:g}"
            if not body:
                parts.append(coef)
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{coef}*{body}")
        return " + ".join(parts).replace("+ -", "- ")


def evaluate(poly: SparsePolynomial, x) -> float:
    """Value of ``poly`` at a single point."""
    x = np.asarray(x, dtype=float)
    if x.shape != (poly.ambient_dim,):
        raise ValueError(f"point of shape {x.shape} does not match ambient_dim {poly.ambient_dim}")
    return poly(x)


@dataclass(frozen=True)
class ImplicitGerm:
    """The germ at ``basepoint`` of the common zero set of ``equations``.

    ``residual_tol`` is relative: an equation counts as satisfied when its
    absolute value is at most ``residual_tol`` times its coefficient norm.
    """

    equations: tuple[SparsePolynomial, ...]
    basepoint: tuple[float, ...]
    residual_tol: float = DEFAULT_RESIDUAL_TOL
    domain_radius: float = 1.0
    name: str = ""

    def __post_init__(self):
        eqs = tuple(self.equations)
        if not eqs:
            raise ValueError("a germ needs at least one equation")
        n = eqs[0].ambient_dim
        if any(e.ambient_dim != n for e in eqs):
            raise ValueError("equations live in different ambient dimensions")
        bp = tuple(float(v) for v in self.basepoint)
        if len(bp) != n:
            raise ValueError("basepoint dimension mismatch")
        if self.residual_tol <= 0 or self.domain_radius <= 0:
            raise ValueError("residual_tol and domain_radius must be positive")
        object.__setattr__(self, "equations", eqs)
        object.__setattr__(self, "basepoint", bp)
        res = np.abs(self.residuals(np.array(bp)))
        if np.any(res > self.abs_tolerances):
            raise ValueError(f"basepoint {bp} is not on the variety (residuals {res})")

    @property
    def ambient_dim(self) -> int:
        return self.equations[0].ambient_dim

    @property
    def p(self) -> np.ndarray:
        return np.array(self.basepoint)

    @property
    def abs_tolerances(self) -> np.ndarray:
        return np.array([self.residual_tol * max(e.coeff_norm, 1e-300) for e in self.equations])

    @property
    def coeff_scale(self) -> float:
        return max(e.coeff_norm for e in self.equations)

    def is_homogeneous(self) -> bool:
        return all(e.is_homogeneous() for e in self.equations) and not np.any(self.p)

    def residuals(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        cols = [e(np.atleast_2d(X)) for e in self.equations]
        R = np.stack(cols, axis=1)
        return R[0] if X.ndim == 1 else R

    def jacobian(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([e.gradient(X) for e in self.equations], axis=1)

    def contains(self, X) -> np.ndarray:
        R = np.abs(np.atleast_2d(self.residuals(X)))
        return np.all(R <= self.abs_tolerances, axis=1)

    @property
    def ref(self) -> str:
        """Short stable identifier derived from the defining data."""
        if self.name:
            return self.name
        return "germ-" + self.fingerprint()[:10]

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()

    def to_dict(self) -> dict:
        d = {
            "ambient_dim": self.ambient_dim,
            "basepoint": list(self.basepoint),
            "equations": [e.to_dict() for e in self.equations],
            "residual_tol": self.residual_tol,
            "domain_radius": self.domain_radius,
        }
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ImplicitGerm":
        n = int(d["ambient_dim"])
        eqs = tuple(SparsePolynomial.from_dict(n, e) for e in d["equations"])
        return cls(eqs, tuple(d.get("basepoint", [0.0] * n)),
                   residual_tol=float(d.get("residual_tol", DEFAULT_RESIDUAL_TOL)),
                   domain_radius=float(d.get("domain_radius", 1.0)),
                   name=d.get("name", ""))

    @classmethod
    def hypersurface(cls, poly: SparsePolynomial, name: str = "", **kw) -> "ImplicitGerm":
        return cls((poly,), (0.0,) * poly.ambient_dim, name=name, **kw)


@dataclass(frozen=True)
class SampleCloud:
    """Finite point set sampled on a germ.  ``points`` is read-only.

    Traced one-dimensional slices also carry ``edges``, the polyline
    connectivity found while following the curve.
    """

    points: np.ndarray
    germ_ref: str
    scale: float
    kind: str  # "ball", "sphere_slice", "section_slice", "cloud"
    rng_seed: int
    requested: int = 0
    norm: NormSpec | None = None
    constraint: "Constraint | None" = field(default=None, compare=False, repr=False)
    edges: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(0, 0) if pts.size == 0 else pts[None, :]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.edges is not None:
            e = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
            e.setflags(write=False)
            object.__setattr__(self, "edges", e)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def achieved(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Constraint:
    """The germ's equations plus at most one extra level piece.

    ``region`` names which extra membership test applies after projection.
    """

    germ: ImplicitGerm
    kind: str = "ball"  # "ball", "sphere_slice", "section_slice"
    t: float = 1.0
    norm: NormSpec | None = None
    direction: tuple[float, ...] | None = None
    radius: float | None = None  # section slices are cut to this ball
    slice_tol: float = DEFAULT_SLICE_TOL

    def pieces(self) -> list[LevelPiece] | None:
        if self.kind == "sphere_slice":
            return self.norm.pieces(self.germ.ambient_dim)
        return None

    def assign(self, X: np.ndarray) -> np.ndarray:
        if self.kind == "sphere_slice":
            return self.norm.active_piece(X - self.germ.p)
        return np.zeros(len(X), dtype=int)

    def extra(self, X: np.ndarray, piece: int) -> tuple[np.ndarray, np.ndarray] | None:
        p = self.germ.p
        if self.kind == "sphere_slice":
            return self.norm.pieces(len(p))[piece].value_grad(X - p, self.t)
        if self.kind == "section_slice":
            w = np.asarray(self.direction)
            return (X - p) @ w - self.t, np.broadcast_to(w, X.shape).copy()
        return None

    def in_region(self, X: np.ndarray) -> np.ndarray:
        p = self.germ.p
        if self.kind == "ball":
            return np.linalg.norm(X - p, axis=1) <= self.t * (1 + 1e-12)
        if self.kind == "sphere_slice":
            return np.abs(self.norm(X - p) - self.t) <= self.slice_tol * self.t
        w = np.asarray(self.direction)
        ok = np.abs((X - p) @ w - self.t) <= self.slice_tol * max(abs(self.t), 1e-300)
        if self.radius is not None:
            ok &= np.linalg.norm(X - p, axis=1) <= self.radius
        return ok

    def valid(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        return self.germ.contains(X) & self.in_region(X)

    def project(self, X: np.ndarray, **kw) -> tuple[np.ndarray, np.ndarray]:
        """Project points onto germ-and-level; returns (points, success mask)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = X.copy()
        ok = np.zeros(len(X), dtype=bool)
        labels = self.assign(X)
        kw.setdefault("scale", max(abs(self.t), 1e-300))
        for piece in np.unique(labels):
            idx = np.flatnonzero(labels == piece)
            extra = None
            if self.kind != "ball":
                extra = lambda Y, _pc=int(piece): self.extra(Y, _pc)
            Y, good = project_points(self.germ, X[idx], extra=extra, **kw)
            out[idx] = Y
            ok[idx] = good
        if len(out):
            with np.errstate(over="ignore", invalid="ignore"):
                ok &= self.valid(out)
        return out, ok


def project_points(
    germ: ImplicitGerm,
    X0: np.ndarray,
    *,
    extra: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None,
    max_iter: int = 60,
    bounds: tuple[Sequence[float], Sequence[float]] | None = None,
    cond_cap: float = DEFAULT_COND_CAP,
    step_tol: float = DEFAULT_STEP_TOL,
    scale: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched Gauss-Newton projection of many seeds onto the germ.

    Each iteration takes the minimum-norm least-squares step for the stacked
    residual vector (germ equations, then the optional ``extra`` level
    equation).  Rows are equilibrated first and singular values below
    ``sigma_max / cond_cap`` are dropped.  A seed fails if every raw Jacobian
    row is below ``coeff_scale / cond_cap`` (no usable direction), if it has
    not converged after ``max_iter`` steps, or if the final residuals exceed
    the germ's tolerance.

    Returns the final iterates and a boolean success mask.
    """
    X = np.array(np.atleast_2d(X0), dtype=float)
    N, n = X.shape
    if n != germ.ambient_dim:
        raise ValueError(f"seed dimension {n} != ambient_dim {germ.ambient_dim}")
    lo = hi = None
    if bounds is not None:
        lo = np.asarray(bounds[0], dtype=float)
        hi = np.asarray(bounds[1], dtype=float)
        X = np.clip(X, lo, hi)
    active = np.ones(N, dtype=bool)
    converged = np.zeros(N, dtype=bool)
    floor = germ.coeff_scale / cond_cap
    tol_step = step_tol * scale

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        _gauss_newton(germ, X, active, converged, extra, max_iter, lo, hi, floor, tol_step, cond_cap)
        ok = converged & germ.contains(X) if N else converged
        if extra is not None and N:
            v, _ = extra(X)
            ok &= np.abs(v) <= max(1e-9 * scale, 1e-300)
    return X, ok


def _gauss_newton(germ, X, active, converged, extra, max_iter, lo, hi, floor, tol_step, cond_cap,
                  stall_limit=8):
    best = np.full(len(X), np.inf)
    stall = np.zeros(len(X), dtype=int)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if not len(idx):
            break
        Y = X[idx]
        F = germ.residuals(Y)
        J = germ.jacobian(Y)
        if extra is not None:
            v, g = extra(Y)
            F = np.concatenate([F, v[:, None]], axis=1)
            J = np.concatenate([J, g[:, None, :]], axis=1)
        rown = np.linalg.norm(J, axis=2)
        dead = rown[:, : len(germ.equations)].max(axis=1) <= floor
        safe = np.where(rown > 0, rown, 1.0)
        Js = J / safe[:, :, None]
        Fs = F / safe
        res = np.linalg.norm(Fs, axis=1)
        improving = res < 0.9 * best[idx]
        best[idx] = np.minimum(best[idx], res)
        stall[idx] = np.where(improving, 0, stall[idx] + 1)
        U, S, Vt = np.linalg.svd(Js, full_matrices=False)
        keep = S > S[:, :1] / cond_cap
        inv = np.where(keep, 1.0 / np.where(S > 0, S, 1.0), 0.0)
        coef = inv * np.einsum("nmk,nm->nk", U, Fs)
        step = -np.einsum("nkd,nk->nd", Vt, coef)
        Y = Y + step
        if lo is not None:
            Y = np.clip(Y, lo, hi)
        bad = dead | ~np.all(np.isfinite(Y), axis=1) | ~np.all(np.isfinite(step), axis=1)
        bad |= stall[idx] >= stall_limit  # no real solution nearby
        X[idx] = np.where(bad[:, None], X[idx], Y)
        done = np.linalg.norm(step, axis=1) <= tol_step
        converged[idx[done & ~bad]] = True
        active[idx[done | bad]] = False


def project_to_variety(germ: ImplicitGerm, seed, max_iter: int = 60, **kw) -> np.ndarray:
    """Project a single point onto the germ; raises ProjectionError on failure."""
    seed = np.asarray(seed, dtype=float)
    if seed.shape != (germ.ambient_dim,):
        raise ValueError(f"seed of shape {seed.shape} does not match ambient_dim {germ.ambient_dim}")
    X, ok = project_points(germ, seed[None], max_iter=max_iter, **kw)
    if not ok[0]:
        res = np.abs(germ.residuals(X[0]))
        reason = "degenerate Jacobian or no convergence" if np.any(res > germ.abs_tolerances) else "no convergence"
        raise ProjectionError(reason, X[0])
    return X[0]


def thin_points(points: np.ndarray, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Indices of a maximal subset whose pairwise distances are all >= radius.

    Parallel greedy independent set on the radius graph: in each round a live
    point wins if its random priority beats all live neighbours; winners knock
    out their neighbours.
    """
    n = len(points)
    if n == 0 or radius <= 0:
        return np.arange(n)
    tree = cKDTree(points)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    prio = rng.permutation(n).astype(np.int64)
    alive = np.ones(n, dtype=bool)
    kept = np.zeros(n, dtype=bool)
    a, b = pairs[:, 0], pairs[:, 1]
    while alive.any():
        m = alive[a] & alive[b]
        a, b = a[m], b[m]
        best = np.full(n, -1, dtype=np.int64)
        np.maximum.at(best, a, prio[b])
        np.maximum.at(best, b, prio[a])
        win = alive & (prio > best)
        kept |= win
        alive &= ~win
        kill = np.zeros(n, dtype=bool)
        kill[b[win[a]]] = True
        kill[a[win[b]]] = True
        alive &= ~kill
    return np.flatnonzero(kept)


def _thin_to_count(points: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    if n <= count:
        return np.arange(n)
    prio_seed = int(rng.integers(2**63 - 1))

    def run(r):
        return thin_points(points, r, np.random.default_rng(prio_seed))

    tree = cKDTree(points)
    d, _ = tree.query(points, k=2)
    r_lo = float(np.median(d[:, 1]))
    if r_lo <= 0:
        r_lo = float(d[:, 1][d[:, 1] > 0].min()) if np.any(d[:, 1] > 0) else 1e-300
    kept_lo = run(r_lo)
    if len(kept_lo) <= count:
        return kept_lo
    r_hi = r_lo
    kept_hi = kept_lo
    while len(kept_hi) > count:
        r_lo, kept_lo = r_hi, kept_hi
        r_hi *= 2.0
        kept_hi = run(r_hi)
    for _ in range(20):
        if len(kept_hi) >= 0.98 * count:
            break
        r_mid = math.sqrt(r_lo * r_hi)
        kept_mid = run(r_mid)
        if len(kept_mid) > count:
            r_lo, kept_lo = r_mid, kept_mid
        else:
            r_hi, kept_hi = r_mid, kept_mid
    return kept_hi


def _seed_rng(seed: int, *salt) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *[int(s) for s in salt]]))


def _unit_gaussian(rng: np.random.Generator, N: int, n: int) -> np.ndarray:
    g = rng.standard_normal((N, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _collect(constraint: Constraint, seeder, count: int, rng: np.random.Generator,
             oversample: float, max_rounds: int, merge_tol: float, proj_kw: dict) -> np.ndarray:
    target = int(math.ceil(oversample * count))
    batch = max(target, 256)
    found: list[np.ndarray] = []
    total = 0
    distinct_prev = -1
    for _ in range(max_rounds):
        seeds = seeder(rng, batch)
        Y, ok = constraint.project(seeds, **proj_kw)
        if ok.any():
            found.append(Y[ok])
            total += int(ok.sum())
        if total >= target:
            break
        if found:
            allp = np.concatenate(found)
            distinct = len(thin_points(allp, merge_tol, np.random.default_rng(0)))
            # zero-dimensional sets: nothing new turns up
            if distinct == distinct_prev and distinct < 64:
                break
            distinct_prev = distinct
    if not found:
        return np.zeros((0, constraint.germ.ambient_dim))
    allp = np.concatenate(found)
    keep = thin_points(allp, merge_tol, np.random.default_rng(0))
    return allp[np.sort(keep)]


def _fill_holes(constraint: Constraint, points: np.ndarray, count: int, rng: np.random.Generator,
                rounds: int, merge_tol: float, proj_kw: dict) -> np.ndarray:
    """Jitter the thinned points and project again, a few times.

    Independent random candidates leave gaps of about log(N) mean spacings;
    re-seeding around every kept point, at a scale set by its second-nearest
    neighbour, closes them without shifting the overall density much.
    """
    n = points.shape[1]
    for _ in range(rounds):
        if len(points) < 3:
            break
        kept = points[_thin_to_count(points, count, rng)]
        d, _ = cKDTree(kept).query(kept, k=min(3, len(kept)))
        sigma = 1.5 * d[:, -1] / math.sqrt(n)
        seeds = kept + sigma[:, None] * rng.standard_normal(kept.shape)
        Y, ok = constraint.project(seeds, **proj_kw)
        if not ok.any():
            break
        allp = np.concatenate([points, Y[ok]])
        points = allp[np.sort(thin_points(allp, merge_tol, np.random.default_rng(0)))]
    return points


def _finish(points: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    idx = _thin_to_count(points, count, rng)
    short = min(count, len(points)) - len(idx)
    if short > 0:
        # top up with the candidates farthest from what was kept
        rest = np.setdiff1d(np.arange(len(points)), idx)
        d, _ = cKDTree(points[idx]).query(points[rest])
        idx = np.concatenate([idx, rest[np.argsort(-d, kind="stable")[:short]]])
    return points[np.sort(idx)]


def sample_ball(
    germ: ImplicitGerm,
    t: float,
    count: int,
    seed: int,
    *,
    min_count: int | None = None,
    oversample: float = 4.0,
    max_rounds: int = 12,
    fill_rounds: int = 1,
    **proj_kw,
) -> SampleCloud:
    """Up to ``count`` near-uniform points of X inside the closed ball B(p, t)."""
    if not 0 < t <= germ.domain_radius:
        raise ValueError(f"radius {t} outside (0, domain_radius={germ.domain_radius}]")
    rng = _seed_rng(seed, 1)
    n = germ.ambient_dim
    p = germ.p

    def seeder(r, N):
        u = r.random(N) ** (1.0 / n)
        return p + t * u[:, None] * _unit_gaussian(r, N, n)

    con = Constraint(germ, "ball", t)
    pts = _collect(con, seeder, count, rng, oversample, max_rounds, 1e-9 * t, proj_kw)
    need = max(1, count // 10) if min_count is None else min_count
    if len(pts) < need:
        raise SamplingError(f"only {len(pts)} points of {germ.ref} found in B(p, {t:g}); need {need}", len(pts))
    pts = _fill_holes(con, pts, count, rng, fill_rounds, 1e-9 * t, proj_kw)
    pts = _finish(pts, count, rng)
    return SampleCloud(pts, germ.ref, t, "ball", seed, count, constraint=con)


def _sphere_seeder(p: np.ndarray, norm: NormSpec, t: float, shell: float = 0.3):
    n = len(p)

    def seeder(r, N):
        d = _unit_gaussian(r, N, n)
        d = d / norm(d)[:, None]
        rad = t * (1.0 + shell * (r.random(N) - 0.5))
        return p + rad[:, None] * d

    return seeder


def _section_seeder(p: np.ndarray, w: np.ndarray, t: float, radius: float):
    n = len(p)
    # orthonormal basis of the hyperplane
    Q, _ = np.linalg.qr(np.column_stack([w, np.eye(n)]))
    basis = Q[:, 1:n]
    rho = math.sqrt(max(radius**2 - t**2, 0.0))

    def seeder(r, N):
        u = r.random(N) ** (1.0 / max(n - 1, 1))
        g = _unit_gaussian(r, N, n - 1) if n > 1 else np.zeros((N, 0))
        return p + t * w + (rho * u[:, None] * g) @ basis.T

    return seeder


def _seeder_for(con: Constraint):
    if con.kind == "sphere_slice":
        return _sphere_seeder(con.germ.p, con.norm, con.t)
    return _section_seeder(con.germ.p, np.asarray(con.direction), con.t, con.radius)


def _slice_cloud(con: Constraint, count: int, seed: int, rng, method: str, min_count: int,
                 oversample: float, max_rounds: int, fill_rounds: int, proj_kw: dict, what: str):
    if method not in ("auto", "trace", "random"):
        raise ValueError(f"unknown slice sampling method {method!r}")
    scale = max(abs(con.t), 1e-300)
    merge = 1e-9 * scale
    seeder = _seeder_for(con)
    starts = _collect(con, seeder, min(count, 128), rng, 2.0, 8, merge, proj_kw)
    if len(starts) < min(min_count, 1):
        raise SamplingError(f"{what} is empty", 0)
    edges = None
    use_trace = method == "trace" or (
        method == "auto" and len(starts) > 0 and all(slice_dimension(con, x) == 1 for x in starts[:8])
    )
    if use_trace and len(starts):
        pts, edges = trace_slice(con, count, seed, starts=starts)
    else:
        pts = _collect(con, seeder, count, rng, oversample, max_rounds, merge, proj_kw)
        if len(pts) >= min_count:
            pts = _fill_holes(con, pts, count, rng, fill_rounds, merge, proj_kw)
            pts = _finish(pts, count, rng)
    if len(pts) < min_count:
        raise SamplingError(f"{what} has only {len(pts)} points", len(pts))
    return pts, edges


def sample_sphere_slice(
    germ: ImplicitGerm,
    norm: NormSpec | None,
    t: float,
    count: int,
    seed: int,
    *,
    slice_tol: float = DEFAULT_SLICE_TOL,
    min_count: int = 1,
    method: str = "auto",
    oversample: float = 4.0,
    max_rounds: int = 12,
    fill_rounds: int = 5,
    **proj_kw,
) -> SampleCloud:
    """About ``count`` points of the link ``{x in X : ||x - p||_norm = t}``.

    With ``method="auto"`` one-dimensional links are traced as polylines (the
    cloud then carries its edges) and anything else is sampled at random.
    """
    norm = norm or NormSpec.euclidean()
    if not 0 < t <= germ.domain_radius:
        raise ValueError(f"radius {t} outside (0, domain_radius={germ.domain_radius}]")
    rng = _seed_rng(seed, 2)
    con = Constraint(germ, "sphere_slice", t, norm=norm, slice_tol=slice_tol)
    pts, edges = _slice_cloud(con, count, seed, rng, method, min_count, oversample, max_rounds,
                              fill_rounds, proj_kw, f"slice of {germ.ref} at t={t:g} ({norm.label()})")
    return SampleCloud(pts, germ.ref, t, "sphere_slice", seed, count, norm=norm, constraint=con, edges=edges)


def sample_section_slice(
    germ: ImplicitGerm,
    direction: Sequence[float],
    t: float,
    count: int,
    seed: int,
    *,
    radius: float | None = None,
    slice_tol: float = DEFAULT_SLICE_TOL,
    min_count: int = 1,
    method: str = "auto",
    oversample: float = 4.0,
    max_rounds: int = 12,
    fill_rounds: int = 5,
    **proj_kw,
) -> SampleCloud:
    """About ``count`` points of the hyperplane section ``X ∩ {<w, x - p> = t}``
    inside the ball of the given ``radius`` (default: the domain radius)."""
    w = np.asarray(direction, dtype=float)
    if w.shape != (germ.ambient_dim,) or not np.linalg.norm(w) > 0:
        raise ValueError("direction must be a nonzero vector of the ambient dimension")
    w = w / np.linalg.norm(w)
    radius = germ.domain_radius if radius is None else radius
    if abs(t) >= radius:
        raise ValueError(f"offset {t} does not meet the ball of radius {radius}")
    rng = _seed_rng(seed, 3)
    con = Constraint(germ, "section_slice", t, direction=tuple(w), radius=radius, slice_tol=slice_tol)
    pts, edges = _slice_cloud(con, count, seed, rng, method, min_count, oversample, max_rounds,
                              fill_rounds, proj_kw, f"section of {germ.ref} at offset {t:g}")
    return SampleCloud(pts, germ.ref, t, "section_slice", seed, count, constraint=con, edges=edges)


# --------------------------------------------------------------------------
# Curve tracing for one-dimensional slices
# --------------------------------------------------------------------------


def slice_dimension(constraint: Constraint, x) -> int:
    """Local dimension of the constrained set at x (n minus Jacobian rank)."""
    x = np.asarray(x, dtype=float)
    piece = int(constraint.assign(x[None])[0])
    J = _stacked_jacobian(constraint, x, piece)
    rown = np.linalg.norm(J, axis=1)
    J = J[rown > 0] / rown[rown > 0, None]
    if not len(J):
        return len(x)
    S = np.linalg.svd(J, compute_uv=False)
    return len(x) - int(np.sum(S > S[0] * 1e-8))


def _stacked_jacobian(constraint: Constraint, x: np.ndarray, piece: int) -> np.ndarray:
    J = constraint.germ.jacobian(x[None])[0]
    ext = constraint.extra(x[None], piece)
    if ext is not None:
        J = np.vstack([J, ext[1]])
    return J


def _correct_one(constraint: Constraint, x: np.ndarray, piece, scale: float,
                 max_iter: int = 30, cond_cap: float = DEFAULT_COND_CAP):
    """Newton correction of one point; ``piece`` may be a tuple of level
    pieces to satisfy simultaneously (a corner of the norm sphere)."""
    germ = constraint.germ
    floor = germ.coeff_scale / cond_cap
    k = len(germ.equations)
    pieces = piece if isinstance(piece, tuple) else (piece,)

    def system(y):
        F = germ.residuals(y[None])[0]
        J = germ.jacobian(y[None])[0]
        for pc in pieces:
            ext = constraint.extra(y[None], pc)
            if ext is not None:
                F = np.append(F, ext[0][0])
                J = np.vstack([J, ext[1]])
        return F, J

    for _ in range(max_iter):
        F, J = system(x)
        rown = np.linalg.norm(J, axis=1)
        if rown[:k].max() <= floor:
            return x, False
        safe = np.where(rown > 0, rown, 1.0)
        step = -np.linalg.lstsq(J / safe[:, None], F / safe, rcond=1.0 / cond_cap)[0]
        if not np.all(np.isfinite(step)):
            return x, False
        x = x + step
        if np.linalg.norm(step) <= DEFAULT_STEP_TOL * scale:
            break
    else:
        return x, False
    if not germ.contains(x[None])[0]:
        return x, False
    F, _ = system(x)
    if np.any(np.abs(F[k:]) > 1e-9 * scale):
        return x, False
    return x, True


def _tangent(constraint: Constraint, x: np.ndarray, piece: int):
    J = _stacked_jacobian(constraint, x, piece)
    rown = np.linalg.norm(J, axis=1)
    J = J[rown > 0] / rown[rown > 0, None]
    if not len(J):
        return None
    _, S, Vt = np.linalg.svd(J, full_matrices=True)
    rank = int(np.sum(S > S[0] * 1e-8))
    if len(x) - rank != 1:
        return None
    return Vt[-1]


@dataclass
class _Trace:
    points: list
    edges: list
    open_ends: list


def _face_side(constraint: Constraint, x: np.ndarray, tn: np.ndarray, q: int, h: float) -> float:
    p = constraint.germ.p
    trial = np.stack([x + 0.1 * h * tn, x - 0.1 * h * tn]) - p
    vals = constraint.norm.piece_values(trial)
    margin = vals[:, q] - np.delete(vals, q, axis=1).max(axis=1)
    return 1.0 if margin[0] >= margin[1] else -1.0


def _on_level(constraint: Constraint, x: np.ndarray, rel: float | None = None) -> bool:
    if constraint.kind != "sphere_slice":
        return True
    p = constraint.germ.p
    rel = constraint.slice_tol if rel is None else rel
    return abs(constraint.norm(x - p) - constraint.t) <= rel * constraint.t


def _in_radius(constraint: Constraint, x: np.ndarray) -> bool:
    if constraint.kind == "section_slice" and constraint.radius is not None:
        return float(np.linalg.norm(x - constraint.germ.p)) <= constraint.radius
    return True


def _trace_component(constraint: Constraint, x0: np.ndarray, h_max: float, h_min: float,
                     max_points: int, scale: float, max_turn: float = 0.15) -> _Trace | None:
    """Follow one component from x0 in both directions.

    The forward pass stops when it returns to x0 (closed curve), leaves the
    region, or cannot make a step of at least ``h_min`` (singular point).
    The backward pass then runs from x0 the other way and closes onto the
    forward pass's end if it reaches it.
    """
    piece0 = int(constraint.assign(x0[None])[0])
    tau0 = _tangent(constraint, x0, piece0)
    if tau0 is None:
        return None
    pts = [x0]
    edges: list[tuple[int, int]] = []
    open_ends: list[int] = []
    cos_turn = math.cos(max_turn)
    fwd_end, fwd_tau = None, tau0
    tau = tau0
    for direction in (1.0, -1.0):
        if direction < 0 and len(pts) > 1:
            fwd_end, fwd_tau = len(pts) - 1, tau
        x, tau, piece, h = x0, direction * tau0, piece0, h_max
        last = 0
        travelled = 0.0
        closed = False
        while len(pts) < max_points:
            xp = x + h * tau
            q_pred = int(constraint.assign(xp[None])[0])
            tried = [q_pred] if q_pred == piece else [q_pred, piece]
            accepted = None
            left_region = False
            for q in tried:
                xn, ok = _correct_one(constraint, xp, q, scale)
                # tight level check: a point just past a corner of the norm
                # sphere would otherwise pass and stall the trace there
                if not ok or not _on_level(constraint, xn, 1e-10):
                    continue
                if not _in_radius(constraint, xn):
                    left_region = True
                    continue
                d = xn - x
                dist = float(np.linalg.norm(d))
                if not (0.3 * h <= dist <= 2.0 * h) or d @ tau < 0.8 * dist:
                    continue
                if np.linalg.norm(xn - xp) > 0.25 * h and q == piece:
                    continue
                tn = _tangent(constraint, xn, q)
                if tn is None:
                    continue
                if q != piece:
                    # after a corner the old direction says little; step a
                    # little both ways and keep the side where q stays active
                    tn = tn * _face_side(constraint, xn, tn, q, h)
                elif tn @ tau < 0:
                    tn = -tn
                # corners of the norm sphere are genuine kinks; only smooth
                # stretches get the turning-angle control
                if q == piece and tn @ tau < cos_turn:
                    continue
                accepted = (xn, tn, q, dist)
                break
            if accepted is None and q_pred != piece:
                # the curve crosses an edge of the norm sphere: land on it
                xc, ok = _correct_one(constraint, xp, (piece, q_pred), scale)
                if ok and _on_level(constraint, xc, 1e-10) and _in_radius(constraint, xc):
                    dc = xc - x
                    dist = float(np.linalg.norm(dc))
                    tn = _tangent(constraint, xc, q_pred)
                    if tn is not None and dist <= 2.0 * h and dc @ tau >= -1e-12 * scale:
                        tn = tn * _face_side(constraint, xc, tn, q_pred, h)
                        if dist <= 1e-9 * scale:
                            # already sitting on the edge: just switch faces
                            tau, piece = tn, q_pred
                            continue
                        accepted = (xc, tn, q_pred, dist)
            if accepted is None:
                if left_region and h <= 4 * h_min:
                    break
                h *= 0.5
                if h < h_min:
                    if not left_region:
                        open_ends.append(last)
                    break
                continue
            xn, tn, q, dist = accepted
            travelled += dist
            if travelled > 4 * h_max and len(pts) > 3:
                # back at the start (forward pass) or at the stalled end of
                # the forward pass (backward pass): the component is closed
                target, tdir = (0, tau0) if direction > 0 else (fwd_end, -fwd_tau)
                if target is not None:
                    gap = pts[target] - xn
                    gn = float(np.linalg.norm(gap))
                    ahead = gn > 0 and gap @ tn > 0.5 * gn
                    if gn <= 1.2 * max(h, dist) and (tn @ tdir > 0.5 or ahead):
                        pts.append(xn)
                        edges += [(last, len(pts) - 1), (len(pts) - 1, target)]
                        if direction < 0 and target in open_ends:
                            open_ends.remove(target)
                        closed = True
                        break
            pts.append(xn)
            edges.append((last, len(pts) - 1))
            last = len(pts) - 1
            x, tau, piece = xn, tn, q
            h = min(1.5 * h, h_max)
        if closed:
            break
    return _Trace(pts, edges, open_ends)


def trace_slice(
    constraint: Constraint,
    count: int,
    seed: int,
    *,
    starts: np.ndarray | None = None,
    n_seeds: int = 128,
    join_factor: float = 4.0,
    max_turn: float = 0.15,
) -> tuple[np.ndarray, np.ndarray]:
    """Polyline approximation of a one-dimensional slice.

    Starting points come from random projection; each component is then
    followed by predictor-corrector continuation with steps of at most
    ``L / count`` (L = total length from a coarse first pass), shortened where
    the curve turns quickly so narrow folds stay resolved.  Branches that stop
    at a singular point are joined to any other open end within
    ``join_factor * h_max``.  Returns (points, edges).
    """
    germ = constraint.germ
    scale = max(abs(constraint.t), 1e-300)
    rng = _seed_rng(seed, 4)
    n = germ.ambient_dim
    if starts is None:
        starts = _collect(constraint, _seeder_for(constraint), n_seeds, rng, 2.0, 8, 1e-9 * scale, {})
    if not len(starts):
        return np.zeros((0, n)), np.zeros((0, 2), dtype=np.int64)
    starts = starts[rng.permutation(len(starts))]

    def run(h_max, max_points):
        h_min = max(h_max * 1e-6, 1e-13 * scale)
        P_all: list[np.ndarray] = []
        E_all: list[np.ndarray] = []
        ends: list[int] = []
        offset = 0
        tree = None
        for x0 in starts:
            if tree is not None and tree.query(x0)[0] <= 1.5 * h_max:
                continue
            tr = _trace_component(constraint, x0, h_max, h_min, max_points, scale, max_turn)
            if tr is None:
                continue
            P_all.append(np.array(tr.points))
            E_all.append(np.array(tr.edges, dtype=np.int64).reshape(-1, 2) + offset)
            ends.extend(e + offset for e in tr.open_ends)
            offset += len(tr.points)
            tree = cKDTree(np.concatenate(P_all))
        if not P_all:
            return np.zeros((0, n)), np.zeros((0, 2), dtype=np.int64), []
        return np.concatenate(P_all), np.concatenate(E_all), ends

    P0, E0, _ = run(scale / 16, 50 * count)
    length = float(np.linalg.norm(P0[E0[:, 0]] - P0[E0[:, 1]], axis=1).sum()) if len(E0) else 0.0
    if length <= 0:
        return P0, E0
    h_max = length / max(count, 1)
    P, E, ends = run(h_max, 4 * count)
    for _ in range(3):
        # curvature-limited steps add points; widen the regular step to stay within count
        if len(P) <= count:
            break
        h_max *= 1.05 * len(P) / count
        P, E, ends = run(h_max, 4 * count)
    # join branches that stopped at the same singular point
    if len(ends) > 1:
        Q = P[ends]
        pairs = cKDTree(Q).query_pairs(join_factor * h_max, output_type="ndarray")
        if len(pairs):
            E = np.concatenate([E, np.array(ends)[pairs]])
    return P, E
