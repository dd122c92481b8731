"""File formats: germ specs, sweep tables, run summaries.

Germ spec (JSON)::

    {"ambient_dim": 3, "basepoint": [0, 0, 0],
     "equations": [{"terms": [{"coeff": 1, "exponents": [2, 0, 0]}, ...]}],
     "residual_tol": 1e-9, "domain_radius": 1.0, "name": "optional"}

All writes go to a temporary file in the target directory followed by a
rename, so readers never see a half-written file.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..geodesy import CloudGerm
from ..linkscan import SliceSweep, validate_schedule
from ..norms import NormSpec
from ..variety import ImplicitGerm, SparsePolynomial

__all__ = [
    "GermSpecError",
    "ExperimentConfig",
    "SWEEP_COLUMNS",
    "atomic_write_text",
    "dumps_json",
    "load_germ_spec",
    "parse_germ_spec",
    "germ_spec_text",
    "germ_from_polynomial",
    "parse_norm",
    "sweep_csv_text",
    "read_sweep_csv",
    "cloud_to_dict",
]

SWEEP_COLUMNS = ("t", "n_samples", "n_components", "C_t", "d0", "stable")


class GermSpecError(ValueError):
    """Malformed germ specification."""


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj) -> str:
    """Deterministic JSON: sorted keys, non-finite floats as strings."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# germ specs
# --------------------------------------------------------------------------


def parse_germ_spec(d: dict) -> ImplicitGerm:
    if not isinstance(d, dict):
        raise GermSpecError("germ spec must be a JSON object")
    for key in ("ambient_dim", "equations"):
        if key not in d:
            raise GermSpecError(f"germ spec is missing {key!r}")
    n = d["ambient_dim"]
    if not isinstance(n, int) or n < 1:
        raise GermSpecError("ambient_dim must be a positive integer")
    eqs = d["equations"]
    if not isinstance(eqs, list) or not eqs:
        raise GermSpecError("equations must be a nonempty list")
    for k, e in enumerate(eqs):
        terms = e.get("terms") if isinstance(e, dict) else None
        if not isinstance(terms, list):
            raise GermSpecError(f"equation {k} needs a list of terms")
        for term in terms:
            ex = term.get("exponents") if isinstance(term, dict) else None
            if not isinstance(ex, list) or len(ex) != n or any(not isinstance(v, int) or v < 0 for v in ex):
                raise GermSpecError(f"equation {k}: exponents must be {n} non-negative integers")
            if not isinstance(term.get("coeff"), (int, float)):
                raise GermSpecError(f"equation {k}: coeff must be a number")
    try:
        return ImplicitGerm.from_dict(d)
    except (TypeError, ValueError) as exc:
        raise GermSpecError(str(exc)) from None


def load_germ_spec(path) -> ImplicitGerm:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise GermSpecError(f"cannot read {path}: {exc.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GermSpecError(f"{path}: not valid JSON ({exc.msg})") from None
    return parse_germ_spec(d)


def germ_spec_text(germ: ImplicitGerm) -> str:
    return dumps_json(germ.to_dict())


def germ_from_polynomial(expr: str | Sequence[str], variables: Sequence[str] | None = None,
                         basepoint=None, name: str = "") -> ImplicitGerm:
    """Germ from polynomial text such as ``"x^2 + y^3 + z^3"`` (``^`` or ``**``).

    Several expressions give a system.  Variables default to the sorted free
    symbols, except that x, y, z keep that order when they are the ones used.
    """
    import sympy

    exprs = [expr] if isinstance(expr, str) else list(expr)
    try:
        parsed = [sympy.sympify(e.replace("^", "**")) for e in exprs]
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise GermSpecError(f"cannot parse polynomial: {exc}") from None
    if variables is None:
        names = sorted({str(s) for p in parsed for s in p.free_symbols})
        xyz = [v for v in ("x", "y", "z") if v in names]
        variables = xyz + [v for v in names if v not in xyz] if xyz else names
    syms = sympy.symbols(list(variables))
    syms = syms if isinstance(syms, (list, tuple)) else (syms,)
    if not syms:
        raise GermSpecError("polynomial has no variables")
    eqs = []
    for p in parsed:
        try:
            poly = sympy.Poly(p, *syms)
        except sympy.PolynomialError as exc:
            raise GermSpecError(f"not a polynomial in {variables}: {exc}") from None
        terms = [(float(c), tuple(int(v) for v in m)) for m, c in poly.terms()]
        eqs.append(SparsePolynomial.from_terms(len(syms), terms))
    bp = tuple(basepoint) if basepoint is not None else (0.0,) * len(syms)
    try:
        return ImplicitGerm(tuple(eqs), bp, name=name)
    except ValueError as exc:
        raise GermSpecError(str(exc)) from None


def parse_norm(text: str | None) -> NormSpec:
    """``euclidean``, ``max_v:1,1,2``, ``one_p:4`` or ``b_one:4``."""
    if not text or text == "euclidean":
        return NormSpec.euclidean()
    kind, _, arg = text.partition(":")
    try:
        if kind == "max_v":
            return NormSpec.max_v([float(v) for v in arg.split(",")])
        if kind == "one_p":
            return NormSpec.one_p(int(arg))
        if kind == "b_one":
            return NormSpec.b_one(int(arg))
    except ValueError as exc:
        raise GermSpecError(f"bad norm {text!r}: {exc}") from None
    raise GermSpecError(f"unknown norm {text!r}")


def cloud_to_dict(germ: CloudGerm) -> dict:
    d = {"name": germ.name, "basepoint": germ.basepoint.tolist(), "points": germ.points.tolist()}
    if germ.edges is not None:
        d["edges"] = germ.edges.tolist()
    return d


# --------------------------------------------------------------------------
# sweep tables
# --------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def sweep_csv_text(sw: SliceSweep) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in sw.rows():
        w.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def read_sweep_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SWEEP_COLUMNS:
            raise ValueError(f"{path}: expected columns {','.join(SWEEP_COLUMNS)}")
        out = []
        for r in reader:
            out.append({"t": float(r["t"]), "n_samples": int(r["n_samples"]), "n_components": int(r["n_components"]),
                        "C_t": float(r["C_t"]), "d0": float(r["d0"]), "stable": bool(int(r["stable"]))})
        return out


# --------------------------------------------------------------------------
# run configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    germ: dict | str  # inline spec, or a corpus entry name
    seed: int
    params: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        if "schedule" in self.params:
            validate_schedule(self.params["schedule"])

    def to_dict(self) -> dict:
        return {"command": self.command, "germ": self.germ, "seed": self.seed,
                "params": dict(self.params), "outputs": dict(self.outputs)}
