"""Command line entry point: ``lnelab <command> ...``.

Exit codes: 0 ok, 2 bad input, 3 sampling failure, 4 missing artifacts.
The default seed is 0 and can be overridden with the LNELAB_SEED
environment variable; ``--seed`` wins over both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .. import __version__
from ..arcs import probe_direction, witness_arcs_brieskorn, witness_arcs_superisolated
from ..classify import (
    CriterionInapplicable,
    classify_brieskorn,
    classify_horn,
    cloud_sweep,
    cross_check_theorem,
)
from ..geodesy import CloudGerm
from ..linkscan import default_schedule, llne_verdict, sweep, validate_schedule
from ..variety import SamplingError
from . import corpus as corpus_mod
from .io import (
    GermSpecError,
    ExperimentConfig,
    atomic_write_text,
    cloud_to_dict,
    dumps_json,
    germ_from_polynomial,
    germ_spec_text,
    load_germ_spec,
    parse_norm,
    sweep_csv_text,
)

SEED_ENV = "LNELAB_SEED"
EXIT_OK, EXIT_BAD_INPUT, EXIT_SAMPLING, EXIT_MISSING = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_BAD_INPUT):
        super().__init__(message)
        self.code = code


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _schedule(text: str | None, domain_radius: float = 1.0) -> list[float]:
    if not text:
        return default_schedule(domain_radius)
    try:
        return validate_schedule([float(v) for v in text.split(",")], domain_radius)
    except ValueError as exc:
        raise CliError(f"bad schedule: {exc}") from None


def _corpus_entry(name: str) -> corpus_mod.CorpusEntry:
    for e in corpus_mod.default_corpus():
        if e.name == name:
            return e
    names = ", ".join(e.name for e in corpus_mod.default_corpus())
    raise CliError(f"unknown corpus entry {name!r} (known: {names})")


def _load_germ(args):
    """(germ, label, corpus entry or None, inline spec for the config)."""
    if getattr(args, "germ", None):
        try:
            g = load_germ_spec(args.germ)
        except GermSpecError as exc:
            raise CliError(str(exc)) from None
        return g, g.ref, None, g.to_dict()
    if getattr(args, "poly", None):
        try:
            g = germ_from_polynomial(args.poly.split(";"), name=args.poly)
        except GermSpecError as exc:
            raise CliError(str(exc)) from None
        return g, g.ref, None, g.to_dict()
    if getattr(args, "corpus", None):
        e = _corpus_entry(args.corpus)
        return corpus_mod.generate_corpus(e), e.name, e, e.name
    raise CliError("give one of --germ FILE, --poly EXPR or --corpus NAME")


def _seed(args) -> int:
    return args.seed if args.seed is not None else default_seed()


def _expected(entry) -> dict | None:
    return entry.to_dict()["expected"] if entry is not None and entry.expected else None


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_classify(args) -> int:
    try:
        if args.family == "brieskorn":
            v = classify_brieskorn(tuple(args.params))
        else:
            v = classify_horn(*args.params)
    except CriterionInapplicable as exc:
        raise CliError(f"criterion inapplicable: {exc}") from None
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if args.json:
        sys.stdout.write(dumps_json(v.to_dict()))
    else:
        print(f"{v.germ_label}: {v.line()} -- {v.citation}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    germ, label, entry, spec = _load_germ(args)
    seed = _seed(args)
    if isinstance(germ, CloudGerm):
        sched = _schedule(args.schedule)
        try:
            sw = cloud_sweep(germ, sched, seed, width=args.width)
        except ValueError as exc:
            raise CliError(str(exc)) from None
        norm = None
    else:
        sched = _schedule(args.schedule, germ.domain_radius)
        norm = parse_norm(args.norm)
        sw = sweep(germ, norm, sched, args.count, seed)
    cfg = ExperimentConfig("sweep", spec, seed, {"schedule": sched, "count": args.count,
                                                "norm": norm.to_dict() if norm else None})
    empty = [r for r in sw.records if r.empty]
    out = Path(args.out)
    if len(empty) == len(sw.records):
        msg = empty[0].note if empty else "no slices"
        summary = {"kind": "sweep", "germ": label, "config": cfg.to_dict(), "status": "sampling_failure",
                   "diagnostic": msg, "expected": _expected(entry)}
        atomic_write_text(out / "summary.json", dumps_json(summary))
        raise CliError(f"sampling failure on {label}: every slice came back empty ({msg})", EXIT_SAMPLING)
    v = llne_verdict(sw)
    summary = {
        "kind": "sweep",
        "germ": label,
        "config": cfg.to_dict(),
        "status": "ok" if v.classification != "inconclusive" else "inconclusive",
        "verdict": v.to_dict(),
        "records": [dict(r.row(), note=r.note, resolution_limited=r.resolution_limited) for r in sw.records],
        "empty_slices": len(empty),
        "expected": _expected(entry),
    }
    atomic_write_text(out / "sweep.csv", sweep_csv_text(sw))
    atomic_write_text(out / "summary.json", dumps_json(summary))
    print(f"{label}: {v.classification} (slope {v.slope:.3f} +- {v.slope_stderr:.3f}, K {v.separation_K:.3g}) "
          f"-> {v.lne_evidence}")
    return EXIT_OK


def cmd_crosscheck(args) -> int:
    germ, label, entry, spec = _load_germ(args)
    seed = _seed(args)
    exact = corpus_mod.exact_verdict(entry) if entry is not None else None
    oracle = corpus_mod.spiral_oracle_constant if entry is not None and entry.generator == "spiral" else None
    if isinstance(germ, CloudGerm) and germ.edges is None:
        raise CliError("cross-check needs an algebraic germ or a polyline cloud")
    sched = _schedule(args.schedule, getattr(germ, "domain_radius", 1.0))
    try:
        rep = cross_check_theorem(germ, sched, args.count, seed, ball_budget=args.ball_count,
                                  norm=parse_norm(args.norm), exact=exact, oracle=oracle)
    except SamplingError as exc:
        raise CliError(f"sampling failure on {label}: {exc}", EXIT_SAMPLING) from None
    cfg = ExperimentConfig("crosscheck", spec, seed, {"schedule": sched, "count": args.count,
                                                     "ball_count": args.ball_count})
    summary = {"kind": "crosscheck", "germ": label, "config": cfg.to_dict(), "status": rep.status,
               "report": rep.to_dict(), "expected": _expected(entry)}
    atomic_write_text(Path(args.out) / "crosscheck.json", dumps_json(summary))
    print(f"{label}: route A {rep.a_lne}, route B {rep.b_lne}: {rep.status}")
    for c in rep.exact_conflicts:
        print(f"  conflict: {c}")
    return EXIT_OK


def cmd_probe(args) -> int:
    seed = _seed(args)
    if args.witness == "superisolated":
        germ = corpus_mod.superisolated_real()
        w = witness_arcs_superisolated()
        label = "superisolated"
    else:
        try:
            a, b, c = (int(v) for v in args.witness.split(","))
            w = witness_arcs_brieskorn(a, b, c)
        except ValueError as exc:
            raise CliError(f"no witness pair for {args.witness!r}: {exc}") from None
        germ = corpus_mod.generate_corpus(corpus_mod.CorpusEntry("", "brieskorn", {"a": a, "b": b, "c": c}))
        label = germ.ref
    t_list = [float(v) for v in args.t.split(",")]
    norm = parse_norm(args.norm) if args.norm else w.probe_norm
    mode = w.probe_mode if args.mode == "default" else args.mode
    try:
        pr = probe_direction(germ, w.plus, w.minus, t_list, args.budget, seed, mode=mode, norm=norm)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    summary = {"kind": "probe", "germ": label, "seed": seed, "status": "ok", "probe": pr.to_dict(),
               "predicted_slope": float(w.ratio_slope), "mode": mode,
               "norm": norm.to_dict() if norm else None}
    atomic_write_text(Path(args.out) / "probe.json", dumps_json(summary))
    flag = "non-LNE direction evidence" if pr.evidence else "no evidence"
    print(f"{label}: ratio slope {pr.divergence_slope:.3f} +- {pr.slope_stderr:.3f} "
          f"(predicted {float(w.ratio_slope):.3f}); {flag}")
    return EXIT_OK


def _observed(doc: dict) -> tuple[str, str]:
    """(observed classification, detail) for one summary document."""
    kind = doc.get("kind")
    if kind == "sweep":
        if doc.get("status") == "sampling_failure":
            return "inconclusive", "sampling failure"
        v = doc["verdict"]
        return v["lne_evidence"], f"slope {v['slope']}, K {v['separation_K']}"
    if kind == "crosscheck":
        r = doc["report"]
        a = {"bounded": "LNE", "diverging": "non-LNE"}.get(r["route_a"]["classification"], "inconclusive")
        b = r["route_b"]["lne_evidence"]
        obs = a if r["status"] == "agree" else ("inconclusive" if r["status"] == "degraded" else f"A:{a}/B:{b}")
        return obs, f"status {r['status']}, A slope {r['route_a']['slope']}"
    if kind == "probe":
        p = doc["probe"]
        return ("non-LNE" if p["evidence"] else "inconclusive"), f"ratio slope {p['divergence_slope']}"
    return "inconclusive", f"unknown document kind {kind!r}"


def cmd_report(args) -> int:
    docs = []
    for item in args.inputs:
        p = Path(item)
        files = sorted(p.glob("*.json")) if p.is_dir() else [p]
        files = [f for f in files if f.is_file()]
        if not files:
            raise CliError(f"no run outputs found at {item}", EXIT_MISSING)
        for f in files:
            try:
                d = json.loads(f.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise CliError(f"cannot read {f}: {exc}", EXIT_MISSING) from None
            if isinstance(d, dict) and d.get("kind") in ("sweep", "crosscheck", "probe"):
                docs.append((str(f), d))
    if not docs:
        raise CliError("no run summaries among the inputs", EXIT_MISSING)
    rows, warnings, conflicts = [], 0, 0
    for path, d in sorted(docs, key=lambda x: (x[1].get("germ", ""), x[1]["kind"], x[0])):
        obs, detail = _observed(d)
        exp = d.get("expected") or {}
        want = None if exp.get("lne") is None else ("LNE" if exp["lne"] else "non-LNE")
        if d["kind"] == "sweep" and exp.get("llne") is not None:
            want = "LNE" if exp["llne"] else "non-LNE"
        flags = []
        if obs == "inconclusive" or obs.startswith("A:"):
            flags.append("inconclusive" if obs == "inconclusive" else "routes disagree")
            warnings += 1
        if want and obs in ("LNE", "non-LNE") and obs != want:
            flags.append("conflicts with expected verdict")
            conflicts += 1
        ec = d.get("report", {}).get("exact_conflicts") or []
        if ec:
            flags.extend(ec)
            conflicts += len(ec)
        rows.append({"germ": d.get("germ", "?"), "kind": d["kind"], "expected": want or "-", "observed": obs,
                     "detail": detail, "flags": flags, "source": path})
    report = {"rows": rows, "warnings": warnings, "conflicts": conflicts}
    if args.out:
        atomic_write_text(args.out, dumps_json(report))
    width = max(len(r["germ"]) for r in rows)
    print(f"{'germ':<{width}}  {'kind':<10} {'expected':<9} {'observed':<14} flags")
    for r in rows:
        print(f"{r['germ']:<{width}}  {r['kind']:<10} {r['expected']:<9} {r['observed']:<14} {'; '.join(r['flags'])}")
    print(f"{len(rows)} rows, {warnings} warnings, {conflicts} conflicts")
    return EXIT_OK


def cmd_corpus(args) -> int:
    if args.action == "list":
        for e in corpus_mod.default_corpus():
            exp = e.expected
            tag = "-" if exp is None or exp.lne is None else ("LNE" if exp.lne else "non-LNE")
            print(f"{e.name:<15} {e.generator:<19} {tag:<8} {exp.citation if exp else ''}")
        return EXIT_OK
    if not args.name or not args.out:
        raise CliError("corpus emit needs NAME and --out FILE")
    e = _corpus_entry(args.name)
    g = corpus_mod.generate_corpus(e)
    text = dumps_json(cloud_to_dict(g)) if isinstance(g, CloudGerm) else germ_spec_text(g)
    atomic_write_text(args.out, text)
    print(f"wrote {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _germ_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--germ", help="germ spec file (JSON)")
    g.add_argument("--poly", help="polynomial text, e.g. 'x^2+y^3+z^3'; separate a system with ';'")
    g.add_argument("--corpus", help="corpus entry name (see 'corpus list')")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lnelab",
        description="Lipschitz normal embedding experiments on real algebraic germs.",
        epilog=f"Exit codes: 0 ok, 2 bad input, 3 sampling failure, 4 missing artifacts. "
               f"The default seed (0) can be set with the {SEED_ENV} environment variable.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="exact Brieskorn or horn classification")
    p.add_argument("family", choices=["brieskorn", "horn"])
    p.add_argument("params", type=int, nargs=3, metavar="N", help="a b c, or m p n for horns")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_classify)

    seed_help = f"RNG seed (default: ${SEED_ENV} or 0)"
    p = sub.add_parser("sweep", help="link sweep and LLNE verdict")
    _germ_args(p)
    p.add_argument("--norm", default="euclidean", help="euclidean, max_v:1,1,2, one_p:P or b_one:B")
    p.add_argument("--schedule", help="comma-separated decreasing radii")
    p.add_argument("--count", type=int, default=1000, help="points per slice")
    p.add_argument("--width", type=float, help="slice width for clouds without edges")
    p.add_argument("--seed", type=int, help=seed_help)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("crosscheck", help="direct ball trend vs link criterion")
    _germ_args(p)
    p.add_argument("--norm", default="euclidean")
    p.add_argument("--schedule")
    p.add_argument("--count", type=int, default=1000, help="points per slice")
    p.add_argument("--ball-count", type=int, default=4000, help="points per ball")
    p.add_argument("--seed", type=int, help=seed_help)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_crosscheck)

    p = sub.add_parser("probe", help="inner/outer ratio along witness arcs")
    p.add_argument("witness", help="'a,b,c' for a Brieskorn surface, or 'superisolated'")
    p.add_argument("--t", default="0.2,0.1,0.05,0.025,0.0125", help="comma-separated decreasing t")
    p.add_argument("--budget", type=int, default=20000, help="samples per t")
    p.add_argument("--mode", choices=["default", "auto", "ball", "link"], default="default",
                   help="default: link slices of the (b,1)-norm for clause 2 pairs, balls otherwise")
    p.add_argument("--norm", help="norm for link mode")
    p.add_argument("--seed", type=int, help=seed_help)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("report", help="merge run outputs into one table")
    p.add_argument("inputs", nargs="+", help="run directories or summary files")
    p.add_argument("--out", help="write the consolidated report (JSON) here")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("corpus", help="list or emit corpus entries")
    p.add_argument("action", choices=["list", "emit"])
    p.add_argument("name", nargs="?")
    p.add_argument("--out")
    p.set_defaults(func=cmd_corpus)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"lnelab: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
