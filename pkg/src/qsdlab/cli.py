"""Command line entry point ``qsd``.

    qsd run scenario.json
    qsd verify --space P2 --bundle 3 --order 3 --suite all
    qsd invariants --space P2 --bundle 3 --degrees 3
    qsd series --twist inverse-euler --space P1 --bundle 1 --order 4
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .cohring import GeometryTriple
from .errors import QSDError, ScopeError
from .runner import MAX_ORDER, SUITES, Scenario, exit_code, render_text, run_scenario
from .series import render_series

TWISTS = {"untwisted": "untwisted", "euler": "euler", "inverse-euler": "inverse_euler",
          "inverse_euler": "inverse_euler"}


def _bundle(values):
    out = []
    for v in values:
        out += [int(x) for x in str(v).replace(",", " ").split()]
    return out


def _suites(values):
    out = []
    for v in values or ["all"]:
        out += [x for x in v.split(",") if x]
    return out


def _cache_dir(args):
    if args.cache_dir:
        return args.cache_dir
    return os.environ.get("QSD_CACHE_DIR") or None


def _emit(payload, fmt, text):
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _run_one(args_tuple):
    scenario, cache_dir, timing = args_tuple
    return run_scenario(scenario, cache_dir=cache_dir, timing=timing)


def cmd_run(args):
    with open(args.scenario) as fh:
        doc = json.load(fh)
    items = doc["scenarios"] if isinstance(doc, dict) and "scenarios" in doc else (
        doc if isinstance(doc, list) else [doc])
    scenarios = [Scenario.from_dict(x) for x in items]
    if args.no_cache:
        for s in scenarios:
            s.cache = False
    jobs = [(s, _cache_dir(args), args.timing) for s in scenarios]
    if len(jobs) > 1 and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    payload = reports[0] if len(reports) == 1 else {"reports": reports}
    _emit(payload, args.format, "\n".join(render_text(r) for r in reports))
    return exit_code(reports)


def cmd_verify(args):
    s = Scenario(args.space, _bundle(args.bundle), args.order, _suites(args.suite), not args.no_cache)
    report = run_scenario(s, cache_dir=_cache_dir(args), timing=args.timing)
    _emit(report, args.format, render_text(report))
    return exit_code([report])


def cmd_invariants(args):
    s = Scenario(args.space, _bundle(args.bundle), args.degrees, ["invariants"], not args.no_cache)
    report = run_scenario(s, cache_dir=_cache_dir(args), timing=args.timing)
    _emit(report, args.format, render_text(report))
    return exit_code([report])


def cmd_series(args):
    from . import hypergeo
    from .cache import SeriesCache, matrix_to_json, series_to_json

    g = GeometryTriple.build(args.space, _bundle(args.bundle))
    if not args.no_cache:
        hypergeo.set_theory_cache(SeriesCache(_cache_dir(args)))
    try:
        th = hypergeo.build_theory(g, TWISTS[args.twist], args.order)
    finally:
        hypergeo.set_theory_cache(None)
    if args.format == "json":
        payload = {"geometry": g.label, "twist": th.twist.kind, "D": th.D,
                   "I": series_to_json(th.I), "J": series_to_json(th.J),
                   "tau0": series_to_json(th.tau0), "tau2": series_to_json(th.tau2),
                   "L": matrix_to_json(th.L), "product_H": matrix_to_json(th.product_H)}
        _emit(payload, "json", "")
    else:
        lines = [f"{g.label} twist={th.twist.kind} D={th.D}",
                 f"I = {render_series(th.I)}", f"J = {render_series(th.J)}",
                 f"tau0 = {render_series(th.tau0)}", f"tau2 = {render_series(th.tau2)}"]
        for j, col in enumerate(th.L.columns()):
            lines.append(f"L H^{j} = {render_series(col)}")
        for j, col in enumerate(th.product_H.columns()):
            lines.append(f"H * H^{j} = {render_series(col)}")
        print("\n".join(lines))
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cache-dir", default=None, help="series cache directory (default: $QSD_CACHE_DIR)")
    common.add_argument("--no-cache", action="store_true", help="do not read or write the series cache")
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--timing", action="store_true", help="add wall-clock timings to the report")

    p = argparse.ArgumentParser(prog="qsd", description="Quantum Serre duality verification for bundles on P^n.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common], help="run scenarios from a JSON file")
    r.add_argument("scenario")
    r.add_argument("--jobs", type=int, default=1, help="worker processes for batch files")
    r.set_defaults(func=cmd_run)

    def geometry(sp):
        sp.add_argument("--space", required=True, choices=("P1", "P2", "P3", "P4"))
        sp.add_argument("--bundle", nargs="+", required=True, help="line bundle degrees, e.g. 3 or 1,1")

    v = sub.add_parser("verify", parents=[common], help="run verification suites on one geometry")
    geometry(v)
    v.add_argument("--order", type=int, default=3, help=f"truncation order D (at most {MAX_ORDER})")
    v.add_argument("--suite", action="append", help=f"one of {', '.join(SUITES)} or all; repeatable")
    v.set_defaults(func=cmd_verify)

    i = sub.add_parser("invariants", parents=[common], help="local genus-zero invariants of Tot(E^dual)")
    geometry(i)
    i.add_argument("--degrees", type=int, default=3)
    i.set_defaults(func=cmd_invariants)

    s = sub.add_parser("series", parents=[common], help="print I, J, the mirror map and L")
    geometry(s)
    s.add_argument("--twist", choices=sorted(TWISTS), default="untwisted")
    s.add_argument("--order", type=int, default=3)
    s.set_defaults(func=cmd_series)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"qsd: {exc}", file=sys.stderr)
        return 2
    except ScopeError as exc:
        print(f"qsd: scope error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except QSDError as exc:
        print(f"qsd: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
