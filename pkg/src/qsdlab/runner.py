"""Scenarios, verification suites and deterministic reports."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import comb

from . import hypergeo
from .cache import SeriesCache
from .charcls import SheafClass, gamma_class, gamma_hat_X, gamma_hat_Y, gamma_reflection_residual, hrr_chi
from .cohring import GeometryTriple, narrow_checks
from .errors import QSDError, ScopeError
from .qdm import (FLAVORS, TWISTED_INVERSE, build, duality_residual, euler_pairing_check,
                  flatness_residual, phi_intertwining_residual, unitarity_residual)
from .scalars import render
from .serre import gamma_square_residual, verify_compact_qsd, verify_cone_qsd, verify_narrow_qsd

SUITES = ("narrow", "flatness", "cone", "compact", "narrowqsd", "gamma", "invariants")
MAX_ORDER = 6
SPACES = ("P1", "P2", "P3", "P4")


@dataclass
class Scenario:
    space: str
    bundle: list
    D: int = 3
    suites: list = field(default_factory=lambda: list(SUITES))
    cache: bool = True

    def __post_init__(self):
        if self.space not in SPACES:
            raise ValueError(f"space must be one of {SPACES}, got {self.space!r}")
        self.bundle = [int(x) for x in self.bundle]
        if not 0 <= int(self.D) <= MAX_ORDER:
            raise ValueError(f"truncation order must lie in 0..{MAX_ORDER}, got {self.D}")
        self.D = int(self.D)
        if "all" in self.suites:
            self.suites = list(SUITES)
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ValueError(f"unknown suites {bad}; expected a subset of {SUITES}")
        self.suites = [s for s in SUITES if s in self.suites]

    @classmethod
    def from_dict(cls, obj):
        return cls(obj["space"], obj.get("bundle", []), obj.get("D", obj.get("order", 3)),
                   obj.get("suites", list(SUITES)), obj.get("cache", True))

    def echo(self):
        return {"space": self.space, "bundle": self.bundle, "D": self.D, "suites": self.suites}


def _status(checks, errors):
    if errors:
        return "scope-error" if all(e.startswith("scope:") for e in errors.values()) else "fail"
    return "pass" if all(not v for v in checks.values()) else "fail"


def _fmt_entry(e):
    if isinstance(e, tuple) and len(e) == 4 and isinstance(e[0], tuple):
        (d, a, b, c), i, j, val = e
        return {"q": d, "z": a, "lambda": b, "Lz": c, "row": i, "col": j, "value": val}
    if isinstance(e, tuple) and len(e) == 2 and isinstance(e[0], tuple):
        (d, a, b, c), val = e
        return {"q": d, "z": a, "lambda": b, "Lz": c, "value": val}
    if isinstance(e, tuple):
        return [_fmt_entry(x) if isinstance(x, tuple) else str(x) for x in e]
    return str(e)


def _capture(checks, errors, name, fn):
    try:
        checks[name] = fn()
    except ScopeError as exc:
        errors[name] = f"scope: {type(exc).__name__}: {exc}"
    except QSDError as exc:
        errors[name] = f"error: {type(exc).__name__}: {exc}"


def suite_narrow(g, D):
    return narrow_checks(g), {}, {}


def suite_flatness(g, D):
    checks, errors = {}, {}
    for flavor in FLAVORS + (TWISTED_INVERSE,):
        def one(flavor=flavor):
            M = build(flavor, g, D)
            res = flatness_residual(M)
            for part, v in res.items():
                checks[f"{flavor}:{part}"] = v
            checks[f"{flavor}:unitarity"] = unitarity_residual(M)
            if flavor == "ambient-Z":
                checks[f"{flavor}:kernel_leak"] = M.extras.get("kernel_leak", [])
            return []
        _capture(checks, errors, f"{flavor}:build", one)
    _capture(checks, errors, "compact-Y:duality", lambda: duality_residual(g, D))
    _capture(checks, errors, "plain-Y:phi_intertwining", lambda: phi_intertwining_residual(g, D))
    return checks, errors, {}


def _report_suite(fn):
    def run(g, D):
        rep = fn(g, D)
        errors = {k: f"scope: {v}" for k, v in rep.errors.items()}
        return dict(rep.checks), errors, dict(rep.notes)
    return run


def suite_gamma(g, D):
    checks, errors = {}, {}
    n = g.n
    res = gamma_reflection_residual(MAX_ORDER)
    checks["reflection"] = [] if res.is_zero() else [str(res)]
    direct = gamma_class([1] * (n + 1) + [-l for l in g.E.line_degrees], n)
    checks["gamma_Y_factorization"] = [] if direct == gamma_hat_Y(g) == gamma_hat_X(n) * gamma_class(
        [-l for l in g.E.line_degrees], n) else [f"{direct} vs {gamma_hat_Y(g)}"]
    checks["gamma_chain"] = [x for a in (-1, 0, 1) for x in gamma_square_residual(g, a)]
    chi_bad, hrr_bad = [], []

    def pairing():
        M = build("plain-X", g, D)
        for a in (-1, 0, 1):
            for b in (-1, 0, 1):
                rep, _ = euler_pairing_check(M, SheafClass.line(a), SheafClass.line(b))
                chi_bad.extend((f"O({a}),O({b})",) + e for e in rep)
                # chi(O(a), O(b)) = chi(O(b - a)) = C(n + b - a, n) when b >= a
                chi = hrr_chi(SheafClass.line(a), SheafClass.line(b), n)
                if b >= a and chi != comb(n + b - a, n):
                    hrr_bad.append(f"chi(O({a}),O({b})) = {chi}")
        return chi_bad

    _capture(checks, errors, "euler_pairing", pairing)
    checks["hrr_binomial"] = hrr_bad
    return checks, errors, {}


def suite_invariants(g, D):
    checks, errors, derived = {}, {}, {}

    def inv():
        vals = hypergeo.local_invariants(g, D)
        derived["local_invariants"] = {str(d + 1): render(v) for d, v in enumerate(vals)}
        return []

    _capture(checks, errors, "local_invariants", inv)
    return checks, errors, derived


SUITE_FUNCS = {
    "narrow": suite_narrow,
    "flatness": suite_flatness,
    "cone": _report_suite(verify_cone_qsd),
    "compact": _report_suite(verify_compact_qsd),
    "narrowqsd": _report_suite(verify_narrow_qsd),
    "gamma": suite_gamma,
    "invariants": suite_invariants,
}


def run_scenario(s: Scenario, cache_dir=None, timing=False) -> dict:
    """Build what the suites need and run them; scope errors stay local to a suite."""
    store = SeriesCache(cache_dir) if s.cache else None
    hypergeo.set_theory_cache(store)
    report = {"scenario": s.echo(), "suites": {}}
    times = {}
    try:
        try:
            g = GeometryTriple.build(s.space, s.bundle)
        except ScopeError as exc:
            for name in s.suites:
                report["suites"][name] = {"status": "scope-error", "checks": {},
                                          "errors": {"geometry": f"scope: {type(exc).__name__}: {exc}"}}
            report["status"] = overall_status(report)
            return report
        for name in s.suites:
            start = time.perf_counter()
            try:
                checks, errors, extra = SUITE_FUNCS[name](g, s.D)
            except ScopeError as exc:
                checks, errors, extra = {}, {"suite": f"scope: {type(exc).__name__}: {exc}"}, {}
            except QSDError as exc:
                checks, errors, extra = {}, {"suite": f"error: {type(exc).__name__}: {exc}"}, {}
            times[name] = round(time.perf_counter() - start, 3)
            entry = {"status": _status(checks, errors),
                     "checks": {k: [_fmt_entry(e) for e in v] for k, v in sorted(checks.items())},
                     "errors": dict(sorted(errors.items()))}
            if extra:
                entry["derived" if name == "invariants" else "notes"] = extra
            report["suites"][name] = entry
    finally:
        hypergeo.set_theory_cache(None)
    report["status"] = overall_status(report)
    if timing:
        report["timing"] = times
    return report


def overall_status(report):
    states = [v["status"] for v in report["suites"].values()]
    if any(st == "fail" for st in states):
        return "fail"
    if any(st == "scope-error" for st in states):
        return "scope-error"
    return "pass"


def exit_code(reports):
    states = [r["status"] for r in reports]
    if any(st == "fail" for st in states):
        return 1
    if any(st == "scope-error" for st in states):
        return 2
    return 0


def render_text(report) -> str:
    sc = report["scenario"]
    lines = [f"scenario {sc['space']} bundle={sc['bundle']} D={sc['D']}: {report['status'].upper()}"]
    for name, entry in report["suites"].items():
        lines.append(f"  {name}: {entry['status'].upper()}")
        for k, v in entry["checks"].items():
            if v:
                lines.append(f"    {k}: {len(v)} nonzero, first {v[0]}")
        for k, v in entry["errors"].items():
            lines.append(f"    {k}: {v}")
        for k, v in entry.get("derived", {}).items():
            for d, x in v.items():
                lines.append(f"    {k}[{d}] = {x}")
        for k, v in entry.get("notes", {}).items():
            lines.append(f"    note {k} = {v}")
    if "timing" in report:
        lines.append("  timing: " + ", ".join(f"{k}={v}s" for k, v in report["timing"].items()))
    return "\n".join(lines)
