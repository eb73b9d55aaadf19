"""Degree-one J-function of P^1 twisted by O(l), computed by torus localization.

M_{0,1}(P^1, 1) is P^1 itself (ev is an isomorphism), with fixed points p0, p1.
With torus weights a0, a1:  H|p_i = -a_i, T_{p_i} has weight a_j - a_i and the
psi class restricts to a_i - a_j.  Every integral is the two-term sum over fixed
points, after which a0 = a1 = 0.  Independent of qsdlab: only sympy.

    python3 -m tests.oracles.localization_p1   # prints the golden JSON
"""
import json
from math import prod

import sympy as sp

a0, a1, lam = sp.symbols("a0 a1 lam")
ORDER = 3  # powers z^-1 .. z^-ORDER


def _twist_at(kind, l, i):
    ai, aj = (a0, a1) if i == 0 else (a1, a0)
    if kind == "untwisted":
        return sp.Integer(1)
    if kind == "euler":
        # H^0(O(l)) minus the evaluation line, bundle weight lambda
        weights = [-(k * a0 + (l - k) * a1) for k in range(l + 1)]
        weights.remove(-l * ai)
        return prod((lam + w for w in weights), start=sp.Integer(1))
    if kind == "inverse_euler":
        # H^1(O(-l)) with weight -lambda, then the dual basis factor e(E^dual)|p_i
        weights = [p * a0 + (l - p) * a1 for p in range(1, l)]
        return prod((w - lam for w in weights), start=sp.Integer(1)) * (l * ai - lam)
    raise ValueError(kind)


def _integrate(f):
    """Sum over fixed points of f(i) / e(T_{p_i})."""
    total = 0
    for i in (0, 1):
        ai, aj = (a0, a1) if i == 0 else (a1, a0)
        total += f(i, ai, aj) / (aj - ai)
    total = sp.cancel(sp.together(total))
    return sp.expand(total.subs({a0: 0, a1: 0}))


def degree_one_J(kind, l):
    """{(m, k): poly in lam}: coefficient of Q z^-(m+1) H^k in J."""
    out = {}
    for m in range(ORDER):
        # class X_m = twist * psi^m; X_m = c0 + c1 H with c1 = int X_m, c0 = int X_m H
        def x(i, ai, aj, h=False):
            val = _twist_at(kind, l, i) * (ai - aj) ** m
            return val * (-ai) if h else val
        c1 = _integrate(lambda i, ai, aj: x(i, ai, aj))
        c0 = _integrate(lambda i, ai, aj: x(i, ai, aj, True))
        out[(m, 0)] = c0
        out[(m, 1)] = c1
    return out


CASES = [(kind, l) for kind in ("untwisted", "euler", "inverse_euler") for l in (1, 2)]


def golden():
    rows = []
    for kind, l in CASES:
        for (m, k), poly in sorted(degree_one_J(kind, l).items()):
            p = sp.Poly(poly, lam)
            for (b,), c in sorted(p.terms()):
                if c != 0:
                    rows.append({"twist": kind, "l": l, "z": -(m + 1), "lambda": b, "H": k, "value": str(c)})
    return {"oracle": "tests/oracles/localization_p1.py", "rows": rows}


if __name__ == "__main__":
    print(json.dumps(golden(), indent=1))
