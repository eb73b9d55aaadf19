"""Independent oracles against their frozen goldens, and the pipeline against the goldens."""
import json
from pathlib import Path

import mpmath
import pytest

from qsdlab import hypergeo
from qsdlab.charcls import gamma_class, log_gamma_series
from qsdlab.scalars import bernoulli, parse, render, zeta_even
from tests.oracles import local_p2_periods, localization_p1

GOLDEN = Path(__file__).parent / "golden"


def _load(name):
    return json.loads((GOLDEN / name).read_text())


def test_localization_oracle_reproduces_golden():
    assert localization_p1.golden() == _load("p1_degree_one_J.json")


def test_period_oracle_reproduces_golden():
    assert local_p2_periods.golden() == _load("local_p2_invariants.json")


@pytest.mark.parametrize("twist", ["untwisted", "euler", "inverse_euler"])
@pytest.mark.parametrize("l", [1, 2])
def test_degree_one_J_matches_localization(geom, twist, l):
    rows = [r for r in _load("p1_degree_one_J.json")["rows"] if r["twist"] == twist and r["l"] == l]
    g = geom("P1", [l])
    J = hypergeo.j_function_at_zero(hypergeo.mirror_transform(hypergeo.i_function(g, twist, 2)), 1)
    expected = {(r["z"], r["lambda"], r["H"]): r["value"] for r in rows}
    got = {}
    for (d, a, b, c), v in J.terms.items():
        if d == 1 and a >= -localization_p1.ORDER:
            assert c == 0
            for k, x in enumerate(v.coeffs):
                if not x.is_zero():
                    got[(a, b, k)] = render(x)
    assert got == expected


def test_local_p2_invariants_match_period_golden(geom):
    gold = _load("local_p2_invariants.json")["invariants"]
    vals = hypergeo.local_invariants(geom("P2", [3]), 3)
    assert {str(d + 1): render(v) for d, v in enumerate(vals)} == gold


@pytest.mark.parametrize("k", [2, 4, 6, 8, 10])
def test_zeta_even_numeric(k):
    with mpmath.workdps(50):
        ref = mpmath.zeta(k)
        got = zeta_even(k).numeric(50)
        assert abs(got - ref) < mpmath.mpf(10) ** -40


def test_bernoulli_against_mpmath():
    for m in range(2, 16):
        assert mpmath.bernoulli(m) == pytest.approx(float(bernoulli(m)), rel=1e-14, abs=1e-14)


def test_log_gamma_coefficients_numeric():
    n = 7
    with mpmath.workdps(50):
        ref = mpmath.taylor(lambda x: mpmath.loggamma(1 + x), 0, n)
        for k, c in enumerate(log_gamma_series(n)):
            assert abs(c.numeric(50) - ref[k]) < mpmath.mpf(10) ** -40


def test_gamma_class_numeric_taylor():
    # Gamma(1 + 2x) Gamma(1 - x) against mpmath Taylor coefficients
    n = 5
    cls = gamma_class([2, -1], n)
    with mpmath.workdps(50):
        ref = mpmath.taylor(lambda x: mpmath.gamma(1 + 2 * x) * mpmath.gamma(1 - x), 0, n)
        for k in range(n + 1):
            assert abs(cls.coeffs[k].numeric(50) - ref[k]) < mpmath.mpf(10) ** -35


def test_render_numeric_roundtrip():
    s = parse("3/2*pi^2*zeta3 + i*g - 7")
    with mpmath.workdps(30):
        ref = mpmath.mpf(3) / 2 * mpmath.pi ** 2 * mpmath.zeta(3) + 1j * mpmath.euler - 7
        assert abs(s.numeric(30) - ref) < mpmath.mpf(10) ** -25
