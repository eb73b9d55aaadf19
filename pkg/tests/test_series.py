from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsdlab import hypergeo
from qsdlab.cohring import CohClass
from qsdlab.errors import NegativeLambdaPower, NotUnipotent, SubstitutionOverflow, TruncationMismatch
from qsdlab.qdm import build_euler_twisted, flatness_residual
from qsdlab.scalars import I, PI
from qsdlab.series import (FormalSeries, SeriesMatrix, birkhoff_split, divisor_shift, invert_unipotent,
                           is_homogeneous, render_series)


@st.composite
def series(draw, D=3, n=2, max_terms=4, z_lo=-3, z_hi=2):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        key = (draw(st.integers(0, D)), draw(st.integers(z_lo, z_hi)), draw(st.integers(0, 1)), 0)
        terms[key] = CohClass([Fraction(draw(st.integers(-3, 3))) for _ in range(n + 1)])
    return FormalSeries(D, n, terms)


@st.composite
def unit_factors(draw, D=3):
    """u = 1 + O(q), scalar and z-free."""
    terms = {(0, 0, 0, 0): CohClass([Fraction(1)])}
    for d in range(1, D + 1):
        terms[(d, 0, 0, 0)] = CohClass([Fraction(draw(st.integers(-3, 3)), draw(st.integers(1, 3)))])
    return FormalSeries(D, 0, terms)


def test_product_example():
    D, n = 2, 2
    qH = FormalSeries.q(D, n) * FormalSeries.H(D, n)
    one = FormalSeries.constant(D, CohClass.one(n))
    expected = one - FormalSeries.q(D, n).shift(d=1) * FormalSeries.H(D, n, 2)
    assert (one + qH) * (one - qH) == expected


def test_d_z_chain_rule():
    s = FormalSeries.z(3) + FormalSeries.monomial(3, 0, c=1)
    assert s.d_z() == FormalSeries.constant(3, 1) + FormalSeries.z(3, power=-1)


def test_truncation_mismatch():
    with pytest.raises(TruncationMismatch):
        FormalSeries.q(2) + FormalSeries.q(3)


def test_truncation_drops_high_degrees():
    s = FormalSeries.q(2) ** 3
    assert s.is_zero()


def test_nonequivariant_limit_examples():
    D = 2
    s = FormalSeries.lam(D, 1) + FormalSeries.q(D, 1) * FormalSeries.H(D, 1)
    assert s.nonequivariant_limit() == FormalSeries.q(D, 1) * FormalSeries.H(D, 1)
    bad = FormalSeries.lam(D, 0, power=-1) + FormalSeries.constant(D, 1)
    with pytest.raises(NegativeLambdaPower) as info:
        bad.nonequivariant_limit()
    assert info.value.location == (0, 0, -1, 0)


def test_inverse_euler_limit_exists(geom):
    th = hypergeo.build_theory(geom("P1", [1]), "inverse_euler", 3)
    th.L.nonequivariant_limit()
    th.product_H.nonequivariant_limit()


def test_invert_unipotent_examples():
    D = 3
    ident = SeriesMatrix.identity(D, 3)
    assert invert_unipotent(ident) == ident
    N = SeriesMatrix.constant(D, [[0, 0, 0], [1, 0, 0], [0, 2, 0]]).shift(d=1)
    expected = ident - N + N @ N
    assert invert_unipotent(ident + N) == expected
    with pytest.raises(NotUnipotent):
        invert_unipotent(ident + SeriesMatrix.constant(D, [[0, 1, 0], [0, 0, 0], [0, 0, 0]]))


def _random_matrix(data, D, m, z_range, q0_nilpotent):
    terms = {}
    for _ in range(data.draw(st.integers(0, 4))):
        d = data.draw(st.integers(0 if q0_nilpotent else 1, D))
        a = data.draw(st.integers(*z_range))
        rows = [[Fraction(data.draw(st.integers(-2, 2))) if (d or i > j) else Fraction(0) for j in range(m)]
                for i in range(m)]
        terms[(d, a, 0, 0)] = tuple(tuple(r) for r in rows)
    return SeriesMatrix(D, m, m, terms)


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_invert_unipotent_roundtrip(data):
    D, m = 3, 3
    # q^0 deviations are strictly lower triangular so the geometric series terminates
    M = SeriesMatrix.identity(D, m) + _random_matrix(data, D, m, (-3, -1), True)
    Minv = invert_unipotent(M)
    assert M @ Minv == SeriesMatrix.identity(D, m)
    assert invert_unipotent(Minv) == M


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_birkhoff_split_recovers_factors(data):
    D, m = 3, 2
    ident = SeriesMatrix.identity(D, m)
    X0 = ident + _random_matrix(data, D, m, (-3, -1), False)
    P0 = ident + _random_matrix(data, D, m, (0, 2), False)
    X, P = birkhoff_split(X0 @ P0)
    assert X == X0 and P == P0


def test_birkhoff_needed_for_p3_o2(geom):
    # the polynomial factor carries a positive z power, so "z >= 0 part" is not enough here
    th = hypergeo.build_theory(geom("P3", [2]), "euler", 2)
    assert any(a > 0 for (d, a, b, c) in th.P.terms)


def test_divisor_shift_identity(geom):
    th = hypergeo.build_theory(geom("P2", [1]), "untwisted", 3)
    zero = FormalSeries.zero(3)
    assert divisor_shift(th.L_tilde, zero, zero) == th.L_tilde


def test_divisor_shift_string_equation(geom):
    D = 3
    th = hypergeo.build_theory(geom("P2", [1]), "untwisted", D)
    c = Fraction(5, 2)
    tau0 = FormalSeries.q(D) * c
    factor = (-tau0).shift(a=-1).exp()
    got = divisor_shift(th.L_tilde, tau0, FormalSeries.zero(D))
    assert got == th.L_tilde.times_scalar_series(factor)


def test_divisor_shift_constant_tau0_overflows(geom):
    th = hypergeo.build_theory(geom("P2", [1]), "untwisted", 2)
    with pytest.raises(SubstitutionOverflow):
        divisor_shift(th.L_tilde, FormalSeries.constant(2, 1), FormalSeries.zero(2))


def test_divisor_shift_flatness(geom):
    # the twisted module at the mirror point is built through divisor_shift
    M = build_euler_twisted(geom("P2", [3]), 3)
    assert all(not v for v in flatness_residual(M).values())


def test_substitute_q_signed_constant():
    D = 3
    u = FormalSeries.constant(D, -1) + FormalSeries.q(D)
    s = FormalSeries.q(D) + FormalSeries.q(D) ** 2
    # q -> q(-1 + q): q + q^2 -> (-q + q^2) + (q^2 - 2 q^3)
    expected = FormalSeries(D, 0, {(1, 0, 0, 0): -1, (2, 0, 0, 0): 2, (3, 0, 0, 0): -2})
    assert s.substitute_q(u) == expected
    with pytest.raises(SubstitutionOverflow):
        s.substitute_q(FormalSeries.q(D))


def test_exp_of_pi_i_constant():
    D = 2
    s = FormalSeries.constant(D, PI * I * 3) + FormalSeries.q(D)
    assert s.exp() == -(FormalSeries.q(D).exp())
    with pytest.raises(SubstitutionOverflow):
        FormalSeries.constant(D, 2).exp()


def test_z_to_minus_z_logs():
    s = FormalSeries.monomial(1, 0, a=1, c=1)
    assert s.z_to_minus_z() == -(s + FormalSeries.monomial(1, 0, a=1, value=PI * I))


def test_render_series():
    s = FormalSeries.q(2, 1) * FormalSeries.H(2, 1) + FormalSeries.constant(2, CohClass.one(1))
    assert render_series(s) == str(s)
    assert "q" in render_series(s)


@settings(max_examples=50, deadline=None)
@given(series(), series(), series())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c


@settings(max_examples=40, deadline=None)
@given(series(n=0), series(n=0), unit_factors())
def test_substitution_is_ring_homomorphism(a, b, u):
    assert (a * b).substitute_q(u) == a.substitute_q(u) * b.substitute_q(u)
    assert (a + b).substitute_q(u) == a.substitute_q(u) + b.substitute_q(u)


@settings(max_examples=40, deadline=None)
@given(series(), series())
def test_limit_commutes_with_sum_and_product(a, b):
    assert (a + b).nonequivariant_limit() == a.nonequivariant_limit() + b.nonequivariant_limit()
    assert (a * b).nonequivariant_limit() == a.nonequivariant_limit() * b.nonequivariant_limit()


@settings(max_examples=40, deadline=None)
@given(series(), series())
def test_d_z_is_a_derivation(a, b):
    assert (a * b).d_z() == a.d_z() * b + a * b.d_z()
    assert (a * b).q_d_q() == a.q_d_q() * b + a * b.q_d_q()


def test_grading_bookkeeping(geom):
    # q carries degree 2(n + 1 - sum l); a product of homogeneous series stays homogeneous
    g = geom("P2", [1])
    th = hypergeo.build_theory(g, "euler", 3)
    w = 2 * (g.n + 1 - sum(g.E.line_degrees))
    ok, _ = is_homogeneous(th.I, w)
    assert ok
    ok, _ = is_homogeneous(th.I * th.I, w)
    assert ok
