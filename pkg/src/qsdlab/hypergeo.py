"""Hypergeometric I-functions, mirror maps and fundamental solutions.

Series are stored without the factor exp(H log q / z); the flatness equations in
:mod:`qsdlab.qdm` account for it.  Three theories are built on H*(P^n):

* ``untwisted``      plain Gromov-Witten theory of P^n;
* ``euler``          twisted by e_lambda(E) (hypersurface side);
* ``inverse_euler``  twisted by e_lambda(E^dual)^-1 (total space side).

For a theory the t = 0 solution L~ is a function of the Novikov variable Q; the
mirror point of the I-function sits at t = tau0*1 + (log q + tau2)*H with
Q = q*exp(tau2(q)).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import cache as _cache
from .charcls import euler_equiv
from .cohring import CohClass, GeometryTriple
from .errors import CacheCorrupt, MirrorMapOutOfRange, NegativeLambdaPower, QSDError
from .scalars import ONE, Scalar
from .series import FormalSeries, SeriesMatrix, birkhoff_split, divisor_shift, invert_unipotent

KINDS = ("untwisted", "euler", "inverse_euler")


@dataclass(frozen=True)
class TwistSpec:
    kind: str = "untwisted"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown twist {self.kind!r}; expected one of {KINDS}")

    @property
    def twisted(self):
        return self.kind != "untwisted"


UNTWISTED = TwistSpec("untwisted")
EULER = TwistSpec("euler")
INVERSE_EULER = TwistSpec("inverse_euler")


def _twist(t):
    return t if isinstance(t, TwistSpec) else TwistSpec(t)


def _linear(D, n, h=0, lam=0, z=0, const=0):
    """h*H + lam*lambda + z*z + const as a class-valued series."""
    terms = {}
    if const:
        terms[(0, 0, 0, 0)] = CohClass.monomial(n, 0, const)
    if h:
        terms[(0, 0, 0, 0)] = terms.get((0, 0, 0, 0), CohClass.zero(n)) + CohClass.monomial(n, 1, h)
    if lam:
        terms[(0, 0, 1, 0)] = CohClass.monomial(n, 0, lam)
    if z:
        terms[(0, 1, 0, 0)] = CohClass.monomial(n, 0, z)
    return FormalSeries(D, n, terms)


def _inverse_linear(D, n, k):
    """1/(H + k z) expanded in H/z."""
    terms = {}
    for m in range(n + 1):
        terms[(0, -m - 1, 0, 0)] = CohClass.monomial(n, m, Fraction((-1) ** m, k ** (m + 1)))
    return FormalSeries(D, n, terms)


def twist_factor(g: GeometryTriple, twist, d, D) -> FormalSeries:
    """prod_j M_j(d) for the given twist, at q^0."""
    twist = _twist(twist)
    n = g.n
    out = FormalSeries.constant(D, CohClass.one(n))
    if twist.kind == "untwisted":
        return out
    for l in g.E.line_degrees:
        if twist.kind == "euler":
            for k in range(1, l * d + 1):
                out = out * _linear(D, n, h=l, lam=1, z=k)
        else:
            for k in range(0, l * d):
                out = out * _linear(D, n, h=-l, lam=-1, z=-k)
    return out


def i_function(g: GeometryTriple, twist, D) -> FormalSeries:
    """I = sum_d q^d prod_j M_j(d) / prod_{k<=d} (H + k z)^{n+1}."""
    n = g.n
    out = FormalSeries.constant(D, CohClass.one(n))
    den = FormalSeries.constant(D, CohClass.one(n))
    for d in range(1, D + 1):
        inv = _inverse_linear(D, n, d)
        for _ in range(n + 1):
            den = den * inv
        out = out + (twist_factor(g, twist, d, D) * den).shift(d=d)
    return out


@dataclass
class MirrorData:
    tau0: FormalSeries
    tau2: FormalSeries
    J: FormalSeries
    I0: FormalSeries


def mirror_transform(I: FormalSeries) -> MirrorData:
    """Normalize I so that z*I/I0 = z + tau0 + tau2*H + O(1/z)."""
    for (d, a, b, c), v in I.terms.items():
        if a > 0 or c:
            raise MirrorMapOutOfRange(f"I has a z^{a} Lz^{c} term at q^{d}")
    I0 = I.z_part(0)
    for key, v in I0.terms.items():
        if any(not x.is_zero() for x in v.coeffs[1:]):
            raise MirrorMapOutOfRange(f"z^0 part of I is not a scalar at {key}")
    I0 = I0.component(0)
    Jn = I * I0.inverse()
    tau = Jn.z_part(-1)
    for (d, a, b, c), v in tau.terms.items():
        if b < 0:
            raise MirrorMapOutOfRange(f"mirror map has lambda^{b} at q^{d}")
        if any(not x.is_zero() for x in v.coeffs[2:]):
            raise MirrorMapOutOfRange(f"mirror map leaves span(1, H) at q^{d}: {v}")
    return MirrorData(tau.component(0), tau.component(1) if I.n >= 1 else FormalSeries(I.D, 0),
                      Jn.shift(a=1), I0)


def revert_mirror_map(tau2: FormalSeries) -> FormalSeries:
    """u(Q) with q = Q*u(Q) solving Q = q*exp(tau2(q))."""
    u = FormalSeries.constant(tau2.D, ONE)
    for _ in range(tau2.D + 1):
        u = (-tau2.substitute_q(u)).exp()
    return u


def _shift_factor(tau0, tau2, n):
    """exp(-(tau0 + tau2*H)/z) as a class-valued series."""
    D = tau0.D
    t = tau0._lift(n) + tau2 * FormalSeries.H(D, n)
    return (-t).shift(a=-1).exp()


def column_matrix(J: FormalSeries, n, derivative_weight=None) -> SeriesMatrix:
    """Columns v_0 = J/z and v_{k+1} = (z q d/dq + H) v_k."""
    D = J.D
    Hs = FormalSeries.H(D, n)
    cols = [J.shift(a=-1)]
    for _ in range(n):
        v = cols[-1]
        cols.append(v.q_d_q().shift(a=1) + v * Hs)
    return SeriesMatrix.from_columns(cols)


def solution_from_columns(M: SeriesMatrix):
    """Birkhoff factor M = L^-1 P; returns (L, P)."""
    X, P = birkhoff_split(M)
    return invert_unipotent(X), P


def j_function_at_zero(md: MirrorData, n) -> FormalSeries:
    """J at t = 0 as a series in Q: z + sum_d Q^d (two-point descendants)."""
    u = revert_mirror_map(md.tau2)
    tau0 = md.tau0.substitute_q(u)
    tau2 = md.tau2.substitute_q(u)
    return md.J.substitute_q(u) * _shift_factor(tau0, tau2, n)


def fundamental_solution(md: MirrorData, n):
    """t = 0 solution L~(Q) and the polynomial factor P of the column matrix."""
    return solution_from_columns(column_matrix(j_function_at_zero(md, n), n))


def quantum_product_H(L: SeriesMatrix) -> SeriesMatrix:
    """H* = L H L^-1 - z (Q d/dQ L) L^-1 for a t = 0 solution L."""
    n = L.rows - 1
    Hc = SeriesMatrix.cup(FormalSeries.H(L.D, n))
    Li = invert_unipotent(L)
    prod = L @ Hc @ Li - (L.q_d_q() @ Li).shift(a=1)
    for (d, a, b, c) in prod.terms:
        if a or c:
            raise QSDError(f"quantum product picked up z^{a} Lz^{c} at Q^{d}")
    return prod


def two_point(L: SeriesMatrix, alpha) -> FormalSeries:
    """Minus the 1/z coefficient of L alpha."""
    if isinstance(alpha, CohClass):
        alpha = FormalSeries.constant(L.D, alpha)
    return -(L @ alpha).z_part(-1)


def pairing_weight(g: GeometryTriple, twist, D) -> FormalSeries:
    twist = _twist(twist)
    n = g.n
    if twist.kind == "untwisted":
        return FormalSeries.constant(D, CohClass.one(n))
    if twist.kind == "euler":
        return euler_equiv(g.E, False, n, D)
    return euler_equiv(g.E, True, n, D).inverse()


def pairing_gram(g: GeometryTriple, twist, D) -> SeriesMatrix:
    """Gram matrix of (a, b) -> integral of a*b*weight on the monomial basis."""
    n = g.n
    w = pairing_weight(g, twist, D)
    entries = {}
    for key, v in w.terms.items():
        m = [[(CohClass.monomial(n, a) * CohClass.monomial(n, b) * v).integrate() for b in range(n + 1)]
             for a in range(n + 1)]
        entries[key] = tuple(tuple(r) for r in m)
    return SeriesMatrix(D, n + 1, n + 1, entries)


@dataclass
class TheoryDatum:
    geometry: GeometryTriple
    twist: TwistSpec
    D: int
    I: FormalSeries
    tau0: FormalSeries
    tau2: FormalSeries
    J: FormalSeries
    L_tilde: SeriesMatrix
    P: SeriesMatrix
    product_H_tilde: SeriesMatrix
    L: SeriesMatrix
    product_H: SeriesMatrix

    @property
    def n(self):
        return self.geometry.n

    @property
    def rho_coefficient(self):
        """rho = c * H with c = n + 1 for plain P^n and n + 1 - sum(l) when twisted."""
        c = self.n + 1
        if self.twist.twisted:
            c -= sum(self.geometry.E.line_degrees)
        return c


_STORE = {"cache": None, "corrupt": 0}


def set_theory_cache(store):
    """Route build_theory through a :class:`qsdlab.cache.SeriesCache` (None disables it)."""
    _STORE["cache"] = store
    build_theory.cache_clear()


_CACHED_FIELDS = _cache.SERIES_FIELDS + _cache.MATRIX_FIELDS


@lru_cache(maxsize=64)
def build_theory(g: GeometryTriple, twist, D) -> TheoryDatum:
    twist = _twist(twist)
    store = _STORE["cache"]
    if store is None:
        return _build_theory(g, twist, D)
    key = _cache.cache_key(g.X.name, g.E.line_degrees, twist.kind, D)
    try:
        data = store.get(key)
    except CacheCorrupt:
        _STORE["corrupt"] += 1
        store.discard(key)
        data = None
    if data is not None and set(data) == set(_CACHED_FIELDS):
        return TheoryDatum(g, twist, D, **data)
    th = _build_theory(g, twist, D)
    store.put(key, {name: getattr(th, name) for name in _CACHED_FIELDS})
    return th


def _build_theory(g: GeometryTriple, twist: TwistSpec, D) -> TheoryDatum:
    I = i_function(g, twist, D)
    md = mirror_transform(I)
    Lt, P = fundamental_solution(md, g.n)
    prod_t = quantum_product_H(Lt)
    u = md.tau2.exp()
    L = divisor_shift(Lt, md.tau0, md.tau2)
    prod = prod_t.substitute_q(u)
    return TheoryDatum(g, twist, D, I, md.tau0, md.tau2, md.J, Lt, P, prod_t, L, prod)


def direct_solution(theory: TheoryDatum):
    """L at the mirror point built straight from J(q), without the divisor shift."""
    md_J = theory.J
    n = theory.n
    # (z q d/dq + H) acting on J/z generates L^-1 times a z-free matrix
    return solution_from_columns(column_matrix(md_J, n))


def ytox_product(g: GeometryTriple, D) -> SeriesMatrix:
    """lambda -> 0 limit of the quantum product by H in the inverse Euler twisted theory."""
    return build_theory(g, INVERSE_EULER, D).product_H_tilde.nonequivariant_limit()


def local_invariants(g: GeometryTriple, D):
    """N_d = [Q^d lambda^0] <H * H, H^{n-1}> / d^3 in the inverse Euler twisted theory."""
    th = build_theory(g, INVERSE_EULER, D)
    n = g.n
    if n < 1:
        return []
    hh = th.product_H_tilde @ FormalSeries.H(D, n)
    w = pairing_weight(g, INVERSE_EULER, D)
    paired = (hh * FormalSeries.H(D, n, n - 1) * w).component(n)
    out = []
    for d in range(1, D + 1):
        layer = paired.layer(d)
        for (dd, a, b, c), v in layer.terms.items():
            if b < 0:
                raise NegativeLambdaPower((dd, a, b, c), f"lambda^{b} in degree {d} invariant")
        val = paired.coefficient(d, 0, 0, 0).coeffs[0]
        out.append(val / Scalar.rational(d ** 3))
    return out
