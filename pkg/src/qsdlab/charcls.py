"""Characteristic classes on P^n and the operators that build flat sections.

Everything here is split: Chern roots are multiples of H, so each class is a
power series in H truncated at H^{n+1}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .cohring import BundleModel, CohClass, GeometryTriple
from .errors import FlavorMismatch, OddDegree
from .scalars import EULER_GAMMA, I, ONE, PI, TWO_PI_I, ZERO, bernoulli, zeta
from .series import FormalSeries

TANGENT = "tangent"


# one-variable series in x = H, coefficient lists of length n + 1

def _substitute(coeffs, c: CohClass) -> CohClass:
    """Evaluate sum_k coeffs[k] * c^k in the ring of c."""
    n = c.n
    out = CohClass.zero(n)
    power = CohClass.one(n)
    for k, a in enumerate(coeffs):
        if k > n:
            break
        if a:
            out = out + power * a
        power = power * c
    return out


def class_exp(c: CohClass) -> CohClass:
    """exp(c) for c nilpotent (zero constant term)."""
    if not c.coeffs[0].is_zero():
        raise ValueError("class_exp needs a nilpotent argument")
    return _substitute([Fraction(1, factorial(k)) for k in range(c.n + 1)], c)


def class_log(c: CohClass) -> CohClass:
    """log(c) for c with constant term 1."""
    if c.coeffs[0] != ONE:
        raise ValueError("class_log needs constant term 1")
    x = c.nilpotent_part()
    return _substitute([Fraction(0)] + [Fraction((-1) ** (k + 1), k) for k in range(1, c.n + 1)], x)


def class_inverse(c: CohClass) -> CohClass:
    """Inverse of a class with invertible constant term."""
    u = c.coeffs[0].inverse()
    x = (c * u).nilpotent_part()
    geo = _substitute([Fraction((-1) ** k) for k in range(c.n + 1)], x)
    return geo * u


def _roots(B, n):
    if B == TANGENT:
        return [1] * (n + 1)
    if isinstance(B, BundleModel):
        return list(B.line_degrees)
    return list(B)


@dataclass(frozen=True)
class SheafClass:
    """Integer combination of line bundles O(a) on X, or of i_*O_X(a) on Y."""

    base: str
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.base not in ("X", "Y"):
            raise ValueError(f"unknown base {self.base!r}")
        merged = {}
        for a, m in self.terms:
            merged[a] = merged.get(a, 0) + m
        object.__setattr__(self, "terms", tuple(sorted((a, m) for a, m in merged.items() if m)))

    @classmethod
    def line(cls, a, mult=1):
        return cls("X", ((a, mult),))

    @classmethod
    def pushforward(cls, a, mult=1):
        return cls("Y", ((a, mult),))

    def __add__(self, other):
        if self.base != other.base:
            raise FlavorMismatch("cannot add sheaves on different spaces")
        return SheafClass(self.base, self.terms + other.terms)

    def __neg__(self):
        return SheafClass(self.base, tuple((a, -m) for a, m in self.terms))

    def dual(self):
        if self.base != "X":
            raise FlavorMismatch("duals are only modelled for sheaves on X")
        return SheafClass("X", tuple((-a, m) for a, m in self.terms))

    def restrict(self):
        """j* pi_* of i_*O(a) is j*O(a); as a sheaf on X this is O(a)."""
        return SheafClass("X", self.terms)

    def label(self):
        gen = "O" if self.base == "X" else "i_*O"
        return " + ".join(f"{m}*{gen}({a})" if m != 1 else f"{gen}({a})" for a, m in self.terms) or "0"


def chern_character(F, n) -> CohClass:
    """ch of a SheafClass on X, a BundleModel, or the tangent bundle of P^n."""
    H = CohClass.monomial(n, 1)
    if isinstance(F, SheafClass):
        if F.base != "X":
            raise FlavorMismatch("use ch_plain or ch_compact for sheaves on Y")
        out = CohClass.zero(n)
        for a, m in F.terms:
            out = out + class_exp(H * a) * m
        return out
    if F == TANGENT:
        return class_exp(H) * (n + 1) - 1
    out = CohClass.zero(n)
    for l in _roots(F, n):
        out = out + class_exp(H * l)
    return out


def _todd_series(n):
    # x / (1 - e^{-x}) = sum_k (-1)^k B_k x^k / k!
    return [Fraction((-1) ** k) * bernoulli(k) / factorial(k) for k in range(n + 1)]


def todd(B, n) -> CohClass:
    out = CohClass.one(n)
    ser = _todd_series(n)
    for l in _roots(B, n):
        out = out * _substitute(ser, CohClass.monomial(n, 1, l))
    return out


def euler_equiv(B, dualize, n, D=0) -> FormalSeries:
    """e_lambda(E) = prod(lambda + l H), or e_lambda(E^dual) = prod(-lambda - l H)."""
    sign = -1 if dualize else 1
    out = FormalSeries.constant(D, CohClass.one(n))
    for l in _roots(B, n):
        out = out * (FormalSeries.lam(D, n) * sign + FormalSeries.H(D, n, 1, sign * l))
    return out


def log_gamma_series(n):
    """Coefficients of log Gamma(1 + x) up to x^n."""
    out = [ZERO] * (n + 1)
    if n >= 1:
        out[1] = -EULER_GAMMA
    for k in range(2, n + 1):
        out[k] = zeta(k) * Fraction((-1) ** k, k)
    return out


def gamma_class(B, n) -> CohClass:
    """prod Gamma(1 + root); B may be a BundleModel, a list of degrees, or TANGENT."""
    logs = log_gamma_series(n)
    total = CohClass.zero(n)
    for l in _roots(B, n):
        total = total + _substitute(logs, CohClass.monomial(n, 1, l))
    return class_exp(total)


def gamma_hat_X(n) -> CohClass:
    return gamma_class(TANGENT, n)


def gamma_hat_Y(g: GeometryTriple) -> CohClass:
    """Gamma class of Y in the model H*(Y) = H*(X): Gamma_X * Gamma(E^dual)."""
    return gamma_hat_X(g.n) * gamma_class([-l for l in g.E.line_degrees], g.n)


def gamma_hat_twisted(g: GeometryTriple) -> CohClass:
    """Gamma_X / Gamma(E), before any ambient projection."""
    return gamma_hat_X(g.n) * class_inverse(gamma_class(g.E, g.n))


def ch_compact(g: GeometryTriple, F: SheafClass) -> CohClass:
    """Compactly supported ch of a combination of i_*O(a), in the H*(X) carrier."""
    if F.base != "Y":
        raise FlavorMismatch("ch_compact needs a sheaf on Y")
    td_inv = class_inverse(todd([-l for l in g.E.line_degrees], g.n))
    return chern_character(F.restrict(), g.n) * td_inv


def ch_plain(g: GeometryTriple, F: SheafClass) -> CohClass:
    """ch of a combination of i_*O(a) on Y: phi applied to the compactly supported ch."""
    if F.base != "Y":
        raise FlavorMismatch("ch_plain needs a sheaf on Y")
    return g.euler_Edual * ch_compact(g, F)


def hrr_chi(F2: SheafClass, F1: SheafClass, n) -> Fraction:
    """chi(F2, F1) = integral of ch(F2^dual) ch(F1) Td(TX)."""
    val = (chern_character(F2.dual(), n) * chern_character(F1, n) * todd(TANGENT, n)).integrate()
    return val.to_rational()


@dataclass(frozen=True)
class OperatorSpec:
    """One of the operators z^-Gr, z^rho, (2 pi i)^{deg0/2} and e^{c/z}.

    ``data`` is the class c or rho for the multiplicative kinds.  ``degrees``
    optionally lists the real degree of each basis vector (default 2k for H^k);
    ``shift`` adds a constant to the complex degree used by z^-Gr.
    """

    kind: str
    data: CohClass | None = None
    degrees: tuple | None = None
    shift: int = 0

    KINDS = ("z^-Gr", "z^rho", "(2pi i)^deg0/2", "e^c/z")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")


def _complex_degrees(spec, size):
    if spec.degrees is None:
        return [k for k in range(size)]
    out = []
    for d in spec.degrees:
        if d % 2:
            raise OddDegree(f"basis vector of real degree {d}")
        out.append(d // 2)
    return out


def _as_series(v, D):
    if isinstance(v, FormalSeries):
        return v
    return FormalSeries.constant(D, v)


def apply_operator(spec: OperatorSpec, v, D=0) -> FormalSeries:
    v = _as_series(v, D)
    n = v.n
    if spec.kind == "z^-Gr":
        degs = _complex_degrees(spec, n + 1)
        out = FormalSeries(v.D, n)
        for k in range(n + 1):
            comp = v.component(k)
            if comp.is_zero():
                continue
            part = comp.shift(a=-(degs[k] + spec.shift))
            out = out + _embed(part, n, k)
        return out
    if spec.kind == "(2pi i)^deg0/2":
        degs = _complex_degrees(spec, n + 1)
        out = FormalSeries(v.D, n)
        for k in range(n + 1):
            comp = v.component(k)
            if not comp.is_zero():
                out = out + _embed(comp * (TWO_PI_I ** degs[k]), n, k)
        return out
    if spec.kind == "z^rho":
        rho = spec.data
        lz = FormalSeries.monomial(v.D, n, c=1)
        arg = lz * rho
        return v * arg.exp()
    if spec.kind == "e^c/z":
        c = spec.data
        arg = FormalSeries.monomial(v.D, n, a=-1) * c
        return v * arg.exp()
    raise ValueError(spec.kind)


def _embed(scalar_series: FormalSeries, n, k) -> FormalSeries:
    """Place a scalar series into the H^k slot of a class-valued series."""
    return scalar_series._lift(n) * CohClass.monomial(n, k)


def gamma_reflection_residual(order) -> CohClass:
    """Gamma(1+x) Gamma(1-x) (1 - e^{2 pi i x}) - 2 pi i e^{pi i x} (-x) as a series to x^order."""
    n = order
    x = CohClass.monomial(n, 1)
    g_plus = gamma_class([1], n)
    g_minus = gamma_class([-1], n)
    lhs = g_plus * g_minus * (CohClass.one(n) - class_exp(x * TWO_PI_I))
    rhs = class_exp(x * (PI * I)) * (-x) * TWO_PI_I
    return lhs - rhs
