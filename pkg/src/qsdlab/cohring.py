"""Cohomology models for X = P^n, the total space Y = Tot(E^dual) and the ambient part of Z.

H*(Y) and the compactly supported H*_c(Y) are both carried on the vector space
H*(X) = Q[H]/(H^{n+1}).  Pullback along the projection and the compactly supported
pushforward from the zero section are identity transports; the forgetful map
phi: H_c(Y) -> H(Y) is multiplication by e(E^dual).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from . import linalg
from .errors import AmbientDegenerate, NonConvex, NotNarrow
from .scalars import ONE, ZERO, Scalar, as_scalar


class CohClass:
    """Element of Q-scalars[H]/(H^{n+1}), stored as coefficients of H^0..H^n."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = tuple(as_scalar(c) for c in coeffs)

    @classmethod
    def zero(cls, n):
        return cls((ZERO,) * (n + 1))

    @classmethod
    def one(cls, n):
        return cls.monomial(n, 0)

    @classmethod
    def monomial(cls, n, k, coeff=ONE):
        c = [ZERO] * (n + 1)
        if 0 <= k <= n:
            c[k] = as_scalar(coeff)
        return cls(c)

    @property
    def n(self):
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def __add__(self, other):
        if not isinstance(other, CohClass):
            other = CohClass.monomial(self.n, 0, other)
        return CohClass([a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CohClass([-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, CohClass):
            n = self.n
            out = [ZERO] * (n + 1)
            for i, a in enumerate(self.coeffs):
                if a.is_zero():
                    continue
                for j in range(n + 1 - i):
                    b = other.coeffs[j]
                    if not b.is_zero():
                        out[i + j] = out[i + j] + a * b
            return CohClass(out)
        s = as_scalar(other)
        return CohClass([a * s for a in self.coeffs])

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, CohClass):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def integrate(self) -> Scalar:
        return self.coeffs[-1]

    def pow(self, k):
        out = CohClass.one(self.n)
        for _ in range(k):
            out = out * self
        return out

    def nilpotent_part(self):
        return CohClass((ZERO,) + self.coeffs[1:])

    def __repr__(self):
        return f"CohClass({render_class(self)})"

    def __str__(self):
        return render_class(self)


def render_class(c: CohClass) -> str:
    parts = []
    for k, a in enumerate(c.coeffs):
        if a.is_zero():
            continue
        mono = "" if k == 0 else ("H" if k == 1 else f"H^{k}")
        txt = str(a)
        if not mono:
            parts.append(f"({txt})")
        else:
            parts.append(f"({txt})*{mono}")
    return " + ".join(parts) if parts else "0"


def mult_matrix(c: CohClass):
    """Matrix of x -> c*x in the monomial basis (rational entries only)."""
    n = c.n
    vals = [a.to_rational() for a in c.coeffs]
    return [[vals[i - j] if i >= j else Fraction(0) for j in range(n + 1)] for i in range(n + 1)]


def apply_matrix(m, c: CohClass) -> CohClass:
    out = []
    for row in m:
        acc = ZERO
        for coeff, v in zip(row, c.coeffs):
            if coeff:
                acc = acc + v * coeff
        out.append(acc)
    return CohClass(out)


@dataclass(frozen=True)
class SpaceModel:
    """P^n with its ring, first Chern class and integration functional."""

    dimension: int

    @property
    def name(self):
        return f"P{self.dimension}"

    @property
    def basis(self):
        return [CohClass.monomial(self.dimension, k) for k in range(self.dimension + 1)]

    @property
    def basis_labels(self):
        return ["1", "H"] + [f"H^{k}" for k in range(2, self.dimension + 1)]

    @property
    def relation_degree(self):
        return self.dimension + 1

    @property
    def c1_tangent(self) -> CohClass:
        return CohClass.monomial(self.dimension, 1, self.dimension + 1)

    @property
    def effective_degrees(self):
        return range(0, 10**9)

    @property
    def sectors(self):
        return [(Fraction(0), "identity")]

    def H(self, k=1, coeff=ONE) -> CohClass:
        return CohClass.monomial(self.dimension, k, coeff)

    def one(self) -> CohClass:
        return CohClass.one(self.dimension)

    def integrate(self, c: CohClass) -> Scalar:
        return c.integrate()

    def pairing(self, a: CohClass, b: CohClass) -> Scalar:
        return (a * b).integrate()

    def pairing_matrix(self):
        n = self.dimension
        return [[Fraction(int(i + j == n)) for j in range(n + 1)] for i in range(n + 1)]

    @classmethod
    def from_name(cls, name: str) -> "SpaceModel":
        if not (name.startswith("P") and name[1:].isdigit()):
            raise ValueError(f"unknown space {name!r}")
        return cls(int(name[1:]))


@dataclass(frozen=True)
class BundleModel:
    line_degrees: tuple

    def __post_init__(self):
        object.__setattr__(self, "line_degrees", tuple(int(x) for x in self.line_degrees))

    @property
    def rank(self):
        return len(self.line_degrees)

    def is_convex(self):
        return all(l >= 0 for l in self.line_degrees)

    def c1(self, n) -> CohClass:
        return CohClass.monomial(n, 1, sum(self.line_degrees))


def _vec(c: CohClass):
    return [a.to_rational() for a in c.coeffs]


def _class(v, n) -> CohClass:
    return CohClass([Scalar.rational(x) if not isinstance(x, Scalar) else x for x in v])


@dataclass(frozen=True)
class GeometryTriple:
    """X = P^n, a split convex bundle E, the ambient model of Z = {s = 0}, and Y = Tot(E^dual)."""

    X: SpaceModel
    E: BundleModel

    def __post_init__(self):
        if not self.E.is_convex():
            raise NonConvex(f"bundle degrees {self.E.line_degrees} are not all nonnegative")
        gram = self.ambient_gram()
        if gram and linalg.det(gram) == 0:
            raise AmbientDegenerate("ambient pairing is singular")

    @classmethod
    def build(cls, space, bundle) -> "GeometryTriple":
        X = space if isinstance(space, SpaceModel) else SpaceModel.from_name(space)
        E = bundle if isinstance(bundle, BundleModel) else BundleModel(tuple(bundle))
        return cls(X, E)

    @property
    def n(self):
        return self.X.dimension

    @property
    def rank(self):
        return self.E.rank

    @property
    def label(self):
        return f"({self.X.name}, {'+'.join(f'O({l})' for l in self.E.line_degrees) or '0'})"

    @cached_property
    def euler_E(self) -> CohClass:
        out = self.X.one()
        for l in self.E.line_degrees:
            out = out * self.X.H(1, l)
        return out

    @cached_property
    def euler_Edual(self) -> CohClass:
        out = self.X.one()
        for l in self.E.line_degrees:
            out = out * self.X.H(1, -l)
        return out

    @property
    def c1_E(self) -> CohClass:
        return self.E.c1(self.n)

    # linear maps on the H*(X) carrier
    @cached_property
    def phi(self):
        return mult_matrix(self.euler_Edual)

    @property
    def pi_star(self):
        return linalg.identity(self.n + 1)

    @property
    def i_c_star(self):
        return linalg.identity(self.n + 1)

    @property
    def pi_c_star(self):
        return linalg.identity(self.n + 1)

    @property
    def i_upper_star(self):
        return linalg.identity(self.n + 1)

    @property
    def i_star(self):
        return self.phi

    @cached_property
    def _phi_solver(self):
        return linalg.LinearSolver(self.phi)

    @cached_property
    def ambient_kernel(self):
        return linalg.nullspace(mult_matrix(self.euler_E), self.n + 1)

    @cached_property
    def ambient_indices(self):
        """Monomials H^k whose images form the chosen basis of H*(X)/K."""
        chosen = []
        span = [list(v) for v in self.ambient_kernel]
        for k in range(self.n + 1):
            e = [Fraction(int(i == k)) for i in range(self.n + 1)]
            if linalg.rank(span + [e]) > len(span):
                span.append(e)
                chosen.append(k)
        return chosen

    @property
    def ambient_basis(self):
        return [self.X.H(k) for k in self.ambient_indices]

    @cached_property
    def j_star(self):
        """Matrix of the quotient map H*(X) -> H*(X)/K in the ambient basis."""
        cols = [[Fraction(int(i == k)) for i in range(self.n + 1)] for k in self.ambient_indices]
        cols += [list(v) for v in self.ambient_kernel]
        change = linalg.transpose(cols)
        inv = linalg.inverse(change)
        return inv[: len(self.ambient_indices)]

    @cached_property
    def j_star_section(self):
        """Right inverse of j_star sending ambient coordinates to the chosen monomials."""
        m = len(self.ambient_indices)
        out = [[Fraction(0)] * m for _ in range(self.n + 1)]
        for col, k in enumerate(self.ambient_indices):
            out[k][col] = Fraction(1)
        return out

    def ambient_gram(self):
        idx = self.ambient_indices
        eE = self.euler_E
        return [[(self.X.H(a) * self.X.H(b) * eE).integrate().to_rational() for b in idx] for a in idx]

    @cached_property
    def narrow_matrix(self):
        """Columns form the echelon basis of im(phi)."""
        return linalg.transpose(linalg.column_space_basis(self.phi)) if self.narrow_dim else []

    @cached_property
    def narrow_dim(self):
        return linalg.rank(self.phi)


def narrow_basis(g: GeometryTriple):
    return [_class(v, g.n) for v in linalg.column_space_basis(g.phi)]


def is_narrow(g: GeometryTriple, alpha: CohClass) -> bool:
    return g._phi_solver.solve(list(alpha.coeffs)) is not None


def lift(g: GeometryTriple, alpha: CohClass) -> CohClass:
    """Some x in the compact-support model with phi(x) = alpha."""
    x = g._phi_solver.solve(list(alpha.coeffs))
    if x is None:
        raise NotNarrow(f"{alpha} is not in the image of e(E^dual)")
    return CohClass(x)


def phi(g: GeometryTriple, x: CohClass) -> CohClass:
    return g.euler_Edual * x


def cup_c(g: GeometryTriple, alpha: CohClass, beta: CohClass) -> CohClass:
    if not is_narrow(g, beta):
        raise NotNarrow(f"{beta} is not narrow")
    return lift(g, alpha) * beta


def narrow_pairing(g: GeometryTriple, alpha: CohClass, beta: CohClass) -> Scalar:
    return cup_c(g, alpha, beta).integrate()


def kernel_phi(g: GeometryTriple):
    return [_class(v, g.n) for v in linalg.nullspace(g.phi, g.n + 1)]


def ambient_coordinates(g: GeometryTriple, a: CohClass):
    """Coordinates of j*(a) in the ambient basis."""
    out = []
    for row in g.j_star:
        acc = ZERO
        for coeff, v in zip(row, a.coeffs):
            if coeff:
                acc = acc + v * coeff
        out.append(acc)
    return out


def ambient_project(g: GeometryTriple, a: CohClass) -> CohClass:
    """Canonical representative of j*(a), supported on the ambient basis monomials."""
    coords = ambient_coordinates(g, a)
    out = [ZERO] * (g.n + 1)
    for k, c in zip(g.ambient_indices, coords):
        out[k] = c
    return CohClass(out)


def ambient_pairing(g: GeometryTriple, a: CohClass, b: CohClass) -> Scalar:
    return (ambient_project(g, a) * ambient_project(g, b) * g.euler_E).integrate()


def y_pairing(g: GeometryTriple, a: CohClass, b_c: CohClass) -> Scalar:
    """Pairing of a class on Y with a compactly supported class: integral over X."""
    return (a * b_c).integrate()


def narrow_checks(g: GeometryTriple) -> dict:
    """Residual lists for the narrow-cohomology statements in the model.

    Every list is empty when the statement holds.
    """
    n = g.n
    basis = [g.X.H(k) for k in range(n + 1)]
    nar = narrow_basis(g)
    ker = kernel_phi(g)
    out = {}
    # H_nar is the annihilator of ker(phi) under the pairing of H(Y) with H_c(Y)
    perp = linalg.nullspace([[y_pairing(g, b, k).to_rational() for b in basis] for k in ker], n + 1) \
        if ker else linalg.identity(n + 1)
    perp_rank = linalg.rank(perp) if perp else 0
    joint = linalg.rank([list(v) for v in perp] + [_vec(a) for a in nar]) if (perp or nar) else 0
    out["narrow_is_ker_phi_perp"] = [] if perp_rank == len(nar) == joint else \
        [f"dim perp {perp_rank}, dim narrow {len(nar)}, joint rank {joint}"]
    gram = [[narrow_pairing(g, a, b).to_rational() for b in nar] for a in nar]
    out["narrow_pairing_nondegenerate"] = [] if not nar or linalg.det(gram) != 0 else ["narrow Gram is singular"]
    # im i_* equals the image of cup with e(E^dual)
    images = [_vec(g.euler_Edual * b) for b in basis]
    im_istar = [_vec(apply_matrix(g.i_star, b)) for b in basis]
    r1, r2 = linalg.rank(images), linalg.rank(im_istar)
    out["image_of_pushforward"] = [] if r1 == r2 == linalg.rank(images + im_istar) else ["im i_* differs"]
    lift_dep = []
    for a in nar:
        for b in nar:
            base = cup_c(g, a, b)
            for k in ker:
                other = (lift(g, a) + k) * b
                if other != base:
                    lift_dep.append(f"cup_c({a}, {b}) changes by {other - base}")
    out["cup_c_lift_independent"] = lift_dep
    out["phi_transport"] = [] if linalg.matmul(g.phi, g.i_c_star) == g.i_star else ["phi i^c_* != i_*"]
    pairing_bad = []
    for x in basis:
        for b in nar:
            if narrow_pairing(g, phi(g, x), b) != y_pairing(g, b, x):
                pairing_bad.append(f"<phi({x}), {b}>")
    out["narrow_pairing_transport"] = pairing_bad
    euler_bad = []
    for a in basis:
        lhs = apply_matrix(g.i_star, apply_matrix(g.i_upper_star, apply_matrix(g.pi_star, a)))
        if lhs != g.euler_Edual * apply_matrix(g.pi_star, a):
            euler_bad.append(str(a))
    out["euler_class_identity"] = euler_bad
    out["ambient_dim_is_narrow_dim"] = [] if len(g.ambient_indices) == g.narrow_dim else \
        [f"ambient {len(g.ambient_indices)} vs narrow {g.narrow_dim}"]
    return out
