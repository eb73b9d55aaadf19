"""Quantum D-modules in six flavors, their pairings and Gamma-integral flat sections.

A module stores its solution L at the mirror point in its own section coordinates,
together with the quantum product by H there.  The parameter point is
t = tau0*1 + (log q + tau2)*H; the log q part is kept out of every series, so the
stripped flat-section matrix F = L z^-Gr z^rho satisfies

    q dF/dq - F*(H cup) + z^-1 (tau0' + (1 + tau2') H*) F = 0
    dF/dz + z^-1 lambda dF/dlambda - z^-2 (e0 + e2 H*) F + z^-1 Gr F = 0

where ' is q d/dq, rho = c*H, e0 = tau0 - lambda d(tau0)/dlambda and
e2 = c - lambda d(tau2)/dlambda.  The lambda terms matter only for the twisted
flavors, where lambda carries degree 2 and the mirror map may depend on it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import linalg
from .charcls import (SheafClass, ch_compact, ch_plain, chern_character, gamma_hat_twisted, gamma_hat_X,
                      gamma_hat_Y, hrr_chi)
from .cohring import CohClass, GeometryTriple, mult_matrix, narrow_pairing
from .errors import FlavorMismatch, NarrowNotClosed, QSDError
from .hypergeo import EULER, INVERSE_EULER, UNTWISTED, build_theory, pairing_gram
from .scalars import TWO_PI_I, ZERO
from .series import FormalSeries, SeriesMatrix, invert_unipotent

FLAVORS = ("plain-X", "twisted-e(E)", "ambient-Z", "plain-Y", "compact-Y", "narrow-Y")
TWISTED_INVERSE = "twisted-inv"


@dataclass
class ConnectionFamily:
    """Connection matrices along 1, H, the mirror curve q and z."""

    nabla0: SeriesMatrix
    nabla1: SeriesMatrix
    nabla_q: SeriesMatrix
    nabla_z: SeriesMatrix
    euler_field: tuple
    lambda_derivative: bool


@dataclass
class QuantumDModule:
    flavor: str
    geometry: GeometryTriple
    D: int
    basis: list
    grading: list
    dim: int
    L: SeriesMatrix
    product: SeriesMatrix
    tau0: FormalSeries
    tau2: FormalSeries
    rho_c: int
    cup_H: list
    gram: SeriesMatrix | None
    has_lambda: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def size(self):
        return len(self.basis)

    @property
    def connection(self) -> ConnectionFamily:
        D, m = self.D, self.size
        ident = SeriesMatrix.identity(D, m)
        a_q = (SeriesMatrix.scalar(self.tau0.q_d_q(), m)
               + self.product.times_scalar_series(self.tau2.q_d_q() + 1)).shift(a=-1)
        # lambda d/dlambda is taken at fixed q; moving it to fixed t shifts the Euler field
        # by the lambda-derivatives of the mirror map
        e0 = self.tau0 - self.tau0.lambda_d_lambda()
        e2 = FormalSeries.constant(D, self.rho_c) - self.tau2.lambda_d_lambda()
        a_z = -(SeriesMatrix.scalar(e0, m) + self.product.times_scalar_series(e2)).shift(a=-2) \
            + _diag(D, self.grading).shift(a=-1)
        return ConnectionFamily(ident.shift(a=-1), self.product.shift(a=-1), a_q, a_z,
                                (self.tau0, self.rho_c), self.has_lambda)

    def flat_matrix(self) -> SeriesMatrix:
        """F = L z^-Gr z^rho."""
        return self.L @ _z_minus_gr(self.D, self.grading) @ _z_rho(self.D, self.cup_H, self.rho_c)


def _diag(D, values):
    m = len(values)
    return SeriesMatrix.constant(D, [[Fraction(values[i]) if i == j else 0 for j in range(m)] for i in range(m)])


def _z_minus_gr(D, grading):
    m = len(grading)
    terms = {}
    for k, gk in enumerate(grading):
        key = (0, -gk, 0, 0)
        mat = terms.setdefault(key, [[0] * m for _ in range(m)])
        mat[k][k] = 1
    return SeriesMatrix(D, m, m, terms)


def _z_rho(D, cup_H, c):
    m = len(cup_H)
    step = SeriesMatrix.constant(D, cup_H).scale(c).shift(c=1)
    out = SeriesMatrix.identity(D, m)
    term = out
    for k in range(1, m + 1):
        term = (term @ step).scale(Fraction(1, k))
        if term.is_zero():
            break
        out = out + term
    return out


def _j_antidiag(n):
    return [[1 if i + j == n else 0 for j in range(n + 1)] for i in range(n + 1)]


def _const(D, m):
    return SeriesMatrix.constant(D, m)


def _module_from_theory(flavor, th, gram, dim, has_lambda):
    g, n = th.geometry, th.n
    return QuantumDModule(flavor, g, th.D, [CohClass.monomial(n, k) for k in range(n + 1)],
                          list(range(n + 1)), dim, th.L, th.product_H, th.tau0, th.tau2,
                          th.rho_coefficient, mult_matrix(CohClass.monomial(n, 1)), gram, has_lambda)


@lru_cache(maxsize=32)
def build_plain(g: GeometryTriple, D) -> QuantumDModule:
    th = build_theory(g, UNTWISTED, D)
    return _module_from_theory("plain-X", th, _const(D, _j_antidiag(g.n)), g.n, False)


@lru_cache(maxsize=32)
def build_euler_twisted(g: GeometryTriple, D) -> QuantumDModule:
    th = build_theory(g, EULER, D)
    return _module_from_theory("twisted-e(E)", th, pairing_gram(g, EULER, D), g.n - g.rank, True)


@lru_cache(maxsize=32)
def build_inverse_twisted(g: GeometryTriple, D) -> QuantumDModule:
    """The e_lambda(E^dual)^-1 twisted module; used by the cone-level checks."""
    th = build_theory(g, INVERSE_EULER, D)
    return _module_from_theory(TWISTED_INVERSE, th, pairing_gram(g, INVERSE_EULER, D), g.n + g.rank, True)


@lru_cache(maxsize=32)
def build_ambient(g: GeometryTriple, D) -> QuantumDModule:
    th = build_theory(g, EULER, D)
    L0 = th.L.nonequivariant_limit()
    prod0 = th.product_H.nonequivariant_limit()
    jst, sec = _const(D, g.j_star), _const(D, g.j_star_section)
    L = jst @ L0 @ sec
    prod = jst @ prod0 @ sec
    # the lambda -> 0 solution must preserve the kernel of j*
    K = [list(v) for v in g.ambient_kernel]
    leak = []
    if K:
        Km = _const(D, linalg.transpose(K))
        leak = (jst @ L0 @ Km).nonzero_report(limit=5) + (jst @ prod0 @ Km).nonzero_report(limit=5)
    cup = linalg.matmul(linalg.matmul(g.j_star, mult_matrix(CohClass.monomial(g.n, 1))), g.j_star_section)
    m = len(g.ambient_indices)
    gram = _const(D, g.ambient_gram()) if m else SeriesMatrix(D, 0, 0)
    return QuantumDModule("ambient-Z", g, D, [CohClass.monomial(g.n, k) for k in g.ambient_indices],
                          list(g.ambient_indices), g.n - g.rank, L, prod,
                          th.tau0.nonequivariant_limit(), th.tau2.nonequivariant_limit(),
                          th.rho_coefficient, cup, gram, False, {"kernel_leak": leak})


def product_from_solution(L: SeriesMatrix, cup_H, tau0, tau2) -> SeriesMatrix:
    """Recover H* from the q-equation of a stripped solution L."""
    D, m = L.D, L.rows
    Li = invert_unipotent(L)
    B = (L @ _const(D, cup_H) - L.q_d_q().shift(a=1)) @ Li - SeriesMatrix.scalar(tau0.q_d_q(), m)
    return B.times_scalar_series((tau2.q_d_q() + 1).inverse())


@lru_cache(maxsize=32)
def build_Y_pair(g: GeometryTriple, D):
    th = build_theory(g, INVERSE_EULER, D)
    n, r = g.n, g.rank
    J = _j_antidiag(n)
    cup = mult_matrix(CohClass.monomial(n, 1))
    LY = th.L.nonequivariant_limit()
    prodY = th.product_H.nonequivariant_limit()
    tau0 = th.tau0.nonequivariant_limit()
    tau2 = th.tau2.nonequivariant_limit()
    basis = [CohClass.monomial(n, k) for k in range(n + 1)]
    plain = QuantumDModule("plain-Y", g, D, basis, list(range(n + 1)), n + r, LY, prodY, tau0, tau2,
                           th.rho_coefficient, cup, None, False)
    # compact solution: inverse adjoint of L^Y(-z) for the integral over X
    Lc = invert_unipotent(LY.z_to_minus_z().adjoint(J, J))
    prod_c = prodY.adjoint(J, J)
    compact = QuantumDModule("compact-Y", g, D, basis, [k + r for k in range(n + 1)], n + r, Lc, prod_c,
                             tau0, tau2, th.rho_coefficient, cup, None, False,
                             {"product_from_solution": product_from_solution(Lc, cup, tau0, tau2)})
    return plain, compact


@lru_cache(maxsize=32)
def build_narrow(g: GeometryTriple, D) -> QuantumDModule:
    plain, _ = build_Y_pair(g, D)
    n = g.n
    N = g.narrow_matrix
    m = g.narrow_dim
    if m == 0:
        return QuantumDModule("narrow-Y", g, D, [], [], n + g.rank, SeriesMatrix(D, 0, 0),
                              SeriesMatrix(D, 0, 0), plain.tau0, plain.tau2, plain.rho_c, [],
                              SeriesMatrix(D, 0, 0), False)
    Nl = _left_inverse(N)
    proj = linalg.matmul(N, Nl)
    comp = [[Fraction(int(i == j)) - proj[i][j] for j in range(n + 1)] for i in range(n + 1)]
    Nm, Nlm, compm = _const(D, N), _const(D, Nl), _const(D, comp)
    for name, op in (("product", plain.product), ("solution", plain.L)):
        leak = compm @ op @ Nm
        if not leak.is_zero():
            raise NarrowNotClosed(f"{name} leaves the narrow subspace: {leak.nonzero_report(limit=3)}")
    basis = [CohClass(list(col)) for col in linalg.transpose(N)]
    grading = [_degree(b) for b in basis]
    cup = linalg.matmul(linalg.matmul(Nl, plain.cup_H), N)
    gram = _const(D, [[narrow_pairing(g, a, b).to_rational() for b in basis] for a in basis])
    return QuantumDModule("narrow-Y", g, D, basis, grading, n + g.rank, Nlm @ plain.L @ Nm,
                          Nlm @ plain.product @ Nm, plain.tau0, plain.tau2, plain.rho_c, cup, gram, False,
                          {"N": N, "Nl": Nl})


def _left_inverse(N):
    """Left inverse of a full column rank rational matrix."""
    Nt = linalg.transpose(N)
    return linalg.matmul(linalg.inverse(linalg.matmul(Nt, N)), Nt)


def _degree(c: CohClass):
    degs = {k for k, x in enumerate(c.coeffs) if not x.is_zero()}
    if len(degs) != 1:
        raise QSDError(f"basis vector {c} is not homogeneous")
    return degs.pop()


def build(flavor, g: GeometryTriple, D) -> QuantumDModule:
    if flavor == "plain-X":
        return build_plain(g, D)
    if flavor == "twisted-e(E)":
        return build_euler_twisted(g, D)
    if flavor == TWISTED_INVERSE:
        return build_inverse_twisted(g, D)
    if flavor == "ambient-Z":
        return build_ambient(g, D)
    if flavor == "plain-Y":
        return build_Y_pair(g, D)[0]
    if flavor == "compact-Y":
        return build_Y_pair(g, D)[1]
    if flavor == "narrow-Y":
        return build_narrow(g, D)
    raise FlavorMismatch(f"unknown flavor {flavor!r}")


# residuals

def _flat_residuals(M: QuantumDModule, F: SeriesMatrix):
    D = M.D
    conn = M.connection
    res_q = F.q_d_q() - F @ _const(D, M.cup_H) + conn.nabla_q @ F
    res_z = F.d_z() + conn.nabla_z @ F
    if M.has_lambda:
        res_z = res_z + F.lambda_d_lambda().shift(a=-1)
    return res_q, res_z


def curvature(M: QuantumDModule) -> SeriesMatrix:
    conn = M.connection
    Aq, Az = conn.nabla_q, conn.nabla_z
    out = Az.q_d_q() - Aq.d_z() + Aq @ Az - Az @ Aq
    if M.has_lambda:
        out = out - Aq.lambda_d_lambda().shift(a=-1)
    return out


def flatness_residual(M: QuantumDModule, limit=10):
    """Nonzero coefficients of the q- and z-equations on L z^-Gr z^rho and of the curvature."""
    if M.size == 0:
        return {"q": [], "z": [], "curvature": []}
    F = M.flat_matrix()
    rq, rz = _flat_residuals(M, F)
    return {"q": rq.nonzero_report(limit), "z": rz.nonzero_report(limit),
            "curvature": curvature(M).nonzero_report(limit)}


def section_residual(M: QuantumDModule, F: SheafClass, limit=10):
    """q- and z-equations on the Gamma-integral section of F.

    With the log q part stripped, the section is s = F_L v for a constant column v
    and q ds/dq picks up F_L (cup v), where F_L = L z^-Gr z^rho.
    """
    D = M.D
    v = gamma_section_coordinates(M, F)
    s = gamma_flat_section(M, F)
    s_cup = (M.flat_matrix() @ _const(D, M.cup_H) @ v).scale(TWO_PI_I ** (-M.dim))
    conn = M.connection
    rq = s.q_d_q() - s_cup + conn.nabla_q @ s
    rz = s.d_z() + conn.nabla_z @ s
    if M.has_lambda:
        rz = rz + s.lambda_d_lambda().shift(a=-1)
    return {"q": rq.nonzero_report(limit), "z": rz.nonzero_report(limit)}


def unitarity_residual(M: QuantumDModule, limit=10):
    if M.flavor in ("plain-Y", "compact-Y"):
        plain, compact = build_Y_pair(M.geometry, M.D)
        J = _const(M.D, _j_antidiag(M.geometry.n))
        res = plain.L.z_to_minus_z().transpose() @ J @ compact.L - J
        return res.nonzero_report(limit)
    if M.size == 0:
        return []
    G = M.gram
    res = M.L.z_to_minus_z().transpose() @ G @ M.L - G
    return res.nonzero_report(limit)


def duality_residual(g: GeometryTriple, D, limit=10):
    """The product read off L^{Y,c} against the adjoint of the plain-Y product."""
    _, compact = build_Y_pair(g, D)
    return (compact.extras["product_from_solution"] - compact.product).nonzero_report(limit)


def phi_intertwining_residual(g: GeometryTriple, D, limit=10):
    plain, compact = build_Y_pair(g, D)
    P = _const(D, g.phi)
    out = (plain.L @ P - P @ compact.L).nonzero_report(limit)
    out += (plain.product @ P - P @ compact.product).nonzero_report(limit)
    return out


def pairing_flatness_residual(M: QuantumDModule, limit=10):
    """S(H* u, v) = S(u, H* v): the product is self-adjoint for the module pairing."""
    if M.size == 0:
        return []
    G = M.gram
    return (M.product.transpose() @ G - G @ M.product).nonzero_report(limit)


# flat sections

def ch_in_flavor(M: QuantumDModule, F: SheafClass) -> CohClass:
    g, n = M.geometry, M.geometry.n
    if M.flavor in ("plain-X", "twisted-e(E)", TWISTED_INVERSE, "ambient-Z"):
        if F.base != "X":
            raise FlavorMismatch(f"{M.flavor} sections take sheaves on X")
        return chern_character(F, n)
    if F.base != "Y":
        raise FlavorMismatch(f"{M.flavor} sections take sheaves on Y")
    if M.flavor == "compact-Y":
        return ch_compact(g, F)
    return ch_plain(g, F)


def gamma_in_flavor(M: QuantumDModule) -> CohClass:
    g = M.geometry
    if M.flavor == "plain-X":
        return gamma_hat_X(g.n)
    if M.flavor in ("twisted-e(E)", "ambient-Z"):
        return gamma_hat_twisted(g)
    if M.flavor == TWISTED_INVERSE:
        return gamma_hat_Y(g)
    return gamma_hat_Y(g)


def _coordinates(M: QuantumDModule, c: CohClass):
    """Coordinates of a class of the H*(X) carrier in the module's section basis."""
    g = M.geometry
    if M.flavor == "ambient-Z":
        from .cohring import ambient_coordinates
        return ambient_coordinates(g, c)
    if M.flavor == "narrow-Y":
        Nl = M.extras["Nl"]
        coords = [sum((c.coeffs[j] * Nl[i][j] for j in range(len(c.coeffs)) if Nl[i][j]), ZERO)
                  for i in range(len(Nl))]
        back = [sum((coords[i] * M.extras["N"][k][i] for i in range(len(coords)) if M.extras["N"][k][i]), ZERO)
                for k in range(len(c.coeffs))]
        if back != list(c.coeffs):
            raise FlavorMismatch(f"{c} is not narrow")
        return coords
    return list(c.coeffs)


def gamma_section_coordinates(M: QuantumDModule, F: SheafClass) -> SeriesMatrix:
    """Gamma (2 pi i)^{deg0/2} ch(F) as a constant column in the section basis."""
    ch = ch_in_flavor(M, F)
    shift = M.geometry.rank if M.flavor == "compact-Y" else 0
    ch = CohClass([x * TWO_PI_I ** (k + shift) for k, x in enumerate(ch.coeffs)])
    coords = _coordinates(M, gamma_in_flavor(M) * ch)
    return SeriesMatrix.constant(M.D, [[x] for x in coords])


def gamma_flat_section(M: QuantumDModule, F: SheafClass) -> SeriesMatrix:
    """(2 pi i)^-dim L z^-Gr z^rho Gamma (2 pi i)^{deg0/2} ch(F) as a column."""
    return (M.flat_matrix() @ gamma_section_coordinates(M, F)).scale(TWO_PI_I ** (-M.dim))


def sesquilinear(M: QuantumDModule, u: SeriesMatrix, v: SeriesMatrix, gram=None) -> SeriesMatrix:
    """S(u, v) = (2 pi i z)^dim <u(-z), v(z)> as a 1x1 series matrix."""
    G = M.gram if gram is None else gram
    val = u.z_to_minus_z().transpose() @ G @ v
    return val.shift(a=M.dim).scale(TWO_PI_I ** M.dim)


def euler_pairing_check(M: QuantumDModule, F: SheafClass, F2: SheafClass):
    """S(s(F), s(F2)) against e^{pi i n} chi(F2, F); returns (residual report, expected)."""
    if M.flavor != "plain-X":
        raise FlavorMismatch("the Euler pairing check runs on the plain-X module")
    n = M.geometry.n
    S = sesquilinear(M, gamma_flat_section(M, F), gamma_flat_section(M, F2))
    expected = hrr_chi(F2, F, n) * (-1) ** n
    res = S - SeriesMatrix.constant(M.D, [[expected]])
    return res.nonzero_report(), expected


def symplectic_pairing(f: FormalSeries, g: FormalSeries, gram: SeriesMatrix) -> FormalSeries:
    """Residue in z of <f(-z), g(z)>: the z^-1 coefficient, a scalar q-series."""
    fc = SeriesMatrix.from_columns([f])
    gc = SeriesMatrix.from_columns([g])
    val = fc.z_to_minus_z().transpose() @ gram @ gc
    return val.entry(0, 0).z_part(-1)
