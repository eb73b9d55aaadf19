"""Quantum Serre duality: the maps Delta and the checks that they intertwine the modules.

Every check is a residual, left side minus right side, where the two sides come
from different pipelines: the inverse-twisted (total space) theory on one side and
the Euler-twisted theory moved by ``divisor_shift`` on the other.

Classes live in the H*(X) carrier of :mod:`qsdlab.cohring`:

* Delta_c = j* (pushforward from the compact-support model, then restriction);
* Delta_+ on narrow classes = j* of any lift through phi = e(E^dual) cup;
* Delta_bar = (2 pi i z)^rk(E) Delta.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

from . import linalg
from .charcls import SheafClass, euler_equiv
from .cohring import CohClass, GeometryTriple, lift, mult_matrix
from .errors import MirrorMapOutOfRange, QSDError, ScopeError
from .hypergeo import EULER, INVERSE_EULER, build_theory, pairing_gram, two_point
from .qdm import (QuantumDModule, build_ambient, build_narrow, build_Y_pair, gamma_flat_section,
                  sesquilinear, symplectic_pairing)
from .scalars import I, PI, TWO_PI_I, Scalar
from .series import FormalSeries, SeriesMatrix, divisor_shift

COV_KINDS = ("fhat_lambda", "fhat_X", "fbar_X", "fhat_Y", "fbar_Y")
SQUARE_SHEAVES = (-1, 0, 1)


def _map_classes(s: FormalSeries, matrix, n_out) -> FormalSeries:
    """Apply a rational matrix to every class coefficient of s."""
    terms = {}
    for key, v in s.terms.items():
        out = []
        for row in matrix:
            acc = Scalar.rational(0)
            for coeff, x in zip(row, v.coeffs):
                if coeff:
                    acc = acc + x * coeff
            out.append(acc)
        out += [Scalar.rational(0)] * (n_out + 1 - len(out))
        c = CohClass(out)
        if not c.is_zero():
            terms[key] = c
    return FormalSeries(s.D, n_out, terms)


def _lift_series(g: GeometryTriple, s: FormalSeries) -> FormalSeries:
    return FormalSeries(s.D, s.n, {k: lift(g, v) for k, v in s.terms.items()})


def _components(s: FormalSeries, label, positions=(0, 1)):
    """(degree-0, degree-2) scalar series of a class series supported on two slots."""
    for key, v in s.terms.items():
        for k, x in enumerate(v.coeffs):
            if k not in positions and not x.is_zero():
                raise MirrorMapOutOfRange(f"{label} leaves span(1, H) at {key}: {v}")
    out = []
    for p in positions:
        if p is None or p >= s.n + 1:
            out.append(FormalSeries(s.D, 0))
        else:
            out.append(s.component(p))
    return tuple(out)


def _pi_i_c1(g: GeometryTriple, D) -> FormalSeries:
    return FormalSeries.constant(D, g.c1_E * (PI * I), g.n)


@dataclass
class DualityData:
    """The maps Delta and the change-of-variables series for one geometry."""

    geometry: GeometryTriple
    D: int
    delta_c: list
    delta_nar: list
    fhat_lambda: FormalSeries
    fbar_lambda: FormalSeries
    fhat_X: FormalSeries
    fbar_X: FormalSeries
    fhat_Y: FormalSeries
    fbar_Y: FormalSeries
    checks: dict = field(default_factory=dict)

    @property
    def rank(self):
        return self.geometry.rank

    def rk_factor(self, size) -> SeriesMatrix:
        """(2 pi i z)^rk(E) times the identity."""
        r = self.rank
        return SeriesMatrix.identity(self.D, size).scale(TWO_PI_I ** r).shift(a=r)


@lru_cache(maxsize=32)
def duality_data(g: GeometryTriple, D) -> DualityData:
    n = g.n
    inv = build_theory(g, INVERSE_EULER, D)
    e_dual = euler_equiv(g.E, True, n, D)
    fhat_lambda = two_point(inv.L, e_dual)
    over = fhat_lambda * e_dual.inverse()
    fbar_lambda = over - _pi_i_c1(g, D)
    fhat_X = over.nonequivariant_limit()
    fbar_X = fhat_X - _pi_i_c1(g, D)
    fhat_Y = fhat_lambda.nonequivariant_limit()

    delta_c = g.j_star
    m_amb = len(g.ambient_indices)
    # Delta_+ (f^Y) through a lift, then the ambient basis
    delta_fY = _map_classes(_lift_series(g, fhat_Y), delta_c, n)
    c1_amb = _map_classes(FormalSeries.constant(D, g.c1_E * (PI * I), n), delta_c, n)
    fbar_Y = delta_fY - c1_amb

    delta_nar = []
    if g.narrow_dim:
        cols = [lift(g, CohClass(list(col))) for col in linalg.transpose(g.narrow_matrix)]
        delta_nar = linalg.matmul(delta_c, linalg.transpose([[x.to_rational() for x in c.coeffs] for c in cols]))

    checks = {
        # f^Y = i_* f^X, computed once as a limit and once through phi
        "fhat_Y_is_pushforward": _series_diff(fhat_Y, fhat_X * g.euler_Edual),
        # Delta_+(f^Y) = j* f^X
        "delta_fhat_Y": _series_diff(delta_fY, _map_classes(fhat_X, delta_c, n)),
        "delta_c_kills_ker_phi": [v for v in (linalg.matvec(delta_c, list(k)) for k in
                                              linalg.nullspace(g.phi, n + 1)) if any(v)],
        "delta_nar_invertible": [] if (not delta_nar or len(delta_nar) == len(delta_nar[0])
                                       and linalg.det(delta_nar) != 0) else ["delta_nar is singular"],
    }
    if m_amb != g.narrow_dim:
        checks["delta_nar_invertible"] = [f"narrow dim {g.narrow_dim} != ambient dim {m_amb}"]
    return DualityData(g, D, delta_c, delta_nar, fhat_lambda, fbar_lambda, fhat_X, fbar_X,
                       fhat_Y, fbar_Y, checks)


def _series_diff(a: FormalSeries, b: FormalSeries, limit=10):
    diff = a - b
    out = []
    for key in sorted(diff.terms):
        out.append((key, str(diff.terms[key])))
        if len(out) >= limit:
            break
    return out


def change_of_variables(kind, g: GeometryTriple, D):
    """(degree-0, degree-2) components of one of the f-maps evaluated at the mirror point.

    ``fhat_lambda`` returns the components of fhat_lambda / e_lambda(E^dual), the
    point at which the Euler-twisted theory is evaluated.  ``fhat_Y`` returns the
    components of the lift of f^Y through phi, i.e. of f^X read back on X.
    ``fbar_Y`` is in the ambient basis.
    """
    if kind not in COV_KINDS:
        raise ValueError(f"unknown change of variables {kind!r}; expected one of {COV_KINDS}")
    dd = duality_data(g, D)
    if kind == "fhat_lambda":
        return _components(dd.fbar_lambda + _pi_i_c1(g, D), kind)
    if kind == "fhat_X":
        return _components(dd.fhat_X, kind)
    if kind == "fbar_X":
        return _components(dd.fbar_X, kind)
    if kind == "fhat_Y":
        return _components(_lift_series(g, dd.fhat_Y), kind)
    return _ambient_components(g, dd.fbar_Y, kind)


def _ambient_components(g, s: FormalSeries, label):
    """Components of an ambient-coordinate series along j*1 and j*H."""
    idx = list(g.ambient_indices)
    m = len(idx)
    for key, v in s.terms.items():
        for pos, x in enumerate(v.coeffs[:m]):
            if idx[pos] > 1 and not x.is_zero():
                raise MirrorMapOutOfRange(f"{label} leaves span(1, H) at {key}: {v}")
    out = []
    for k in (0, 1):
        out.append(s.component(idx.index(k)) if k in idx else FormalSeries(s.D, 0))
    return tuple(out)


# reports

@dataclass
class Report:
    name: str
    geometry: str
    D: int
    checks: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self):
        return not self.errors and all(not v for v in self.checks.values())

    def failing(self):
        return sorted(k for k, v in self.checks.items() if v)

    def to_dict(self):
        return {"suite": self.name, "geometry": self.geometry, "D": self.D,
                "status": "pass" if self.passed else "fail",
                "checks": {k: [_entry(e) for e in v] for k, v in sorted(self.checks.items())},
                "errors": dict(sorted(self.errors.items())),
                "notes": dict(sorted(self.notes.items()))}


def _entry(e):
    if isinstance(e, tuple) and len(e) == 4 and isinstance(e[0], tuple):
        (d, a, b, c), i, j, val = e
        return {"q": d, "z": a, "lambda": b, "Lz": c, "row": i, "col": j, "value": val}
    if isinstance(e, tuple) and len(e) == 2 and isinstance(e[0], tuple):
        (d, a, b, c), val = e
        return {"q": d, "z": a, "lambda": b, "Lz": c, "value": val}
    return str(e)


def _run(report: Report, name, fn):
    try:
        report.checks[name] = fn()
    except ScopeError as exc:
        report.errors[name] = f"{type(exc).__name__}: {exc}"
    except QSDError as exc:
        report.checks[name] = [f"{type(exc).__name__}: {exc}"]


def _exp_nilpotent(D, cup, coeff) -> SeriesMatrix:
    """exp(coeff * cup / z) for a nilpotent constant matrix."""
    m = len(cup)
    step = SeriesMatrix.constant(D, cup).scale(coeff).shift(a=-1)
    out = SeriesMatrix.identity(D, m)
    term = out
    for k in range(1, m + 1):
        term = (term @ step).scale(Fraction(1, k))
        if term.is_zero():
            break
        out = out + term
    return out


def _c1_degree(g):
    return sum(g.E.line_degrees)


# cone level

def _sample_vector(rng, D, n):
    terms = {}
    for _ in range(3):
        a = rng.randint(-3, 2)
        coeffs = [Fraction(rng.randint(-3, 3)) for _ in range(n + 1)]
        key = (0, a, 0, 0)
        prev = terms.get(key)
        c = CohClass(coeffs)
        terms[key] = c if prev is None else prev + c
    if rng.random() < 0.5 and D >= 1:
        terms[(1, rng.randint(-2, 1), 0, 0)] = CohClass([Fraction(rng.randint(-2, 2)) for _ in range(n + 1)])
    return FormalSeries(D, n, {k: v for k, v in terms.items() if not v.is_zero()})


def delta_diamond(g: GeometryTriple, f: FormalSeries) -> FormalSeries:
    """e^{pi i c1(E)/z} / e_lambda(E^dual) applied to a vector of the inverse-twisted space."""
    D, n = f.D, g.n
    e_dual = euler_equiv(g.E, True, n, D)
    shift = (FormalSeries.constant(D, g.c1_E * (PI * I), n)).shift(a=-1).exp()
    return f * shift * e_dual.inverse()


def symplectic_samples(g: GeometryTriple, D, samples=5, seed=0):
    """Omega^e(E)(Dd f, Dd g) - sign * Omega^inv(f, g) on random pairs, for sign = 1 and (-1)^rk."""
    rng = random.Random(seed)
    G_eu, G_inv = pairing_gram(g, EULER, D), pairing_gram(g, INVERSE_EULER, D)
    literal, signed = [], []
    sign = (-1) ** g.rank
    for k in range(samples):
        f, h = _sample_vector(rng, D, g.n), _sample_vector(rng, D, g.n)
        lhs = symplectic_pairing(delta_diamond(g, f), delta_diamond(g, h), G_eu)
        rhs = symplectic_pairing(f, h, G_inv)
        if not (lhs - rhs).is_zero():
            literal.append(f"sample {k}: {lhs - rhs}")
        if not (lhs - rhs * sign).is_zero():
            signed.append(f"sample {k}: {lhs - rhs * sign}")
    return literal, signed


def verify_cone_qsd(g: GeometryTriple, D, samples=5, seed=0) -> Report:
    rep = Report("cone", g.label, D)
    n = g.n

    def deltaJ():
        dd = duality_data(g, D)
        inv = build_theory(g, INVERSE_EULER, D)
        eu = build_theory(g, EULER, D)
        s0, s2 = _components(dd.fbar_lambda, "fbar_lambda")
        e_dual = SeriesMatrix.cup(euler_equiv(g.E, True, n, D))
        c1_exp = _exp_nilpotent(D, mult_matrix(CohClass.monomial(n, 1)), -PI * I * _c1_degree(g))
        lhs = inv.L @ e_dual
        rhs = e_dual @ divisor_shift(eu.L_tilde, s0, s2) @ c1_exp
        return (lhs - rhs).nonzero_report(10)

    _run(rep, "deltaJ", deltaJ)

    def sympl():
        literal, signed = symplectic_samples(g, D, samples, seed)
        rep.checks["symplectic_up_to_sign"] = signed
        return literal

    _run(rep, "symplectic", sympl)
    rep.notes["sign"] = (-1) ** g.rank
    return rep


# compact and narrow levels

@lru_cache(maxsize=32)
def ambient_tilde(g: GeometryTriple, D):
    """t = 0 ambient solution and product: j* of the lambda -> 0 Euler-twisted data."""
    eu = build_theory(g, EULER, D)
    jst, sec = SeriesMatrix.constant(D, g.j_star), SeriesMatrix.constant(D, g.j_star_section)
    return (jst @ eu.L_tilde.nonequivariant_limit() @ sec,
            jst @ eu.product_H_tilde.nonequivariant_limit() @ sec)


def ambient_at(g: GeometryTriple, D, s0: FormalSeries, s2: FormalSeries) -> QuantumDModule:
    """The ambient module at t = s0*1 + (log q + s2)*H."""
    base = build_ambient(g, D)
    L_t, prod_t = ambient_tilde(g, D)
    L = divisor_shift(L_t, s0, s2, cup=base.cup_H)
    prod = prod_t.substitute_q(s2.exp()) if prod_t.rows else prod_t
    return replace(base, L=L, product=prod, tau0=s0, tau2=s2, extras={})


def _compact_sheaf(a):
    return SheafClass.pushforward(a)


def verify_compact_qsd(g: GeometryTriple, D) -> Report:
    rep = Report("compact", g.label, D)
    n = g.n
    _, compact = build_Y_pair(g, D)
    cup = mult_matrix(CohClass.monomial(n, 1))
    c1_exp = _exp_nilpotent(D, cup, -PI * I * _c1_degree(g))
    try:
        dd = duality_data(g, D)
        s0, s2 = _components(dd.fbar_X, "fbar_X")
    except ScopeError as exc:
        rep.errors["setup"] = f"{type(exc).__name__}: {exc}"
        return rep
    jst = SeriesMatrix.constant(D, g.j_star)
    m = len(g.ambient_indices)

    def solution():
        eu = build_theory(g, EULER, D)
        rhs = divisor_shift(eu.L_tilde.nonequivariant_limit(), s0, s2) @ c1_exp
        return (compact.L - rhs).nonzero_report(10)

    _run(rep, "solution", solution)

    def intertwining():
        Z = ambient_at(g, D, s0, s2)
        lhs = dd.rk_factor(m) @ jst @ compact.L
        rhs = Z.L @ dd.rk_factor(m) @ jst @ c1_exp
        return (lhs - rhs).nonzero_report(10)

    _run(rep, "intertwining", intertwining)

    def square():
        Z = ambient_at(g, D, s0, s2)
        out = []
        for a in SQUARE_SHEAVES:
            F = _compact_sheaf(a)
            lhs = dd.rk_factor(m) @ jst @ gamma_flat_section(compact, F)
            rhs = gamma_flat_section(Z, F.restrict())
            out += [(F.label(),) + e for e in (lhs - rhs).nonzero_report(5)]
        return out

    _run(rep, "square", square)
    return rep


def verify_narrow_qsd(g: GeometryTriple, D) -> Report:
    rep = Report("narrow", g.label, D)
    n, r = g.n, g.rank
    if not g.narrow_dim:
        rep.notes["narrow_dim"] = 0
        return rep
    try:
        dd = duality_data(g, D)
        t0, t2 = _ambient_components(g, dd.fbar_Y, "fbar_Y")
        narrow = build_narrow(g, D)
    except ScopeError as exc:
        rep.errors["setup"] = f"{type(exc).__name__}: {exc}"
        return rep
    Nl = narrow.extras["Nl"]
    m = len(g.ambient_indices)
    dn = SeriesMatrix.constant(D, dd.delta_nar)
    # narrow coordinates of i_* e_k = phi(e_k) for the compact-support basis
    C = SeriesMatrix.constant(D, linalg.matmul(Nl, g.phi))
    c1_nar = _exp_nilpotent(D, narrow.cup_H, -PI * I * _c1_degree(g))

    def intertwining():
        Z = ambient_at(g, D, t0, t2)
        lhs = dn @ narrow.L @ C
        rhs = Z.L @ dn @ c1_nar @ C
        return (lhs - rhs).nonzero_report(10)

    _run(rep, "intertwining", intertwining)

    def pairing():
        Zm = build_ambient(g, D)
        bar = dd.rk_factor(m) @ dn @ C
        lhs = sesquilinear(Zm, bar, bar)
        rhs = sesquilinear(narrow, C, C)
        return (lhs - rhs).nonzero_report(10)

    _run(rep, "pairing", pairing)

    def pairing_sign():
        Zm = build_ambient(g, D)
        lhs = (dn @ C).transpose() @ Zm.gram @ (dn @ C)
        rhs = (C.transpose() @ narrow.gram @ C).scale((-1) ** r)
        return (lhs - rhs).nonzero_report(10)

    _run(rep, "pairing_sign", pairing_sign)

    def square():
        Z = ambient_at(g, D, t0, t2)
        out = []
        for a in SQUARE_SHEAVES:
            F = _compact_sheaf(a)
            lhs = dd.rk_factor(m) @ dn @ gamma_flat_section(narrow, F)
            rhs = gamma_flat_section(Z, F.restrict())
            out += [(F.label(),) + e for e in (lhs - rhs).nonzero_report(5)]
        return out

    _run(rep, "square", square)

    def deltadiff():
        out = []
        for k in range(n + 1):
            beta = CohClass.monomial(n, k)
            narrow_cls = g.euler_Edual * beta
            vec = [x.to_rational() for x in narrow_cls.coeffs]
            coords = linalg.matvec(Nl, vec)
            got = linalg.matvec(dd.delta_nar, coords)
            want = linalg.matvec(g.j_star, [x.to_rational() for x in beta.coeffs])
            if got != want:
                out.append(f"H^{k}: {got} != {want}")
        return out

    _run(rep, "deltadiff", deltadiff)
    rep.checks["fhat_Y_is_pushforward"] = dd.checks["fhat_Y_is_pushforward"]
    rep.checks["delta_fhat_Y"] = dd.checks["delta_fhat_Y"]
    rep.checks["delta_c_kills_ker_phi"] = dd.checks["delta_c_kills_ker_phi"]
    rep.checks["delta_nar_invertible"] = dd.checks["delta_nar_invertible"]
    return rep


def gamma_square_residual(g: GeometryTriple, a, D=0):
    """The q^0 part of the compact integral square on i_*O(a), at the level of classes.

    (z / 2 pi i)^r j*(e^{-pi i c1(E)/z} z^-Gr Gamma_Y (2 pi i)^{deg0/2} ch_c(i_*O(a)))
    against z^-Gr Gamma_Z (2 pi i)^{deg0/2} ch(O(a)), both read in the ambient basis.
    """
    from .charcls import (OperatorSpec, apply_operator, ch_compact, chern_character,
                          gamma_hat_twisted, gamma_hat_Y)
    n, r = g.n, g.rank
    F = SheafClass.pushforward(a)
    chc = ch_compact(g, F)
    chc = CohClass([x * TWO_PI_I ** (k + r) for k, x in enumerate(chc.coeffs)])
    lhs = apply_operator(OperatorSpec("z^-Gr", shift=r), gamma_hat_Y(g) * chc, D)
    lhs = apply_operator(OperatorSpec("e^c/z", data=g.c1_E * (-PI * I)), lhs, D)
    lhs = (lhs * (TWO_PI_I ** (-r))).shift(a=r)
    ch = apply_operator(OperatorSpec("(2pi i)^deg0/2"), chern_character(F.restrict(), n), D)
    rhs = apply_operator(OperatorSpec("z^-Gr"), gamma_hat_twisted(g) * ch.coefficient(), D)
    diff = _map_classes(lhs - rhs, g.j_star, n)
    return _series_diff(diff, FormalSeries(D, n))
