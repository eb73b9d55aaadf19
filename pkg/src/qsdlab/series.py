"""Truncated formal series in q with coefficients Laurent in z and lambda, polynomial in Lz.

A key is ``(d, a, b, c)``: q^d z^a lambda^b Lz^c, where Lz is a formal log z with
d/dz Lz = 1/z.  :class:`FormalSeries` carries cohomology-class coefficients and
multiplies by cup product; a series over P^0 is a plain scalar series.
:class:`SeriesMatrix` carries matrix coefficients and composes as operators.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from math import comb

from .cohring import CohClass
from .errors import NegativeLambdaPower, NotUnipotent, SubstitutionOverflow, TruncationMismatch
from .scalars import I, ONE, PI, ZERO, Scalar, as_scalar

Key = tuple


def _check(a, b):
    if a.D != b.D:
        raise TruncationMismatch(f"truncations differ: {a.D} vs {b.D}")


def _add_into(out, key, val):
    cur = out.get(key)
    val = val if cur is None else cur + val
    if val.is_zero():
        out.pop(key, None)
    else:
        out[key] = val


class FormalSeries:
    """Truncated series with CohClass coefficients of a fixed length n + 1."""

    __slots__ = ("D", "n", "terms")

    def __init__(self, D, n, terms=None):
        self.D = D
        self.n = n
        self.terms = {}
        if terms:
            for key, v in terms.items():
                if key[0] > D:
                    continue
                if not isinstance(v, CohClass):
                    v = CohClass.monomial(n, 0, v)
                if not v.is_zero():
                    self.terms[tuple(key)] = v

    # construction
    @classmethod
    def zero(cls, D, n=0):
        return cls(D, n)

    @classmethod
    def constant(cls, D, value, n=None):
        if isinstance(value, CohClass):
            return cls(D, value.n, {(0, 0, 0, 0): value})
        return cls(D, n or 0, {(0, 0, 0, 0): CohClass.monomial(n or 0, 0, value)})

    @classmethod
    def monomial(cls, D, n, d=0, a=0, b=0, c=0, value=ONE):
        if not isinstance(value, CohClass):
            value = CohClass.monomial(n, 0, value)
        return cls(D, n, {(d, a, b, c): value})

    @classmethod
    def q(cls, D, n=0):
        return cls.monomial(D, n, d=1)

    @classmethod
    def z(cls, D, n=0, power=1):
        return cls.monomial(D, n, a=power)

    @classmethod
    def lam(cls, D, n=0, power=1):
        return cls.monomial(D, n, b=power)

    @classmethod
    def H(cls, D, n, k=1, coeff=ONE):
        return cls(D, n, {(0, 0, 0, 0): CohClass.monomial(n, k, coeff)})

    def _new(self, terms):
        obj = FormalSeries.__new__(FormalSeries)
        obj.D, obj.n, obj.terms = self.D, self.n, terms
        return obj

    def copy(self):
        return self._new(dict(self.terms))

    # inspection
    def is_zero(self):
        return not self.terms

    def keys(self):
        return sorted(self.terms)

    def coefficient(self, d=0, a=0, b=0, c=0) -> CohClass:
        return self.terms.get((d, a, b, c), CohClass.zero(self.n))

    def layer(self, d) -> "FormalSeries":
        return self._new({k: v for k, v in self.terms.items() if k[0] == d})

    def z_support(self, d=None):
        return sorted({k[1] for k in self.terms if d is None or k[0] == d})

    def lambda_support(self):
        return sorted({k[2] for k in self.terms})

    def max_lz(self):
        return max((k[3] for k in self.terms), default=0)

    def select(self, pred) -> "FormalSeries":
        return self._new({k: v for k, v in self.terms.items() if pred(k)})

    def component(self, k) -> "FormalSeries":
        """Scalar series of the H^k coefficient."""
        out = {}
        for key, v in self.terms.items():
            s = v.coeffs[k]
            if not s.is_zero():
                out[key] = CohClass((s,))
        obj = FormalSeries.__new__(FormalSeries)
        obj.D, obj.n, obj.terms = self.D, 0, out
        return obj

    def scalar_value(self):
        """For a series with a single constant term return that Scalar."""
        if not self.terms:
            return ZERO
        if set(self.terms) != {(0, 0, 0, 0)} or self.n != 0:
            raise ValueError("series is not a scalar constant")
        return self.terms[(0, 0, 0, 0)].coeffs[0]

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return self.D == other.D and self.terms == other.terms

    def __hash__(self):
        return hash((self.D, frozenset(self.terms.items())))

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, FormalSeries):
            other = FormalSeries.constant(self.D, other, self.n)
        _check(self, other)
        if self.n != other.n:
            if self.n == 0:
                return self._lift(other.n) + other
            if other.n == 0:
                return self + other._lift(self.n)
            raise ValueError("ring dimensions differ")
        out = dict(self.terms)
        for k, v in other.terms.items():
            _add_into(out, k, v)
        return self._new(out)

    __radd__ = __add__

    def _lift(self, n):
        """View a scalar series as a series of multiples of 1 in H*(P^n)."""
        obj = FormalSeries.__new__(FormalSeries)
        obj.D, obj.n = self.D, n
        obj.terms = {k: CohClass.monomial(n, 0, v.coeffs[0]) for k, v in self.terms.items()}
        return obj

    def __neg__(self):
        return self._new({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, FormalSeries):
            other = FormalSeries.constant(self.D, other, self.n)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FormalSeries):
            return self._series_mul(other)
        if isinstance(other, CohClass):
            return self._new({k: v * other for k, v in self.terms.items()}).prune()
        s = as_scalar(other)
        if s.is_zero():
            return self._new({})
        return self._new({k: v * s for k, v in self.terms.items()})

    __rmul__ = __mul__

    def prune(self):
        self.terms = {k: v for k, v in self.terms.items() if not v.is_zero()}
        return self

    def _series_mul(self, other):
        _check(self, other)
        a, b = self, other
        if a.n != b.n:
            if a.n == 0:
                return b._scale_by(a)
            if b.n == 0:
                return a._scale_by(b)
            raise ValueError("ring dimensions differ")
        D = self.D
        out = {}
        bterms = list(b.terms.items())
        for (d1, a1, b1, c1), v1 in a.terms.items():
            for (d2, a2, b2, c2), v2 in bterms:
                d = d1 + d2
                if d > D:
                    continue
                p = v1 * v2
                if not p.is_zero():
                    _add_into(out, (d, a1 + a2, b1 + b2, c1 + c2), p)
        return self._new(out)

    def _scale_by(self, scal):
        """Multiply a class-valued series by a scalar series."""
        D = self.D
        out = {}
        for (d1, a1, b1, c1), s in scal.terms.items():
            s0 = s.coeffs[0]
            for (d2, a2, b2, c2), v in self.terms.items():
                d = d1 + d2
                if d > D:
                    continue
                _add_into(out, (d, a1 + a2, b1 + b2, c1 + c2), v * s0)
        return self._new(out)

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = FormalSeries.constant(self.D, CohClass.one(self.n))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def shift(self, d=0, a=0, b=0, c=0):
        """Multiply by q^d z^a lambda^b Lz^c."""
        return self._new({(k[0] + d, k[1] + a, k[2] + b, k[3] + c): v
                          for k, v in self.terms.items() if k[0] + d <= self.D})

    # calculus
    def d_q(self):
        return self._new({(k[0] - 1,) + k[1:]: v * k[0] for k, v in self.terms.items() if k[0]})

    def q_d_q(self):
        return self._new({k: v * k[0] for k, v in self.terms.items() if k[0]})

    def d_z(self):
        out = {}
        for (d, a, b, c), v in self.terms.items():
            if a:
                _add_into(out, (d, a - 1, b, c), v * a)
            if c:
                _add_into(out, (d, a - 1, b, c - 1), v * c)
        return self._new(out)

    def lambda_d_lambda(self):
        return self._new({k: v * k[2] for k, v in self.terms.items() if k[2]})

    def z_to_minus_z(self):
        """Substitute z -> -z, reading log(-z) as Lz + pi*i."""
        out = {}
        shift = PI * I
        for (d, a, b, c), v in self.terms.items():
            sign = -1 if a % 2 else 1
            if not c:
                _add_into(out, (d, a, b, 0), v * sign)
                continue
            for j in range(c + 1):
                coeff = shift ** (c - j) * (sign * comb(c, j))
                _add_into(out, (d, a, b, j), v * coeff)
        return self._new(out)

    # structural operations
    def nonequivariant_limit(self):
        for (d, a, b, c), v in self.terms.items():
            if b < 0:
                raise NegativeLambdaPower((d, a, b, c), f"lambda^{b} at q^{d} z^{a} Lz^{c}: {v}")
        out = {}
        for (d, a, b, c), v in self.terms.items():
            if b == 0:
                out[(d, a, 0, c)] = v
        return self._new(out)

    def lambda_part(self, b):
        return self._new({(k[0], k[1], 0, k[3]): v for k, v in self.terms.items() if k[2] == b})

    def z_part(self, a):
        return self._new({(k[0], 0, k[2], k[3]): v for k, v in self.terms.items() if k[1] == a})

    def substitute_q(self, u: "FormalSeries"):
        """Substitute q -> q*u(q) with u a scalar series, u = c + O(q) for a constant c != 0.

        The constant is typically 1, or -1 when u = exp(pi*i*k + O(q)).
        """
        _check(self, u)
        if u.n != 0:
            raise ValueError("substitution factor must be scalar")
        if u.coefficient(0).coeffs[0].is_zero() or any(k[0] == 0 and k != (0, 0, 0, 0) for k in u.terms):
            raise SubstitutionOverflow("substitution factor must be a nonzero constant + O(q)")
        powers = [FormalSeries.constant(self.D, ONE)]
        out = FormalSeries(self.D, self.n)
        by_d = defaultdict(dict)
        for k, v in self.terms.items():
            by_d[k[0]][(0,) + k[1:]] = v
        for d in sorted(by_d):
            while len(powers) <= d:
                powers.append(powers[-1] * u)
            part = self._new(by_d[d]).shift(d=d)
            out = out + part * powers[d]
        return out

    def inverse(self):
        """Inverse of u*(1 + N) with u a single invertible constant monomial and N nilpotent."""
        lead_terms = {k: v for k, v in self.terms.items() if k[0] == 0 and not v.coeffs[0].is_zero()}
        if len(lead_terms) != 1:
            raise ZeroDivisionError("series is not invertible in this ring")
        (key, val), = lead_terms.items()
        if key[3] != 0:
            raise ZeroDivisionError("leading term involves Lz")
        u_inv_scalar = val.coeffs[0].inverse()
        unit = FormalSeries.monomial(self.D, self.n, 0, -key[1], -key[2], 0, u_inv_scalar)
        normalized = self * unit
        nil = normalized - FormalSeries.constant(self.D, CohClass.one(self.n))
        out = FormalSeries.constant(self.D, CohClass.one(self.n))
        term = out
        for _ in range(self.D + self.n + 1):
            term = -(term * nil)
            if term.is_zero():
                break
            out = out + term
        else:
            if not term.is_zero():
                raise ZeroDivisionError("series inverse did not terminate")
        return out * unit

    def exp(self):
        """exp of a series whose q^0 part is nilpotent apart from a constant pi*i*k."""
        sign = 1
        base = self
        c0 = self.terms.get((0, 0, 0, 0))
        if c0 is not None and not c0.coeffs[0].is_zero():
            k = _pi_i_multiple(c0.coeffs[0])
            if k is None:
                raise SubstitutionOverflow(f"exp of non-nilpotent constant {c0.coeffs[0]}")
            sign = -1 if k % 2 else 1
            base = self - FormalSeries.constant(self.D, CohClass.monomial(self.n, 0, c0.coeffs[0]))
        for key, v in base.terms.items():
            if key[0] == 0 and not v.coeffs[0].is_zero():
                raise SubstitutionOverflow(f"exp needs q^0 part without a 1-component, found at {key}")
        out = FormalSeries.constant(self.D, CohClass.one(self.n))
        term = out
        for j in range(1, self.D + self.n + 2):
            term = term * base * Fraction(1, j)
            if term.is_zero():
                break
            out = out + term
        return out * sign

    def __repr__(self):
        return f"FormalSeries(D={self.D}, n={self.n}, {render_series(self)})"

    def __str__(self):
        return render_series(self)


def _pi_i_multiple(s: Scalar):
    """Return k if s == k*pi*i for an integer k, else None."""
    terms = s.terms
    if len(terms) != 1:
        return None
    (mono, c), = terms.items()
    if mono != (1, 1) or c.denominator != 1:
        return None
    return int(c)


def _key_label(key):
    d, a, b, c = key
    parts = []
    if d:
        parts.append("q" if d == 1 else f"q^{d}")
    if a:
        parts.append("z" if a == 1 else f"z^{a}")
    if b:
        parts.append("lam" if b == 1 else f"lam^{b}")
    if c:
        parts.append("Lz" if c == 1 else f"Lz^{c}")
    return "*".join(parts)


def render_series(s: FormalSeries) -> str:
    if not s.terms:
        return "0"
    out = []
    for key in sorted(s.terms):
        lab = _key_label(key)
        val = str(s.terms[key])
        out.append(f"[{val}]*{lab}" if lab else f"[{val}]")
    return " + ".join(out)


def cup_matrix_coeff(c: CohClass):
    n = c.n
    return tuple(tuple(c.coeffs[i - j] if i >= j else ZERO for j in range(n + 1)) for i in range(n + 1))


def _mat_zero(rows, cols):
    return tuple(tuple(ZERO for _ in range(cols)) for _ in range(rows))


def _mat_is_zero(m):
    return all(x.is_zero() for row in m for x in row)


def _mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _mat_scale(a, s):
    return tuple(tuple(x * s for x in row) for row in a)


def _mat_mul(a, b):
    rows, inner = len(a), len(b)
    cols = len(b[0]) if b else 0
    out = []
    for i in range(rows):
        ra = a[i]
        row = [ZERO] * cols
        for k in range(inner):
            x = ra[k]
            if x.is_zero():
                continue
            rb = b[k]
            for j in range(cols):
                y = rb[j]
                if not y.is_zero():
                    row[j] = row[j] + x * y
        out.append(tuple(row))
    return tuple(out)


def _to_scalar_matrix(m):
    return tuple(tuple(x if isinstance(x, Scalar) else Scalar.rational(x) for x in row) for row in m)


class SeriesMatrix:
    """Truncated series with matrix coefficients; acts on coordinate vectors."""

    __slots__ = ("D", "rows", "cols", "terms")

    def __init__(self, D, rows, cols, terms=None):
        self.D, self.rows, self.cols = D, rows, cols
        self.terms = {}
        if terms:
            for k, m in terms.items():
                m = _to_scalar_matrix(m)
                if k[0] <= D and not _mat_is_zero(m):
                    self.terms[tuple(k)] = m

    def _new(self, terms, rows=None, cols=None):
        obj = SeriesMatrix.__new__(SeriesMatrix)
        obj.D = self.D
        obj.rows = self.rows if rows is None else rows
        obj.cols = self.cols if cols is None else cols
        obj.terms = terms
        return obj

    @classmethod
    def identity(cls, D, m):
        return cls(D, m, m, {(0, 0, 0, 0): tuple(tuple(ONE if i == j else ZERO for j in range(m))
                                                  for i in range(m))})

    @classmethod
    def constant(cls, D, matrix):
        m = _to_scalar_matrix(matrix)
        rows = len(m)
        cols = len(m[0]) if rows else 0
        return cls(D, rows, cols, {(0, 0, 0, 0): m})

    @classmethod
    def cup(cls, x: FormalSeries):
        """Matrix of multiplication by a class-valued series in the monomial basis."""
        m = x.n + 1
        return cls(x.D, m, m, {k: cup_matrix_coeff(v) for k, v in x.terms.items()})

    @classmethod
    def scalar(cls, s: FormalSeries, m):
        """s times the identity, for a scalar series s."""
        out = {}
        for k, v in s.terms.items():
            c = v.coeffs[0]
            out[k] = tuple(tuple(c if i == j else ZERO for j in range(m)) for i in range(m))
        return cls(s.D, m, m, out)

    @classmethod
    def from_columns(cls, cols):
        D = cols[0].D
        rows = cols[0].n + 1
        out = {}
        for j, col in enumerate(cols):
            for k, v in col.terms.items():
                if k not in out:
                    out[k] = [[ZERO] * len(cols) for _ in range(rows)]
                for i in range(rows):
                    out[k][i][j] = v.coeffs[i]
        return cls(D, rows, len(cols), {k: tuple(tuple(r) for r in m) for k, m in out.items()})

    def column(self, j) -> FormalSeries:
        out = {}
        for k, m in self.terms.items():
            c = CohClass([m[i][j] for i in range(self.rows)])
            if not c.is_zero():
                out[k] = c
        fs = FormalSeries.__new__(FormalSeries)
        fs.D, fs.n, fs.terms = self.D, self.rows - 1, out
        return fs

    def columns(self):
        return [self.column(j) for j in range(self.cols)]

    def entry(self, i, j) -> FormalSeries:
        out = {}
        for k, m in self.terms.items():
            if not m[i][j].is_zero():
                out[k] = CohClass((m[i][j],))
        fs = FormalSeries.__new__(FormalSeries)
        fs.D, fs.n, fs.terms = self.D, 0, out
        return fs

    def is_zero(self):
        return not self.terms

    def nonzero_report(self, limit=None):
        """List of (key, row, col, rendered value) for every nonzero coefficient."""
        out = []
        for k in sorted(self.terms):
            m = self.terms[k]
            for i, row in enumerate(m):
                for j, x in enumerate(row):
                    if not x.is_zero():
                        out.append((k, i, j, str(x)))
                        if limit and len(out) >= limit:
                            return out
        return out

    def __eq__(self, other):
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return (self.D, self.rows, self.cols, self.terms) == (other.D, other.rows, other.cols, other.terms)

    def __add__(self, other):
        _check(self, other)
        out = dict(self.terms)
        for k, m in other.terms.items():
            cur = out.get(k)
            val = m if cur is None else _mat_add(cur, m)
            if _mat_is_zero(val):
                out.pop(k, None)
            else:
                out[k] = val
        return self._new(out)

    def __neg__(self):
        return self._new({k: _mat_scale(m, -1) for k, m in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        s = as_scalar(s)
        if s.is_zero():
            return self._new({})
        return self._new({k: _mat_scale(m, s) for k, m in self.terms.items()})

    def __matmul__(self, other):
        if isinstance(other, FormalSeries):
            return (self @ SeriesMatrix.from_columns([other])).column(0)
        _check(self, other)
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        D = self.D
        out = {}
        by_d = defaultdict(list)
        for k, m in other.terms.items():
            by_d[k[0]].append((k, m))
        for (d1, a1, b1, c1), m1 in self.terms.items():
            for d2 in range(0, D - d1 + 1):
                for (_, a2, b2, c2), m2 in by_d.get(d2, ()):
                    p = _mat_mul(m1, m2)
                    key = (d1 + d2, a1 + a2, b1 + b2, c1 + c2)
                    cur = out.get(key)
                    val = p if cur is None else _mat_add(cur, p)
                    out[key] = val
        return self._new({k: v for k, v in out.items() if not _mat_is_zero(v)}, self.rows, other.cols)

    def times_scalar_series(self, s: FormalSeries):
        return SeriesMatrix.scalar(s, self.rows) @ self

    def shift(self, d=0, a=0, b=0, c=0):
        return self._new({(k[0] + d, k[1] + a, k[2] + b, k[3] + c): m
                          for k, m in self.terms.items() if k[0] + d <= self.D})

    def map_keys(self, fn):
        out = {}
        for k, m in self.terms.items():
            for nk, factor in fn(k):
                if nk[0] > self.D:
                    continue
                val = _mat_scale(m, factor)
                cur = out.get(nk)
                out[nk] = val if cur is None else _mat_add(cur, val)
        return self._new({k: v for k, v in out.items() if not _mat_is_zero(v)})

    def q_d_q(self):
        return self.map_keys(lambda k: [(k, k[0])] if k[0] else [])

    def d_z(self):
        def fn(k):
            d, a, b, c = k
            res = []
            if a:
                res.append(((d, a - 1, b, c), a))
            if c:
                res.append(((d, a - 1, b, c - 1), c))
            return res
        return self.map_keys(fn)

    def lambda_d_lambda(self):
        return self.map_keys(lambda k: [(k, k[2])] if k[2] else [])

    def z_to_minus_z(self):
        shift = PI * I

        def fn(k):
            d, a, b, c = k
            sign = -1 if a % 2 else 1
            if not c:
                return [(k, Scalar.rational(sign))]
            return [((d, a, b, j), shift ** (c - j) * (sign * comb(c, j))) for j in range(c + 1)]
        return self.map_keys(fn)

    def transpose(self):
        return self._new({k: tuple(zip(*m)) for k, m in self.terms.items()}, self.cols, self.rows)

    def adjoint(self, gram, gram_inv):
        """Adjoint with respect to the constant bilinear form with matrix ``gram``."""
        G = SeriesMatrix.constant(self.D, gram)
        Gi = SeriesMatrix.constant(self.D, gram_inv)
        return Gi @ self.transpose() @ G

    def nonequivariant_limit(self):
        for k, m in self.terms.items():
            if k[2] < 0:
                raise NegativeLambdaPower(k, f"lambda^{k[2]} at q^{k[0]} z^{k[1]}")
        return self._new({(k[0], k[1], 0, k[3]): m for k, m in self.terms.items() if k[2] == 0})

    def z_nonnegative(self):
        return self._new({k: m for k, m in self.terms.items() if k[1] >= 0})

    def z_negative(self):
        return self._new({k: m for k, m in self.terms.items() if k[1] < 0})

    def layer(self, d):
        return self._new({k: m for k, m in self.terms.items() if k[0] == d})

    def z_part(self, a):
        return self._new({(k[0], 0, k[2], k[3]): m for k, m in self.terms.items() if k[1] == a})

    def substitute_q(self, u: FormalSeries):
        cols = self.columns()
        return SeriesMatrix.from_columns([c.substitute_q(u) for c in cols]) if cols else self

    def conjugate_constant(self, left, right):
        """left * self * right for constant rational matrices."""
        L = SeriesMatrix.constant(self.D, left)
        R = SeriesMatrix.constant(self.D, right)
        return L @ self @ R

    def __repr__(self):
        return f"SeriesMatrix(D={self.D}, {self.rows}x{self.cols}, {len(self.terms)} terms)"


def invert_unipotent(M: SeriesMatrix) -> SeriesMatrix:
    """Inverse of M = Id + N where every term of N has q-degree > 0 or z-degree < 0."""
    if M.rows != M.cols:
        raise NotUnipotent("matrix is not square")
    ident = SeriesMatrix.identity(M.D, M.rows)
    N = M - ident
    for (d, a, b, c), m in N.terms.items():
        if d == 0 and a >= 0:
            raise NotUnipotent(f"deviation from identity at q^0 z^{a} lam^{b}")
    out = ident
    term = ident
    for _ in range(M.D + 64):
        term = -(term @ N)
        if term.is_zero():
            return out
        out = out + term
    raise NotUnipotent("geometric series for the inverse did not terminate")


def birkhoff_split(M: SeriesMatrix):
    """Factor M = X P with X = Id + O(1/z) and P polynomial in z, both Id at q^0.

    Requires M = Id at q^0.  Returns (X, P).
    """
    if any(k[0] == 0 for k in (M - SeriesMatrix.identity(M.D, M.rows)).terms):
        raise NotUnipotent("Birkhoff factorization needs M = Id at q^0")
    D, m = M.D, M.rows
    X_layers, P_layers = {}, {}
    zero = SeriesMatrix(D, m, m)
    for d in range(1, D + 1):
        rhs = M.layer(d)
        for e in range(1, d):
            rhs = rhs - (X_layers[e] @ P_layers[d - e]).layer(d)
        X_layers[d] = rhs.z_negative()
        P_layers[d] = rhs.z_nonnegative()
    X = SeriesMatrix.identity(D, m)
    P = SeriesMatrix.identity(D, m)
    for d in range(1, D + 1):
        X = X + X_layers.get(d, zero)
        P = P + P_layers.get(d, zero)
    return X, P


def divisor_shift(L: SeriesMatrix, tau0: FormalSeries, tau2: FormalSeries, cup=None) -> SeriesMatrix:
    """Solution at t = tau0*1 + (log q + tau2)*H from the t = 0 solution L(Q).

    Realized as Q -> q*exp(tau2) followed by right multiplication by
    exp(-(tau0 + tau2 H)/z).  ``cup`` is the matrix of multiplication by H in the
    basis of L; it defaults to the monomial basis of H*(P^n).
    """
    D, m = L.D, L.rows
    if cup is None:
        cup = [[1 if i == j + 1 else 0 for j in range(m)] for i in range(m)]
    shifted = L.substitute_q(tau2.exp())
    factor = SeriesMatrix.scalar((-tau0).shift(a=-1).exp(), m)
    step = SeriesMatrix.constant(D, cup).times_scalar_series(-tau2.shift(a=-1))
    term = SeriesMatrix.identity(D, m)
    expo = term
    for k in range(1, m + 1):
        term = (term @ step).scale(Fraction(1, k))
        if term.is_zero():
            break
        expo = expo + term
    return shifted @ factor @ expo


def is_homogeneous(s: FormalSeries, q_weight, offset=0):
    """Check that q^d z^a lambda^b H^k terms all share one total degree (H, z, lambda weigh 2)."""
    degrees = set()
    for (d, a, b, c), v in s.terms.items():
        for k, x in enumerate(v.coeffs):
            if not x.is_zero():
                degrees.add(q_weight * d + 2 * a + 2 * b + 2 * k + offset)
    return len(degrees) <= 1, degrees
