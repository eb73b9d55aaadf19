"""Exact coefficients: rationals extended by i, pi, Euler's gamma and odd zeta values.

A monomial is a tuple of exponents over the alphabet (i, pi, g, zeta3, zeta5, ...),
with trailing zeros stripped.  The exponent of i is kept in {0, 1} and pi may carry
negative exponents so that factors like (2*pi*i)^-n stay representable.
"""
from __future__ import annotations

import ast
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

Rat = Fraction

I_POS, PI_POS, G_POS = 0, 1, 2
ONE_MONO: tuple = ()


def _strip(mono):
    mono = list(mono)
    while mono and mono[-1] == 0:
        mono.pop()
    return tuple(mono)


def _mono_mul(a, b):
    """Multiply two monomials; returns (sign, monomial) after i^2 = -1."""
    n = max(len(a), len(b))
    out = [0] * n
    for k, e in enumerate(a):
        out[k] += e
    for k, e in enumerate(b):
        out[k] += e
    sign = 1
    if out and out[0] >= 2:
        if (out[0] // 2) % 2:
            sign = -1
        out[0] %= 2
    return sign, _strip(out)


def _symbol_name(pos):
    if pos == I_POS:
        return "i"
    if pos == PI_POS:
        return "pi"
    if pos == G_POS:
        return "g"
    return f"zeta{2 * (pos - 3) + 3}"


def _mono_key(mono):
    # graded lex on (i, pi, g, zeta3, ...); larger keys print first
    return (sum(mono), tuple(mono) + (0,) * (32 - len(mono)))


class Scalar:
    """Immutable element of Q[i, pi, pi^-1, g, zeta3, zeta5, ...]/(i^2 + 1)."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for mono, c in terms.items():
                if c:
                    clean[_strip(mono)] = Fraction(c)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # constructors
    @classmethod
    def rational(cls, value) -> "Scalar":
        value = Fraction(value)
        return cls._raw({ONE_MONO: value} if value else {})

    @classmethod
    def symbol(cls, pos, power=1) -> "Scalar":
        mono = [0] * (pos + 1)
        mono[pos] = power
        sign, mono = _mono_mul((), mono)
        return cls._raw({mono: Fraction(sign)})

    @property
    def terms(self):
        return dict(self._terms)

    # predicates
    def is_zero(self):
        return not self._terms

    def is_rational(self):
        return all(m == ONE_MONO for m in self._terms)

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self._terms.get(ONE_MONO, Fraction(0))

    def constant_term(self) -> Fraction:
        return self._terms.get(ONE_MONO, Fraction(0))

    # arithmetic
    def __add__(self, other):
        other = as_scalar(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Scalar._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-as_scalar(other))

    def __rsub__(self, other):
        return as_scalar(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return ZERO
            return Scalar._raw({m: c * other for m, c in self._terms.items()})
        other = as_scalar(other)
        a, b = self._terms, other._terms
        if not a or not b:
            return ZERO
        if len(b) == 1 and ONE_MONO in b:
            c0 = b[ONE_MONO]
            return Scalar._raw({m: c * c0 for m, c in a.items()})
        if len(a) == 1 and ONE_MONO in a:
            c0 = a[ONE_MONO]
            return Scalar._raw({m: c * c0 for m, c in b.items()})
        out = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                sign, m = _mono_mul(ma, mb)
                v = out.get(m, 0) + sign * ca * cb
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return Scalar._raw(out)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        """Inverse of a single-term scalar built from rationals, i and powers of pi."""
        if len(self._terms) != 1:
            raise ZeroDivisionError(f"cannot invert {self}")
        (mono, c), = self._terms.items()
        if any(e for e in mono[G_POS:]):
            raise ZeroDivisionError(f"cannot invert {self}")
        ei = mono[I_POS] if mono else 0
        ep = mono[PI_POS] if len(mono) > 1 else 0
        inv = Scalar._raw({_strip((0, -ep)): 1 / c})
        if ei:
            inv = inv * Scalar._raw({(1,): Fraction(-1)})
        return inv

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        other = as_scalar(other)
        if other.is_rational():
            return self * (1 / other.to_rational())
        return self * other.inverse()

    def __rtruediv__(self, other):
        return as_scalar(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = ONE, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # comparison
    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({ONE_MONO: Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def max_i_exponent(self):
        return max((m[I_POS] if m else 0 for m in self._terms), default=0)

    def numeric(self, dps=50):
        """Numerical value as an mpmath complex number (oracle use only)."""
        import mpmath

        with mpmath.workdps(dps):
            total = mpmath.mpc(0)
            for mono, c in self._terms.items():
                v = mpmath.mpf(c.numerator) / c.denominator
                for pos, e in enumerate(mono):
                    if not e:
                        continue
                    if pos == I_POS:
                        base = mpmath.mpc(0, 1)
                    elif pos == PI_POS:
                        base = mpmath.pi
                    elif pos == G_POS:
                        base = mpmath.euler
                    else:
                        base = mpmath.zeta(2 * (pos - 3) + 3)
                    v = v * base**e
                total += v
            return total

    # text form
    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"Scalar({render(self)!r})"


def as_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction)):
        return Scalar.rational(x)
    if isinstance(x, str):
        return parse(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Scalar")


ZERO = Scalar._raw({})
ONE = Scalar._raw({ONE_MONO: Fraction(1)})
I = Scalar.symbol(I_POS)
PI = Scalar.symbol(PI_POS)
EULER_GAMMA = Scalar.symbol(G_POS)
TWO_PI_I = 2 * PI * I


@lru_cache(maxsize=None)
def bernoulli(m: int) -> Fraction:
    """m-th Bernoulli number with B_1 = -1/2."""
    if m < 0:
        raise ValueError("bernoulli index must be nonnegative")
    if m == 0:
        return Fraction(1)
    acc = sum(comb(m + 1, j) * bernoulli(j) for j in range(m))
    return Fraction(-acc, m + 1)


def zeta_even(k: int) -> Scalar:
    """zeta(k) for even k >= 2 as a rational multiple of pi^k."""
    if k < 2 or k % 2:
        raise ValueError(f"zeta_even needs an even integer >= 2, got {k}")
    m = k // 2
    coeff = (-1) ** (m + 1) * bernoulli(k) * Fraction(2**k, 2 * factorial(k))
    return coeff * PI**k


def zeta(k: int) -> Scalar:
    """zeta(k) for k >= 2: even values reduce to powers of pi, odd ones stay symbolic."""
    if k < 2:
        raise ValueError(f"zeta({k}) is not available")
    if k % 2 == 0:
        return zeta_even(k)
    return Scalar.symbol(3 + (k - 3) // 2)


def _render_mono(mono):
    parts = []
    for pos, e in enumerate(mono):
        if not e:
            continue
        name = _symbol_name(pos)
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def render(s: Scalar) -> str:
    """Canonical text form, e.g. ``3/2*pi^2*zeta3 + i*g``."""
    if not s._terms:
        return "0"
    out = []
    for mono in sorted(s._terms, key=_mono_key, reverse=True):
        c = s._terms[mono]
        neg = c < 0
        a = -c if neg else c
        body = _render_mono(mono)
        if not body:
            txt = str(a)
        elif a == 1:
            txt = body
        else:
            txt = f"{a}*{body}"
        if not out:
            out.append(f"-{txt}" if neg else txt)
        else:
            out.append(f" - {txt}" if neg else f" + {txt}")
    return "".join(out)


_NAMES = {"i": I, "pi": PI, "g": EULER_GAMMA}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return Scalar.rational(node.value)
    if isinstance(node, ast.Name):
        if node.id in _NAMES:
            return _NAMES[node.id]
        if node.id.startswith("zeta") and node.id[4:].isdigit():
            return zeta(int(node.id[4:]))
        raise ValueError(f"unknown symbol {node.id!r}")
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.UAdd):
            return v
    if isinstance(node, ast.BinOp):
        left = _eval(node.left)
        if isinstance(node.op, ast.Pow):
            exp = _eval(node.right)
            if not exp.is_rational() or exp.to_rational().denominator != 1:
                raise ValueError("exponents must be integers")
            return left ** int(exp.to_rational())
        right = _eval(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            return left / right
    raise ValueError(f"unsupported expression: {ast.dump(node)}")


def parse(text: str) -> Scalar:
    """Inverse of :func:`render`; accepts ``^`` for powers."""
    tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
    return _eval(tree)
