"""Small exact linear algebra over Q.

Matrices are lists of rows of Fractions.  Right-hand sides passed to
:func:`solve` may hold Scalars, since those form a Q-vector space.
"""
from __future__ import annotations

from fractions import Fraction

from .scalars import ZERO, Scalar


def frac_matrix(rows):
    return [[Fraction(x) for x in row] for row in rows]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def transpose(m):
    return [list(col) for col in zip(*m)] if m else []


def matmul(a, b):
    if not a:
        return []
    cols = len(b[0]) if b else 0
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(cols)]
            for i in range(len(a))]


def rref(m):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    rows = [list(r) for r in m]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(m):
    return len(rref(m)[1])


def det(m):
    n = len(m)
    if n == 0:
        return Fraction(1)
    rows = [list(r) for r in m]
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            out = -out
        out *= rows[c][c]
        for i in range(c + 1, n):
            if rows[i][c]:
                f = rows[i][c] / rows[c][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return out


def nullspace(m, ncols=None):
    """Basis of {x : m x = 0} as a list of vectors."""
    if not m:
        n = ncols or 0
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    rows, pivots = rref(m)
    n = len(m[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -rows[r][f]
        basis.append(v)
    return basis


def row_space_basis(vectors):
    """Echelon basis of the span of the given vectors."""
    if not vectors:
        return []
    rows, pivots = rref(vectors)
    return rows[: len(pivots)]


def column_space_basis(m):
    return row_space_basis(transpose(m))


def inverse(m):
    n = len(m)
    aug = [list(m[i]) + identity(n)[i] for i in range(n)]
    rows, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in rows]


class LinearSolver:
    """Reusable solver for A x = b with rational A and Scalar (or rational) b.

    ``solve`` returns one solution, or None when b is outside the image of A.
    """

    def __init__(self, a):
        self.a = [list(r) for r in a]
        self.nrows = len(a)
        self.ncols = len(a[0]) if a else 0
        aug = [list(self.a[i]) + [Fraction(int(i == j)) for j in range(self.nrows)]
               for i in range(self.nrows)]
        rows, pivots = rref(aug)
        self.pivots = [p for p in pivots if p < self.ncols]
        self.rows = rows
        # row-operation matrix T with T A = rref(A)
        self.t = [row[self.ncols:] for row in rows]

    def solve(self, b):
        b = [x if isinstance(x, Scalar) else Scalar.rational(x) for x in b]
        tb = []
        for trow in self.t:
            acc = ZERO
            for coeff, val in zip(trow, b):
                if coeff:
                    acc = acc + val * coeff
            tb.append(acc)
        r = len(self.pivots)
        if any(not x.is_zero() for x in tb[r:]):
            return None
        x = [ZERO] * self.ncols
        for i, p in enumerate(self.pivots):
            x[p] = tb[i]
        return x


def matvec(m, v):
    return [sum((Fraction(a) * Fraction(b) for a, b in zip(row, v)), Fraction(0)) for row in m]
