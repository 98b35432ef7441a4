"""Dense exact linear algebra on lists of lists of ``Scalar``.

Elimination picks the first nonzero pivot, which over a rational-function
field gives the generic rank.  Non-constant pivots are collected so callers
can report the locus where a specialization would drop the rank.
"""

from __future__ import annotations

from typing import Sequence

from .exact import ONE, ZERO, Poly, Scalar


class SingularMatrix(ArithmeticError):
    pass


Matrix = list  # list[list[Scalar]]


def as_matrix(rows) -> Matrix:
    return [[Scalar.coerce(x) for x in row] for row in rows]


def identity(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def zeros(r: int, c: int) -> Matrix:
    return [[ZERO] * c for _ in range(r)]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)] if a else []


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    out = []
    for row in a:
        out_row = []
        for col in bt:
            s = ZERO
            for x, y in zip(row, col):
                if x and y:
                    s = s + x * y
            out_row.append(s)
        out.append(out_row)
    return out


def matvec(a: Matrix, v: Sequence[Scalar]) -> list:
    out = []
    for row in a:
        s = ZERO
        for x, y in zip(row, v):
            if x and y:
                s = s + x * y
        out.append(s)
    return out


def trace(a: Matrix) -> Scalar:
    s = ZERO
    for i in range(len(a)):
        s = s + a[i][i]
    return s


def row_reduce(a: Matrix):
    """Reduced row echelon form.

    Returns ``(rref, pivot_columns, pivot_values)``; ``pivot_values`` are the
    pivots met before normalization.
    """
    m = [list(r) for r in a]
    rows = len(m)
    cols = len(m[0]) if m else 0
    pivots, pivot_values = [], []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        pivot_values.append(pv)
        inv = pv.inverse()
        m[r] = [x * inv if x else x for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y if y else x for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots, pivot_values


def rank(a: Matrix) -> int:
    if not a or not a[0]:
        return 0
    return len(row_reduce(a)[1])


def rank_with_locus(a: Matrix):
    """Generic rank plus the non-constant pivot numerators/denominators."""
    if not a or not a[0]:
        return 0, []
    _, piv, vals = row_reduce(a)
    locus = []
    for v in vals:
        for p in (v.num, v.den):
            if not p.is_constant():
                locus.append(p)
    return len(piv), locus


def nullspace(a: Matrix, ncols: int | None = None) -> list:
    """Basis of ``{x : a x = 0}`` as column vectors (lists)."""
    if not a:
        n = ncols or 0
        return [[ONE if i == j else ZERO for i in range(n)] for j in range(n)]
    n = len(a[0])
    m, piv, _ = row_reduce(a)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for r, pc in enumerate(piv):
            if m[r][f]:
                v[pc] = -m[r][f]
        basis.append(v)
    return basis


def span_basis(vectors) -> list:
    """Echelon basis of the span of the given vectors (rows)."""
    vectors = [list(v) for v in vectors if any(v)]
    if not vectors:
        return []
    m, piv, _ = row_reduce(vectors)
    return [m[i] for i in range(len(piv))]


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(a)]
    m, piv, _ = row_reduce(aug)
    if piv[:n] != list(range(n)):
        raise SingularMatrix("matrix is not invertible")
    return [row[n:] for row in m[:n]]


def det(a: Matrix) -> Scalar:
    n = len(a)
    m = [list(r) for r in a]
    d = ONE
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c]), None)
        if p is None:
            return ZERO
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        pv = m[c][c]
        d = d * pv
        inv = pv.inverse()
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] * inv
                m[i] = [x - f * y if y else x for x, y in zip(m[i], m[c])]
    return d


def solve(a: Matrix, b: Sequence[Scalar]):
    """One solution of ``a x = b`` or ``None`` if inconsistent."""
    n = len(a[0])
    aug = [list(row) + [Scalar.coerce(bi)] for row, bi in zip(a, b)]
    m, piv, _ = row_reduce(aug)
    if n in piv:
        return None
    x = [ZERO] * n
    for r, pc in enumerate(piv):
        x[pc] = m[r][n]
    return x


def subs_matrix(a: Matrix, values) -> Matrix:
    return [[x.subs(values) for x in row] for row in a]


def poly_product(polys) -> Poly:
    out = Poly.const(1)
    for p in polys:
        out = out * p
    return out
