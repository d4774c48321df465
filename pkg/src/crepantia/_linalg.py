"""Small exact linear-algebra kernel over ``int`` and ``Fraction``.

Everything here is plain Python; matrices are sequences of rows.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Vector = tuple[Fraction, ...]


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(x, y, g)`` with ``x*a + y*b == g == gcd(a, b) >= 0``."""
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


def bezout(values: Sequence[int]) -> tuple[list[int], int]:
    """Coefficients ``c`` with ``sum(c[k] * values[k]) == gcd(values)``."""
    coeffs = [0] * len(values)
    g = 0
    for k, v in enumerate(values):
        x, y, g_new = xgcd(g, v)
        coeffs = [x * c for c in coeffs]
        coeffs[k] = y
        g = g_new
    return coeffs, g


def lcm(*values: int) -> int:
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out


def hermite_normal_form(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Row-style upper triangular HNF of the lattice spanned by ``rows``.

    Pivots are positive and entries above a pivot are reduced into
    ``[0, pivot)``, so the result depends only on the lattice.
    Zero rows are dropped.
    """
    pending = [list(r) for r in rows]
    basis: list[list[int]] = []
    pivots: list[int] = []
    for col in range(ncols):
        pivot = None
        rest = []
        for row in pending:
            if row[col] == 0:
                if any(row):
                    rest.append(row)
                continue
            if pivot is None:
                pivot = row
                continue
            a, b = pivot[col], row[col]
            x, y, g = xgcd(a, b)
            ag, bg = a // g, b // g
            pivot, row = (
                [x * p + y * q for p, q in zip(pivot, row)],
                [ag * q - bg * p for p, q in zip(pivot, row)],
            )
            if any(row):
                rest.append(row)
        pending = rest
        if pivot is None:
            continue
        if pivot[col] < 0:
            pivot = [-p for p in pivot]
        basis.append(pivot)
        pivots.append(col)
    for i, col in enumerate(pivots):
        row = basis[i]
        for j in range(i):
            q = basis[j][col] // row[col]
            if q:
                basis[j] = [u - q * v for u, v in zip(basis[j], row)]
    return basis


def det(matrix: Sequence[Sequence[Fraction | int]]) -> Fraction:
    m = [[Fraction(x) for x in row] for row in matrix]
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("determinant of a non-square matrix")
    result = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            result = -result
        p = m[col][col]
        result *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return result


def inverse(matrix: Sequence[Sequence[Fraction | int]]) -> list[list[Fraction]]:
    n = len(matrix)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [row[n:] for row in m]


def row_times(v: Sequence[Fraction], matrix: Sequence[Sequence[Fraction]]) -> Vector:
    """Row vector times matrix."""
    ncols = len(matrix[0])
    return tuple(sum((v[k] * matrix[k][j] for k in range(len(v))), Fraction(0))
                 for j in range(ncols))


def solve_combination(target: Sequence[Fraction],
                      generators: Sequence[Sequence[Fraction]]) -> list[Fraction] | None:
    """Solve ``sum(t[k] * generators[k]) == target`` exactly.

    ``generators`` must be linearly independent; returns ``None`` when the
    target is outside their span.
    """
    k = len(generators)
    n = len(target)
    # augmented system, one equation per coordinate
    rows = [[Fraction(generators[j][i]) for j in range(k)] + [Fraction(target[i])]
            for i in range(n)]
    r = 0
    where = []
    for col in range(k):
        piv = next((i for i in range(r, n) if rows[i][col]), None)
        if piv is None:
            raise ValueError("generators are linearly dependent")
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][col]
        rows[r] = [x / p for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        where.append(r)
        r += 1
    if any(rows[i][k] for i in range(r, n)):
        return None
    return [rows[where[j]][k] for j in range(k)]


def integer_scaled(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[int]], int]:
    """``(D * rows, D)`` with ``D`` the least common denominator."""
    rows = [[x if isinstance(x, Fraction) else Fraction(x) for x in row] for row in rows]
    d = lcm(*{x.denominator for row in rows for x in row})
    return [[x.numerator * (d // x.denominator) for x in row] for row in rows], d


def scaled_inverse(a: Sequence[Sequence[int]]) -> tuple[int, list[list[int]]]:
    """Fraction-free Gauss-Jordan: returns ``(d, B)`` with ``a^{-1} == B / d``.

    ``|d| == |det a|``; every intermediate division is exact (Bareiss).
    Returns ``(0, [])`` for a singular matrix.
    """
    n = len(a)
    m = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(a)]
    prev = 1
    for k in range(n):
        if m[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if m[i][k]), None)
            if piv is None:
                return 0, []
            m[k], m[piv] = m[piv], m[k]
        pk = m[k]
        p = pk[k]
        for i in range(n):
            if i == k:
                continue
            row = m[i]
            f = row[k]
            m[i] = [(p * x - f * y) // prev for x, y in zip(row, pk)]
        prev = p
    d = m[n - 1][n - 1]
    # rows other than the last carry d on the diagonal as well
    return d, [row[n:] for row in m]


def int_det(a: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by Bareiss elimination."""
    m = [list(row) for row in a]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if m[i][k]), None)
            if piv is None:
                return 0
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        p = m[k][k]
        for i in range(k + 1, n):
            f = m[i][k]
            m[i] = [0] * (k + 1) + [(p * m[i][j] - f * m[k][j]) // prev for j in range(k + 1, n)]
        prev = p
    return sign * m[n - 1][n - 1] if n else 1
