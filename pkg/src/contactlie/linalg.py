"""Exact linear algebra over any field-like scalars.

Works uniformly for Fraction entries and for RationalExpr entries; scalars
must support +, -, *, /, truthiness (zero test) and equality.  Pivoting
prefers "small" entries to keep rational-function growth down.
"""

from __future__ import annotations

import math
from fractions import Fraction


def _frac_gcd(a, b):
    return Fraction(math.gcd(a.numerator, b.numerator),
                    (a.denominator * b.denominator)
                    // math.gcd(a.denominator, b.denominator))


def _size(x):
    if isinstance(x, Fraction):
        return 1
    try:
        return len(x.num.terms) + len(x.den.terms)
    except AttributeError:
        return 1


def _eliminate(rows, ncols):
    """In-place fraction-free-ish Gaussian elimination; returns pivot columns."""
    pivots = []
    r = 0
    for c in range(ncols):
        best = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                if best is None or _size(rows[i][c]) < _size(rows[best][c]):
                    best = i
        if best is None:
            continue
        rows[r], rows[best] = rows[best], rows[r]
        piv = rows[r][c]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                factor = rows[i][c] / piv
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def rank(matrix):
    if not matrix:
        return 0
    rows = [list(row) for row in matrix]
    return len(_eliminate(rows, len(rows[0])))


def determinant(matrix, one):
    """Exact determinant by expansion-free elimination; `one` is the scalar 1."""
    n = len(matrix)
    rows = [list(row) for row in matrix]
    det = one
    for c in range(n):
        piv_row = None
        for i in range(c, n):
            if rows[i][c]:
                if piv_row is None or _size(rows[i][c]) < _size(rows[piv_row][c]):
                    piv_row = i
        if piv_row is None:
            return one - one
        if piv_row != c:
            rows[c], rows[piv_row] = rows[piv_row], rows[c]
            det = -det
        piv = rows[c][c]
        det = det * piv
        for i in range(c + 1, n):
            if rows[i][c]:
                factor = rows[i][c] / piv
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[c])]
    return det


def solve(matrix, rhs, zero=Fraction(0)):
    """Solve A x = b exactly.  Returns a solution vector (free variables set
    to zero) or None if the system is inconsistent.

    matrix: m rows of n entries; rhs: m entries (same scalar type).
    """
    if not matrix:
        return []
    n = len(matrix[0])
    rows = [list(row) + [b] for row, b in zip(matrix, rhs)]
    pivots = _eliminate(rows, n)
    # inconsistency: zero row with nonzero rhs
    for i in range(len(pivots), len(rows)):
        if any(rows[i][:n]):
            raise AssertionError("elimination left a nonzero non-pivot row")
        if rows[i][n]:
            return None
    solution = [zero] * n
    for r, c in enumerate(pivots):
        solution[c] = rows[r][n] / rows[r][c]
    return solution


def invert(matrix, one):
    """Exact inverse of a square matrix; None if singular."""
    n = len(matrix)
    zero = one - one
    rows = [list(row) + [one if i == j else zero for j in range(n)]
            for i, row in enumerate(matrix)]
    pivots = _eliminate(rows, n)
    if len(pivots) < n:
        return None
    inv = [[zero] * n for _ in range(n)]
    for r, c in enumerate(pivots):
        piv = rows[r][c]
        for j in range(n):
            inv[c][j] = rows[r][n + j] / piv
    return inv


def generic_rank(matrix):
    """Rank of a RationalExpr matrix over the rational-function field.

    Row denominators are cleared (rank-invariant), then one-step Bareiss
    fraction-free elimination runs over the polynomial ring: exact divisions
    only, no gcd normalization, which keeps intermediate growth polynomial.
    """
    from .exprcore import Poly, poly_divexact

    if not matrix or not matrix[0]:
        return 0
    rows = []
    for row in matrix:
        den = None
        for entry in row:
            den = entry.den if den is None else den * entry.den
        polys = [entry.num * poly_divexact(den, entry.den) for entry in row]
        # row scaling by the common coefficient content is rank-safe
        content = Fraction(0)
        for p in polys:
            if p:
                content = p.content() if not content else _frac_gcd(
                    content, p.content())
        if content and content != 1:
            inv = 1 / content
            polys = [p * inv for p in polys]
        rows.append(polys)
    m, n = len(rows), len(rows[0])
    vars = rows[0][0].vars
    prev = Poly.const(vars, 1)
    zero = Poly.zero(vars)
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, m):
            if rows[i][c]:
                if piv is None or len(rows[i][c].terms) < len(rows[piv][c].terms):
                    piv = i
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, m):
            for j in range(c + 1, n):
                num = rows[i][j] * rows[r][c] - rows[i][c] * rows[r][j]
                rows[i][j] = poly_divexact(num, prev) if num else zero
            rows[i][c] = zero
        prev = rows[r][c]
        r += 1
        if r == m:
            break
    return r


def nullspace_vector(matrix):
    """One nonzero kernel vector of A (rows over a field), or None."""
    if not matrix:
        return None
    n = len(matrix[0])
    rows = [list(row) for row in matrix]
    pivots = _eliminate(rows, n)
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    c_free = free[0]
    one = None
    for row in matrix:
        for x in row:
            one = x / x if x else None
            if one is not None:
                break
        if one is not None:
            break
    if one is None:
        raise ValueError("zero matrix: any vector is in the kernel")
    zero = one - one
    vec = [zero] * n
    vec[c_free] = one
    for r, c in enumerate(pivots):
        coeff = rows[r][c_free]
        if coeff:
            vec[c] = -coeff / rows[r][c]
    return vec
