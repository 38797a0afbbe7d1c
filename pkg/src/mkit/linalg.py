"""Small dense linear algebra over either scalar backend.

Matrices are lists of row lists with Fraction or float entries; sizes stay
tiny (the ambient dimension), so plain Gaussian elimination is all we need.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import SingularMatrixError
from .jets import EXACT, one_scalar, zero_scalar

Matrix = list


def identity(n: int, backend: str = EXACT) -> Matrix:
    one, zero = one_scalar(backend), zero_scalar(backend)
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def transpose(a: Matrix) -> Matrix:
    return [list(row) for row in zip(*a)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    rows, inner, cols = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)]
            for i in range(rows)]


def mat_vec(a: Matrix, v: Sequence) -> list:
    return [sum(row[j] * v[j] for j in range(len(v))) for row in a]


def solve_linear(a: Matrix, b: Sequence, backend: str = EXACT) -> list:
    """Solve ``a x = b`` by Gaussian elimination with row pivoting."""
    n = len(a)
    m = [list(row) + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        if backend == EXACT:
            pivot_row = next((r for r in range(col, n) if m[r][col] != 0), None)
        else:
            pivot_row = max(range(col, n), key=lambda r: abs(m[r][col]))
            if abs(m[pivot_row][col]) < 1e-13:
                pivot_row = None
        if pivot_row is None:
            raise SingularMatrixError("singular linear system")
        m[col], m[pivot_row] = m[pivot_row], m[col]
        pivot = m[col][col]
        for r in range(n):
            if r == col:
                continue
            factor = m[r][col] / pivot
            if factor == 0:
                continue
            m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def inverse(a: Matrix, backend: str = EXACT) -> Matrix:
    n = len(a)
    cols = []
    for j in range(n):
        e = [one_scalar(backend) if i == j else zero_scalar(backend) for i in range(n)]
        cols.append(solve_linear(a, e, backend))
    return transpose(cols)


def det(a: Matrix, backend: str = EXACT):
    n = len(a)
    m = [list(row) for row in a]
    sign = 1
    result = one_scalar(backend)
    for col in range(n):
        if backend == EXACT:
            pivot_row = next((r for r in range(col, n) if m[r][col] != 0), None)
        else:
            pivot_row = max(range(col, n), key=lambda r: abs(m[r][col]))
            if abs(m[pivot_row][col]) == 0.0:
                pivot_row = None
        if pivot_row is None:
            return zero_scalar(backend)
        if pivot_row != col:
            m[col], m[pivot_row] = m[pivot_row], m[col]
            sign = -sign
        pivot = m[col][col]
        result = result * pivot
        for r in range(col + 1, n):
            factor = m[r][col] / pivot
            if factor == 0:
                continue
            m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return result if sign > 0 else -result
