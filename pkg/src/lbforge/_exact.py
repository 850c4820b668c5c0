"""Exact rational linear algebra on small dense matrices (lists of Fractions)."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fractions(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def rank(rows: Sequence[Sequence]) -> int:
    m = to_fractions(rows)
    if not m:
        return 0
    r = 0
    ncols = len(m[0])
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(r + 1, len(m)):
            if m[i][col] != 0:
                factor = m[i][col] / m[r][col]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def independent_rows(rows: Sequence[Sequence], limit: int | None = None) -> list[int]:
    """Indices of the first rows (in order) that are linearly independent, greedily."""
    basis: list[list[Fraction]] = []  # reduced rows, each with a distinct leading column
    leads: list[int] = []
    chosen: list[int] = []
    for idx, row in enumerate(rows):
        vec = [Fraction(x) for x in row]
        for b, lead in zip(basis, leads):
            if vec[lead] != 0:
                factor = vec[lead] / b[lead]
                vec = [a - factor * c for a, c in zip(vec, b)]
        lead = next((j for j, x in enumerate(vec) if x != 0), None)
        if lead is None:
            continue
        # keep basis rows reduced against the new pivot so later eliminations stay exact
        for k, b in enumerate(basis):
            if b[lead] != 0:
                factor = b[lead] / vec[lead]
                basis[k] = [a - factor * c for a, c in zip(b, vec)]
        basis.append(vec)
        leads.append(lead)
        chosen.append(idx)
        if limit is not None and len(chosen) == limit:
            break
    return chosen


def inverse(rows: Sequence[Sequence]) -> Matrix:
    """Gauss-Jordan inverse; raises ``ZeroDivisionError`` when singular."""
    n = len(rows)
    a = to_fractions(rows)
    if any(len(r) != n for r in a):
        raise ValueError("matrix must be square")
    aug = [r + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [x * inv_p for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                factor = aug[i][col]
                aug[i] = [x - factor * y for x, y in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]
