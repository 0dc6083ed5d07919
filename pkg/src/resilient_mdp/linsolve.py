"""Exact linear-system solving over rationals.

Gaussian elimination with partial pivoting on the magnitude of the entry's
numerator. Everything is a ``fractions.Fraction``, so the solutions are
exact; determinism follows from the fixed pivoting rule.
"""

from __future__ import annotations

from fractions import Fraction


class SingularSystemError(ValueError):
    """Raised when a system has no solution or no unique solution."""


def solve_linear_system(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Solve A x = b exactly for a (possibly overdetermined) consistent system.

    ``rows`` may contain more equations than unknowns; the system must be
    consistent and of full column rank, otherwise SingularSystemError is
    raised.
    """
    m = len(rows)
    if m == 0:
        return []
    n = len(rows[0])
    a = [list(row) + [b] for row, b in zip(rows, rhs)]
    piv_row = 0
    pivots: list[tuple[int, int]] = []
    for col in range(n):
        best, best_mag = -1, -1
        for r in range(piv_row, m):
            mag = abs(a[r][col].numerator) * (1 if a[r][col] else 0)
            if a[r][col] != 0 and mag > best_mag:
                best, best_mag = r, mag
        if best == -1:
            raise SingularSystemError(f"no pivot in column {col}")
        a[piv_row], a[best] = a[best], a[piv_row]
        inv = 1 / a[piv_row][col]
        a[piv_row] = [v * inv for v in a[piv_row]]
        for r in range(m):
            if r != piv_row and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * p for v, p in zip(a[r], a[piv_row])]
        pivots.append((piv_row, col))
        piv_row += 1
        if piv_row == m:
            break
    if piv_row < n:
        raise SingularSystemError("rank deficient system")
    # leftover rows must have reduced to 0 = 0
    for r in range(piv_row, m):
        if a[r][n] != 0:
            raise SingularSystemError("inconsistent system")
    x = [Fraction(0)] * n
    for r, c in pivots:
        x[c] = a[r][n]
    return x
