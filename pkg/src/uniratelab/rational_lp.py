"""Exact linear feasibility over the rationals (tiny phase-1 simplex).

Floating-point hull-membership tests flip predictions near boundaries, so the
lattice learner's feasibility questions are solved exactly with Fractions.
Bland's rule guarantees termination; problem sizes here are a handful of rows.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def feasible_eq(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> bool:
    """Does {z >= 0 : Az = b} have a solution?  Requires b >= 0."""
    m = len(A)
    if m == 0:
        return True
    n = len(A[0])
    if any(x < 0 for x in b):
        raise ValueError("phase-1 requires non-negative right-hand sides")
    rows = [
        [Fraction(v) for v in A[r]]
        + [Fraction(1 if i == r else 0) for i in range(m)]
        + [Fraction(b[r])]
        for r in range(m)
    ]
    basis = [n + r for r in range(m)]
    # minimize the artificial sum; reduced-cost row for the initial basis
    obj = [sum(rows[r][j] for r in range(m)) - (1 if j >= n else 0) for j in range(n + m)]
    objval = sum(rows[r][-1] for r in range(m))
    while True:
        enter = next((j for j in range(n + m) if obj[j] > 0), None)  # Bland
        if enter is None:
            break
        leave = None
        best_ratio = None
        for r in range(m):
            if rows[r][enter] > 0:
                ratio = rows[r][-1] / rows[r][enter]
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[leave])
                ):
                    best_ratio, leave = ratio, r
        if leave is None:
            raise RuntimeError("phase-1 objective unbounded; inputs malformed")
        piv = rows[leave][enter]
        rows[leave] = [v / piv for v in rows[leave]]
        for r in range(m):
            if r != leave and rows[r][enter] != 0:
                f = rows[r][enter]
                rows[r] = [a - f * c for a, c in zip(rows[r], rows[leave])]
        f = obj[enter]
        obj = [a - f * c for a, c in zip(obj, rows[leave][:-1])]
        objval -= f * rows[leave][-1]
        basis[leave] = enter
    return objval == 0


def convex_dominates(points: Sequence[Sequence[int]], query: Sequence[int]) -> bool:
    """Is some convex combination of `points` coordinatewise <= `query`?

    Exact feasibility of {alpha in simplex : sum alpha_i p_i <= q} via slack
    variables; everything stays rational.
    """
    pts = [tuple(p) for p in points]
    if not pts:
        return False
    d = len(query)
    t = len(pts)
    A = []
    for j in range(d):
        row = [Fraction(p[j]) for p in pts] + [
            Fraction(1 if k == j else 0) for k in range(d)
        ]
        A.append(row)
    A.append([Fraction(1)] * t + [Fraction(0)] * d)
    b = [Fraction(query[j]) for j in range(d)] + [Fraction(1)]
    return feasible_eq(A, b)
