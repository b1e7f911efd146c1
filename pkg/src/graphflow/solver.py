"""Exact rational linear algebra for the coboundary matrix and its kernel."""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from .errors import GradeMismatch
from .graphs import DecoratedGraph, Flavor, GraphSum, delta, enumerate_graphs, graph_grade


class RationalMatrix:
    """Dense matrix of exact rationals."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries, cols: int | None = None):
        self.entries = [[Fraction(x) for x in row] for row in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.entries else (cols or 0)
        if any(len(row) != self.cols for row in self.entries):
            raise ValueError("ragged rows")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls([[Fraction(0)] * cols for _ in range(rows)], cols=cols)

    def __getitem__(self, rc):
        r, c = rc
        return self.entries[r][c]

    def __setitem__(self, rc, value):
        r, c = rc
        self.entries[r][c] = Fraction(value)

    def matvec(self, v: list[Fraction]) -> list[Fraction]:
        if len(v) != self.cols:
            raise ValueError("length mismatch")
        return [sum((row[c] * v[c] for c in range(self.cols)), Fraction(0)) for row in self.entries]

    def matmul(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = RationalMatrix.zeros(self.rows, other.cols)
        for r in range(self.rows):
            for k in range(self.cols):
                a = self.entries[r][k]
                if not a:
                    continue
                for c in range(other.cols):
                    out.entries[r][c] += a * other.entries[k][c]
        return out

    def is_zero(self) -> bool:
        return all(not x for row in self.entries for x in row)

    def __repr__(self):
        return f"RationalMatrix({self.rows}x{self.cols})"


def delta_matrix(
    flavor: Flavor, order: int, **enumerate_kwargs
) -> tuple[list[DecoratedGraph], list[DecoratedGraph], RationalMatrix]:
    """Matrix of the coboundary from degree 0 to degree 1 at fixed order.

    Column k expresses delta(basis0[k]) in basis1.
    """
    basis0 = enumerate_graphs(flavor, order, 0, connected=True, **enumerate_kwargs)
    basis1 = enumerate_graphs(flavor, order, 1, connected=True, **enumerate_kwargs)
    index = {g: r for r, g in enumerate(basis1)}
    m = RationalMatrix.zeros(len(basis1), len(basis0))
    for c, g in enumerate(basis0):
        for term, coeff in delta(g).items():
            m[index[term], c] = coeff
    return basis0, basis1, m


def _row_echelon_fraction_free(m: list[list[int]]) -> tuple[list[list[int]], list[int]]:
    """Bareiss fraction-free elimination; returns (echelon, pivot columns)."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    piv_cols: list[int] = []
    prev_pivot = 1
    r = 0
    for c in range(cols):
        pivot_row = next((i for i in range(r, rows) if m[i][c]), None)
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev_pivot
            m[i][c] = 0
        prev_pivot = m[r][c]
        piv_cols.append(c)
        r += 1
        if r == rows:
            break
    return m, piv_cols


def kernel_basis(m: RationalMatrix) -> list[list[Fraction]]:
    """Exact nullspace basis; each vector's first nonzero entry is 1.

    Vectors are ordered by the index of their free column, matching the
    deterministic basis order used to build the matrix.
    """
    if m.cols == 0:
        return []
    # scale rows to integers; row scaling leaves the kernel unchanged
    int_rows = []
    for row in m.entries:
        mult = lcm(*(x.denominator for x in row)) if row else 1
        int_rows.append([int(x * mult) for x in row])
    echelon, piv_cols = _row_echelon_fraction_free(int_rows)
    piv_set = set(piv_cols)
    free_cols = [c for c in range(m.cols) if c not in piv_set]
    basis = []
    for fc in free_cols:
        v = [Fraction(0)] * m.cols
        v[fc] = Fraction(1)
        # back-substitute pivot variables from bottom to top
        for r in range(len(piv_cols) - 1, -1, -1):
            pc = piv_cols[r]
            s = sum(
                (Fraction(echelon[r][c]) * v[c] for c in range(pc + 1, m.cols) if v[c]),
                Fraction(0),
            )
            v[pc] = -s / echelon[r][pc]
        # normalize leading entry to 1
        lead = next(x for x in v if x)
        basis.append([x / lead for x in v])
    return basis


def verify_cocycle(s: GraphSum) -> bool:
    """True iff delta(s) vanishes.  All terms must share one grade."""
    if s.is_zero:
        return True
    graph_grade(s)  # raises GradeMismatch on inconsistent terms
    return delta(s).is_zero
