"""Exact linear algebra over the rationals.

Matrices are stored as sparse rows (``{column: Fraction}``).  Elimination is
plain rational Gauss-Jordan with a deterministic pivot rule: columns are
scanned left to right and the first remaining row with a nonzero entry is
chosen.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence


class DimensionMismatch(ValueError):
    pass


class RationalMatrix:
    """Immutable rows x cols matrix of Fractions, stored sparsely by row."""

    __slots__ = ("nrows", "ncols", "_rows")

    def __init__(self, nrows: int, ncols: int, rows: Iterable[dict] | None = None):
        self.nrows = nrows
        self.ncols = ncols
        built = []
        for r in rows or ():
            clean = {}
            for j, x in r.items():
                if not 0 <= j < ncols:
                    raise DimensionMismatch(f"column {j} out of range")
                if x:
                    clean[j] = Fraction(x)
            built.append(clean)
        if len(built) > nrows:
            raise DimensionMismatch("too many rows")
        built.extend({} for _ in range(nrows - len(built)))
        self._rows = tuple(built)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence], ncols: int | None = None) -> "RationalMatrix":
        data = [list(r) for r in data]
        if ncols is None:
            ncols = len(data[0]) if data else 0
        if any(len(r) != ncols for r in data):
            raise DimensionMismatch("ragged rows")
        return cls(len(data), ncols, [{j: x for j, x in enumerate(r) if x} for r in data])

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(n, n, [{i: 1} for i in range(n)])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RationalMatrix":
        return cls(nrows, ncols)

    def row(self, i: int) -> dict:
        return dict(self._rows[i])

    def rows(self) -> list:
        return [dict(r) for r in self._rows]

    def to_dense(self) -> list:
        return [[r.get(j, Fraction(0)) for j in range(self.ncols)] for r in self._rows]

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self._rows[i].get(j, Fraction(0))

    def __eq__(self, other) -> bool:
        return (isinstance(other, RationalMatrix) and self.nrows == other.nrows
                and self.ncols == other.ncols and self._rows == other._rows)

    def __repr__(self) -> str:
        return f"RationalMatrix({self.nrows}x{self.ncols}, nnz={sum(map(len, self._rows))})"

    def transpose(self) -> "RationalMatrix":
        cols = [dict() for _ in range(self.ncols)]
        for i, r in enumerate(self._rows):
            for j, x in r.items():
                cols[j][i] = x
        return RationalMatrix(self.ncols, self.nrows, cols)

    def apply(self, x: Sequence) -> list:
        """Matrix-vector product."""
        if len(x) != self.ncols:
            raise DimensionMismatch(f"vector of length {len(x)} for {self.ncols} columns")
        return [sum((a * x[j] for j, a in r.items()), Fraction(0)) for r in self._rows]

    def left_apply(self, r: Sequence) -> list:
        """Row-vector product ``r @ self``."""
        if len(r) != self.nrows:
            raise DimensionMismatch(f"row of length {len(r)} for {self.nrows} rows")
        out = [Fraction(0)] * self.ncols
        for i, row in enumerate(self._rows):
            if r[i]:
                for j, a in row.items():
                    out[j] += r[i] * a
        return out

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.ncols != other.nrows:
            raise DimensionMismatch("inner dimensions differ")
        out = []
        for r in self._rows:
            acc: dict = {}
            for k, a in r.items():
                for j, b in other._rows[k].items():
                    acc[j] = acc.get(j, 0) + a * b
            out.append(acc)
        return RationalMatrix(self.nrows, other.ncols, out)

    def columns(self, idx: Sequence[int]) -> "RationalMatrix":
        pos = {j: k for k, j in enumerate(idx)}
        return RationalMatrix(self.nrows, len(idx),
                              [{pos[j]: x for j, x in r.items() if j in pos} for r in self._rows])

    def stack(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.ncols != other.ncols:
            raise DimensionMismatch("column counts differ")
        return RationalMatrix(self.nrows + other.nrows, self.ncols, self.rows() + other.rows())


@dataclass(frozen=True)
class AffineSolutionSpace:
    particular: list | None
    basis: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.particular is not None

    @property
    def dimension(self) -> int:
        return len(self.basis) if self.consistent else -1


def _eliminate(rows: list, ncols: int, col_order: Sequence[int] | None = None):
    """In-place Gauss-Jordan on sparse rows; returns pivot list [(row, col)]."""
    order = range(ncols) if col_order is None else col_order
    pivots = []
    r = 0
    n = len(rows)
    for c in order:
        p = next((i for i in range(r, n) if rows[i].get(c)), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        prow = rows[r]
        inv = 1 / prow[c]
        if inv != 1:
            for j in prow:
                prow[j] *= inv
        for i in range(n):
            if i == r:
                continue
            f = rows[i].get(c)
            if not f:
                continue
            target = rows[i]
            for j, a in prow.items():
                s = target.get(j, 0) - f * a
                if s:
                    target[j] = s
                else:
                    target.pop(j, None)
        pivots.append((r, c))
        r += 1
        if r == n:
            break
    return pivots


def rref(m: RationalMatrix) -> tuple[RationalMatrix, list]:
    """Reduced row echelon form and the list of pivot columns."""
    rows = m.rows()
    piv = _eliminate(rows, m.ncols)
    return RationalMatrix(m.nrows, m.ncols, rows), [c for _, c in piv]


def rank(m: RationalMatrix) -> int:
    return len(_eliminate(m.rows(), m.ncols))


def rank_reversed(m: RationalMatrix) -> int:
    """Rank by eliminating the transpose with columns in reverse order.

    Shares no pivot sequence with :func:`rank`; used as an independent check.
    """
    mt = m.transpose()
    return len(_eliminate(mt.rows()[::-1], mt.ncols, range(mt.ncols - 1, -1, -1)))


def kernel_basis(m: RationalMatrix) -> list:
    """Basis of the right nullspace, one free column per vector."""
    rows = m.rows()
    piv = _eliminate(rows, m.ncols)
    pivot_cols = {c: r for r, c in piv}
    basis = []
    for f in range(m.ncols):
        if f in pivot_cols:
            continue
        vec = [Fraction(0)] * m.ncols
        vec[f] = Fraction(1)
        for r, c in piv:
            x = rows[r].get(f)
            if x:
                vec[c] = -x
        basis.append(vec)
    return basis


def left_nullspace(m: RationalMatrix) -> list:
    """Basis of rows ``r`` with ``r @ m == 0``."""
    return kernel_basis(m.transpose())


def solve_affine(m: RationalMatrix, rhs: Sequence) -> AffineSolutionSpace:
    if len(rhs) != m.nrows:
        raise DimensionMismatch(f"rhs of length {len(rhs)} for {m.nrows} rows")
    rows = m.rows()
    for r, b in zip(rows, rhs):
        if b:
            r[m.ncols] = Fraction(b)
    piv = _eliminate(rows, m.ncols)
    used = {r for r, _ in piv}
    if any(rows[i].get(m.ncols) for i in range(len(rows)) if i not in used):
        return AffineSolutionSpace(None, [])
    x = [Fraction(0)] * m.ncols
    for r, c in piv:
        x[c] = rows[r].get(m.ncols, Fraction(0))
    return AffineSolutionSpace(x, kernel_basis(m))


@dataclass(frozen=True)
class SolveOperator:
    """Everything needed to solve ``m x = b`` for symbolic right-hand sides.

    ``b`` is consistent iff ``row @ b == 0`` for every row of ``left_null``;
    then ``x = particular_map @ b`` is a solution and ``kernel`` spans the rest.
    """

    particular_map: RationalMatrix
    left_null: list
    kernel: list
    pivots: list

    @property
    def rank(self) -> int:
        return len(self.pivots)


def solve_operator(m: RationalMatrix) -> SolveOperator:
    n = m.ncols
    rows = m.rows()
    for i, r in enumerate(rows):
        r[n + i] = Fraction(1)
    piv = _eliminate(rows, n)
    used = {r for r, _ in piv}
    # rows of the transformation T with T m = rref(m)
    left_null = []
    for i, r in enumerate(rows):
        if i in used:
            continue
        vec = [Fraction(0)] * m.nrows
        for j, x in r.items():
            vec[j - n] = x
        left_null.append(vec)
    pmap = [dict() for _ in range(n)]
    for r, c in piv:
        pmap[c] = {j - n: x for j, x in rows[r].items() if j >= n}
    return SolveOperator(RationalMatrix(n, m.nrows, pmap), left_null, kernel_basis(m),
                         [c for _, c in piv])
