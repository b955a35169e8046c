"""Transfer matrices over exact rational functions, plus state-space records.

A TransferMatrix is a dense rows x cols grid of RationalFunction entries,
optionally carrying named block partitions on its rows and columns. All
algebra is exact; equality is structural equality of the canonical entries
(partitions are metadata and do not participate in comparisons).

Inversion is exact Gauss-Jordan elimination over the rational-function
field with canonicalized entries at every step, which at the intended
sizes (up to roughly 16 x 16) keeps degrees and coefficients modest.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, SingularMatrix
from .poly import Polynomial
from .ratfun import RationalFunction, as_ratfun

Blocks = tuple[tuple[str, int], ...]


def _as_entry(value) -> RationalFunction:
    rf = as_ratfun(value)
    if rf is NotImplemented:
        raise TypeError(f"cannot use {type(value).__name__} as a matrix entry")
    return rf


def _check_blocks(blocks, total: int, axis: str) -> Blocks | None:
    if blocks is None:
        return None
    out = tuple((str(label), int(size)) for label, size in blocks)
    if any(size <= 0 for _, size in out):
        raise DimensionMismatch(f"{axis} block sizes must be positive: {out}")
    if sum(size for _, size in out) != total:
        raise DimensionMismatch(f"{axis} blocks {out} do not sum to {total}")
    labels = [label for label, _ in out]
    if len(set(labels)) != len(labels):
        raise DimensionMismatch(f"duplicate {axis} block labels: {labels}")
    return out


def _block_span(blocks: Blocks, label: str) -> tuple[int, int]:
    start = 0
    for name, size in blocks:
        if name == label:
            return start, start + size
        start += size
    raise KeyError(f"no block labelled {label!r}")


class TransferMatrix:
    """Dense matrix of canonical rational functions with optional partitions."""

    __slots__ = ("rows", "cols", "entries", "row_blocks", "col_blocks")

    def __init__(self, rows, cols, entries, row_blocks=None, col_blocks=None):
        rows = int(rows)
        cols = int(cols)
        if rows <= 0 or cols <= 0:
            raise DimensionMismatch("matrix dimensions must be positive")
        ents = tuple(_as_entry(e) for e in entries)
        if len(ents) != rows * cols:
            raise DimensionMismatch(
                f"expected {rows * cols} entries for a {rows}x{cols} matrix, got {len(ents)}"
            )
        self.rows = rows
        self.cols = cols
        self.entries = ents
        self.row_blocks = _check_blocks(row_blocks, rows, "row")
        self.col_blocks = _check_blocks(col_blocks, cols, "col")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rows(cls, rows_of_entries, row_blocks=None, col_blocks=None) -> "TransferMatrix":
        rows = len(rows_of_entries)
        if rows == 0:
            raise DimensionMismatch("matrix needs at least one row")
        cols = len(rows_of_entries[0])
        if any(len(r) != cols for r in rows_of_entries):
            raise DimensionMismatch("ragged rows")
        flat = [e for row in rows_of_entries for e in row]
        return cls(rows, cols, flat, row_blocks, col_blocks)

    @classmethod
    def identity(cls, n, row_blocks=None, col_blocks=None) -> "TransferMatrix":
        ents = [RationalFunction(1) if i == j else RationalFunction(0)
                for i in range(n) for j in range(n)]
        return cls(n, n, ents, row_blocks, col_blocks)

    @classmethod
    def zeros(cls, rows, cols, row_blocks=None, col_blocks=None) -> "TransferMatrix":
        z = RationalFunction(0)
        return cls(rows, cols, [z] * (rows * cols), row_blocks, col_blocks)

    @classmethod
    def scalar(cls, value) -> "TransferMatrix":
        return cls(1, 1, [value])

    @classmethod
    def constant(cls, grid, row_blocks=None, col_blocks=None) -> "TransferMatrix":
        """Matrix of constants from a nested sequence of exact rationals."""
        return cls.from_rows([[RationalFunction(v) for v in row] for row in grid],
                             row_blocks, col_blocks)

    # -- access ------------------------------------------------------------

    def __getitem__(self, key) -> RationalFunction:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(key)
        return self.entries[i * self.cols + j]

    def row(self, i) -> tuple[RationalFunction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_proper(self) -> bool:
        return all(e.is_proper for e in self.entries)

    def is_zero(self) -> bool:
        return all(e.is_zero for e in self.entries)

    def submatrix(self, row_range, col_range) -> "TransferMatrix":
        r0, r1 = row_range
        c0, c1 = col_range
        ents = [self[i, j] for i in range(r0, r1) for j in range(c0, c1)]
        return TransferMatrix(r1 - r0, c1 - c0, ents)

    def block(self, row_label: str, col_label: str) -> "TransferMatrix":
        if self.row_blocks is None or self.col_blocks is None:
            raise DimensionMismatch("matrix carries no block partition")
        return self.submatrix(_block_span(self.row_blocks, row_label),
                              _block_span(self.col_blocks, col_label))

    def with_blocks(self, row_blocks, col_blocks) -> "TransferMatrix":
        return TransferMatrix(self.rows, self.cols, self.entries, row_blocks, col_blocks)

    # -- algebra -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransferMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self) -> str:
        body = "; ".join(", ".join(repr(e) for e in self.row(i)) for i in range(self.rows))
        return f"[{body}]"

    def __add__(self, other) -> "TransferMatrix":
        if not isinstance(other, TransferMatrix):
            return NotImplemented
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other.shape}")
        ents = [a + b for a, b in zip(self.entries, other.entries)]
        return TransferMatrix(self.rows, self.cols, ents,
                              self.row_blocks or other.row_blocks,
                              self.col_blocks or other.col_blocks)

    def __sub__(self, other) -> "TransferMatrix":
        if not isinstance(other, TransferMatrix):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "TransferMatrix":
        return TransferMatrix(self.rows, self.cols, [-e for e in self.entries],
                              self.row_blocks, self.col_blocks)

    def scale(self, factor) -> "TransferMatrix":
        f = _as_entry(factor)
        return TransferMatrix(self.rows, self.cols, [f * e for e in self.entries],
                              self.row_blocks, self.col_blocks)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Polynomial, RationalFunction)):
            return self.scale(other)
        if not isinstance(other, TransferMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        zero = RationalFunction(0)
        out = []
        for i in range(self.rows):
            lrow = self.row(i)
            for j in range(other.cols):
                acc = zero
                for k, a in enumerate(lrow):
                    if a.is_zero:
                        continue
                    b = other[k, j]
                    if b.is_zero:
                        continue
                    acc = acc + a * b
                out.append(acc)
        return TransferMatrix(self.rows, other.cols, out, self.row_blocks, other.col_blocks)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Polynomial, RationalFunction)):
            return self.scale(other)
        return NotImplemented

    __matmul__ = __mul__

    def transpose(self) -> "TransferMatrix":
        ents = [self[j, i] for i in range(self.cols) for j in range(self.rows)]
        return TransferMatrix(self.cols, self.rows, ents, self.col_blocks, self.row_blocks)

    def inverse(self) -> "TransferMatrix":
        """Exact inverse by Gauss-Jordan elimination over the rational-function field."""
        if not self.is_square:
            raise DimensionMismatch("only square matrices can be inverted")
        n = self.rows
        one = RationalFunction(1)
        zero = RationalFunction(0)
        work = [list(self.row(i)) + [one if i == j else zero for j in range(n)]
                for i in range(n)]
        for col in range(n):
            piv = next((r for r in range(col, n) if not work[r][col].is_zero), None)
            if piv is None:
                raise SingularMatrix("matrix is singular as a rational matrix")
            if piv != col:
                work[col], work[piv] = work[piv], work[col]
            inv_p = work[col][col].inverse()
            row = work[col]
            for j in range(col, 2 * n):
                if not row[j].is_zero:
                    row[j] = row[j] * inv_p
            for r in range(n):
                if r == col:
                    continue
                f = work[r][col]
                if f.is_zero:
                    continue
                target = work[r]
                for j in range(col, 2 * n):
                    if not row[j].is_zero:
                        target[j] = target[j] - f * row[j]
        ents = [work[i][n + j] for i in range(n) for j in range(n)]
        return TransferMatrix(n, n, ents, self.col_blocks, self.row_blocks)

    def determinant(self) -> RationalFunction:
        """Exact determinant via triangularization."""
        if not self.is_square:
            raise DimensionMismatch("determinant needs a square matrix")
        n = self.rows
        work = [list(self.row(i)) for i in range(n)]
        det = RationalFunction(1)
        for col in range(n):
            piv = next((r for r in range(col, n) if not work[r][col].is_zero), None)
            if piv is None:
                return RationalFunction(0)
            if piv != col:
                work[col], work[piv] = work[piv], work[col]
                det = -det
            pivot = work[col][col]
            det = det * pivot
            inv_p = pivot.inverse()
            for r in range(col + 1, n):
                f = work[r][col]
                if f.is_zero:
                    continue
                f = f * inv_p
                for j in range(col + 1, n):
                    if not work[col][j].is_zero:
                        work[r][j] = work[r][j] - f * work[col][j]
        return det

    def evaluate(self, point: complex) -> np.ndarray:
        """Numeric value at a complex point, as a complex numpy array."""
        out = np.empty((self.rows, self.cols), dtype=complex)
        for i in range(self.rows):
            for j in range(self.cols):
                out[i, j] = self[i, j](complex(point))
        return out


def hstack(blocks: list[TransferMatrix]) -> TransferMatrix:
    rows = blocks[0].rows
    if any(b.rows != rows for b in blocks):
        raise DimensionMismatch("hstack row mismatch")
    ents = []
    for i in range(rows):
        for b in blocks:
            ents.extend(b.row(i))
    return TransferMatrix(rows, sum(b.cols for b in blocks), ents)


def vstack(blocks: list[TransferMatrix]) -> TransferMatrix:
    cols = blocks[0].cols
    if any(b.cols != cols for b in blocks):
        raise DimensionMismatch("vstack column mismatch")
    ents = []
    for b in blocks:
        ents.extend(b.entries)
    return TransferMatrix(sum(b.rows for b in blocks), cols, ents)


def block_matrix(grid, row_blocks=None, col_blocks=None) -> TransferMatrix:
    """Assemble a matrix from a 2-D grid of conforming TransferMatrix blocks."""
    stacked = vstack([hstack(list(row)) for row in grid])
    return stacked.with_blocks(row_blocks, col_blocks)


# -- exact matrices of rational scalars (gains, state-space data) ----------

FractionMatrix = tuple[tuple[Fraction, ...], ...]


def fm(grid) -> FractionMatrix:
    """Coerce a nested sequence of ints/Fractions to an immutable Fraction grid."""
    out = tuple(tuple(Fraction(v) for v in row) for row in grid)
    if not out or not out[0]:
        raise DimensionMismatch("empty matrix")
    width = len(out[0])
    if any(len(row) != width for row in out):
        raise DimensionMismatch("ragged rows")
    return out


def fm_shape(x: FractionMatrix) -> tuple[int, int]:
    return len(x), len(x[0])


def fm_eye(n: int) -> FractionMatrix:
    return tuple(tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n))


def fm_zeros(rows: int, cols: int) -> FractionMatrix:
    return tuple(tuple(Fraction(0) for _ in range(cols)) for _ in range(rows))


def fm_add(x: FractionMatrix, y: FractionMatrix) -> FractionMatrix:
    if fm_shape(x) != fm_shape(y):
        raise DimensionMismatch("matrix addition shape mismatch")
    return tuple(tuple(a + b for a, b in zip(rx, ry)) for rx, ry in zip(x, y))


def fm_mul(x: FractionMatrix, y: FractionMatrix) -> FractionMatrix:
    rx, cx = fm_shape(x)
    ry, cy = fm_shape(y)
    if cx != ry:
        raise DimensionMismatch("matrix product shape mismatch")
    return tuple(
        tuple(sum((x[i][k] * y[k][j] for k in range(cx)), Fraction(0)) for j in range(cy))
        for i in range(rx)
    )


def fm_neg(x: FractionMatrix) -> FractionMatrix:
    return tuple(tuple(-a for a in row) for row in x)


def fm_to_float(x: FractionMatrix) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in x], dtype=float)


def spectral_radius(x: FractionMatrix) -> float:
    eigs = np.linalg.eigvals(fm_to_float(x))
    return float(np.max(np.abs(eigs))) if eigs.size else 0.0


class StateSpace:
    """Exact discrete-time state-space data (A, B, C, D) over the rationals."""

    __slots__ = ("A", "B", "C", "D")

    def __init__(self, A, B, C, D):
        self.A = fm(A)
        self.B = fm(B)
        self.C = fm(C)
        self.D = fm(D)
        n = len(self.A)
        if fm_shape(self.A) != (n, n):
            raise DimensionMismatch("A must be square")
        if len(self.B) != n:
            raise DimensionMismatch("B must have as many rows as A")
        if len(self.C[0]) != n:
            raise DimensionMismatch("C must have as many columns as A")
        if fm_shape(self.D) != (self.p, self.m):
            raise DimensionMismatch("D must be p x m")

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def m(self) -> int:
        return len(self.B[0])

    @property
    def p(self) -> int:
        return len(self.C)

    def __eq__(self, other):
        if not isinstance(other, StateSpace):
            return NotImplemented
        return (self.A, self.B, self.C, self.D) == (other.A, other.B, other.C, other.D)

    def __repr__(self):
        return f"StateSpace(n={self.n}, m={self.m}, p={self.p})"

    def z_minus_a(self) -> TransferMatrix:
        """The polynomial matrix zI - A."""
        z = Polynomial.z()
        ents = []
        for i in range(self.n):
            for j in range(self.n):
                if i == j:
                    ents.append(RationalFunction(z - self.A[i][j]))
                else:
                    ents.append(RationalFunction(-self.A[i][j]))
        return TransferMatrix(self.n, self.n, ents)

    def resolvent(self) -> TransferMatrix:
        """(zI - A)^-1, exact."""
        return self.z_minus_a().inverse()

    def transfer(self) -> TransferMatrix:
        """The plant map C (zI - A)^-1 B + D."""
        return TransferMatrix.constant(self.C) * self.resolvent() * \
            TransferMatrix.constant(self.B) + TransferMatrix.constant(self.D)
