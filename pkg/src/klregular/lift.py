"""Lifting affine data to linear data, and the rank tests built on it.

A point ``x`` of R^N is lifted to ``(x, 1)`` and a direction ``u`` to
``(u, 0)``.  A collection of points and affine subspaces is affinely
independent exactly when the lifted columns are linearly independent, so
everything in this module reduces to computing the rank of a column matrix,
either in floating point (singular values) or exactly over the rationals
(fraction-free elimination).
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateDirection,
    DimensionMismatch,
    EmptyConfiguration,
    InvalidInput,
    NotRational,
)

DEFAULT_TOL = 1e-10

#: margin reported by :func:`exact_rank` for an exactly full-rank matrix
EXACT_NONZERO = math.inf

THROUGH = "through-point"
TANGENCY = "tangency-point"
DIRECTION = "direction"


def is_rational(x) -> bool:
    return isinstance(x, numbers.Rational) and not isinstance(x, bool)


def _as_vector(v) -> np.ndarray:
    """Object array for all-rational input, float array otherwise."""
    if isinstance(v, np.ndarray) and v.dtype != object:
        arr = np.asarray(v, dtype=float).reshape(-1)
    else:
        items = list(np.asarray(v, dtype=object).reshape(-1))
        if items and all(is_rational(x) for x in items):
            return np.array(items, dtype=object)
        try:
            arr = np.array([float(x) for x in items], dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"non-numeric entry in {v!r}") from exc
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"non-finite entry in {v!r}")
    return arr


def _append(v: np.ndarray, last) -> np.ndarray:
    if v.dtype == object:
        return np.concatenate([v, np.array([last], dtype=object)])
    return np.concatenate([v, [float(last)]])


def lift_point(p) -> np.ndarray:
    """Return ``(p, 1)``."""
    return _append(_as_vector(p), 1)


def lift_direction(u) -> np.ndarray:
    """Return ``(u, 0)``; a zero vector spans no line and is rejected."""
    v = _as_vector(u)
    if not any(x != 0 for x in v):
        raise DegenerateDirection("direction vector is zero")
    return _append(v, 0)


@dataclass(frozen=True)
class LiftedMatrix:
    """Column matrix of lifted vectors together with a role tag per column."""

    matrix: np.ndarray
    labels: tuple

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[1] != len(self.labels):
            raise DimensionMismatch("one label per column required")
        for j, label in enumerate(self.labels):
            last = self.matrix[-1, j]
            if label == DIRECTION and last != 0:
                raise InvalidInput(f"direction column {j} must end in 0")
            if label in (THROUGH, TANGENCY) and last != 1:
                raise InvalidInput(f"point column {j} must end in 1")

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_columns(self) -> int:
        return self.matrix.shape[1]

    @property
    def columns(self) -> list:
        return [self.matrix[:, j] for j in range(self.n_columns)]

    @property
    def is_exact(self) -> bool:
        return self.matrix.dtype == object and all(
            is_rational(x) for x in self.matrix.flat
        )

    def as_float(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)


@dataclass(frozen=True)
class RankReport:
    rank: int
    margin: float
    tolerance: float
    exact: bool
    n_columns: int
    scale: float = 1.0

    @property
    def full_rank(self) -> bool:
        return self.rank == self.n_columns

    def to_dict(self) -> dict:
        margin = "exact-nonzero" if self.margin == EXACT_NONZERO else self.margin
        return {
            "rank": self.rank,
            "columns": self.n_columns,
            "full_rank": self.full_rank,
            "margin": margin,
            "scale": self.scale,
            "tolerance": self.tolerance,
            "exact": self.exact,
        }


def assemble_lifted_matrix(
    points: Sequence, tangency_points: Sequence, directions: Sequence
) -> LiftedMatrix:
    """Stack lifted columns: through points, tangency points, then directions.

    ``directions[j]`` is the group of direction vectors attached to
    ``tangency_points[j]``; groups are emitted in tangency order.
    """
    if len(points) == 0 and len(tangency_points) == 0:
        raise EmptyConfiguration("k and l cannot both be zero")
    if len(directions) != len(tangency_points):
        raise DimensionMismatch("one direction group per tangency point")
    cols, labels = [], []
    for p in points:
        cols.append(lift_point(p))
        labels.append(THROUGH)
    for y in tangency_points:
        cols.append(lift_point(y))
        labels.append(TANGENCY)
    for group in directions:
        for u in group:
            cols.append(lift_direction(u))
            labels.append(DIRECTION)
    if len({c.shape[0] for c in cols}) != 1:
        raise DimensionMismatch("vectors of different ambient dimensions")
    exact = all(c.dtype == object for c in cols)
    if exact:
        mat = np.empty((cols[0].shape[0], len(cols)), dtype=object)
        for j, c in enumerate(cols):
            mat[:, j] = c
    else:
        mat = np.column_stack([np.asarray(c, dtype=float) for c in cols])
    return LiftedMatrix(mat, tuple(labels))


def _matrix_of(m) -> np.ndarray:
    return m.matrix if isinstance(m, LiftedMatrix) else np.asarray(m)


def rank_and_margin(m, tol: float = DEFAULT_TOL) -> RankReport:
    """Numerical rank and smallest singular value.

    A singular value counts toward the rank when it exceeds ``tol`` times the
    largest one (or ``tol`` itself for the zero matrix).  The margin is the
    smallest singular value when there are no more columns than rows, and 0
    otherwise.
    """
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    a = np.asarray(_matrix_of(m), dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch("expected a 2-D matrix")
    rows, cols = a.shape
    if a.size == 0:
        return RankReport(0, 0.0, tol, False, cols, 1.0)
    s = np.linalg.svd(a, compute_uv=False)
    scale = float(s[0]) if s[0] > 0 else 1.0
    rank = int(np.sum(s > tol * scale))
    margin = float(s[-1]) if cols <= rows else 0.0
    return RankReport(rank, margin, tol, False, cols, scale)


def batched_margins(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Margins and largest singular values for a stack of shape (B, R, C)."""
    s = np.linalg.svd(stack, compute_uv=False)
    scale = np.where(s[:, 0] > 0, s[:, 0], 1.0)
    if stack.shape[2] > stack.shape[1]:
        return np.zeros(stack.shape[0]), scale
    return s[:, -1], scale


def _integer_columns(a: np.ndarray) -> list[list[int]]:
    """Clear denominators column by column; column scaling keeps the rank."""
    rows, cols = a.shape
    out = [[0] * cols for _ in range(rows)]
    for j in range(cols):
        col = []
        for i in range(rows):
            x = a[i, j]
            if not is_rational(x):
                raise NotRational(f"entry ({i}, {j}) = {x!r} is not rational")
            col.append(Fraction(x))
        den = math.lcm(*(x.denominator for x in col)) if col else 1
        for i in range(rows):
            out[i][j] = int(col[i] * den)
    return out


def bareiss_rank(a: list[list[int]]) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination."""
    a = [row[:] for row in a]
    nr = len(a)
    nc = len(a[0]) if nr else 0
    rank, prev = 0, 1
    for col in range(nc):
        if rank == nr:
            break
        pivot = next((r for r in range(rank, nr) if a[r][col] != 0), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        p = a[rank][col]
        for r in range(rank + 1, nr):
            arc = a[r][col]
            row_r, row_p = a[r], a[rank]
            for c in range(col + 1, nc):
                row_r[c] = (p * row_r[c] - arc * row_p[c]) // prev
            row_r[col] = 0
        prev = p
        rank += 1
    return rank


def bareiss_determinant(a: list[list[int]]) -> int:
    a = [row[:] for row in a]
    n = len(a)
    if any(len(row) != n for row in a):
        raise DimensionMismatch("determinant needs a square matrix")
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[k][k] * a[i][j] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def exact_determinant(m) -> Fraction:
    """Exact determinant of a square matrix with rational entries."""
    a = np.asarray(_matrix_of(m), dtype=object)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch("determinant needs a square matrix")
    ints = _integer_columns(a)
    den = 1
    for j in range(a.shape[1]):
        den *= math.lcm(*(Fraction(a[i, j]).denominator for i in range(a.shape[0])))
    return Fraction(bareiss_determinant(ints), den)


def exact_rank(m) -> RankReport:
    """Exact rank over Q.  The margin field is a flag: EXACT_NONZERO or 0."""
    a = np.asarray(_matrix_of(m), dtype=object)
    rows, cols = a.shape
    if a.size == 0:
        return RankReport(0, 0.0, 0.0, True, cols)
    rank = bareiss_rank(_integer_columns(a))
    margin = EXACT_NONZERO if rank == cols else 0.0
    return RankReport(rank, margin, 0.0, True, cols)


def exact_left_null_space(m) -> list[list[Fraction]]:
    """Basis of {w : w^T M = 0} over Q, by reduced row echelon form of M^T."""
    a = np.asarray(_matrix_of(m), dtype=object)
    rows, cols = a.shape
    t = [[Fraction(a[i, j]) for i in range(rows)] for j in range(cols)]
    pivots = []
    r = 0
    for c in range(rows):
        piv = next((i for i in range(r, cols) if t[i][c] != 0), None)
        if piv is None:
            continue
        t[r], t[piv] = t[piv], t[r]
        inv = 1 / t[r][c]
        t[r] = [x * inv for x in t[r]]
        for i in range(cols):
            if i != r and t[i][c] != 0:
                f = t[i][c]
                t[i] = [x - f * y for x, y in zip(t[i], t[r])]
        pivots.append(c)
        r += 1
        if r == cols:
            break
    basis = []
    for free in (c for c in range(rows) if c not in pivots):
        w = [Fraction(0)] * rows
        w[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            w[pc] = -t[i][free]
        basis.append(w)
    return basis


def affine_span_dim(affine_pieces: Sequence, tol: float = DEFAULT_TOL) -> int:
    """Dimension of the affine hull of a list of ``(base, spanning_vectors)``.

    The pieces are affinely independent iff the result equals
    ``sum(dim_i + 1) - 1``.
    """
    if not affine_pieces:
        raise EmptyConfiguration("no affine pieces given")
    cols = []
    for base, spanning in affine_pieces:
        cols.append(lift_point(base))
        cols.extend(_append(_as_vector(u), 0) for u in spanning)
    if len({c.shape[0] for c in cols}) != 1:
        raise DimensionMismatch("pieces live in different ambient spaces")
    if all(c.dtype == object for c in cols):
        mat = np.empty((cols[0].shape[0], len(cols)), dtype=object)
        for j, c in enumerate(cols):
            mat[:, j] = c
        return exact_rank(mat).rank - 1
    mat = np.column_stack([np.asarray(c, dtype=float) for c in cols])
    return rank_and_margin(mat, tol).rank - 1
