"""Concrete maps, their 1-jets, and configurations of points on their domains.

Every map works on batches: ``values`` takes chart points of shape (B, n) and
returns (B, N); ``differentials`` additionally takes one chart direction per
point.  The polynomial maps are written with plain ring operations so that an
``object`` array of :class:`fractions.Fraction` goes through untouched, which
is what the exact verifier relies on.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateDirection,
    DimensionMismatch,
    DistinctnessViolation,
    InvalidInput,
    InvalidParameter,
    OutOfDomain,
)
from .lift import is_rational

TWO_PI = 2.0 * math.pi
DEFAULT_DELTA_MIN = 1e-6


# --------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class DomainChart:
    kind: str
    dim: int
    left: DomainChart | None = None
    right: DomainChart | None = None

    @property
    def periodic(self) -> tuple[bool, ...]:
        if self.kind == "circle":
            return (True,)
        if self.kind == "product":
            return self.left.periodic + self.right.periodic
        return (False,) * self.dim

    def normalize(self, points):
        """Reduce circle coordinates to [0, 2*pi)."""
        mask = self.periodic
        if not any(mask):
            return points
        pts = np.array(points, dtype=float, copy=True)
        for c, per in enumerate(mask):
            if per:
                pts[..., c] = np.mod(pts[..., c], TWO_PI)
        return pts

    def distance(self, a, b):
        """Chart distance; arc length on circle factors, Euclidean overall."""
        diff = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
        for c, per in enumerate(self.periodic):
            if per:
                d = np.mod(diff[..., c], TWO_PI)
                diff[..., c] = np.minimum(d, TWO_PI - d)
        return np.sqrt(np.sum(diff * diff, axis=-1))

    def describe(self) -> str:
        if self.kind == "product":
            return f"{self.left.describe()} x {self.right.describe()}"
        return self.kind


REAL_LINE = DomainChart("real_line", 1)
CIRCLE = DomainChart("circle", 1)
REAL_PLANE = DomainChart("real_plane", 2)


def product_chart(left: DomainChart, right: DomainChart) -> DomainChart:
    return DomainChart("product", left.dim + right.dim, left, right)


# --------------------------------------------------------------------------
# maps


def _ones_like(t):
    return t * 0 + 1


def _zeros(shape, like: np.ndarray) -> np.ndarray:
    if like.dtype == object:
        out = np.empty(shape, dtype=object)
        out.fill(0)
        return out
    return np.zeros(shape)


def _batch(points, n: int) -> np.ndarray:
    arr = points if isinstance(points, np.ndarray) else np.asarray(points)
    if arr.dtype != object:
        arr = arr.astype(float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, n) if n > 1 else arr.reshape(-1, 1)
    if arr.shape[-1] != n:
        raise DimensionMismatch(f"expected chart points of dimension {n}")
    return arr


class EmbeddingSpec:
    """A smooth map from a chart domain into R^N with computable jets."""

    kind: str = "abstract"
    exact_capable: bool = False

    def __init__(self, ambient_dim: int, domain: DomainChart):
        self.ambient_dim = ambient_dim
        self.domain = domain

    def values(self, points) -> np.ndarray:
        raise NotImplementedError

    def differentials(self, points, directions) -> np.ndarray:
        raise NotImplementedError

    def second_differentials(self, points, directions, step: float = 1e-4):
        """Second derivative along a direction; central differences by default."""
        p = _batch(points, self.domain.dim).astype(float)
        u = _batch(directions, self.domain.dim).astype(float)
        return (
            self.values(p + step * u) - 2.0 * self.values(p) + self.values(p - step * u)
        ) / (step * step)

    def parameter_box(self, box: float = 1.0) -> list[tuple[float, float, bool]]:
        """Per chart coordinate: (low, high, periodic) used for sampling."""
        out = []
        for per in self.domain.periodic:
            out.append((0.0, TWO_PI, True) if per else (-box, box, False))
        return out

    def check_domain(self, points) -> None:
        """Raise OutOfDomain for points the map cannot evaluate."""

    def describe(self) -> str:
        return self.kind

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()} -> R^{self.ambient_dim}>"


class MomentCurve(EmbeddingSpec):
    kind = "moment"
    exact_capable = True

    def __init__(self, m: int):
        if int(m) != m or m < 1:
            raise InvalidParameter(f"moment curve degree must be >= 1, got {m}")
        self.m = int(m)
        super().__init__(self.m, REAL_LINE)

    def _powers(self, t):
        # iterated products t^0 .. t^m
        pw = [_ones_like(t)]
        for _ in range(self.m):
            pw.append(pw[-1] * t)
        return pw

    def values(self, points):
        t = _batch(points, 1)[:, 0]
        return np.stack(self._powers(t)[1:], axis=1)

    def differentials(self, points, directions):
        t = _batch(points, 1)[:, 0]
        u = _batch(directions, 1)[:, 0]
        pw = self._powers(t)
        return np.stack([j * pw[j - 1] * u for j in range(1, self.m + 1)], axis=1)

    def second_differentials(self, points, directions, step=None):
        t = _batch(points, 1)[:, 0]
        u = _batch(directions, 1)[:, 0]
        pw = self._powers(t)
        cols = [0 * t]
        cols += [j * (j - 1) * pw[j - 2] * u * u for j in range(2, self.m + 1)]
        return np.stack(cols, axis=1)

    def describe(self):
        return f"moment:{self.m}"


class TrigCurve(EmbeddingSpec):
    """alpha -> (cos a, sin a, cos 2a, sin 2a, ..., cos ha, sin ha)."""

    kind = "trig"

    def __init__(self, h: int):
        if int(h) != h or h < 1:
            raise InvalidParameter(f"number of harmonics must be >= 1, got {h}")
        self.h = int(h)
        super().__init__(2 * self.h, CIRCLE)

    def _angles(self, points):
        a = _batch(points, 1)[:, 0].astype(float)
        return np.outer(a, np.arange(1, self.h + 1))

    def values(self, points):
        ja = self._angles(points)
        out = np.empty((ja.shape[0], 2 * self.h))
        out[:, 0::2] = np.cos(ja)
        out[:, 1::2] = np.sin(ja)
        return out

    def differentials(self, points, directions):
        ja = self._angles(points)
        j = np.arange(1, self.h + 1)
        u = _batch(directions, 1)[:, 0].astype(float)[:, None]
        out = np.empty_like(ja, shape=(ja.shape[0], 2 * self.h))
        out[:, 0::2] = -j * np.sin(ja) * u
        out[:, 1::2] = j * np.cos(ja) * u
        return out

    def second_differentials(self, points, directions, step=None):
        ja = self._angles(points)
        j2 = np.arange(1, self.h + 1) ** 2
        u = _batch(directions, 1)[:, 0].astype(float)[:, None]
        out = np.empty((ja.shape[0], 2 * self.h))
        out[:, 0::2] = -j2 * np.cos(ja) * u * u
        out[:, 1::2] = -j2 * np.sin(ja) * u * u
        return out

    def describe(self):
        return f"trig:{self.h}"


def _cmul(a, b):
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


class ComplexMomentCurve(EmbeddingSpec):
    """z -> (z, z^2, ..., z^m), each complex coordinate stored as (re, im)."""

    kind = "complex_moment"
    exact_capable = True

    def __init__(self, m: int):
        if int(m) != m or m < 1:
            raise InvalidParameter(f"moment curve degree must be >= 1, got {m}")
        self.m = int(m)
        super().__init__(2 * self.m, REAL_PLANE)

    def _powers(self, z):
        pw = [(_ones_like(z[0]), 0 * z[0])]
        for _ in range(self.m):
            pw.append(_cmul(pw[-1], z))
        return pw

    @staticmethod
    def _interleave(pairs):
        cols = []
        for re, im in pairs:
            cols += [re, im]
        return np.stack(cols, axis=1)

    def values(self, points):
        p = _batch(points, 2)
        return self._interleave(self._powers((p[:, 0], p[:, 1]))[1:])

    def differentials(self, points, directions):
        p = _batch(points, 2)
        xi = _batch(directions, 2)
        xi = (xi[:, 0], xi[:, 1])
        pw = self._powers((p[:, 0], p[:, 1]))
        pairs = []
        for j in range(1, self.m + 1):
            re, im = _cmul(pw[j - 1], xi)
            pairs.append((j * re, j * im))
        return self._interleave(pairs)

    def second_differentials(self, points, directions, step=None):
        p = _batch(points, 2)
        xi = _batch(directions, 2)
        xi2 = _cmul((xi[:, 0], xi[:, 1]), (xi[:, 0], xi[:, 1]))
        pw = self._powers((p[:, 0], p[:, 1]))
        pairs = [(0 * p[:, 0], 0 * p[:, 0])]
        for j in range(2, self.m + 1):
            re, im = _cmul(pw[j - 2], xi2)
            pairs.append((j * (j - 1) * re, j * (j - 1) * im))
        return self._interleave(pairs)

    def describe(self):
        return f"cmoment:{self.m}"


def _outer_flat(a, b):
    # row-major: index i*len(b) + j holds a_i * b_j
    return (a[:, :, None] * b[:, None, :]).reshape(a.shape[0], -1)


class TensorProduct(EmbeddingSpec):
    """(x, y) -> (f(x) (x) g(y), f(x), g(y)) on the product of the two charts."""

    kind = "tensor"

    def __init__(self, left: EmbeddingSpec, right: EmbeddingSpec):
        self.left = left
        self.right = right
        self.exact_capable = left.exact_capable and right.exact_capable
        na, nb = left.ambient_dim, right.ambient_dim
        super().__init__(na * nb + na + nb, product_chart(left.domain, right.domain))

    def _split(self, arr):
        arr = _batch(arr, self.domain.dim)
        d = self.left.domain.dim
        return arr[:, :d], arr[:, d:]

    def values(self, points):
        x, y = self._split(points)
        f, g = self.left.values(x), self.right.values(y)
        return np.concatenate([_outer_flat(f, g), f, g], axis=1)

    def differentials(self, points, directions):
        x, y = self._split(points)
        u, v = self._split(directions)
        f, g = self.left.values(x), self.right.values(y)
        df, dg = self.left.differentials(x, u), self.right.differentials(y, v)
        return np.concatenate([_outer_flat(df, g) + _outer_flat(f, dg), df, dg], axis=1)

    def second_differentials(self, points, directions, step=1e-4):
        x, y = self._split(points)
        u, v = self._split(directions)
        f, g = self.left.values(x), self.right.values(y)
        df, dg = self.left.differentials(x, u), self.right.differentials(y, v)
        ddf = self.left.second_differentials(x, u, step)
        ddg = self.right.second_differentials(y, v, step)
        head = _outer_flat(ddf, g) + 2 * _outer_flat(df, dg) + _outer_flat(f, ddg)
        return np.concatenate([head, ddf, ddg], axis=1)

    def parameter_box(self, box=1.0):
        return self.left.parameter_box(box) + self.right.parameter_box(box)

    def check_domain(self, points):
        x, y = self._split(points)
        self.left.check_domain(x)
        self.right.check_domain(y)

    def describe(self):
        return f"tensor:({self.left.describe()},{self.right.describe()})"


class CoordinateMap(EmbeddingSpec):
    """Keep the first ``dim`` coordinates of a map, zero-padding if needed."""

    kind = "coordinates"

    def __init__(self, base: EmbeddingSpec, dim: int):
        if dim < 1:
            raise InvalidParameter("target dimension must be >= 1")
        self.base = base
        self.exact_capable = base.exact_capable
        super().__init__(int(dim), base.domain)

    def _fit(self, arr):
        n = self.ambient_dim
        if arr.shape[1] >= n:
            return arr[:, :n]
        pad = _zeros((arr.shape[0], n - arr.shape[1]), arr)
        return np.concatenate([arr, pad], axis=1)

    def values(self, points):
        return self._fit(self.base.values(points))

    def differentials(self, points, directions):
        return self._fit(self.base.differentials(points, directions))

    def second_differentials(self, points, directions, step=1e-4):
        return self._fit(self.base.second_differentials(points, directions, step))

    def parameter_box(self, box=1.0):
        return self.base.parameter_box(box)

    def check_domain(self, points):
        self.base.check_domain(points)

    def describe(self):
        return f"{self.base.describe()}@{self.ambient_dim}"


class SampledMap(EmbeddingSpec):
    """A map known only on a rectangular parameter grid.

    Values between grid nodes come from cubic interpolation (linear when an
    axis has fewer than four nodes); derivatives are central differences of
    the interpolant with step ``step``.
    """

    kind = "sampled"

    def __init__(self, axes: Sequence[np.ndarray], table: np.ndarray, step=1e-5):
        from scipy.interpolate import RegularGridInterpolator

        self.axes = [np.asarray(a, dtype=float) for a in axes]
        self.table = np.asarray(table, dtype=float)
        n = len(self.axes)
        if self.table.shape[:n] != tuple(len(a) for a in self.axes):
            raise DimensionMismatch("table shape does not match the grid axes")
        self.step = float(step)
        method = "cubic" if all(len(a) >= 4 for a in self.axes) else "linear"
        self._interp = RegularGridInterpolator(
            self.axes, self.table, method=method, bounds_error=False, fill_value=None
        )
        if n == 1:
            chart = REAL_LINE
        elif n == 2:
            chart = REAL_PLANE
        else:
            chart = REAL_LINE
            for _ in range(n - 1):
                chart = product_chart(chart, REAL_LINE)
        super().__init__(self.table.shape[n], chart)

    @classmethod
    def from_csv(cls, path, step=1e-5) -> SampledMap:
        """Read ``param_1..param_n, out_1..out_N`` rows on a rectangular grid."""
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise InvalidInput(f"{path}: empty file")
        header = [h.strip() for h in rows[0]]
        n = sum(h.startswith("param_") for h in header)
        big_n = sum(h.startswith("out_") for h in header)
        if n == 0 or big_n == 0 or n + big_n != len(header):
            raise InvalidInput(f"{path}:1: header must be param_1..param_n, out_1..out_N")
        data = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InvalidInput(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                data.append([float(c) for c in row])
            except ValueError as exc:
                raise InvalidInput(f"{path}:{lineno}: {exc}") from exc
        data = np.array(data)
        axes = [np.unique(data[:, c]) for c in range(n)]
        shape = tuple(len(a) for a in axes)
        if math.prod(shape) != data.shape[0]:
            raise InvalidInput(f"{path}: parameters do not form a rectangular grid")
        table = np.full(shape + (big_n,), np.nan)
        idx = tuple(np.searchsorted(axes[c], data[:, c]) for c in range(n))
        table[idx] = data[:, n:]
        if np.isnan(table).any():
            raise InvalidInput(f"{path}: parameters do not form a rectangular grid")
        return cls(axes, table, step)

    def check_domain(self, points):
        p = _batch(points, len(self.axes)).astype(float)
        for c, ax in enumerate(self.axes):
            if np.any(p[:, c] < ax[0]) or np.any(p[:, c] > ax[-1]):
                raise OutOfDomain(f"parameter {c + 1} outside [{ax[0]}, {ax[-1]}]")

    def values(self, points):
        p = _batch(points, len(self.axes)).astype(float)
        return self._interp(p)

    def differentials(self, points, directions):
        p = _batch(points, len(self.axes)).astype(float)
        u = _batch(directions, len(self.axes)).astype(float)
        h = self.step
        return (self._interp(p + h * u) - self._interp(p - h * u)) / (2 * h)

    def parameter_box(self, box=1.0):
        return [(float(a[0]), float(a[-1]), False) for a in self.axes]

    def describe(self):
        return f"sampled:{self.domain.dim}->{self.ambient_dim}"


def moment_curve(m: int) -> MomentCurve:
    return MomentCurve(m)


def trig_curve(h: int) -> TrigCurve:
    return TrigCurve(h)


def complex_moment_curve(m: int) -> ComplexMomentCurve:
    return ComplexMomentCurve(m)


def tensor_product(f: EmbeddingSpec, g: EmbeddingSpec) -> TensorProduct:
    return TensorProduct(f, g)


def restrict_coordinates(spec: EmbeddingSpec, dim: int) -> CoordinateMap:
    return CoordinateMap(spec, dim)


# --------------------------------------------------------------------------
# jets


@dataclass(frozen=True)
class Jet:
    value: np.ndarray
    directional_derivatives: list = field(default_factory=list)


def _point_vector(point, n: int) -> np.ndarray:
    if np.isscalar(point) or isinstance(point, Fraction):
        items = [point]
    else:
        items = list(np.asarray(point, dtype=object).reshape(-1))
    if len(items) != n:
        raise DimensionMismatch(f"expected {n} chart coordinates, got {len(items)}")
    if all(is_rational(x) for x in items):
        return np.array(items, dtype=object)
    return np.array([float(x) for x in items])


def evaluate_jet(spec: EmbeddingSpec, point, directions=()) -> Jet:
    """Value of ``spec`` at ``point`` and its derivative along each direction."""
    n = spec.domain.dim
    p = _point_vector(point, n)
    if not spec.exact_capable and p.dtype == object:
        p = p.astype(float)
    p = spec.domain.normalize(p) if p.dtype != object else p
    spec.check_domain(p[None, :])
    value = spec.values(p[None, :])[0]
    derivs = []
    for u in directions:
        uu = _point_vector(u, n)
        if not any(x != 0 for x in uu):
            raise DegenerateDirection("zero tangent direction")
        if uu.dtype == object and p.dtype != object:
            uu = uu.astype(float)
        if p.dtype == object and uu.dtype != object:
            pp = p.astype(float)
        else:
            pp = p
        derivs.append(spec.differentials(pp[None, :], uu[None, :])[0])
    return Jet(value, derivs)


# --------------------------------------------------------------------------
# configurations


def _as_point(x) -> tuple:
    if np.isscalar(x) or isinstance(x, Fraction):
        return (x,)
    return tuple(np.asarray(x, dtype=object).reshape(-1).tolist())


def _as_group(d) -> tuple:
    if np.isscalar(d) or isinstance(d, Fraction):
        return ((d,),)
    d = list(d)
    if d and not (np.isscalar(d[0]) or isinstance(d[0], Fraction)):
        return tuple(_as_point(v) for v in d)
    return (_as_point(d),)


@dataclass(frozen=True)
class Configuration:
    """k through points and l tangency points, each tangency with directions.

    ``directions[j]`` is a tuple of chart vectors spanning the tangent line or
    subspace used at ``tangency_points[j]``.
    """

    through_points: tuple = ()
    tangency_points: tuple = ()
    directions: tuple = ()

    @classmethod
    def build(cls, through=(), tangency=(), directions=None) -> Configuration:
        through = tuple(_as_point(x) for x in through)
        tangency = tuple(_as_point(y) for y in tangency)
        if directions is None:
            # default: full tangent space, one basis vector per chart axis
            groups = []
            for y in tangency:
                n = len(y)
                groups.append(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))
            directions = tuple(groups)
        else:
            directions = tuple(_as_group(d) for d in directions)
        return cls(through, tangency, directions)

    @property
    def k(self) -> int:
        return len(self.through_points)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.tangency_points)

    @property
    def is_rational(self) -> bool:
        coords = [x for p in self.through_points + self.tangency_points for x in p]
        coords += [x for g in self.directions for v in g for x in v]
        return all(is_rational(x) for x in coords)

    def all_points(self) -> list:
        return list(self.through_points) + list(self.tangency_points)

    def validate(self, chart: DomainChart, delta_min: float = DEFAULT_DELTA_MIN):
        if len(self.directions) != self.l:
            raise DimensionMismatch("one direction group per tangency point")
        pts = self.all_points()
        for p in pts:
            if len(p) != chart.dim:
                raise DimensionMismatch(f"point {p} is not in a {chart.dim}-dim chart")
        for (i, a), (j, b) in combinations(enumerate(pts), 2):
            d = float(chart.distance(np.array(a, dtype=float), np.array(b, dtype=float)))
            if d < delta_min:
                raise DistinctnessViolation(
                    f"points {i} and {j} are {d:.3g} apart (< {delta_min:g})"
                )
        for j, group in enumerate(self.directions):
            if len(group) == 0:
                raise DegenerateDirection(f"tangency point {j} has no direction")
            if len(group) > chart.dim:
                raise InvalidParameter(
                    f"subspace of dim {len(group)} exceeds chart dim {chart.dim}"
                )
            for v in group:
                if len(v) != chart.dim:
                    raise DimensionMismatch(f"direction {v} has wrong dimension")
            g = np.array(group, dtype=float)
            if np.linalg.matrix_rank(g) < len(group):
                raise DegenerateDirection(f"directions at tangency {j} are dependent")

    def to_dict(self) -> dict:
        return {
            "through_points": [[_jsonable(x) for x in p] for p in self.through_points],
            "tangency_points": [[_jsonable(x) for x in p] for p in self.tangency_points],
            "directions": [
                [[_jsonable(x) for x in v] for v in g] for g in self.directions
            ],
        }


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x.numerator)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)
