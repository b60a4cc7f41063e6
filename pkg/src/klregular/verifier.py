"""Deciding (k,l)-regularity on concrete configurations.

A configuration is regular when the images of its through points, its
tangency points and the differentials of its tangent directions are affinely
independent; after lifting, that is full column rank of one matrix.  When
the rank drops, the left null space of that matrix is a family of
hyperplanes through every through point and tangent at every tangency point,
which is returned as a witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .embeddings import (
    DEFAULT_DELTA_MIN,
    Configuration,
    EmbeddingSpec,
    MomentCurve,
    evaluate_jet,
)
from .errors import (
    DegenerateCurvature,
    DegenerateDirection,
    DistinctnessViolation,
    EmptyConfiguration,
    InvalidParameter,
    NotATangency,
)
from .lift import (
    DEFAULT_TOL,
    DIRECTION,
    TANGENCY,
    THROUGH,
    LiftedMatrix,
    RankReport,
    exact_determinant,
    exact_left_null_space,
    exact_rank,
    rank_and_margin,
)


@dataclass(frozen=True)
class FlatWitness:
    """Common zero set of lifted covectors ``w = (normal, offset)``.

    Each covector is a hyperplane ``<normal, x> + offset = 0`` containing all
    through points and tangent to the configuration at its tangency points;
    their intersection is a flat of dimension ``dim``.  No covectors means
    the flat is the whole ambient space.
    """

    covectors: tuple
    dim: int
    exact: bool = False

    @property
    def hyperplane(self):
        if not self.covectors:
            return None
        w = self.covectors[0]
        return np.asarray(w[:-1]), w[-1]

    def residuals(self, lifted: LiftedMatrix) -> np.ndarray:
        """|w . column| for every covector (rows) and column."""
        if not self.covectors:
            return np.zeros((0, lifted.n_columns))
        w = np.array([[float(x) for x in c] for c in self.covectors])
        return np.abs(w @ lifted.as_float())

    def to_dict(self) -> dict:
        return {
            "flat_dim": self.dim,
            "exact": self.exact,
            "covectors": [
                [str(x) if isinstance(x, Fraction) else float(x) for x in c]
                for c in self.covectors
            ],
        }


@dataclass(frozen=True)
class RegularityVerdict:
    regular: bool
    rank_report: RankReport
    configuration: Configuration
    lifted: LiftedMatrix
    hyperplane_witness: FlatWitness | None = None

    def to_dict(self) -> dict:
        return {
            "regular": self.regular,
            "rank": self.rank_report.to_dict(),
            "configuration": self.configuration.to_dict(),
            "witness": self.hyperplane_witness.to_dict()
            if self.hyperplane_witness
            else None,
        }


def _use_exact(spec: EmbeddingSpec, config: Configuration, exact) -> bool:
    possible = spec.exact_capable and config.is_rational
    if exact is None:
        return possible
    return bool(exact) and possible


def lifted_matrix(
    spec: EmbeddingSpec, config: Configuration, exact: bool | None = None
) -> LiftedMatrix:
    """Lifted columns for ``config`` under ``spec`` in the fixed column order."""
    use_exact = _use_exact(spec, config, exact)
    cols, labels = [], []

    def point(p):
        return p if use_exact else tuple(float(x) for x in p)

    for x in config.through_points:
        cols.append(_lifted(evaluate_jet(spec, point(x)).value, 1, use_exact))
        labels.append(THROUGH)
    jets = []
    for y, group in zip(config.tangency_points, config.directions):
        jet = evaluate_jet(spec, point(y), [point(u) for u in group])
        jets.append(jet)
        cols.append(_lifted(jet.value, 1, use_exact))
        labels.append(TANGENCY)
    for jet in jets:
        for d in jet.directional_derivatives:
            cols.append(_lifted(d, 0, use_exact))
            labels.append(DIRECTION)
    if use_exact:
        mat = np.empty((spec.ambient_dim + 1, len(cols)), dtype=object)
        for j, c in enumerate(cols):
            mat[:, j] = c
    else:
        mat = np.column_stack(cols)
    return LiftedMatrix(mat, tuple(labels))


def _lifted(v, last, exact):
    if exact:
        return np.array(list(v) + [last], dtype=object)
    return np.concatenate([np.asarray(v, dtype=float), [float(last)]])


def _witness(lifted: LiftedMatrix, report: RankReport) -> FlatWitness | None:
    if report.full_rank:
        return None
    rows, cols = lifted.matrix.shape
    n_ambient = rows - 1
    wanted = max(0, rows + 1 - cols)
    if wanted == 0:
        return FlatWitness((), n_ambient, report.exact)
    if report.exact:
        basis = exact_left_null_space(lifted.matrix)[:wanted]
        return FlatWitness(tuple(tuple(w) for w in basis), n_ambient - wanted, True)
    u, _, _ = np.linalg.svd(lifted.as_float(), full_matrices=True)
    covectors = tuple(tuple(u[:, j]) for j in range(rows - 1, rows - 1 - wanted, -1))
    return FlatWitness(covectors, n_ambient - wanted, False)


def _require_points(config: Configuration):
    if config.k == 0 and config.l == 0:
        raise EmptyConfiguration("k and l cannot both be zero")


def check_configuration(
    spec: EmbeddingSpec,
    config: Configuration,
    tol: float = DEFAULT_TOL,
    delta_min: float = DEFAULT_DELTA_MIN,
    exact: bool | None = None,
) -> RegularityVerdict:
    """Decide affine independence of the configuration's images.

    Exact rational arithmetic is used whenever the map is polynomial and
    every coordinate of the configuration is rational (pass ``exact=False``
    to force floating point).
    """
    _require_points(config)
    config.validate(spec.domain, delta_min)
    lifted = lifted_matrix(spec, config, exact)
    report = exact_rank(lifted) if lifted.is_exact else rank_and_margin(lifted, tol)
    return RegularityVerdict(
        report.full_rank, report, config, lifted, _witness(lifted, report)
    )


def check_subspace_configuration(
    spec: EmbeddingSpec,
    config: Configuration,
    tol: float = DEFAULT_TOL,
    delta_min: float = DEFAULT_DELTA_MIN,
    exact: bool | None = None,
    orthonormal_tol: float = 1e-9,
) -> RegularityVerdict:
    """Like :func:`check_configuration` with a tangent subspace per tangency.

    Each direction group must be orthonormal in the chart and of dimension
    at most the chart dimension.
    """
    _require_points(config)
    n = spec.domain.dim
    for j, group in enumerate(config.directions):
        if len(group) > n:
            raise InvalidParameter(f"subspace {j} has dim {len(group)} > chart dim {n}")
        g = np.array(group, dtype=float)
        if g.size and np.max(np.abs(g @ g.T - np.eye(len(group)))) > orthonormal_tol:
            raise InvalidParameter(f"directions at tangency {j} are not orthonormal")
    return check_configuration(spec, config, tol, delta_min, exact)


def find_violating_hyperplane(
    spec: EmbeddingSpec,
    config: Configuration,
    tol: float = DEFAULT_TOL,
    delta_min: float = DEFAULT_DELTA_MIN,
) -> FlatWitness | None:
    """Flat through the through points and tangent at the tangency points.

    Its dimension is ``columns - 2`` (``k + (n+1)l - 2`` with full tangent
    spaces), or the whole space when the ambient dimension is smaller.
    Returns None for a regular configuration.
    """
    return check_configuration(spec, config, tol, delta_min).hyperplane_witness


# --------------------------------------------------------------------------
# confluent Vandermonde certificate for the moment curve


def _rational(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def confluent_vandermonde_product(simple_nodes, double_nodes) -> Fraction:
    """prod_{i<j} |t_i - t_j|**(mu_i mu_j), mu = 1 simple, 2 double."""
    nodes = [(_rational(t), 1) for t in simple_nodes]
    nodes += [(_rational(t), 2) for t in double_nodes]
    out = Fraction(1)
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            out *= abs(nodes[i][0] - nodes[j][0]) ** (nodes[i][1] * nodes[j][1])
    return out


def confluent_vandermonde_matrix(simple_nodes, double_nodes) -> np.ndarray:
    """Lifted moment-curve matrix in R^{k+2l}: simple columns, then per
    double node its point column followed by its derivative column."""
    simple = [_rational(t) for t in simple_nodes]
    double = [_rational(t) for t in double_nodes]
    m = len(simple) + 2 * len(double) - 1
    if m < 1:
        raise InvalidParameter("need k + 2l >= 2 nodes counted with multiplicity")
    allnodes = simple + double
    if len(set(allnodes)) != len(allnodes):
        raise DistinctnessViolation("nodes must be pairwise distinct")
    curve = MomentCurve(m)
    cols = [_lifted(evaluate_jet(curve, t).value, 1, True) for t in simple]
    for s in double:
        jet = evaluate_jet(curve, s, [1])
        cols.append(_lifted(jet.value, 1, True))
        cols.append(_lifted(jet.directional_derivatives[0], 0, True))
    mat = np.empty((m + 1, m + 1), dtype=object)
    for j, c in enumerate(cols):
        mat[:, j] = c
    return mat


def confluent_vandermonde_certificate(simple_nodes, double_nodes) -> Fraction:
    """Exact determinant of the lifted moment-curve matrix.

    A nonzero value certifies that the simple nodes and the tangent lines at
    the double nodes are affinely independent on the curve of degree
    ``k + 2l - 1``.  The determinant is cross-checked against the product
    formula before it is returned.
    """
    det = exact_determinant(confluent_vandermonde_matrix(simple_nodes, double_nodes))
    expected = confluent_vandermonde_product(simple_nodes, double_nodes)
    if abs(det) != expected:
        raise ArithmeticError(f"|det| = {abs(det)} disagrees with product {expected}")
    return det


# --------------------------------------------------------------------------
# one-sidedness near a tangency


@dataclass(frozen=True)
class CrossingProbe:
    offsets: tuple
    values: tuple
    signs: tuple
    curvature_sign: int

    @property
    def one_sided(self) -> bool:
        return all(s == self.curvature_sign for s in self.signs)


def tangency_crossing_probe(
    spec: EmbeddingSpec,
    point,
    direction,
    hyperplane,
    steps: int = 6,
    radius: float = 1e-3,
    tol: float = 1e-8,
) -> CrossingProbe:
    """Sample ``<n, f(p + t u)> + c`` at t = +-radius/2**j, j < steps.

    The hyperplane must pass through f(p), contain df(u), and not contain the
    second derivative; near such a tangency the curve stays on one side.
    """
    normal, offset = hyperplane
    normal = np.asarray(normal, dtype=float)
    offset = float(offset)
    n = spec.domain.dim
    p = np.asarray(point, dtype=float).reshape(n)
    u = np.asarray(direction, dtype=float).reshape(n)
    if not np.any(u):
        raise DegenerateDirection("zero direction")
    f0 = spec.values(p[None])[0]
    d1 = spec.differentials(p[None], u[None])[0]
    d2 = spec.second_differentials(p[None], u[None])[0]
    nn = np.linalg.norm(normal)
    if np.linalg.norm(d1) == 0:
        raise DegenerateDirection("map is not immersive along the direction")
    if abs(normal @ f0 + offset) > tol * nn * max(1.0, np.linalg.norm(f0)):
        raise NotATangency("hyperplane does not pass through the point")
    if abs(normal @ d1) > tol * nn * np.linalg.norm(d1):
        raise NotATangency("hyperplane does not contain the tangent direction")
    curv = normal @ d2
    if abs(curv) <= tol * nn * max(1.0, np.linalg.norm(d2)):
        raise DegenerateCurvature("hyperplane is not transverse to the curvature")
    ts = [radius / 2**j for j in range(steps)]
    offsets = tuple(-t for t in ts) + tuple(ts)
    pts = np.array([p + t * u for t in offsets])
    vals = spec.values(pts) @ normal + offset
    signs = tuple(int(np.sign(v)) for v in vals)
    return CrossingProbe(offsets, tuple(float(v) for v in vals), signs, int(np.sign(curv)))


def sub_configurations(config: Configuration) -> list[Configuration]:
    """Every configuration obtained by dropping one point (either role)."""
    out = []
    for i in range(config.k):
        tp = config.through_points[:i] + config.through_points[i + 1:]
        if tp or config.l:
            out.append(Configuration(tp, config.tangency_points, config.directions))
    for j in range(config.l):
        yp = config.tangency_points[:j] + config.tangency_points[j + 1:]
        dp = config.directions[:j] + config.directions[j + 1:]
        if yp or config.k:
            out.append(Configuration(config.through_points, yp, dp))
    return out


def margin_scale(report: RankReport) -> float:
    return report.scale if math.isfinite(report.scale) else 1.0
