"""Dimension reduction by repeated central projection.

A (k,l)-regular map stays regular after projecting centrally from a point
that avoids every affine span of k points and l tangent spaces; that union
has dimension k(n+1) + l(2n+1) - 1, so a random center works as long as the
ambient dimension is larger.  Each step here is re-validated by sampling and
a short adversarial search, which is evidence, not proof.

Projection convention: the image is first normalized affinely (centered at
the sample mean, scaled into the ball of radius 1/2), then projected from the
center ``A`` onto the hyperplane through the origin orthogonal to ``A``.
With ``|A| = 1`` the center sits at distance 1 from that hyperplane and the
denominators stay in [1/2, 3/2].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingSpec, _batch
from .errors import (
    EmptyConfiguration,
    InvalidParameter,
    ProjectionSingularity,
    ReductionFailed,
    StepRejected,
)
from .lift import DEFAULT_TOL
from .search import SearchReport, adversarial_search, sample_configurations, sample_verify

log = logging.getLogger(__name__)

DEFAULT_RETRIES = 32
NORMALIZATION_SAMPLES = 4096


def span_union_dimension(n: int, k: int, l: int) -> int:
    """Dimension of the union of affine spans of k points and l tangent spaces."""
    if k == 0 and l == 0:
        raise EmptyConfiguration("k and l cannot both be zero")
    return k * (n + 1) + l * (2 * n + 1) - 1


def _complement_basis(a: np.ndarray) -> np.ndarray:
    """Orthonormal rows spanning the orthogonal complement of ``a``.

    Householder reflection sending a/|a| to the last axis; for a = e_N the
    basis is e_1..e_{N-1} exactly.
    """
    n = a.shape[0]
    ahat = a / np.linalg.norm(a)
    v = ahat.copy()
    v[-1] -= 1.0
    vv = v @ v
    if vv < 1e-28:
        return np.eye(n)[:-1]
    h = np.eye(n) - 2.0 * np.outer(v, v) / vv
    return h[:-1]


class ProjectedMap(EmbeddingSpec):
    """Central projection of an affinely normalized map, one dimension down."""

    kind = "projected"

    def __init__(self, base: EmbeddingSpec, center, shift, scale: float):
        self.base = base
        self.center = np.asarray(center, dtype=float)
        if self.center.shape != (base.ambient_dim,) or not np.any(self.center):
            raise InvalidParameter("center must be a nonzero vector in the ambient space")
        self.shift = np.asarray(shift, dtype=float)
        self.scale = float(scale)
        self.basis = _complement_basis(self.center)
        self._a = self.center / (self.center @ self.center)
        super().__init__(base.ambient_dim - 1, base.domain)

    def normalized(self, values):
        return (np.asarray(values, dtype=float) - self.shift) * self.scale

    def _denominators(self, y):
        d = 1.0 - y @ self._a
        if np.any(np.abs(d) < 1e-12):
            raise ProjectionSingularity("a point maps onto the projection center plane")
        return d

    def values(self, points):
        y = self.normalized(self.base.values(points))
        d = self._denominators(y)
        return (y @ self.basis.T) / d[:, None]

    def differentials(self, points, directions):
        y = self.normalized(self.base.values(points))
        dy = np.asarray(self.base.differentials(points, directions), dtype=float) * self.scale
        d = self._denominators(y)
        by = y @ self.basis.T
        bdy = dy @ self.basis.T
        ddot = dy @ self._a
        return bdy / d[:, None] + by * (ddot / (d * d))[:, None]

    def lifted_map(self) -> np.ndarray:
        """Matrix Q with Q (x, 1) proportional to (P(x), 1) for raw values x."""
        n = self.base.ambient_dim
        t = np.zeros((n + 1, n + 1))
        t[:n, :n] = self.scale * np.eye(n)
        t[:n, n] = -self.scale * self.shift
        t[n, n] = 1.0
        q = np.zeros((n, n + 1))
        q[: n - 1, :n] = self.basis
        q[n - 1, :n] = -self._a
        q[n - 1, n] = 1.0
        return q @ t

    def parameter_box(self, box=1.0):
        return self.base.parameter_box(box)

    def check_domain(self, points):
        self.base.check_domain(points)

    def describe(self):
        return f"projected({self.base.describe()})"


@dataclass(frozen=True)
class ProjectionStep:
    center: np.ndarray
    target_hyperplane: tuple
    input_dim: int
    output_dim: int
    validation: SearchReport
    center_original: np.ndarray | None = None

    def to_dict(self) -> dict:
        normal, offset = self.target_hyperplane
        return {
            "center": [float(x) for x in self.center],
            "center_original": None
            if self.center_original is None
            else [float(x) for x in self.center_original],
            "target_hyperplane": {
                "normal": [float(x) for x in normal],
                "offset": float(offset),
            },
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
            "validation": {
                "min_margin": self.validation.best_margin,
                "relative_margin": self.validation.relative_margin,
                "samples": self.validation.iterations_used,
                "seed": self.validation.seed,
                "violation": self.validation.converged,
            },
        }


@dataclass(frozen=True)
class ReductionPlan:
    steps: list
    start_spec: EmbeddingSpec
    final_spec: EmbeddingSpec
    final_dim: int
    budget: int
    attempts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "start": self.start_spec.describe(),
            "start_dim": self.start_spec.ambient_dim,
            "final_dim": self.final_dim,
            "budget": self.budget,
            "steps": [s.to_dict() for s in self.steps],
            "rejected_centers": self.attempts,
        }


def _normalization(spec: EmbeddingSpec, box: float):
    rng = np.random.default_rng(0x5EED)
    pbox = spec.parameter_box(box)
    lo = np.array([b[0] for b in pbox])
    hi = np.array([b[1] for b in pbox])
    pts = lo + (hi - lo) * rng.random((NORMALIZATION_SAMPLES, len(pbox)))
    vals = np.asarray(spec.values(pts), dtype=float)
    shift = vals.mean(axis=0)
    radius = float(np.max(np.linalg.norm(vals - shift, axis=1)))
    scale = 0.5 / radius if radius > 0 else 1.0
    return shift, scale, pts


def _merge(sampled: SearchReport, searched: SearchReport) -> SearchReport:
    best = searched if searched.relative_margin < sampled.relative_margin else sampled
    return SearchReport(
        best_margin=best.best_margin,
        best_configuration=best.best_configuration,
        iterations_used=sampled.iterations_used,
        restarts=searched.restarts,
        seed=sampled.seed,
        converged=sampled.converged or searched.converged,
        best_scale=best.best_scale,
        tolerance=sampled.tolerance,
        violations=sampled.violations + searched.violations,
    )


def _search_types(k, l, sampled):
    """(k,l) itself, warm-started from the worst sample, then injectivity.

    Dropping direction columns shows (k,l)-regularity implies (k+l, 0)- and
    hence (2, 0)-regularity, and collisions of two images are the cheapest
    violations to find.
    """
    yield k, l, [sampled.best_configuration], 1
    if k + l >= 2 and (k, l) != (2, 0):
        yield 2, 0, [], 6


def project_step(
    spec: EmbeddingSpec,
    center,
    k: int,
    l: int,
    seed: int = 0,
    budget: int = 10_000,
    tol: float = DEFAULT_TOL,
    delta_min: float = 1e-3,
    box: float = 1.0,
    search_restarts: int = 4,
    search_iters: int = 200,
    search_delta_min: float = 0.05,
):
    """Project from ``center`` and re-validate (k,l)-regularity.

    Returns ``(projected_spec, ProjectionStep)``.  Raises StepRejected when
    the validation finds a margin at or below ``tol`` times its scale.
    """
    if budget < 1:
        raise InvalidParameter("budget must be >= 1")
    if spec.ambient_dim < 2:
        raise InvalidParameter("nothing to project in dimension 1")
    shift, scale, pts = _normalization(spec, box)
    projected = ProjectedMap(spec, center, shift, scale)
    projected.values(pts)  # raises ProjectionSingularity
    sampled = sample_verify(projected, k, l, budget, delta_min, seed, tol, box)
    validation = sampled
    for kk, ll, starts, factor in _search_types(k, l, sampled):
        searched = adversarial_search(
            projected,
            kk,
            ll,
            restarts=search_restarts * factor,
            iters=search_iters,
            delta_min=max(delta_min, search_delta_min),
            box=box,
            seed=seed,
            tol=tol,
            starts=starts,
            stop_on_violation=True,
            separation_weighted=(ll == 0),
        )
        validation = _merge(validation, searched)
        if validation.converged:
            break
    a = projected.center
    step = ProjectionStep(
        center=a,
        target_hyperplane=(a, float(-(shift @ a))),
        input_dim=spec.ambient_dim,
        output_dim=projected.ambient_dim,
        validation=validation,
        center_original=shift + a / scale,
    )
    if validation.converged:
        raise StepRejected(
            f"validation margin {validation.best_margin:.3e} at or below tolerance", step
        )
    return projected, step


def reduce_dimension(
    spec: EmbeddingSpec,
    k: int,
    l: int,
    target_dim: int,
    max_retries: int = DEFAULT_RETRIES,
    seed: int = 0,
    budget: int = 10_000,
    tol: float = DEFAULT_TOL,
    delta_min: float = 1e-3,
    box: float = 1.0,
) -> ReductionPlan:
    """Project repeatedly from random unit centers down to ``target_dim``."""
    n = spec.domain.dim
    floor = span_union_dimension(n, k, l)
    if target_dim < floor:
        raise InvalidParameter(f"target {target_dim} is below the generic floor {floor}")
    if max_retries < 1 or budget < 1:
        raise InvalidParameter("max_retries and budget must be >= 1")
    steps, rejected = [], []
    current = spec
    while current.ambient_dim > target_dim:
        idx = len(steps)
        last_error = None
        for attempt in range(max_retries):
            seq = np.random.SeedSequence([seed, idx, attempt])
            rng = np.random.default_rng(seq)
            center = rng.standard_normal(current.ambient_dim)
            center /= np.linalg.norm(center)
            step_seed = int(seq.generate_state(1)[0])
            try:
                projected, step = project_step(
                    current, center, k, l, step_seed, budget, tol, delta_min, box
                )
            except (StepRejected, ProjectionSingularity) as exc:
                log.info("step %d attempt %d rejected: %s", idx, attempt, exc)
                last_error = exc
                rejected.append({"step": idx, "attempt": attempt, "reason": str(exc)})
                continue
            steps.append(step)
            current = projected
            break
        else:
            diag = {"step": idx, "dim": current.ambient_dim, "attempts": max_retries}
            if isinstance(last_error, StepRejected) and last_error.step is not None:
                diag["last"] = last_error.step.to_dict()
            raise ReductionFailed(f"no acceptable center after {max_retries} tries", diag)
    return ReductionPlan(steps, spec, current, current.ambient_dim, budget, rejected)


def random_feasible_points(spec, count, seed=0, box=1.0, delta_min=1e-3):
    """Helper for tests and the CLI: ``count`` distinct chart points."""
    rng = np.random.default_rng(seed)
    X, Y, _ = sample_configurations(spec, count, 0, 1, delta_min, rng, box)
    return _batch(X[0], spec.domain.dim)
