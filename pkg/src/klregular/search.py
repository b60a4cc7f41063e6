"""Randomized and adversarial hunting for regularity violations.

Both searches score a configuration by its margin, the smallest singular
value of the lifted matrix.  Random streams are derived from one seed and
split per chunk (sampling) or per restart (search), so results do not depend
on the order in which the pieces are evaluated.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .embeddings import Configuration, EmbeddingSpec
from .errors import EmptyConfiguration, InvalidParameter
from .lift import DEFAULT_TOL, batched_margins

log = logging.getLogger(__name__)

SEARCH_DELTA_MIN = 0.05
STALL_WINDOW = 50
STALL_RTOL = 1e-12


@dataclass(frozen=True)
class SearchReport:
    best_margin: float
    best_configuration: Configuration
    iterations_used: int
    restarts: int
    seed: int
    converged: bool
    best_scale: float = 1.0
    tolerance: float = DEFAULT_TOL
    violations: int = 0
    stalled: bool = False

    @property
    def relative_margin(self) -> float:
        return self.best_margin / self.best_scale

    def to_dict(self) -> dict:
        return {
            "best_margin": self.best_margin,
            "best_scale": self.best_scale,
            "relative_margin": self.relative_margin,
            "best_configuration": self.best_configuration.to_dict(),
            "iterations_used": self.iterations_used,
            "restarts": self.restarts,
            "seed": self.seed,
            "converged": self.converged,
            "stalled": self.stalled,
            "violations": self.violations,
            "tolerance": self.tolerance,
        }


def _check_kl(k: int, l: int):
    if k < 0 or l < 0:
        raise InvalidParameter("k and l must be non-negative")
    if k == 0 and l == 0:
        raise EmptyConfiguration("k and l cannot both be zero")


def lifted_stack(spec: EmbeddingSpec, X, Y, U) -> np.ndarray:
    """Batched lifted matrices, shape (B, N+1, k+2l).

    X: (B, k, n) through points, Y: (B, l, n) tangency points, U: (B, l, n)
    one direction per tangency point.
    """
    B, k, n = X.shape
    l = Y.shape[1]
    N = spec.ambient_dim
    blocks = []
    if k:
        fx = spec.values(X.reshape(-1, n)).reshape(B, k, N)
        blocks.append(np.concatenate([fx, np.ones((B, k, 1))], axis=2))
    if l:
        fy = spec.values(Y.reshape(-1, n)).reshape(B, l, N)
        du = spec.differentials(Y.reshape(-1, n), U.reshape(-1, n)).reshape(B, l, N)
        blocks.append(np.concatenate([fy, np.ones((B, l, 1))], axis=2))
        blocks.append(np.concatenate([du, np.zeros((B, l, 1))], axis=2))
    return np.transpose(np.concatenate(blocks, axis=1), (0, 2, 1)).astype(float)


def _min_pairwise(spec: EmbeddingSpec, P: np.ndarray) -> np.ndarray:
    """Smallest chart distance among the points of each batch row."""
    B, c, _ = P.shape
    if c < 2:
        return np.full(B, np.inf)
    i, j = np.triu_indices(c, 1)
    d = spec.domain.distance(P[:, i, :], P[:, j, :])
    return d.min(axis=1)


def _feasibility_precheck(box, count, delta_min):
    if count < 2:
        return
    for lo, hi, periodic in box:
        if len(box) == 1:
            room = (hi - lo) if periodic else (hi - lo) + delta_min
            if count * delta_min > room:
                raise InvalidParameter(
                    f"cannot place {count} points {delta_min:g} apart in [{lo}, {hi}]"
                )


def _uniform(rng, box, shape):
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return lo + (hi - lo) * rng.random(shape + (len(box),))


def _random_directions(rng, shape, n):
    if n == 1:
        return rng.choice([-1.0, 1.0], size=shape + (1,))
    u = rng.standard_normal(shape + (n,))
    return u / np.linalg.norm(u, axis=-1, keepdims=True)


def sample_configurations(spec, k, l, size, delta_min, rng, box=1.0, max_rounds=200):
    """Uniform configurations in the chart box, redrawn until feasible."""
    pbox = spec.parameter_box(box)
    n = spec.domain.dim
    _feasibility_precheck(pbox, k + l, delta_min)
    P = _uniform(rng, pbox, (size, k + l))
    bad = _min_pairwise(spec, P) < delta_min
    rounds = 0
    while bad.any():
        rounds += 1
        if rounds > max_rounds:
            raise InvalidParameter(
                f"could not place {k + l} points at distance >= {delta_min:g}"
            )
        P[bad] = _uniform(rng, pbox, (int(bad.sum()), k + l))
        bad = _min_pairwise(spec, P) < delta_min
    U = _random_directions(rng, (size, l), n)
    return P[:, :k], P[:, k:], U


def _to_configuration(x, y, u) -> Configuration:
    return Configuration(
        tuple(tuple(float(c) for c in p) for p in x),
        tuple(tuple(float(c) for c in p) for p in y),
        tuple(((tuple(float(c) for c in d)),) for d in u),
    )


def sample_verify(
    spec: EmbeddingSpec,
    k: int,
    l: int,
    num_samples: int,
    delta_min: float = 1e-6,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    box: float = 1.0,
    chunk: int = 4096,
    workers: int = 1,
) -> SearchReport:
    """Check ``num_samples`` random configurations; report the worst one.

    A sample counts as a violation when its margin is at most ``tol`` times
    its largest singular value.
    """
    _check_kl(k, l)
    if num_samples < 1:
        raise InvalidParameter("num_samples must be >= 1")
    sizes = [min(chunk, num_samples - s) for s in range(0, num_samples, chunk)]
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(idx):
        rng = np.random.default_rng(seqs[idx])
        X, Y, U = sample_configurations(spec, k, l, sizes[idx], delta_min, rng, box)
        margins, scales = batched_margins(lifted_stack(spec, X, Y, U))
        viol = int(np.sum(margins <= tol * scales))
        j = int(np.argmin(margins))
        return margins[j], scales[j], viol, (X[j], Y[j], U[j])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(len(sizes))))
    else:
        results = [run(i) for i in range(len(sizes))]
    best = min(range(len(results)), key=lambda i: (results[i][0], i))
    margin, scale, _, xyu = results[best]
    violations = sum(r[2] for r in results)
    return SearchReport(
        best_margin=float(margin),
        best_configuration=_to_configuration(*xyu),
        iterations_used=num_samples,
        restarts=len(sizes),
        seed=seed,
        converged=violations > 0,
        best_scale=float(scale),
        tolerance=tol,
        violations=violations,
    )


class _Objective:
    """Margin of a flat parameter vector, +inf when infeasible."""

    def __init__(self, spec, k, l, delta_min, box, weighted=False):
        self.spec, self.k, self.l = spec, k, l
        self.weighted = weighted
        self.n = spec.domain.dim
        self.delta_min = delta_min
        self.box = spec.parameter_box(box)
        self.n_dir = l * self.n if self.n > 1 else 0
        self.size = (k + l) * self.n + self.n_dir
        self.evaluations = 0
        lo, hi, per = [], [], []
        for _ in range(k + l):
            for b in self.box:
                lo.append(b[0])
                hi.append(b[1])
                per.append(b[2])
        self.lo = np.array(lo + [-np.inf] * self.n_dir)
        self.hi = np.array(hi + [np.inf] * self.n_dir)
        self.periodic = np.array(per + [False] * self.n_dir)
        width = np.where(np.isfinite(self.hi - self.lo), self.hi - self.lo, 2.0)
        self.initial_step = 0.25 * width

    def project(self, theta):
        theta = theta.copy()
        per = self.periodic
        if per.any():
            span = self.hi[per] - self.lo[per]
            theta[per] = np.mod(theta[per] - self.lo[per], span) + self.lo[per]
        return np.clip(theta, self.lo, self.hi)

    def unpack(self, theta):
        n, k, l = self.n, self.k, self.l
        pts = theta[: (k + l) * n].reshape(k + l, n)
        if n == 1:
            dirs = np.ones((l, 1))
        else:
            dirs = theta[(k + l) * n:].reshape(l, n)
            norms = np.linalg.norm(dirs, axis=1, keepdims=True)
            if np.any(norms < 1e-12):
                return None
            dirs = dirs / norms
        return pts[:k], pts[k:], dirs

    def __call__(self, theta):
        """(objective, margin, scale); the objective is the margin, or the
        margin divided by the point separation when ``weighted``."""
        self.evaluations += 1
        parts = self.unpack(theta)
        if parts is None:
            return math.inf, math.inf, 1.0
        x, y, u = parts
        P = np.concatenate([x, y])[None]
        sep = _min_pairwise(self.spec, P)[0]
        if sep < self.delta_min:
            return math.inf, math.inf, 1.0
        m, s = batched_margins(lifted_stack(self.spec, x[None], y[None], u[None]))
        m = float(m[0])
        value = m / sep if self.weighted and math.isfinite(sep) else m
        return value, m, float(s[0])

    def pack(self, config: Configuration):
        pts = [c for p in config.through_points + config.tangency_points for c in p]
        dirs = []
        if self.n > 1:
            dirs = [c for g in config.directions for c in g[0]]
        return np.array(pts + dirs, dtype=float)


def _pattern_search(obj: _Objective, theta, iters, tol):
    """Coordinate polling with per-coordinate step expansion and shrinking."""
    theta = obj.project(theta)
    f, margin, scale = obj(theta)
    step = obj.initial_step.copy()
    history = [f]
    stalled = False
    it = 0
    for it in range(1, iters + 1):
        improved = False
        for i in range(obj.size):
            for sgn in (1.0, -1.0):
                cand = theta.copy()
                cand[i] += sgn * step[i]
                cand = obj.project(cand)
                fc, mc, sc = obj(cand)
                if fc < f:
                    theta, f, margin, scale = cand, fc, mc, sc
                    step[i] = min(step[i] * 1.5, obj.initial_step[i])
                    improved = True
                    break
            else:
                step[i] *= 0.5
        history.append(f)
        if margin <= tol * scale:
            break
        if len(history) > STALL_WINDOW:
            old = history[-STALL_WINDOW - 1]
            if math.isfinite(old) and old - f <= STALL_RTOL * old:
                stalled = True
                break
        if not improved and np.all(step < 1e-300):
            stalled = True
            break
    return theta, margin, scale, it, stalled


def _polish(obj: _Objective, theta, max_nfev=400):
    """Gauss-Newton refinement of a near-violation.

    Solves ``M(theta) c = 0, |c| = 1`` jointly in the configuration and a
    null vector ``c``, starting from the smallest right singular vector.  The
    margin can only be driven to zero where a genuine dependency exists, so
    this turns a slow valley crawl of the pattern search into quadratic
    convergence.  Returns ``(theta, margin, scale)`` or None.
    """
    parts = obj.unpack(theta)
    if parts is None:
        return None
    x, y, u = parts
    m0 = lifted_stack(obj.spec, x[None], y[None], u[None])[0]
    rows, cols = m0.shape
    if cols > rows:
        return None
    c0 = np.linalg.svd(m0)[2][-1]
    size = obj.size
    bad = np.full(rows + 1, 1e3)

    def residual(z):
        parts = obj.unpack(z[:size])
        if parts is None:
            return bad
        x, y, u = parts
        m = lifted_stack(obj.spec, x[None], y[None], u[None])[0]
        c = z[size:]
        return np.concatenate([m @ c, [c @ c - 1.0]])

    lo = np.where(obj.periodic, -np.inf, obj.lo)
    hi = np.where(obj.periodic, np.inf, obj.hi)
    lo = np.concatenate([lo, np.full(cols, -np.inf)])
    hi = np.concatenate([hi, np.full(cols, np.inf)])
    z0 = np.clip(np.concatenate([theta, c0]), lo, hi)
    try:
        res = least_squares(
            residual, z0, bounds=(lo, hi), method="trf", max_nfev=max_nfev,
            xtol=1e-15, ftol=1e-15, gtol=1e-15,
        )
    except (ValueError, np.linalg.LinAlgError):
        return None
    th = obj.project(res.x[:size])
    _, margin, scale = obj(th)
    if not math.isfinite(margin):
        return None
    return th, margin, scale


def adversarial_search(
    spec: EmbeddingSpec,
    k: int,
    l: int,
    restarts: int = 10,
    iters: int = 500,
    delta_min: float = SEARCH_DELTA_MIN,
    box: float = 1.0,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    starts=(),
    stop_on_violation: bool = False,
    separation_weighted: bool = False,
    polish: bool = True,
) -> SearchReport:
    """Minimize the margin over configuration space from random restarts.

    Each restart is a derivative-free coordinate search.  Points closer than
    ``delta_min`` are infeasible, since colliding points shrink the margin
    without being a genuine violation.  ``starts`` optionally supplies
    configurations used as the first starting points.

    With ``separation_weighted`` the search minimizes margin divided by the
    smallest point separation, which keeps it away from the ``delta_min``
    boundary and toward collisions of well separated points.  With
    ``polish`` each restart that ends above the tolerance gets a short
    least-squares refinement toward an exact dependency.
    """
    _check_kl(k, l)
    if restarts < 1 or iters < 1:
        raise InvalidParameter("restarts and iters must be >= 1")
    obj = _Objective(spec, k, l, delta_min, box, separation_weighted)
    seqs = np.random.SeedSequence(seed).spawn(restarts)
    starts = list(starts)
    best = None
    total_iters = 0
    any_stall = False
    for r in range(restarts):
        rng = np.random.default_rng(seqs[r])
        if r < len(starts):
            theta0 = obj.pack(starts[r])
        else:
            X, Y, U = sample_configurations(spec, k, l, 1, delta_min, rng, box)
            cfg = _to_configuration(X[0], Y[0], U[0])
            theta0 = obj.pack(cfg)
        theta, f, scale, used, stalled = _pattern_search(obj, theta0, iters, tol)
        total_iters += used
        any_stall = any_stall or stalled
        if polish and f > tol * scale:
            refined = _polish(obj, theta)
            if refined is not None and refined[1] < f:
                theta, f, scale = refined
        log.debug("restart %d: margin %.3e after %d sweeps", r, f, used)
        if best is None or f < best[1]:
            best = (theta, f, scale)
        if stop_on_violation and f <= tol * scale:
            break
    theta, f, scale = best
    x, y, u = obj.unpack(theta)
    return SearchReport(
        best_margin=float(f),
        best_configuration=_to_configuration(x, y, u),
        iterations_used=total_iters,
        restarts=restarts,
        seed=seed,
        converged=bool(f <= tol * scale),
        best_scale=float(scale),
        tolerance=tol,
        violations=int(f <= tol * scale),
        stalled=any_stall,
    )
