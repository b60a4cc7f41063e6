"""Incidence functions of hyperplanes with curves, and real-root counting.

A hyperplane ``<n, x> + c = 0`` meets the moment curve where the polynomial
``c + n_1 t + ... + n_m t^m`` vanishes, and meets the trigonometric curve where
``c + sum(a_j cos(j a) + b_j sin(j a))`` vanishes; tangency shows up as a
multiple root.  Roots are counted with multiplicity: exactly (square-free
decomposition plus Sturm sequences over Q) for rational coefficients, and by
clustering companion-matrix eigenvalues otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .embeddings import CoordinateMap, EmbeddingSpec, MomentCurve, TrigCurve
from .errors import InvalidParameter, ZeroFunction
from .lift import is_rational

MONOMIAL = "monomial"
TRIGONOMETRIC = "trigonometric"


@dataclass(frozen=True)
class IncidencePolynomial:
    """Scalar function in a fixed basis.

    monomial: ``coefficients[i]`` multiplies ``t**i``.
    trigonometric: ``(a_0, a_1, b_1, ..., a_h, b_h)`` for
    ``a_0 + sum a_j cos(j x) + b_j sin(j x)``.
    """

    basis: str
    coefficients: tuple

    @property
    def degree(self) -> int:
        if self.basis == MONOMIAL:
            return len(self.coefficients) - 1
        return (len(self.coefficients) - 1) // 2

    @property
    def exact(self) -> bool:
        return all(is_rational(c) for c in self.coefficients)

    def __call__(self, x):
        c = self.coefficients
        if self.basis == MONOMIAL:
            acc = 0 * x
            for a in reversed(c):
                acc = acc * x + a
            return acc
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, float(c[0]))
        for j in range(1, self.degree + 1):
            out = out + float(c[2 * j - 1]) * np.cos(j * x) + float(c[2 * j]) * np.sin(j * x)
        return out


def _base_curve(spec: EmbeddingSpec):
    if isinstance(spec, CoordinateMap):
        return spec.base
    return spec


def incidence_polynomial(spec: EmbeddingSpec, hyperplane) -> IncidencePolynomial:
    """Restrict ``<normal, x> + offset`` to a moment or trigonometric curve.

    Coordinate truncations and zero paddings of those curves are accepted;
    dropped coordinates simply get a zero coefficient.
    """
    normal, offset = hyperplane
    normal = list(np.asarray(normal, dtype=object).reshape(-1))
    if len(normal) != spec.ambient_dim:
        raise InvalidParameter(
            f"normal has {len(normal)} entries, map lands in R^{spec.ambient_dim}"
        )
    if not any(x != 0 for x in normal):
        raise InvalidParameter("hyperplane normal is zero")
    base = _base_curve(spec)
    if not isinstance(base, (MomentCurve, TrigCurve)):
        raise InvalidParameter(f"no incidence polynomial for {spec.describe()}")
    full = (normal + [0] * base.ambient_dim)[: base.ambient_dim]
    coeffs = [offset] + full
    if not all(is_rational(c) for c in coeffs):
        coeffs = [float(c) for c in coeffs]
    basis = MONOMIAL if isinstance(base, MomentCurve) else TRIGONOMETRIC
    return IncidencePolynomial(basis, tuple(coeffs))


# --------------------------------------------------------------------------
# dense polynomials as coefficient lists, lowest degree first


def _trim(p: list) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _deriv(p: list) -> list:
    return _trim([i * p[i] for i in range(1, len(p))])


def _sub(p: list, q: list) -> list:
    n = max(len(p), len(q))
    p = p + [0] * (n - len(p))
    q = q + [0] * (n - len(q))
    return _trim([a - b for a, b in zip(p, q)])


def _mul(p: list, q: list) -> list:
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _trim(out)


def _divmod(p: list, q: list) -> tuple[list, list]:
    p, q = _trim(p), _trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [Fraction(0)] * max(len(p) - len(q) + 1, 1)
    rem = [Fraction(x) for x in p]
    lead = Fraction(q[-1])
    while len(rem) >= len(q) and rem:
        shift = len(rem) - len(q)
        f = rem[-1] / lead
        quot[shift] = f
        for i, b in enumerate(q):
            rem[shift + i] -= f * b
        rem = _trim(rem)
    return _trim(quot), rem


def _monic(p: list) -> list:
    p = _trim(p)
    lead = Fraction(p[-1])
    return [Fraction(x) / lead for x in p]


def _gcd(p: list, q: list) -> list:
    p, q = _trim(p), _trim(q)
    while q:
        p, q = q, _divmod(p, q)[1]
    return _monic(p) if p else []


def square_free_decomposition(p: Sequence) -> list[tuple[list, int]]:
    """Yun's algorithm over Q: pairs (f_i, i) with p = c * prod f_i**i."""
    a = _trim([Fraction(x) for x in p])
    if not a:
        raise ZeroFunction("zero polynomial")
    if len(a) == 1:
        return []
    b = _deriv(a)
    c = _gcd(a, b)
    w = _divmod(a, c)[0]
    y = _divmod(b, c)[0]
    z = _sub(y, _deriv(w))
    out, i = [], 1
    while len(w) > 1:
        g = _gcd(w, z) if z else _monic(w)
        if len(g) > 1:
            out.append((g, i))
        w = _divmod(w, g)[0]
        y = _divmod(z, g)[0] if z else []
        z = _sub(y, _deriv(w))
        i += 1
    return out


def _sign_at(p: list, x) -> int:
    if x == math.inf:
        return int(np.sign(p[-1]))
    if x == -math.inf:
        return int(np.sign(p[-1])) * (-1 if (len(p) - 1) % 2 else 1)
    acc = Fraction(0)
    for a in reversed(p):
        acc = acc * x + a
    return (acc > 0) - (acc < 0)


def _sturm_chain(p: list) -> list[list]:
    chain = [_trim(p), _deriv(p)]
    while chain[-1]:
        r = _divmod(chain[-2], chain[-1])[1]
        if not r:
            break
        chain.append([-x for x in r])
    return [c for c in chain if c]


def _variations(chain: list[list], x) -> int:
    signs = [s for s in (_sign_at(c, x) for c in chain) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_distinct_real_roots(p: Sequence, lo=-math.inf, hi=math.inf) -> int:
    """Distinct real roots of a square-free rational polynomial in [lo, hi]."""
    p = _trim([Fraction(x) for x in p])
    if len(p) <= 1:
        return 0
    chain = _sturm_chain(p)
    count = _variations(chain, lo) - _variations(chain, hi)
    if lo != -math.inf and _sign_at(p, lo) == 0:
        count += 1
    return count


def _exact_count(coeffs, lo, hi) -> int:
    parts = square_free_decomposition(coeffs)
    return sum(mult * count_distinct_real_roots(f, lo, hi) for f, mult in parts)


def _cluster_roots(roots: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    """Single-link clustering; each cluster is one root with multiplicity."""
    remaining = list(roots)
    clusters = []
    while remaining:
        group = [remaining.pop(0)]
        grown = True
        while grown:
            grown = False
            for r in list(remaining):
                if any(abs(r - g) <= tol * max(1.0, abs(g)) for g in group):
                    group.append(r)
                    remaining.remove(r)
                    grown = True
        clusters.append((complex(np.mean(group)), len(group)))
    return clusters


def _numeric_count(coeffs, lo, hi, tol) -> int:
    c = np.array([float(x) for x in _trim(list(coeffs))])
    if c.size <= 1:
        return 0
    roots = np.roots(c[::-1])
    total = 0
    for r, mult in _cluster_roots(roots, tol):
        if abs(r.imag) <= tol * max(1.0, abs(r)) and lo <= r.real <= hi:
            total += mult
    return total


def _binomial_expansion(n: int) -> tuple[list, list]:
    """Real and imaginary parts of (1 + i x)**n as integer coefficient lists."""
    re = [0] * (n + 1)
    im = [0] * (n + 1)
    for r in range(n + 1):
        c = math.comb(n, r)
        if r % 2 == 0:
            re[r] = c * (-1) ** (r // 2)
        else:
            im[r] = c * (-1) ** ((r - 1) // 2)
    return re, im


def trig_to_polynomial(p: IncidencePolynomial) -> list:
    """Half-angle substitution x = tan(a/2).

    Returns P with f(a) * (1 + x^2)^h = P(x).  Roots in (-pi, pi) correspond
    one-to-one to real roots of P; a root at a = pi has multiplicity
    2h - deg P.
    """
    h = p.degree
    c = p.coefficients
    one_plus_x2 = [1, 0, 1]

    def power(q, e):
        out = [1]
        for _ in range(e):
            out = _mul(out, q)
        return out

    total = _mul([c[0]], power(one_plus_x2, h))
    for j in range(1, h + 1):
        re, im = _binomial_expansion(2 * j)
        term = [c[2 * j - 1] * a + c[2 * j] * b for a, b in zip(re, im)]
        total = _add(total, _mul(term, power(one_plus_x2, h - j)))
    return total


def _add(p, q):
    n = max(len(p), len(q))
    p = list(p) + [0] * (n - len(p))
    q = list(q) + [0] * (n - len(q))
    return _trim([a + b for a, b in zip(p, q)])


def count_roots_with_multiplicity(
    p: IncidencePolynomial, domain=None, multiplicity_tol: float = 1e-6
) -> int:
    """Real zeros counted with multiplicity.

    ``domain`` is a closed interval ``(lo, hi)`` (infinite ends allowed) for
    the monomial basis, default the whole line.  Trigonometric functions are
    always counted over a full period [0, 2*pi).
    """
    if not any(x != 0 for x in p.coefficients):
        raise ZeroFunction("all coefficients are zero")
    exact = p.exact
    if p.basis == MONOMIAL:
        lo, hi = domain if domain is not None else (-math.inf, math.inf)
        if exact:
            return _exact_count(p.coefficients, _rat(lo), _rat(hi))
        return _numeric_count(p.coefficients, float(lo), float(hi), multiplicity_tol)
    if p.basis != TRIGONOMETRIC:
        raise InvalidParameter(f"unknown basis {p.basis!r}")
    poly = trig_to_polynomial(p)
    if exact:
        finite = _exact_count(poly, -math.inf, math.inf)
    else:
        finite = _numeric_count(poly, -math.inf, math.inf, multiplicity_tol)
    at_pi = 2 * p.degree - (len(poly) - 1)
    return finite + at_pi


def _rat(x):
    if x in (math.inf, -math.inf):
        return x
    return Fraction(x)
