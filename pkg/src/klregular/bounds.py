"""Dimension bounds for (k,l)-regular maps of an n-manifold.

All brackets are floors, so floor((k-1)/2) is -1 at k = 0.  Each value is
tagged with where it comes from; exact values that are not formulas live in
``KNOWN_VALUES`` with their citation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .errors import EmptyConfiguration, InvalidParameter

# (n, k, l, closed) -> (value, citation)
KNOWN_VALUES = {
    (1, 0, 2, False): (3, "totally skew embeddings: N(R^1) = 3 (Ghomi-Tabachnikov)"),
    (1, 0, 2, True): (4, "totally skew embeddings: N(S^1) = 4 (Ghomi-Tabachnikov)"),
    (2, 0, 2, False): (6, "totally skew embeddings: N(R^2) = 6 (Ghomi-Tabachnikov)"),
}

SOURCES = {
    "lower_count": "parameter count: k + (n+1) l - 1",
    "lower_main": "floor(k/2) n + floor((k-1)/2) + (n+1) l",
    "lower_closed": "closed manifolds, k = 0: (n+1) l",
    "upper_main": "generic position: (n+1) k + (2n+1) l - 1",
    "brs_lower": "Boltyanski-Ryzhkov-Shashkin, linear k-regular maps of R^n",
    "exact_curve": "curves: k + 2l - 1 on R, k + 2l (k even) or k + 2l - 1 (k odd) on S^1",
}


def _check(n: int, k: int, l: int) -> None:
    for name, v in (("n", n), ("k", k), ("l", l)):
        if int(v) != v or v < 0:
            raise InvalidParameter(f"{name} must be a nonnegative integer, got {v!r}")
    if k == 0 and l == 0:
        raise EmptyConfiguration("k and l cannot both be zero")


def lower_bound_count(n: int, k: int, l: int) -> int:
    _check(n, k, l)
    return k + (n + 1) * l - 1


def lower_bound_main(n: int, k: int, l: int) -> int:
    _check(n, k, l)
    return (k // 2) * n + (k - 1) // 2 + (n + 1) * l


def upper_bound_main(n: int, k: int, l: int) -> int:
    _check(n, k, l)
    return (n + 1) * k + (2 * n + 1) * l - 1


def lower_bound_closed(n: int, l: int) -> int:
    """Lower bound for (0,l)-regular maps of closed n-manifolds."""
    if l < 1:
        raise InvalidParameter("lower_bound_closed needs l >= 1")
    _check(n, 0, l)
    return (n + 1) * l


def brs_bound(n: int, k: int) -> int:
    """Lower bound on N for linear k-regular maps of R^n."""
    if k < 1:
        raise InvalidParameter("brs_bound needs k >= 1")
    _check(n, k, 0)
    return (k // 2) * n + (k + 1) // 2


def exact_curve(k: int, l: int, closed: bool) -> int:
    _check(1, k, l)
    if closed and k % 2 == 0:
        return k + 2 * l
    return k + 2 * l - 1


@dataclass(frozen=True)
class BoundsResult:
    n: int
    k: int
    l: int
    closed: bool
    lower_count: int
    lower_main: int
    upper_main: int
    lower_closed: int | None = None
    brs_lower: int | None = None
    exact: int | None = None
    exact_source: str | None = None

    @property
    def best_lower(self) -> int:
        """Largest applicable lower bound for affine (k,l)-regularity.

        ``brs_lower`` concerns linear k-regular maps and is only reported.
        """
        vals = [self.lower_count, self.lower_main]
        if self.lower_closed is not None:
            vals.append(self.lower_closed)
        return max(vals)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["best_lower"] = self.best_lower
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_text(self) -> str:
        kind = "closed" if self.closed else "open"
        rows = [
            ("lower_count", self.lower_count, SOURCES["lower_count"]),
            ("lower_main", self.lower_main, SOURCES["lower_main"]),
        ]
        if self.lower_closed is not None:
            rows.append(("lower_closed", self.lower_closed, SOURCES["lower_closed"]))
        if self.brs_lower is not None:
            rows.append(("brs_lower", self.brs_lower, SOURCES["brs_lower"]))
        rows.append(("upper_main", self.upper_main, SOURCES["upper_main"]))
        if self.exact is not None:
            rows.append(("exact", self.exact, self.exact_source))
        w0 = max(len(r[0]) for r in rows)
        w1 = max(len(str(r[1])) for r in rows)
        head = f"n={self.n} k={self.k} l={self.l} ({kind})"
        body = [f"{a:<{w0}}  {b:>{w1}}  {c}" for a, b, c in rows]
        return "\n".join([head] + body)


def bounds_table(n: int, k: int, l: int, closed: bool = False) -> BoundsResult:
    _check(n, k, l)
    closed = bool(closed)
    exact = source = None
    if (n, k, l, closed) in KNOWN_VALUES:
        exact, source = KNOWN_VALUES[(n, k, l, closed)]
    elif n == 1:
        exact, source = exact_curve(k, l, closed), SOURCES["exact_curve"]
    return BoundsResult(
        n=n,
        k=k,
        l=l,
        closed=closed,
        lower_count=lower_bound_count(n, k, l),
        lower_main=lower_bound_main(n, k, l),
        upper_main=upper_bound_main(n, k, l),
        lower_closed=lower_bound_closed(n, l) if closed and k == 0 and l >= 1 else None,
        brs_lower=brs_bound(n, k) if l == 0 and k >= 1 else None,
        exact=exact,
        exact_source=source,
    )
