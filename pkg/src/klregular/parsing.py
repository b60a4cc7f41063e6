"""Text formats: map expressions, rationals and configuration CSV files.

Map grammar::

    expr   := atom [ "@" DIM ]
    atom   := "moment:" M | "trig:" H | "cmoment:" M
            | "tensor:" expr "," expr | "sampled:" PATH | "(" expr ")"

A top-level ``@DIM`` keeps the first DIM coordinates (or pads with zeros).
It applies to the whole expression, so ``tensor:moment:2,moment:2@7``
truncates the tensor product; parenthesize a factor to truncate only it.

Configuration CSV rows are ``role, p_1..p_n[, u_1..u_n]`` with role ``x``
(through point) or ``y`` (tangency point).  A ``y`` row without direction
uses the full tangent space; several ``y`` rows at the same point span a
tangent subspace.  Entries are parsed as exact rationals (``3/4``, ``0.25``).
Blank lines, ``#`` comments and a leading ``role,...`` header are skipped.
"""

from __future__ import annotations

import csv
import re
from fractions import Fraction
from pathlib import Path

from .embeddings import (
    Configuration,
    EmbeddingSpec,
    SampledMap,
    complex_moment_curve,
    moment_curve,
    restrict_coordinates,
    tensor_product,
    trig_curve,
)
from .errors import InvalidInput

_SUFFIX = re.compile(r"^(.*)@(\d+)$", re.S)


def _depth_zero(s: str, ch: str) -> list[int]:
    depth, hits = 0, []
    for i, c in enumerate(s):
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth < 0:
                raise InvalidInput(f"unbalanced parentheses in {s!r}")
        elif c == ch and depth == 0:
            hits.append(i)
    if depth != 0:
        raise InvalidInput(f"unbalanced parentheses in {s!r}")
    return hits


def _wrapped(s: str) -> bool:
    if not (s.startswith("(") and s.endswith(")")):
        return False
    depth = 0
    for i, c in enumerate(s):
        depth += c == "("
        depth -= c == ")"
        if depth == 0 and i < len(s) - 1:
            return False
    return True


def _positive_int(text: str, what: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise InvalidInput(f"{what} must be an integer, got {text!r}") from None
    if v < 1:
        raise InvalidInput(f"{what} must be >= 1, got {v}")
    return v


def parse_map(text: str) -> EmbeddingSpec:
    """Build an embedding spec from a map expression."""
    s = text.strip()
    if not s:
        raise InvalidInput("empty map expression")
    if not s.startswith("sampled:"):
        m = _SUFFIX.match(s)
        if m and _depth_zero(s, "@") == [len(m.group(1))]:
            return restrict_coordinates(parse_map(m.group(1)), int(m.group(2)))
    if _wrapped(s):
        return parse_map(s[1:-1])
    kind, sep, arg = s.partition(":")
    if not sep:
        raise InvalidInput(f"map {s!r} needs a parameter, e.g. {s}:3")
    kind = kind.strip().lower()
    if kind == "moment":
        return moment_curve(_positive_int(arg, "moment degree"))
    if kind == "trig":
        return trig_curve(_positive_int(arg, "trig order"))
    if kind == "cmoment":
        return complex_moment_curve(_positive_int(arg, "cmoment degree"))
    if kind == "tensor":
        cuts = _depth_zero(arg, ",")
        if len(cuts) != 1:
            raise InvalidInput(f"tensor needs two factors separated by one top-level comma: {arg!r}")
        return tensor_product(parse_map(arg[: cuts[0]]), parse_map(arg[cuts[0] + 1:]))
    if kind == "sampled":
        m = _SUFFIX.match(arg)
        if m and not Path(arg).exists():
            return restrict_coordinates(SampledMap.from_csv(m.group(1)), int(m.group(2)))
        return SampledMap.from_csv(arg)
    raise InvalidInput(f"unknown map kind {kind!r}")


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InvalidInput(f"not a rational number: {text!r}") from None


def parse_rational_list(text: str) -> list[Fraction]:
    text = text.strip()
    if not text:
        return []
    return [parse_rational(t) for t in text.split(",")]


def read_configuration(path, n: int) -> Configuration:
    """Read a configuration CSV for a map with an ``n``-dimensional chart."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InvalidInput(f"{path}: {exc.strerror}") from None
    through, tangency, groups = [], [], []
    for lineno, row in enumerate(rows, start=1):
        cells = [c.strip() for c in row]
        if not cells or all(not c for c in cells) or cells[0].startswith("#"):
            continue
        role = cells[0].lower()
        if role == "role" and not through and not tangency:
            continue
        values = cells[1:]
        if role not in ("x", "y"):
            raise InvalidInput(f"{path}:{lineno}: role must be x or y, got {cells[0]!r}")
        allowed = (n,) if role == "x" else (n, 2 * n)
        if len(values) not in allowed:
            want = " or ".join(str(a) for a in allowed)
            raise InvalidInput(
                f"{path}:{lineno}: role {role} expects {want} numbers, got {len(values)}"
            )
        try:
            nums = [Fraction(v) for v in values]
        except (ValueError, ZeroDivisionError):
            raise InvalidInput(f"{path}:{lineno}: not a rational number in {values}") from None
        point = tuple(nums[:n])
        if role == "x":
            through.append(point)
            continue
        direction = tuple(nums[n:]) or None
        if point in tangency:
            j = tangency.index(point)
            if direction is None or groups[j] is None:
                raise InvalidInput(
                    f"{path}:{lineno}: tangency point repeated without directions"
                )
            groups[j].append(direction)
        else:
            tangency.append(point)
            groups.append(None if direction is None else [direction])
    if not through and not tangency:
        raise InvalidInput(f"{path}: no configuration rows")
    full = [tuple(tuple(int(i == j) for j in range(n)) for i in range(n))]
    directions = [full[0] if g is None else tuple(g) for g in groups]
    return Configuration(tuple(through), tuple(tangency), tuple(directions))


def write_configuration(path, config: Configuration) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        for p in config.through_points:
            w.writerow(["x", *[str(v) for v in p]])
        for p, group in zip(config.tangency_points, config.directions):
            for u in group:
                w.writerow(["y", *[str(v) for v in p], *[str(v) for v in u]])
