"""Countable metric spaces with exact rational points.

Points are tuples of :class:`fractions.Fraction`.  The metric is the absolute
difference in dimension 1 and the max-coordinate distance otherwise, so every
ball test is an exact rational comparison.

Enumerations are 1-1 maps from positions to points.  The dyadic and
integer-grid enumerations answer "first position after ``start`` inside a
ball" by arithmetic on the level structure instead of scanning; the generic
scan in :class:`Enumeration` is kept as the reference behaviour.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExhausted, EnumerationError, InvalidInput
from .ground import FinIndexSet, as_index_set

Point = tuple  # tuple[Fraction, ...]

DEFAULT_SEARCH_BUDGET = 10**6
_INDEX_SCAN_LIMIT = 10**5


def parse_rational(text) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(f"not an exact rational: {text!r}") from exc


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_point(text) -> Point:
    if isinstance(text, tuple):
        return tuple(parse_rational(c) for c in text)
    if isinstance(text, (list,)):
        return tuple(parse_rational(c) for c in text)
    return tuple(parse_rational(c) for c in str(text).split(","))


def format_point(p: Point) -> str:
    return ",".join(format_rational(c) for c in p)


def distance(p: Point, q: Point) -> Fraction:
    if len(p) != len(q):
        raise InvalidInput(f"dimension mismatch: {len(p)} vs {len(q)}")
    if len(p) == 1:
        return abs(p[0] - q[0])
    return max(abs(a - b) for a, b in zip(p, q))


def in_ball(p: Point, center: Point, radius: Fraction) -> bool:
    """Open ball membership."""
    return distance(p, center) < radius


@dataclass(frozen=True)
class IndexFilter:
    """A residue class of positions; ``modulus=1`` admits everything."""

    modulus: int = 1
    residue: int = 0

    def __post_init__(self):
        if self.modulus < 1 or not 0 <= self.residue < self.modulus:
            raise InvalidInput(f"bad residue class {self.residue} mod {self.modulus}")

    @classmethod
    def parse(cls, text: str | None) -> IndexFilter:
        if text is None or text in ("", "all"):
            return cls()
        if text == "even":
            return cls(2, 0)
        if text == "odd":
            return cls(2, 1)
        parts = text.split(":")
        if len(parts) == 3 and parts[0] == "mod":
            try:
                return cls(int(parts[1]), int(parts[2]))
            except ValueError:
                pass
        raise InvalidInput(f"unknown filter {text!r}; use all, even, odd or mod:M:R")

    def __str__(self) -> str:
        if self.modulus == 1:
            return "all"
        if self.modulus == 2:
            return "even" if self.residue == 0 else "odd"
        return f"mod:{self.modulus}:{self.residue}"

    def admits(self, p: int) -> bool:
        return p >= 0 and p % self.modulus == self.residue

    def first_at_or_after(self, p: int) -> int:
        p = max(p, 0)
        return p + (self.residue - p) % self.modulus

    def first(self, count: int) -> list[int]:
        start = self.first_at_or_after(0)
        return [start + i * self.modulus for i in range(count)]


ALL = IndexFilter()


class Enumeration:
    """1-1 enumeration of points; ``bound`` is None for unbounded streams."""

    kind = "generic"

    def __init__(self, bound: int | None = None, dimension: int = 1):
        self.bound = bound
        self.dimension = dimension
        self.seen: dict[Point, int] = {}
        self._log: dict[int, Point] = {}
        self._scanned = 0

    def _generate(self, i: int) -> Point:
        raise NotImplementedError

    def point(self, i: int) -> Point:
        p = self._log.get(i)
        if p is not None:
            return p
        if i < 0 or (self.bound is not None and i >= self.bound):
            raise EnumerationError(f"position {i} outside enumeration of size {self.bound}")
        p = self._generate(i)
        other = self.seen.get(p)
        if other is not None and other != i:
            raise EnumerationError(f"point {format_point(p)} appears at positions {other} and {i}")
        self.seen[p] = i
        self._log[i] = p
        return p

    def materialize(self, count: int) -> list[Point]:
        if self.bound is not None:
            count = min(count, self.bound)
        return [self.point(i) for i in range(count)]

    def index_of(self, p: Point, limit: int = _INDEX_SCAN_LIMIT) -> int:
        """Position of ``p`` via the materialization log, extending it up to ``limit``."""
        i = self.seen.get(p)
        if i is not None:
            return i
        stop = limit if self.bound is None else min(limit, self.bound)
        while self._scanned < stop:
            j = self._scanned
            self._scanned += 1
            if self.point(j) == p:
                return j
        raise InvalidInput(f"point {format_point(p)} is not among the first {stop} enumerated points")

    def first_in_ball(self, center: Point, radius: Fraction, start: int = -1,
                      filt: IndexFilter = ALL, budget: int = DEFAULT_SEARCH_BUDGET) -> int | None:
        """Least admissible position ``p`` in ``(start, start + budget]`` with ``y_p`` in the open ball."""
        last = start + budget
        if self.bound is not None:
            last = min(last, self.bound - 1)
        p = filt.first_at_or_after(start + 1)
        while p <= last:
            if distance(self.point(p), center) < radius:
                return p
            p += filt.modulus
        return None

    def line_keys(self, members: FinIndexSet):
        """Integer keys with ``y = offset + scale * key`` (dimension 1 only)."""
        pts = [self.point(i)[0] for i in members]
        den = 1
        for x in pts:
            den = math.lcm(den, x.denominator)
        keys = [x.numerator * (den // x.denominator) for x in pts]
        if keys and max(abs(k) for k in keys) < 2**62:
            arr = np.array(keys, dtype=np.int64)
        else:
            arr = np.array(keys, dtype=object)
        return arr, Fraction(0), Fraction(1, den)

    def descriptor(self) -> dict:
        raise NotImplementedError


def _level(p: int) -> int:
    return (p + 1).bit_length()


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class DyadicEnumeration(Enumeration):
    """Dyadic rationals of ``(a, b)`` level by level, left to right.

    Position ``p`` lives on level ``j = bitlen(p + 1)`` and names the point
    ``a + (b - a) * i / 2**j`` with ``i = 2 * (p - 2**(j-1) + 1) + 1``.
    """

    kind = "dyadic"

    def __init__(self, a, b):
        a, b = parse_rational(a), parse_rational(b)
        if not a < b:
            raise InvalidInput(f"empty interval ({format_rational(a)}, {format_rational(b)})")
        super().__init__(None, 1)
        self.a, self.b = a, b
        self.width = b - a

    def _generate(self, p: int) -> Point:
        j = _level(p)
        i = 2 * (p - (1 << (j - 1)) + 1) + 1
        return (self.a + self.width * Fraction(i, 1 << j),)

    def first_in_ball(self, center, radius, start=-1, filt=ALL, budget=DEFAULT_SEARCH_BUDGET):
        last = start + budget
        lo = (center[0] - radius - self.a) / self.width
        hi = (center[0] + radius - self.a) / self.width
        j = _level(max(start + 1, 0))
        while True:
            base = (1 << (j - 1)) - 1
            if base > last:
                return None
            # odd numerators i with lo*2^j < i < hi*2^j
            i_min = math.floor(lo * (1 << j)) + 1
            i_max = math.ceil(hi * (1 << j)) - 1
            r_lo = max(0, _ceil_div(i_min - 1, 2), start + 1 - base)
            r_hi = min((1 << (j - 1)) - 1, (i_max - 1) // 2, last - base)
            if r_lo <= r_hi:
                r = r_lo + (filt.residue - base - r_lo) % filt.modulus
                if r <= r_hi:
                    return base + r
            j += 1

    def line_keys(self, members: FinIndexSet):
        m = members.members
        if isinstance(m, range):
            pos = np.arange(m.start, m.stop, dtype=np.int64)
        else:
            pos = np.fromiter(m, dtype=np.int64, count=len(m))
        if len(pos) == 0:
            return pos, self.a, Fraction(1)
        if pos.max() >= 2**52:
            return super().line_keys(members)
        lev = np.frexp((pos + 1).astype(np.float64))[1].astype(np.int64)
        top = int(lev.max())
        base = np.left_shift(np.int64(1), lev - 1) - 1
        keys = np.left_shift(2 * (pos - base) + 1, top - lev)
        return keys, self.a, self.width / (1 << top)

    def descriptor(self) -> dict:
        return {"kind": "dyadic", "interval": [format_rational(self.a), format_rational(self.b)], "dimension": 1}


class IntegerGridEnumeration(Enumeration):
    """The points ``0, 1, 2, ...``; every point is isolated."""

    kind = "integer-grid"

    def __init__(self):
        super().__init__(None, 1)

    def _generate(self, p: int) -> Point:
        return (Fraction(p),)

    def first_in_ball(self, center, radius, start=-1, filt=ALL, budget=DEFAULT_SEARCH_BUDGET):
        lo = max(math.floor(center[0] - radius) + 1, start + 1)
        hi = min(math.ceil(center[0] + radius) - 1, start + budget)
        p = filt.first_at_or_after(lo)
        return p if p <= hi else None

    def line_keys(self, members: FinIndexSet):
        return np.fromiter(members, dtype=np.int64, count=len(members)), Fraction(0), Fraction(1)

    def descriptor(self) -> dict:
        return {"kind": "integer-grid", "dimension": 1}


class ListEnumeration(Enumeration):
    """A finite explicit list of points."""

    kind = "custom-list"

    def __init__(self, points: Sequence):
        pts = [parse_point(p) for p in points]
        if not pts:
            raise InvalidInput("custom point list is empty")
        dims = {len(p) for p in pts}
        if len(dims) != 1:
            raise InvalidInput(f"mixed point dimensions {sorted(dims)}")
        super().__init__(len(pts), dims.pop())
        self._points = pts
        for i in range(len(pts)):
            self.point(i)

    def _generate(self, i: int) -> Point:
        return self._points[i]

    def descriptor(self) -> dict:
        return {"kind": "custom-list", "dimension": self.dimension,
                "points": [format_point(p) for p in self._points]}


def dyadic_enumeration(interval) -> DyadicEnumeration:
    a, b = interval
    return DyadicEnumeration(a, b)


class Space:
    """A countable metric space given by a 1-1 enumeration of its points."""

    metric = "euclidean-exact"

    def __init__(self, enumeration: Enumeration):
        self.enumeration = enumeration

    @property
    def dimension(self) -> int:
        return self.enumeration.dimension

    @property
    def bound(self) -> int | None:
        return self.enumeration.bound

    def point(self, i: int) -> Point:
        return self.enumeration.point(i)

    def distance(self, i: int, j: int) -> Fraction:
        return distance(self.point(i), self.point(j))

    def first_in_ball(self, center, radius, start=-1, filt=ALL, budget=DEFAULT_SEARCH_BUDGET):
        return self.enumeration.first_in_ball(center, radius, start, filt, budget)

    def descriptor(self) -> dict:
        return self.enumeration.descriptor()

    @classmethod
    def from_descriptor(cls, d: dict) -> Space:
        kind = d.get("kind", "dyadic")
        dim = int(d.get("dimension", 1))
        if kind == "dyadic":
            if dim != 1:
                raise InvalidInput("dyadic spaces are 1-dimensional")
            a, b = d.get("interval", ("0", "1"))
            return cls(DyadicEnumeration(a, b))
        if kind == "integer-grid":
            if dim != 1:
                raise InvalidInput("integer-grid spaces are 1-dimensional")
            return cls(IntegerGridEnumeration())
        if kind == "custom-list":
            enum = ListEnumeration(d.get("points") or ())
            if enum.dimension != dim:
                raise InvalidInput(f"points have dimension {enum.dimension}, descriptor says {dim}")
            return cls(enum)
        raise InvalidInput(f"unknown space kind {kind!r}")

    def locator(self, members: FinIndexSet) -> PointLocator:
        return PointLocator(self, members)

    def min_distance(self, members) -> Fraction | None:
        return self.locator(as_index_set(members)).min_distance()


class PointLocator:
    """Exact nearest-point queries over a fixed finite set of positions."""

    def __init__(self, space: Space, members: FinIndexSet):
        self.space = space
        self.members = members
        self._line = space.dimension == 1
        if self._line:
            keys, self.offset, self.scale = space.enumeration.line_keys(members)
            labels = np.fromiter(members, dtype=np.int64, count=len(members))
            order = np.argsort(keys, kind="stable")
            self.keys = keys[order]
            self.labels = labels[order]

    def min_distance(self) -> Fraction | None:
        if len(self.members) < 2:
            return None
        if self._line:
            gap = np.diff(self.keys).min()
            return Fraction(int(gap)) * self.scale
        pts = [self.space.point(i) for i in self.members]
        return min(distance(p, q) for p, q in itertools.combinations(pts, 2))

    def within(self, p: Point, radius: Fraction) -> list[int]:
        """Members whose point lies in the open ball of ``radius`` around ``p``."""
        if not self._line:
            return [i for i in self.members if distance(self.space.point(i), p) < radius]
        lo = math.floor((p[0] - radius - self.offset) / self.scale)
        hi = math.ceil((p[0] + radius - self.offset) / self.scale)
        a = int(np.searchsorted(self.keys, _clamp(lo), side="right"))
        b = int(np.searchsorted(self.keys, _clamp(hi), side="left"))
        out = []
        for k in range(max(a - 1, 0), min(b + 1, len(self.keys))):
            i = int(self.labels[k])
            if distance(self.space.point(i), p) < radius:
                out.append(i)
        return out


def _clamp(x: int) -> int:
    return max(min(x, 2**63 - 1), -(2**63))


def pairing_schedule() -> Iterator[tuple[int, int]]:
    """Pairs ``(n_k, l_k)`` for ``k = 2, 3, ...`` covering all of omega x omega once.

    Pairs come in diagonal order (``n + l``, then ``n``); a pair waits in a
    queue until ``n < k - 1``.
    """

    def diagonal():
        for d in itertools.count():
            for n in range(d + 1):
                yield n, d - n

    source = diagonal()
    held: list[tuple[int, int]] = []
    for k in itertools.count(2):
        for i, (n, _) in enumerate(held):
            if n < k - 1:
                yield held.pop(i)
                break
        else:
            while True:
                pair = next(source)
                if pair[0] < k - 1:
                    yield pair
                    break
                held.append(pair)


@dataclass
class ExtractionCertificate:
    indices: list[int]
    pairing: list[tuple[int, int]] = field(default_factory=list)
    radii: list[Fraction] = field(default_factory=list)
    filter: IndexFilter = ALL

    def to_dict(self, space: Space | None = None) -> dict:
        d = {
            "indices": list(self.indices),
            "pairing": [list(p) for p in self.pairing],
            "radii": [format_rational(r) for r in self.radii],
            "filter": str(self.filter),
        }
        if space is not None:
            d["points"] = [format_point(space.point(i)) for i in self.indices]
        return d


def extract_omega_copy(space: Space, steps: int, within: IndexFilter = ALL,
                       search_budget: int = DEFAULT_SEARCH_BUDGET) -> ExtractionCertificate:
    """Greedy ball-chasing extraction of ``steps`` indices of order type omega."""
    if steps < 2:
        raise InvalidInput(f"extraction needs at least 2 steps, got {steps}")
    a0 = within.first_at_or_after(0)
    a1 = within.first_at_or_after(a0 + 1)
    if space.bound is not None and a1 >= space.bound:
        raise BudgetExhausted("space has fewer than two admissible points", step=1)
    cert = ExtractionCertificate([a0, a1], filter=within)
    schedule = pairing_schedule()
    for k in range(2, steps):
        n_k, l_k = next(schedule)
        anchor = space.point(cert.indices[n_k])
        prev = space.point(cert.indices[k - 1])
        eps = min(Fraction(1, l_k + 1), distance(anchor, prev)) / 2
        hit = space.first_in_ball(anchor, eps, cert.indices[k - 1], within, search_budget)
        if hit is None:
            raise BudgetExhausted(
                f"step {k}: no admissible position in ({cert.indices[k - 1]}, "
                f"{cert.indices[k - 1] + search_budget}] within {format_rational(eps)} "
                f"of position {cert.indices[n_k]}", step=k)
        cert.indices.append(hit)
        cert.pairing.append((n_k, l_k))
        cert.radii.append(eps)
    return cert


def recheck_certificate(space: Space, cert: ExtractionCertificate) -> list[str]:
    """Independent exact re-verification; returns a list of failed clauses."""
    bad = []
    idx = cert.indices
    if any(x >= y for x, y in zip(idx, idx[1:])):
        bad.append("indices not strictly increasing")
    if not all(cert.filter.admits(i) for i in idx):
        bad.append("index outside filter")
    if len(cert.pairing) != len(idx) - 2 or len(cert.radii) != len(idx) - 2:
        bad.append("pairing/radii length mismatch")
        return bad
    if len(set(cert.pairing)) != len(cert.pairing):
        bad.append("pairing repeats a pair")
    for k in range(2, len(idx)):
        (n, l), eps = cert.pairing[k - 2], cert.radii[k - 2]
        if not n < k - 1:
            bad.append(f"k={k}: n_k={n} not below k-1")
            continue
        x_k, x_n, x_prev = (space.point(idx[k]), space.point(idx[n]), space.point(idx[k - 1]))
        if not distance(x_k, x_n) < Fraction(1, l + 1):
            bad.append(f"k={k}: point not within 1/(l_k+1) of its anchor")
        if not distance(x_k, x_n) < eps:
            bad.append(f"k={k}: point not inside its epsilon ball")
        if not eps > 0 or distance(x_prev, x_n) < eps:
            bad.append(f"k={k}: previous point not excluded from the epsilon ball")
    return bad


@dataclass
class DenseReport:
    prefix: int
    eps_grid: list[Fraction]
    budget: int
    checked: int = 0
    failures: list[tuple[int, Fraction]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "prefix": self.prefix,
            "eps_grid": [format_rational(e) for e in self.eps_grid],
            "budget": self.budget,
            "checked": self.checked,
            "failures": [[i, format_rational(e)] for i, e in self.failures],
        }


def is_dense_in_itself(space: Space, prefix: int, eps_grid: Sequence, budget: int = 10**5) -> DenseReport:
    """One-sided density check: every early point has another point within each epsilon."""
    if prefix < 1:
        raise InvalidInput(f"prefix must be positive, got {prefix}")
    grid = [parse_rational(e) for e in eps_grid]
    if any(e <= 0 for e in grid):
        raise InvalidInput("epsilon grid must be positive")
    rep = DenseReport(prefix, grid, budget)
    count = prefix if space.bound is None else min(prefix, space.bound)
    for p in range(count):
        x = space.point(p)
        for eps in grid:
            rep.checked += 1
            q = space.first_in_ball(x, eps, -1, ALL, budget)
            if q == p:
                q = space.first_in_ball(x, eps, p, ALL, budget - 1 - p) if budget - 1 - p > 0 else None
            if q is None:
                rep.failures.append((p, eps))
    return rep
