"""The step function ``h``, the coloring ``c`` and the witness chain.

For an ``(n+1)``-set ``s`` the points indexed by ``O(s) | s`` get pairwise
disjoint open balls of a common radius (a third of their least distance).  An
``(n+2)``-set ``t`` steps to ``(t - {max t}) | {xi}`` when the point of
``max t`` falls in the ball of some ``xi`` in ``O(t - {max t})``, and halts
otherwise.  The color of ``t`` is the number of steps taken before halting.

The witness chain runs this backwards inside an index filter ``M``: clause
(2) of the set mapping finds ``alpha`` with ``alpha in O(u - {alpha})``, and
a fresh position landing in the ball around ``y_alpha`` gives a set that
steps to ``u``, so its color is one higher.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BudgetExhausted, ChainVerificationError, InvalidInput
from .ground import FinIndexSet, GroundSet, as_index_set
from .setmap import SetMapping
from .space import (ALL, IndexFilter, Point, PointLocator,
                    Space, format_point, format_rational, parse_point)

DEFAULT_WITNESS_BUDGET = 10**9
_TRACE_LIST_LIMIT = 64


class Halt:
    """The step function's halting value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "HALT"

    def __bool__(self) -> bool:
        return False


HALT = Halt()


@dataclass(frozen=True)
class NeighborhoodAssignment:
    s: FinIndexSet
    obstruction: FinIndexSet
    radius: Fraction
    locator: PointLocator = field(repr=False, compare=False)

    @property
    def centers(self) -> FinIndexSet:
        return self.locator.members

    def hits(self, p: Point) -> list[int]:
        return self.locator.within(p, self.radius)


@dataclass
class Witness:
    k: int
    t: FinIndexSet
    verified: bool = False

    def to_dict(self, space: Space | None = None) -> dict:
        d = {"k": self.k, "indices": list(self.t), "verified": self.verified}
        if space is not None:
            d["points"] = [format_point(space.point(i)) for i in self.t]
        return d


def _summarize(s: FinIndexSet):
    if len(s) <= _TRACE_LIST_LIMIT:
        return list(s)
    return {"size": len(s), "min": s.min(), "max": s.max()}


class ColoringContext:
    """Ties a space, a level-``n`` set mapping and the cached neighborhoods together."""

    def __init__(self, space: Space, setmap: SetMapping | GroundSet):
        if isinstance(setmap, GroundSet):
            setmap = SetMapping(setmap)
        self.space = space
        self.setmap = setmap
        self.n = setmap.level
        self._neighborhoods: dict[FinIndexSet, NeighborhoodAssignment] = {}

    def fresh(self) -> ColoringContext:
        """Same space and ground, empty caches; used for independent re-checks."""
        return ColoringContext(self.space, SetMapping(self.setmap.ground))

    def _check_indices(self, s: FinIndexSet) -> None:
        top = s.max()
        if top >= self.setmap.ground.size:
            raise InvalidInput(f"position {top} outside ground carrier of size {self.setmap.ground.size}")
        if self.space.bound is not None and top >= self.space.bound:
            raise InvalidInput(f"position {top} outside enumeration of size {self.space.bound}")

    def neighborhoods(self, s) -> NeighborhoodAssignment:
        s = as_index_set(s)
        hit = self._neighborhoods.get(s)
        if hit is not None:
            return hit
        if len(s) != self.n + 1:
            raise InvalidInput(f"neighborhoods need an {self.n + 1}-set, got {s!r}")
        self._check_indices(s)
        obstruction = self.setmap.obstruction(s)
        centers = obstruction.union(s)
        locator = self.space.locator(centers)
        gap = locator.min_distance()
        radius = Fraction(1) if gap is None else gap / 3
        nb = NeighborhoodAssignment(s, obstruction, radius, locator)
        self._neighborhoods[s] = nb
        return nb

    def h_step(self, t, trace: list | None = None):
        t = as_index_set(t)
        if len(t) != self.n + 2:
            raise InvalidInput(f"h takes {self.n + 2}-sets, got {t!r}")
        self._check_indices(t)
        top = t.max()
        s = t.without(top)
        nb = self.neighborhoods(s)
        hits = nb.hits(self.space.point(top))
        if len(hits) > 1:
            raise ChainVerificationError(f"point {top} lies in {len(hits)} supposedly disjoint balls")
        xi = hits[0] if hits and hits[0] in nb.obstruction else None
        if trace is not None:
            trace.append({
                "t": list(t),
                "s": list(s),
                "obstruction": _summarize(nb.obstruction),
                "radius": format_rational(nb.radius),
                "matched": "halt" if xi is None else xi,
            })
        if xi is None:
            return HALT
        out = s.with_member(xi)
        if not out.max() < top:
            raise ChainVerificationError(f"h({t!r}) = {out!r} does not descend")
        return out

    def resolve(self, points, limit: int = 10**5) -> FinIndexSet:
        """Index set ``t_w`` of a tuple of points, via the enumeration log."""
        pts = [parse_point(p) for p in points]
        idx = [self.space.enumeration.index_of(p, limit) for p in pts]
        if len(set(idx)) != len(idx):
            raise InvalidInput("tuple repeats a point")
        return FinIndexSet(idx)

    def color(self, t, trace: list | None = None) -> int:
        t = as_index_set(t)
        k, cur = 0, t
        while True:
            nxt = self.h_step(cur, trace)
            if nxt is HALT:
                break
            k += 1
            cur = nxt
        if k > t.max() - (self.n + 1):
            raise ChainVerificationError(f"color {k} of {t!r} breaks the descent bound")
        return k

    def color_points(self, points, trace: list | None = None, limit: int = 10**5) -> int:
        return self.color(self.resolve(points, limit), trace)

    def color_mod(self, t, l: int) -> int:
        if l < 1:
            raise InvalidInput(f"modulus l must be at least 1, got {l}")
        return self.color(t) % l

    def _scan(self, center_index: int, radius: Fraction, after: int, M: IndexFilter, budget: int) -> int:
        delta = self.space.first_in_ball(self.space.point(center_index), radius, after, M, budget)
        if delta is None:
            raise BudgetExhausted(
                f"no position of {M} in ({after}, {after + budget}] within "
                f"{format_rational(radius)} of position {center_index}")
        return delta

    def witness_color_zero(self, M: IndexFilter = ALL, seed_s=None,
                           search_budget: int = DEFAULT_WITNESS_BUDGET) -> FinIndexSet:
        s = FinIndexSet(M.first(self.n + 1)) if seed_s is None else as_index_set(seed_s)
        if len(s) != self.n + 1 or not all(M.admits(i) for i in s):
            raise InvalidInput(f"seed {s!r} must be an {self.n + 1}-subset of {M}")
        nb = self.neighborhoods(s)
        delta = self._scan(s.max(), nb.radius, s.max(), M, search_budget)
        t = s.with_member(delta)
        if self.color(t) != 0:
            raise ChainVerificationError(f"base witness {t!r} does not have color 0")
        return t

    def witness_step(self, u, M: IndexFilter = ALL, search_budget: int = DEFAULT_WITNESS_BUDGET,
                     k: int | None = None) -> FinIndexSet:
        u = as_index_set(u)
        if len(u) != self.n + 2 or not all(M.admits(i) for i in u):
            raise InvalidInput(f"{u!r} must be an {self.n + 2}-subset of {M}")
        actual = self.color(u)
        if k is not None and k != actual:
            raise InvalidInput(f"{u!r} has color {actual}, not {k}")
        alpha = self.setmap.free_witness(u)
        if alpha is None:
            raise ChainVerificationError(f"clause (2) has no witness in {u!r}")
        s = u.without(alpha)
        nb = self.neighborhoods(s)
        if alpha not in nb.obstruction:
            raise ChainVerificationError(f"{alpha} not in O({s!r})")
        delta = self._scan(alpha, nb.radius, s.max(), M, search_budget)
        t = s.with_member(delta)
        back = self.h_step(t)
        if back != u:
            raise ChainVerificationError(f"h({t!r}) = {back!r}, expected {u!r}")
        if self.color(t) != actual + 1:
            raise ChainVerificationError(f"{t!r} does not have color {actual + 1}")
        return t

    def realize_colors(self, M: IndexFilter = ALL, K: int = 8,
                       search_budget: int = DEFAULT_WITNESS_BUDGET, seed_s=None) -> list[Witness]:
        """Witnesses of colors ``0..K`` inside ``M``, each re-colored from scratch."""
        if K < 0:
            raise InvalidInput(f"K must be nonnegative, got {K}")
        chain = [Witness(0, self.witness_color_zero(M, seed_s, search_budget))]
        for k in range(K):
            chain.append(Witness(k + 1, self.witness_step(chain[-1].t, M, search_budget, k)))
        checker = self.fresh()
        for w in chain:
            w.verified = checker.color(w.t) == w.k
        return chain
