"""Finite well-ordered ground sets and the injection families between levels.

A level-``n`` ground set has carrier ``0..size-1``.  For ``n >= 1`` each
``gamma`` in the carrier owns a 1-1 map ``e_gamma: {0..gamma-1} -> lower``
into the carrier one level down.  Tables are never stored up front: the
identity and reverse rules are formulas and the seeded-random rule samples
one table per ``gamma`` on first use.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import InvalidInput, SizeConstraintError

RULES = ("identity", "reverse", "random")


class FinIndexSet:
    """Immutable sorted set of nonnegative ordinal positions.

    Backed by either a ``range`` (step 1) or a tuple, so initial segments like
    ``{0, ..., m-1}`` cost O(1) regardless of ``m``.
    """

    __slots__ = ("_m", "_hash")

    def __init__(self, members: Iterable[int] = ()):
        if isinstance(members, range) and members.step == 1:
            m: Sequence[int] = members if len(members) else ()
        else:
            m = tuple(sorted(set(int(x) for x in members)))
        if len(m) and m[0] < 0:
            raise InvalidInput(f"ordinal positions must be nonnegative, got {m[0]}")
        self._m = m
        self._hash = None

    @classmethod
    def _sorted(cls, members: Sequence[int]) -> FinIndexSet:
        # caller guarantees strictly increasing, nonnegative
        obj = cls.__new__(cls)
        obj._m = members if len(members) else ()
        obj._hash = None
        return obj

    def __len__(self) -> int:
        return len(self._m)

    def __iter__(self) -> Iterator[int]:
        return iter(self._m)

    def __getitem__(self, i):
        return self._m[i]

    def __contains__(self, x) -> bool:
        m = self._m
        if isinstance(m, range):
            return x in m
        i = bisect.bisect_left(m, x)
        return i < len(m) and m[i] == x

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinIndexSet):
            return NotImplemented
        a, b = self._m, other._m
        if len(a) != len(b):
            return False
        if isinstance(a, range) and isinstance(b, range):
            return a == b
        if len(a) == 0:
            return True
        return a[0] == b[0] and a[-1] == b[-1] and all(x == y for x, y in zip(a, b))

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._m))
        return self._hash

    def __repr__(self) -> str:
        m = self._m
        if isinstance(m, range) and len(m) > 8:
            return f"FinIndexSet(range({m.start}, {m.stop}))"
        return "{" + ", ".join(map(str, m)) + "}"

    @property
    def members(self) -> Sequence[int]:
        return self._m

    def max(self) -> int:
        if not self._m:
            raise InvalidInput("max of the empty set is undefined")
        return self._m[-1]

    def min(self) -> int:
        if not self._m:
            raise InvalidInput("min of the empty set is undefined")
        return self._m[0]

    def is_range(self) -> bool:
        return isinstance(self._m, range)

    def below(self, bound: int) -> FinIndexSet:
        """Members strictly less than ``bound``."""
        return FinIndexSet._sorted(self._m[: bisect.bisect_left(self._m, bound)])

    def without(self, x: int) -> FinIndexSet:
        m = self._m
        i = bisect.bisect_left(m, x)
        if i == len(m) or m[i] != x:
            return self
        return FinIndexSet._sorted(tuple(m[:i]) + tuple(m[i + 1:]))

    def with_member(self, x: int) -> FinIndexSet:
        m = self._m
        i = bisect.bisect_left(m, x)
        if i < len(m) and m[i] == x:
            return self
        if isinstance(m, range) and i == len(m) and x == m.stop:
            return FinIndexSet._sorted(range(m.start, x + 1))
        return FinIndexSet._sorted(tuple(m[:i]) + (x,) + tuple(m[i:]))

    def difference(self, other: Iterable[int]) -> FinIndexSet:
        drop = set(other)
        if not any(x in self for x in drop):
            return self
        return FinIndexSet._sorted(tuple(x for x in self._m if x not in drop))

    def union(self, other: Iterable[int]) -> FinIndexSet:
        out = self
        for x in other:
            out = out.with_member(x)
        return out

    def to_list(self) -> list[int]:
        return list(self._m)


def as_index_set(s) -> FinIndexSet:
    return s if isinstance(s, FinIndexSet) else FinIndexSet(s)


class Injection:
    """One map ``e_gamma`` with domain ``{0..gamma-1}``."""

    def __init__(self, gamma: int, rule: str, table: Sequence[int] | None = None):
        self.gamma = gamma
        self.rule = rule
        self._table = table
        self._inverse = None if table is None else {y: b for b, y in enumerate(table)}

    def __call__(self, beta: int) -> int:
        if not 0 <= beta < self.gamma:
            raise InvalidInput(f"{beta} is not below gamma={self.gamma}")
        if self.rule == "identity":
            return beta
        if self.rule == "reverse":
            return self.gamma - 1 - beta
        return self._table[beta]

    def table(self) -> list[int]:
        return [self(b) for b in range(self.gamma)]

    def image(self, s: FinIndexSet) -> FinIndexSet:
        if self.rule == "identity":
            return s
        return FinIndexSet(self(b) for b in s)

    def preimage(self, s: FinIndexSet) -> FinIndexSet:
        g = self.gamma
        m = s.members
        if self.rule == "identity":
            return s.below(g)
        if self.rule == "reverse":
            kept = s.below(g).members
            if isinstance(kept, range):
                return FinIndexSet._sorted(range(g - kept.stop, g - kept.start) if len(kept) else ())
            return FinIndexSet._sorted(tuple(g - 1 - y for y in reversed(kept)))
        inv = self._inverse
        return FinIndexSet(inv[y] for y in m if y in inv)


@dataclass(frozen=True, eq=False)
class GroundSet:
    level: int
    size: int
    rule: str = "identity"
    seed: int | None = None
    lower: GroundSet | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.size < 1:
            raise InvalidInput(f"carrier size must be positive, got {self.size}")
        if self.level == 0:
            if self.lower is not None:
                raise InvalidInput("level-0 ground set has no lower level")
            return
        if self.lower is None or self.lower.level != self.level - 1:
            raise InvalidInput(f"level-{self.level} ground set needs a level-{self.level - 1} lower set")
        if self.size - 1 > self.lower.size:
            raise SizeConstraintError(
                f"level {self.level}: gamma={self.size - 1} needs {self.size - 1} distinct "
                f"images but the lower carrier has size {self.lower.size}"
            )

    def injection(self, gamma: int) -> Injection:
        """The map ``e_gamma``; tables for the random rule are built lazily."""
        if self.level == 0:
            raise InvalidInput("level-0 ground set has no injections")
        if not 0 <= gamma < self.size:
            raise InvalidInput(f"gamma={gamma} outside carrier of size {self.size}")
        inj = self._cache.get(gamma)
        if inj is None:
            table = None
            if self.rule == "random":
                rng = random.Random(f"{self.seed}/{self.level}/{gamma}")
                table = rng.sample(range(self.lower.size), gamma)
            inj = Injection(gamma, self.rule, table)
            self._cache[gamma] = inj
        return inj

    def chain(self) -> list[GroundSet]:
        """Levels from 0 up to this one."""
        out, g = [], self
        while g is not None:
            out.append(g)
            g = g.lower
        return out[::-1]

    def sizes(self) -> list[int]:
        """Carrier sizes from this level down to level 0."""
        return [g.size for g in reversed(self.chain())]

    def descriptor(self) -> dict:
        return {"level": self.level, "sizes": self.sizes(), "rule": self.rule, "seed": self.seed}

    @classmethod
    def from_descriptor(cls, d: dict) -> GroundSet:
        return make_ground(d["level"], d["sizes"], d.get("rule", "identity"), d.get("seed"))


def make_ground(level: int, sizes: Sequence[int], rule: str = "identity", seed: int | None = None) -> GroundSet:
    """Build the chain of ground sets and return the top (level ``level``) one.

    ``sizes`` lists carriers from the top level down: ``sizes[0]`` is the
    level-``level`` carrier and ``sizes[-1]`` the level-0 one.
    """
    if level < 0:
        raise InvalidInput(f"level must be nonnegative, got {level}")
    if rule not in RULES:
        raise InvalidInput(f"unknown injection rule {rule!r}; expected one of {', '.join(RULES)}")
    if len(sizes) != level + 1:
        raise InvalidInput(f"level {level} needs {level + 1} sizes, got {len(sizes)}")
    if rule == "random" and seed is None:
        seed = 0
    if rule != "random":
        seed = None
    g = None
    for m, size in enumerate(reversed(sizes)):
        g = GroundSet(m, int(size), rule, seed, g)
    return g


def _check_injectable(g: GroundSet, gamma: int) -> None:
    if g.level < 1:
        raise InvalidInput("injections exist only at level >= 1")
    if not 0 <= gamma < g.size:
        raise InvalidInput(f"gamma={gamma} outside carrier of size {g.size}")


def apply_injection(g: GroundSet, gamma: int, s) -> FinIndexSet:
    """Image ``e_gamma''(s)``; every member of ``s`` must lie below ``gamma``."""
    _check_injectable(g, gamma)
    s = as_index_set(s)
    if len(s) and s.max() >= gamma:
        raise InvalidInput(f"member {s.max()} of s is not below gamma={gamma}")
    return g.injection(gamma).image(s)


def invert_injection(g: GroundSet, gamma: int, s) -> FinIndexSet:
    """Preimage ``{beta < gamma : e_gamma(beta) in s}``; unmatched members drop out."""
    _check_injectable(g, gamma)
    return g.injection(gamma).preimage(as_index_set(s))
