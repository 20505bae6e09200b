"""Kuratowski set mappings on finite ground sets.

``f`` at level 0 sends ``{m}`` to the initial segment ``{0..m-1}``.  At level
``n+1`` it pulls the level-``n`` value back along ``e_gamma`` with
``gamma = max(s)``.  Both clauses of the free set property are checked by
brute force in :func:`verify_free_set_property`.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass, field

from .errors import InvalidInput
from .ground import FinIndexSet, GroundSet, as_index_set


class SetMapping:
    def __init__(self, ground: GroundSet, memoize: bool = True):
        self.ground = ground
        self.level = ground.level
        self.memoize = memoize
        self.lower = SetMapping(ground.lower, memoize) if ground.lower is not None else None
        self.memo: dict[FinIndexSet, FinIndexSet] = {}

    def _check(self, s: FinIndexSet) -> None:
        if len(s) != self.level + 1:
            raise InvalidInput(f"level-{self.level} set mapping takes {self.level + 1}-sets, got {s!r}")
        if s.max() >= self.ground.size:
            raise InvalidInput(f"member {s.max()} outside carrier of size {self.ground.size}")

    def f(self, s) -> FinIndexSet:
        s = as_index_set(s)
        self._check(s)
        if self.memoize:
            hit = self.memo.get(s)
            if hit is not None:
                return hit
        value = self._evaluate(s)
        if self.memoize:
            self.memo[s] = value
        return value

    def _evaluate(self, s: FinIndexSet) -> FinIndexSet:
        gamma = s.max()
        if self.level == 0:
            return FinIndexSet(range(gamma))
        e = self.ground.injection(gamma)
        return e.preimage(self.lower.f(e.image(s.without(gamma))))

    def obstruction(self, s) -> FinIndexSet:
        """``O(s) = f(s) \\ s``."""
        s = as_index_set(s)
        return self.f(s).difference(s)

    def free_witness(self, t) -> int | None:
        """Least ``alpha`` in ``t`` below ``max(t)`` with ``alpha in f(t - {alpha})``."""
        t = as_index_set(t)
        if len(t) != self.level + 2:
            raise InvalidInput(f"level-{self.level} clause (2) takes {self.level + 2}-sets, got {t!r}")
        top = t.max()
        for alpha in t:
            if alpha < top and alpha in self.f(t.without(alpha)):
                return alpha
        return None

    def domain(self, carrier: int | None = None):
        n = carrier if carrier is not None else self.ground.size
        for c in itertools.combinations(range(n), self.level + 1):
            yield FinIndexSet._sorted(c)


@dataclass
class VerificationReport:
    level: int
    carrier: int
    rule: str
    seed: int | None
    mode: str
    checked: int = 0
    violations: list = field(default_factory=list)
    clause1_checked: int = 0
    clause1_violations: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict, repr=False)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.clause1_violations

    def witness_histogram(self) -> dict[int, int]:
        """Counts of witnesses by their rank inside ``t`` (0 = least member)."""
        hist = Counter(list(t).index(a) for t, a in self.witnesses.items())
        return dict(sorted(hist.items()))

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "carrier": self.carrier,
            "rule": self.rule,
            "seed": self.seed,
            "mode": self.mode,
            "checked": self.checked,
            "violations": [list(t) for t in self.violations],
            "clause1_checked": self.clause1_checked,
            "clause1_violations": [list(s) for s in self.clause1_violations],
            "witness_histogram": {str(k): v for k, v in self.witness_histogram().items()},
        }


def check_bounded(mapping: SetMapping) -> tuple[int, list[FinIndexSet]]:
    """Clause (1) over the whole domain: every ``f(s)`` lies below ``max(s)``."""
    bad, count = [], 0
    for s in mapping.domain():
        v = mapping.f(s)
        count += 1
        if len(v) and v.max() >= s.max():
            bad.append(s)
    return count, bad


def _sample_subsets(n: int, k: int, count: int, seed: int):
    total = math.comb(n, k)
    if count >= total:
        yield from itertools.combinations(range(n), k)
        return
    rng = random.Random(seed)
    seen = set()
    while len(seen) < count:
        t = tuple(sorted(rng.sample(range(n), k)))
        if t not in seen:
            seen.add(t)
            yield t


def verify_free_set_property(mapping: SetMapping, mode: str = "exhaustive",
                             count: int = 1000, seed: int = 0,
                             subsets=None, clause1: bool = True) -> VerificationReport:
    g = mapping.ground
    rep = VerificationReport(g.level, g.size, g.rule, g.seed,
                             "exhaustive" if mode == "exhaustive" else f"sample({count},{seed})")
    k = mapping.level + 2
    if subsets is None:
        if mode == "exhaustive":
            subsets = itertools.combinations(range(g.size), k)
        elif mode == "sample":
            subsets = _sample_subsets(g.size, k, count, seed)
        else:
            raise InvalidInput(f"unknown verification mode {mode!r}")
    for t in subsets:
        t = FinIndexSet._sorted(tuple(t))
        rep.checked += 1
        alpha = mapping.free_witness(t)
        if alpha is None:
            rep.violations.append(t)
        else:
            rep.witnesses[t] = alpha
    if clause1 and mode == "exhaustive":
        rep.clause1_checked, rep.clause1_violations = check_bounded(mapping)
    return rep
