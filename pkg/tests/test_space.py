from fractions import Fraction as F
from itertools import combinations, islice

import pytest
from hypothesis import given, settings, strategies as st

from oracle import dist, dyadic_points, pairing_oracle
from qramsey.errors import BudgetExhausted, EnumerationError, InvalidInput
from qramsey.ground import FinIndexSet
from qramsey.space import (ALL, DyadicEnumeration, Enumeration, IndexFilter, IntegerGridEnumeration,
                           ListEnumeration, Space, distance, dyadic_enumeration, extract_omega_copy,
                           format_point, is_dense_in_itself, pairing_schedule, parse_point,
                           recheck_certificate)


def dyadic(a=0, b=1):
    return Space(dyadic_enumeration((F(a), F(b))))


def test_dyadic_examples():
    e = dyadic_enumeration((F(0), F(1)))
    assert [e.point(i)[0] for i in range(7)] == [F(1, 2), F(1, 4), F(3, 4), F(1, 8), F(3, 8), F(5, 8), F(7, 8)]
    assert dyadic_enumeration((F(0), F(2))).point(0) == (F(1),)
    with pytest.raises(InvalidInput):
        dyadic_enumeration((F(1), F(1)))


@pytest.mark.parametrize("a,b", [(0, 1), (F(1, 3), F(2, 3)), (-2, F(5, 7))])
def test_dyadic_matches_level_listing(a, b):
    e = DyadicEnumeration(a, b)
    assert [e.point(i)[0] for i in range(3000)] == dyadic_points(3000, F(a), F(b))


def test_enumeration_is_one_to_one():
    e = DyadicEnumeration(0, 1)
    pts = e.materialize(20000)
    assert len(set(pts)) == 20000
    with pytest.raises(EnumerationError):
        ListEnumeration(["1/2", "1/3", "2/4"])


def test_point_formatting_round_trip():
    p = parse_point("1/2,-3/4")
    assert p == (F(1, 2), F(-3, 4))
    assert format_point(p) == "1/2,-3/4"
    assert format_point((F(2),)) == "2/1"


def test_chebyshev_metric_and_axioms():
    e = ListEnumeration(["0,0", "1/2,1/3", "-1,2", "3/7,3/7", "1,1"])
    sp = Space(e)
    assert sp.distance(0, 1) == F(1, 2)
    pts = range(e.bound)
    for x, y in combinations(pts, 2):
        assert sp.distance(x, y) == sp.distance(y, x) > 0
    for x in pts:
        assert sp.distance(x, x) == 0
        for y in pts:
            for z in pts:
                assert sp.distance(x, z) <= sp.distance(x, y) + sp.distance(y, z)


def test_index_of_uses_the_log():
    e = DyadicEnumeration(0, 1)
    assert e.index_of((F(7, 16),)) == 10
    with pytest.raises(InvalidInput):
        e.index_of((F(1, 3),), limit=500)


def test_filter_parsing():
    assert IndexFilter.parse("even") == IndexFilter(2, 0)
    assert IndexFilter.parse("mod:3:1").first(3) == [1, 4, 7]
    assert str(IndexFilter.parse(None)) == "all"
    with pytest.raises(InvalidInput):
        IndexFilter.parse("mod:3:5")
    with pytest.raises(InvalidInput):
        IndexFilter.parse("primes")


rationals = st.fractions(min_value=-2, max_value=3, max_denominator=64)
radii = st.fractions(min_value=F(1, 2000), max_value=2, max_denominator=4096).filter(lambda r: r > 0)
filters = st.sampled_from([ALL, IndexFilter(2, 0), IndexFilter(2, 1), IndexFilter(3, 2), IndexFilter(5, 0)])


@settings(max_examples=300, deadline=None)
@given(c=rationals, r=radii, start=st.integers(-1, 300), budget=st.integers(1, 1500), filt=filters,
       interval=st.sampled_from([(0, 1), (F(1, 3), F(2, 3)), (-1, 2)]))
def test_dyadic_ball_search_matches_scan(c, r, start, budget, filt, interval):
    e = DyadicEnumeration(*interval)
    fast = e.first_in_ball((c,), r, start, filt, budget)
    slow = Enumeration.first_in_ball(e, (c,), r, start, filt, budget)
    assert fast == slow


@settings(max_examples=200, deadline=None)
@given(c=rationals, r=radii, start=st.integers(-1, 20), budget=st.integers(1, 50), filt=filters)
def test_grid_ball_search_matches_scan(c, r, start, budget, filt):
    e = IntegerGridEnumeration()
    assert e.first_in_ball((c,), r, start, filt, budget) == Enumeration.first_in_ball(e, (c,), r, start, filt, budget)


@settings(max_examples=150, deadline=None)
@given(members=st.sets(st.integers(0, 400), min_size=2, max_size=30), interval=st.sampled_from([(0, 1), (F(-1, 3), F(5, 7))]))
def test_min_distance_matches_all_pairs(members, interval):
    sp = Space(DyadicEnumeration(*interval))
    pts = dyadic_points(401, F(interval[0]), F(interval[1]))
    expected = min(abs(pts[a] - pts[b]) for a, b in combinations(members, 2))
    assert sp.min_distance(members) == expected
    # generic keying path gives the same answer
    keys, off, scale = Enumeration.line_keys(sp.enumeration, FinIndexSet(members))
    assert off + scale * int(min(keys)) == min(pts[m] for m in members)


@settings(max_examples=150, deadline=None)
@given(members=st.sets(st.integers(0, 300), min_size=1, max_size=25), q=st.integers(0, 2000), r=radii)
def test_locator_within_matches_brute_force(members, q, r):
    sp = dyadic()
    loc = sp.locator(FinIndexSet(members))
    p = sp.point(q)
    assert sorted(loc.within(p, r)) == sorted(m for m in members if distance(sp.point(m), p) < r)


def test_locator_in_two_dimensions():
    sp = Space(ListEnumeration(["0,0", "1/2,1/3", "-1,2", "3/7,3/7", "1,1"]))
    loc = sp.locator(FinIndexSet(range(5)))
    # max(abs(1/2 - 3/7), abs(1/3 - 3/7)) = max(1/14, 2/21)
    assert loc.min_distance() == F(2, 21)
    assert loc.within((F(1, 2), F(2, 5)), F(1, 10)) == [1, 3]


def test_pairing_examples():
    sched = list(islice(pairing_schedule(), 400))
    assert sched[0] == (0, 0)
    assert all(n < k - 1 for k, (n, _) in enumerate(sched, start=2))
    assert len(set(sched)) == len(sched)
    first50 = set(sched[:50])
    assert all((n, l) in first50 for n in range(6) for l in range(6 - n))


def test_pairing_matches_greedy_oracle():
    assert list(islice(pairing_schedule(), 300)) == pairing_oracle(300)


def test_pairing_covers_box():
    seen = set(islice(pairing_schedule(), 5000))
    assert all((n, l) in seen for n in range(30) for l in range(30))


def test_extract_dyadic_certificate():
    sp = dyadic()
    cert = extract_omega_copy(sp, 20, search_budget=10**5)
    assert len(cert.indices) == 20
    assert recheck_certificate(sp, cert) == []


def test_extract_integer_grid_exhausts_at_step_two():
    with pytest.raises(BudgetExhausted) as info:
        extract_omega_copy(Space(IntegerGridEnumeration()), 3)
    assert info.value.step == 2


def test_extract_filtered():
    sp = dyadic()
    filt = IndexFilter(3, 1)
    cert = extract_omega_copy(sp, 10, within=filt, search_budget=10**5)
    assert all(filt.admits(i) for i in cert.indices)
    assert recheck_certificate(sp, cert) == []


def test_extract_rejects_short_runs():
    with pytest.raises(InvalidInput):
        extract_omega_copy(dyadic(), 1)


def test_recheck_catches_tampering():
    sp = dyadic()
    cert = extract_omega_copy(sp, 12)
    cert.radii[3] = cert.radii[3] * 1000
    assert recheck_certificate(sp, cert)
    cert = extract_omega_copy(sp, 12)
    cert.indices[5], cert.indices[6] = cert.indices[6], cert.indices[5]
    assert recheck_certificate(sp, cert)


def test_dense_examples():
    assert is_dense_in_itself(dyadic(), 50, ["1/10", "1/100"], 10**5).failures == []
    single = Space(ListEnumeration(["1/2"]))
    assert is_dense_in_itself(single, 1, ["1/2"]).failures == [(0, F(1, 2))]
    grid = is_dense_in_itself(Space(IntegerGridEnumeration()), 10, ["1/2"], 10**5)
    assert len(grid.failures) == 10


def test_dense_check_on_finite_list():
    sp = Space(ListEnumeration(["0", "1/10", "1/2"]))
    rep = is_dense_in_itself(sp, 3, ["1/5"])
    assert rep.failures == [(2, F(1, 5))]


@settings(max_examples=60, deadline=None)
@given(c=st.integers(0, 5000), r=st.fractions(min_value=F(1, 10**4), max_value=F(1, 10)).filter(lambda r: r > 0))
def test_dyadic_balls_are_infinite(c, r):
    sp = dyadic()
    center = sp.point(c)
    found, start = [], -1
    while len(found) < 8:
        start = sp.first_in_ball(center, r, start, ALL, 10**8)
        assert start is not None
        found.append(start)
    assert len({sp.point(i) for i in found}) == 8
    assert all(dist(sp.point(i)[0], center[0]) < r for i in found)


def test_space_descriptor_round_trip():
    for d in [{"kind": "dyadic", "interval": ["1/3", "2/3"], "dimension": 1},
              {"kind": "integer-grid", "dimension": 1},
              {"kind": "custom-list", "dimension": 2, "points": ["0/1,1/2", "1/3,1/1"]}]:
        assert Space.from_descriptor(d).descriptor() == d
    with pytest.raises(InvalidInput):
        Space.from_descriptor({"kind": "dyadic", "dimension": 2})
    with pytest.raises(InvalidInput):
        Space.from_descriptor({"kind": "hilbert"})
