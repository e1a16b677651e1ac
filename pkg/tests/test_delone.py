from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIB, fixed_point
from matchbox.clopen import ClopenSet
from matchbox.delone import DeloneNet, delone_check, lambda1_profile, net, stats
from matchbox.errors import MatchboxError
from matchbox.holonomy import alpha_W
from matchbox.systems import SubstitutionRule, make_system

U = fixed_point(FIB, 400)
FIB_SYS = make_system(SubstitutionRule.from_dict(FIB))
FIB_LEN = make_system(SubstitutionRule.from_dict(FIB, lengths={"a": "3/2", "b": "1"}))


def P(system, *words):
    return ClopenSet.parse(system, *words)


def test_dyadic_net(dyadic):
    n = net(dyadic.point(0), P(dyadic, "0 mod 4"), 10)
    assert n.points == [-8, -4, 0, 4, 8]
    s = stats(n)
    assert (s.lambda1, s.covering_radius, s.alpha_W, s.e_W) == (4, 2, 3, 7)


def test_fibonacci_net_matches_string(fib):
    n = net(fib.point(0), P(fib, "a"), 20)
    # nonnegative half of the net: positions of "a" in the fixed point
    assert [p for p in n.points if p >= 0] == [g for g in range(21) if U[g] == "a"]
    s = stats(n)
    assert (s.lambda1, s.covering_radius, s.alpha_W, s.e_W) == (1, 1, 1, 3)


def test_lambda1_profile(dyadic, fib):
    assert lambda1_profile([P(dyadic, "0 mod 2"), P(dyadic, "0 mod 4"), P(dyadic, "0 mod 8")], 40) == [2, 4, 8]
    assert lambda1_profile([P(fib, "a"), P(fib, "aa")], 40) == [1, 3]


def test_singleton_net():
    with pytest.raises(MatchboxError) as e:
        stats(DeloneNet.from_points([0]))
    assert e.value.code == "SINGLETON_NET"


def test_dump_lines(dyadic):
    n = net(dyadic.point(0), P(dyadic, "0 mod 4"), 4)
    assert n.dump().splitlines()[1] == "0 [0 mod 4]"


def test_z2_net(z2):
    # 4Z^2 inside the Euclidean ball of radius 6
    n = net(z2.point((0, 0)), P(z2, "(0,0) mod H2"), 6)
    assert n.points == sorted((x, y) for x in (-4, 0, 4) for y in (-4, 0, 4))
    assert stats(n, alpha=None).lambda1 == 4


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 60), st.integers(4, 30), st.sampled_from(["a", "aa", "ab", "b"]))
def test_net_window_consistency(p, R, word):
    # restricting a larger net equals computing the smaller one
    W = P(FIB_LEN, word)
    w = FIB_LEN.point(p)
    small, big = net(w, W, R), net(w, W, 2 * R)
    assert big.restrict(R).points == small.points
    # oracle: coordinates of the occurrences, measured from w
    coord = FIB_LEN.coord
    expect = sorted(coord(q) - coord(p) for q in range(max(0, p - 2 * R), p + 2 * R + 1)
                    if U.startswith(word, q) and abs(coord(q) - coord(p)) <= R and q >= 0)
    assert [x for x in small.points if x >= -coord(p)] == expect


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100), st.sampled_from(["a", "aa", "ab", "aab", "b"]))
def test_delone_property_and_e_bound(p, word):
    W = P(FIB_SYS, word)
    n = net(FIB_SYS.point(p), W, 60)
    s = stats(n)
    assert delone_check(n, s)
    # every gap is at most 2*alpha_W + 1 tiles long, so at most 2 e_W
    a = alpha_W(W)
    gaps = [y - x for x, y in zip(n.points, n.points[1:])]
    assert max(gaps) <= a + 1 and s.covering_radius <= s.e_W
    assert s.lambda1 == min(gaps) and s.lambda1 > 0
