from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIB, TM, fixed_point
from matchbox.clopen import (ClopenSet, Partition, diameter, distance, intersect, refine_common, subtract,
                             symbol_partition, union)
from matchbox.errors import MatchboxError
from matchbox.systems import OdometerSpec, SubstitutionRule, make_system

DEPTH = 8


def P(system, *words):
    return ClopenSet.parse(system, *words)


def test_intersect_examples(fib):
    assert intersect(P(fib, "ab"), P(fib, "a")) == P(fib, "ab")
    assert intersect(P(fib, "a"), P(fib, "b")).is_empty()
    assert intersect(P(fib, "aa", "ba"), P(fib, "a")) == P(fib, "aa")


def test_subtract_examples(fib):
    assert subtract(P(fib, "a"), P(fib, "ab")) == P(fib, "aa")
    X = ClopenSet.whole(fib)
    assert subtract(X, X).is_empty()
    assert subtract(P(fib, "aa"), P(fib, "b")) == P(fib, "aa")


def test_refine_common_examples(fib):
    p = Partition.canonical([P(fib, "a"), P(fib, "b")])
    q = Partition.canonical([P(fib, "aa", "ba"), P(fib, "ab")])
    r = refine_common(p, q)
    assert [b.render() for b in r] == ["{[aa]}", "{[ab]}", "{[b]}"]
    assert refine_common(p, p) == p
    trivial = Partition([ClopenSet.whole(fib)])
    assert refine_common(p, trivial) == p


def test_refine_common_ambient_mismatch(fib):
    p = Partition.canonical([P(fib, "a"), P(fib, "b")])
    with pytest.raises(MatchboxError) as e:
        refine_common(p, Partition([P(fib, "a")]))
    assert e.value.code == "AMBIENT_MISMATCH"


def test_diameter_distance_examples(fib):
    assert diameter(P(fib, "ab")) == Fraction(1, 4)
    assert diameter(ClopenSet.empty(fib)) == 0
    # first disagreement at coordinate 1 gives 2^-1 under d = 2^-k
    assert distance(P(fib, "aa"), P(fib, "ab")) == Fraction(1, 2)
    assert distance(P(fib, "aab"), P(fib, "aba")) == Fraction(1, 2)
    with pytest.raises(MatchboxError) as e:
        distance(ClopenSet.empty(fib), P(fib, "a"))
    assert e.value.code == "EMPTY_INPUT"


def test_normal_form_merges_siblings(fib):
    # [ab] = [aba] in Fibonacci since "abb" is illegal
    assert P(fib, "aba") == P(fib, "ab")
    assert P(fib, "aa", "ab") == P(fib, "a")
    assert P(fib, "a", "b") == ClopenSet.whole(fib)
    assert P(fib, "a").render() == "{[a]}"


def test_illegal_word(fib):
    with pytest.raises(MatchboxError) as e:
        P(fib, "bb")
    assert e.value.code == "ILLEGAL_WORD"


def test_system_mismatch(fib, tm):
    with pytest.raises(MatchboxError) as e:
        P(fib, "a") & P(tm, "a")
    assert e.value.code == "SYSTEM_MISMATCH"


def test_partition_rejects_overlap(fib):
    with pytest.raises(MatchboxError) as e:
        Partition([P(fib, "a"), P(fib, "ab")])
    assert e.value.code == "OVERLAP"


def test_symbol_partition(fib, dyadic):
    assert [b.render() for b in symbol_partition(fib)] == ["{[a]}", "{[b]}"]
    assert len(symbol_partition(dyadic)) == 2


def test_odometer_sets(dyadic):
    a = P(dyadic, "0 mod 4")
    b = P(dyadic, "0 mod 2")
    assert a.issubset(b)
    assert (b - a) == P(dyadic, "2 mod 4")
    assert diameter(a) == Fraction(1, 4)
    assert distance(P(dyadic, "0 mod 4"), P(dyadic, "2 mod 4")) == Fraction(1, 2)


# ---------------------------------------------------------------------------
# brute-force oracle: a set of depth <= DEPTH is the set of legal DEPTH-words
# starting with one of its cylinder words (legal words from a plain string scan)

def _legal(rule, n):
    u = fixed_point(rule, 6000)
    return sorted({u[i:i + n] for i in range(len(u) - n)})


ORACLE = {name: (make_system(SubstitutionRule.from_dict(rule)), _legal(rule, DEPTH), rule)
          for name, rule in (("fib", FIB), ("tm", TM))}


def _expand(system, s):
    words = [system.render_word(w) for w in s.words]
    return words


def _points(cyls, legal):
    return {u for u in legal if any(u.startswith(c) for c in cyls)}


@st.composite
def cylinder_union(draw, name):
    system, legal, _ = ORACLE[name]
    n = draw(st.integers(0, 6))
    words = []
    for _ in range(n):
        u = draw(st.sampled_from(legal))
        k = draw(st.integers(1, DEPTH))
        words.append(u[:k])
    return words


names = st.sampled_from(sorted(ORACLE))


@settings(max_examples=120, deadline=None)
@given(st.data())
def test_normal_form_canonical(data):
    name = data.draw(names)
    system, legal, _ = ORACLE[name]
    words = data.draw(cylinder_union(name))
    shuffled = data.draw(st.permutations(words))
    a = P(system, *words) if words else ClopenSet.empty(system)
    b = P(system, *shuffled) if shuffled else ClopenSet.empty(system)
    assert a == b and a.render() == b.render()
    # same point set as the input cylinders
    assert _points(_expand(system, a), legal) == _points(words, legal)


@settings(max_examples=120, deadline=None)
@given(st.data())
def test_boolean_ops_match_oracle(data):
    name = data.draw(names)
    system, legal, _ = ORACLE[name]
    ws = [data.draw(cylinder_union(name)) for _ in range(3)]
    A, B, C = (P(system, *w) if w else ClopenSet.empty(system) for w in ws)
    pa, pb, pc = (_points(w, legal) for w in ws)
    X = ClopenSet.whole(system)
    assert _points(_expand(system, A & B), legal) == pa & pb
    assert _points(_expand(system, A | B), legal) == pa | pb
    assert _points(_expand(system, A - B), legal) == pa - pb
    # de Morgan and distributivity, exactly
    assert X - (A | B) == (X - A) & (X - B)
    assert X - (A & B) == (X - A) | (X - B)
    assert A & (B | C) == (A & B) | (A & C)
    assert A | (B & C) == (A | B) & (A | C)


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_diameter_and_distance_laws(data):
    name = data.draw(names)
    system, legal, _ = ORACLE[name]
    wa, wb = data.draw(cylinder_union(name)), data.draw(cylinder_union(name))
    A = P(system, *wa) if wa else ClopenSet.empty(system)
    B = P(system, *wb) if wb else ClopenSet.empty(system)
    assert diameter(A | B) >= max(diameter(A), diameter(B))
    B = B - A
    if A and B:
        d = distance(A, B)
        assert d > 0
        # oracle: min over point pairs of 2^-(first disagreement)
        pa, pb = _points(_expand(system, A), legal), _points(_expand(system, B), legal)
        best = min(Fraction(1, 2 ** next(i for i in range(DEPTH) if x[i] != y[i])) for x in pa for y in pb)
        assert d == best


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_partition_law_refine(data):
    name = data.draw(names)
    system, legal, _ = ORACLE[name]
    k1, k2 = data.draw(st.integers(1, 4)), data.draw(st.integers(1, 4))
    p = Partition.canonical([ClopenSet.cylinder(system, w) for w in system.words(k1)])
    q = Partition.canonical([ClopenSet.cylinder(system, w) for w in system.words(k2)])
    r = refine_common(p, q)
    assert r.ambient == ClopenSet.whole(system)
    for i, a in enumerate(r):
        for b in list(r)[i + 1:]:
            assert a.isdisjoint(b)
    assert len(r) == len(system.words(max(k1, k2)))


def test_dyadic_union_oracle():
    s = make_system(OdometerSpec(1, (2,)))
    for r in range(8):
        a = P(s, f"{r} mod 8")
        assert (a | P(s, f"{r ^ 4} mod 8")) == P(s, f"{r % 4} mod 4")
