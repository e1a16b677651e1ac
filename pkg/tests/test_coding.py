import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIB, fixed_point
from matchbox.clopen import ClopenSet, Partition, diameter, symbol_partition
from matchbox.coding import (CodeWord, build_hierarchy, check_codes, check_level, code, germ_range, refine_by_code,
                             return_word_partition)
from matchbox.errors import MatchboxError
from matchbox.io import emit_hierarchy, parse_hierarchy
from matchbox.systems import SubstitutionRule, make_system

U = fixed_point(FIB, 5000)
FIB_SYS = make_system(SubstitutionRule.from_dict(FIB))
LEGAL = sorted({U[i:i + 10] for i in range(len(U) - 10)})


def P(system, *words):
    return ClopenSet.parse(system, *words)


def test_code_examples(fib, dyadic):
    assert code(P(fib, "aab"), [0, 1, 2], symbol_partition(fib)) == CodeWord(((0, 0), (1, 0), (2, 1)))
    par = Partition.canonical([P(dyadic, "0 mod 2"), P(dyadic, "1 mod 2")])
    assert code(P(dyadic, "2 mod 4"), [0, 1, 2], par).blocks == (0, 1, 0)


def test_code_block_split(fib):
    with pytest.raises(MatchboxError) as e:
        code(P(fib, "a"), [0, 1], symbol_partition(fib))
    assert e.value.code == "BLOCK_SPLIT"


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(LEGAL), st.integers(1, 10))
def test_code_matches_letters(u, n):
    # oracle: with the symbol partition the code is the word itself
    cw = code(P(FIB_SYS, u[:n]), list(range(n)), symbol_partition(FIB_SYS))
    assert "".join("ab"[b] for b in cw.blocks) == u[:n]


def test_refine_by_code_examples(fib, dyadic):
    assert [b.render() for b in refine_by_code(P(fib, "a"), fib.point(0), 2)] == ["{[ab]}", "{[aa]}"]
    m4 = Partition.canonical([P(dyadic, f"{r} mod 4") for r in range(4)])
    got = [b.render() for b in refine_by_code(ClopenSet.whole(dyadic), dyadic.point(0), 2, m4)]
    assert got == ["{[0 mod 4]}", "{[2 mod 4]}", "{[1 mod 4]}", "{[3 mod 4]}"]


def test_germ_range(fib):
    assert germ_range(fib.point(0), 5) == 5
    assert germ_range(fib.point(0), -1) == -1


def test_return_word_partition(fib):
    # oracle: first-return words to "a" are "a" and "ab"
    blocks = return_word_partition(P(fib, "a"))
    assert sorted(b.render() for b in blocks) == ["{[aa]}", "{[ab]}"]


@pytest.fixture(scope="module")
def hierarchies():
    fib = make_system(SubstitutionRule.from_dict(FIB))
    from matchbox.systems import OdometerSpec
    dy = make_system(OdometerSpec(1, (2, 4, 8, 16, 32)))
    return {"fib": build_hierarchy(fib, 3), "dyadic": build_hierarchy(dy, 3)}


@pytest.mark.parametrize("name", ["fib", "dyadic"])
def test_hierarchy_invariants(hierarchies, name):
    h = hierarchies[name]
    for lv in h:
        assert check_level(lv, h.basepoint) == []
        assert check_codes(lv, h.basepoint) == []
        assert lv.base.contains(h.basepoint)
        # fine blocks partition V
        assert lv.fine_partition().ambient == lv.V
    for a, b in zip(h, list(h)[1:]):
        assert b.V.issubset(a.base)
        assert diameter(b.V) <= diameter(a.V)


@pytest.mark.parametrize("name", ["fib", "dyadic"])
def test_lambda1_growth(hierarchies, name):
    h = hierarchies[name]
    prof = h.lambda1_profile()
    assert all(x <= y for x, y in zip(prof, prof[1:])) and prof[-1] > prof[0]
    for a, b in zip(h, list(h)[1:]):
        assert b.constants["lambda1"] > a.constants["R"]


def test_hierarchy_examples(hierarchies):
    h = hierarchies["dyadic"]
    assert [lv.V.render() for lv in h] == ["{[0 mod 1]}", "{[0 mod 8]}", "{[0 mod 64]}"]
    assert h.lambda1_profile() == [1, 8, 64]
    assert [lv.constants["R"] for lv in h] == [6, 62, 510]
    assert hierarchies["fib"].lambda1_profile() == [1, 21, 377]


def test_constants_formulas(hierarchies):
    for h in hierarchies.values():
        mt = h.system.max_tile
        for lv in h:
            c = lv.constants
            assert c["theta"] == (2 * c["alpha"] + 1) * mt
            assert c["R_prime"] == 2 * c["theta"] + mt
            assert c["R"] == 2 * c["R_prime"]


def test_determinism_and_dump_roundtrip(hierarchies, fib):
    text = hierarchies["fib"].dump()
    assert build_hierarchy(fib, 3).dump() == text
    assert emit_hierarchy(parse_hierarchy(text)) == text


def test_chain_strategy(fib, dyadic):
    h = build_hierarchy(fib, 4, strategy="chain")
    assert [lv.V.render() for lv in h] == ["{[a]}", "{[ab]}", "{[abaa]}", "{[abaabab]}"]
    h = build_hierarchy(dyadic, 4, strategy="chain")
    assert [lv.V.render() for lv in h] == ["{[0 mod 2]}", "{[0 mod 4]}", "{[0 mod 8]}", "{[0 mod 16]}"]
    for lv in h:
        assert check_level(lv, h.basepoint) == []


def test_bad_inputs(fib, z2):
    with pytest.raises(MatchboxError) as e:
        build_hierarchy(fib, 0)
    assert e.value.code == "BAD_LEVELS"
    with pytest.raises(MatchboxError) as e:
        build_hierarchy(fib, 2, strategy="nope")
    assert e.value.code == "BAD_STRATEGY"
    with pytest.raises(MatchboxError) as e:
        build_hierarchy(fib, 2, initial=P(fib, "b"))
    assert e.value.code == "BASEPOINT_OUTSIDE"
    with pytest.raises(MatchboxError) as e:
        build_hierarchy(z2, 2)
    assert e.value.code == "UNSUPPORTED"
