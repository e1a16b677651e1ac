from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIB, TM, fixed_point
from matchbox.coding import build_hierarchy
from matchbox.errors import MatchboxError
from matchbox.invlim import (InverseSystem, char_poly, compose_check, corrupt, h1_limit, matrix_functoriality,
                             parse_matrices_csv, rank_exact, thread_check)
from matchbox.systems import OdometerSpec, SubstitutionRule, make_system


def inverse_system(system, L, strategy="chain"):
    return InverseSystem(build_hierarchy(system, L, strategy=strategy))


def test_dyadic_bondings(dyadic):
    inv = inverse_system(dyadic, 4)
    assert [b.matrix.rows for b in inv.bondings()] == [[[2]]] * 3
    assert all(b.cellular for b in inv.bondings())
    assert h1_limit([b.matrix for b in inv.bondings()]).rank == 1
    for s in inv.simplified():
        assert s.n_vertices == 1 and len(s.edges) == 1


def test_fibonacci_bondings(fib):
    inv = inverse_system(fib, 3)
    mats = [b.matrix for b in inv.bondings()]
    assert [m.rows for m in mats] == [[[1, 1], [1, 0]]] * 2
    assert char_poly(mats[0].rows) == [1, -1, -1]
    assert h1_limit(mats).rank == 2


def test_thue_morse_bondings(tm):
    inv = inverse_system(tm, 3)
    mats = [b.matrix.rows for b in inv.bondings()]
    # x^2 - 2x divides the characteristic polynomial; the PF eigenvalue is 2
    p = np.array(char_poly(mats[-1]), dtype=float)
    q, r = np.polydiv(p, np.array([1.0, -2.0, 0.0]))
    assert np.allclose(r, 0)
    assert max(abs(np.linalg.eigvals(np.array(mats[-1], dtype=float)))) == pytest.approx(2.0)
    assert h1_limit(mats).rank == 2


def _splits(word, pieces):
    """All multisets of pieces whose concatenation in some order spells word."""
    if not word:
        return [Counter()]
    out = []
    for i, p in enumerate(pieces):
        if word.startswith(p):
            for rest in _splits(word[len(p):], pieces):
                out.append(rest + Counter({i: 1}))
    return out


@pytest.mark.parametrize("rule", [FIB, TM])
def test_bonding_matrix_string_oracle(rule):
    # column j lists how often each coarse edge occurs along fine edge j;
    # oracle: the fine edge label spells a concatenation of coarse labels
    system = make_system(SubstitutionRule.from_dict(rule))
    inv = inverse_system(system, 3)
    u = fixed_point(rule, 6000)
    simp = inv.simplified()
    for b in inv.bondings():
        fine, coarse = simp[inv.index(b.source)], simp[inv.index(b.target)]
        labels = [e[2] for e in coarse.edges]
        for j, e in enumerate(fine.edges):
            assert e[2] in u
            col = Counter({i: b.matrix.rows[i][j] for i in range(len(labels)) if b.matrix.rows[i][j]})
            assert col in _splits(e[2], labels)
            assert sum(k * coarse.edges[i][3] for i, k in col.items()) == e[3]


def test_fibonacci_edges_are_return_words(fib):
    u = fixed_point(FIB, 6000)
    inv = inverse_system(fib, 3)
    for lv, s in zip(inv.hierarchy, inv.simplified()):
        v = lv.V.render()[2:-2]
        hits = [p for p in range(5000) if u.startswith(v, p)]
        assert sorted(e[2] for e in s.edges) == sorted({u[p:q] for p, q in zip(hits, hits[1:])})


@pytest.mark.parametrize("name", ["dyadic", "fib", "tm"])
def test_compose_and_functoriality(name, dyadic, fib, tm):
    system = {"dyadic": dyadic, "fib": fib, "tm": tm}[name]
    inv = inverse_system(system, 3)
    q31, q21, q32 = inv.bonding(3, 1), inv.bonding(2, 1), inv.bonding(3, 2)
    assert compose_check(q31, q21, q32)
    assert matrix_functoriality(q31, q21, q32)
    assert not compose_check(corrupt(q31), q21, q32)
    with pytest.raises(MatchboxError):
        compose_check(q21, q31, q32)


def test_identity_bonding(fib):
    inv = inverse_system(fib, 2)
    b = inv.bonding(2, 2)
    assert b.matrix.rows == [[1, 0], [0, 1]]
    with pytest.raises(MatchboxError) as e:
        inv.cell_map(1, 2)
    assert e.value.code == "LEVEL_MISMATCH"


def test_h1_needs_two_matrices():
    with pytest.raises(MatchboxError) as e:
        h1_limit([[[2]]])
    assert e.value.code == "INSUFFICIENT_DATA"


def test_h1_drift_flag():
    r = h1_limit([[[1, 0], [0, 1]], [[1], [1]]])
    assert "DIMENSION_DRIFT" in r.flags


@pytest.mark.parametrize("name", ["dyadic", "fib", "tm"])
def test_thread_check(name, dyadic, fib, tm):
    system = {"dyadic": dyadic, "fib": fib, "tm": tm}[name]
    inv = inverse_system(system, 3)
    r = thread_check(inv, 3)
    assert r.passed and r.exhaustive
    assert r.to_json()["passed"] is True


def test_thread_check_single_level(fib):
    # with one level the compatibility conditions are vacuous
    r = thread_check(inverse_system(fib, 1), 1)
    assert r.passed and r.depth == 1


def test_coding_strategy_dyadic(dyadic):
    inv = inverse_system(dyadic, 3, strategy="coding")
    assert compose_check(inv.bonding(3, 1), inv.bonding(2, 1), inv.bonding(3, 2))
    assert thread_check(inv, 3).passed


def test_matrices_csv_roundtrip(fib):
    from matchbox.invlim import matrices_csv
    inv = inverse_system(fib, 3)
    parsed = parse_matrices_csv(matrices_csv(inv))
    assert parsed == {(b.source, b.target): b.matrix.rows for b in inv.bondings()}


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3))
def test_rank_and_char_poly_oracle(rows):
    a = np.array(rows, dtype=float)
    assert rank_exact(rows) == np.linalg.matrix_rank(a)
    assert np.allclose(char_poly(rows), np.poly(a), atol=1e-6)


def test_odometer_oracle_matrix():
    s = make_system(OdometerSpec(1, (3, 6, 12)))
    inv = inverse_system(s, 3)
    # index ratios of consecutive subgroups
    assert [b.matrix.rows for b in inv.bondings()] == [[[2]], [[2]]]
