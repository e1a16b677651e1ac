import pytest

from matchbox.systems import OdometerSpec, SubstitutionRule, make_system

FIB = {"a": "ab", "b": "a"}
TM = {"a": "ab", "b": "ba"}


@pytest.fixture
def fib():
    return make_system(SubstitutionRule.from_dict(FIB))


@pytest.fixture
def tm():
    return make_system(SubstitutionRule.from_dict(TM))


@pytest.fixture
def dyadic():
    return make_system(OdometerSpec(1, (2, 4, 8, 16, 32)))


@pytest.fixture
def z2():
    return make_system(OdometerSpec(2, (((2, 0), (0, 2)),)))


def fixed_point(rule, n, seed="a"):
    """Plain-string oracle: iterate the substitution from a seed letter."""
    w = seed
    while len(w) < n:
        w = "".join(rule[c] for c in w)
    return w[:n]


def occurrences(u, p):
    out, i = [], u.find(p)
    while i != -1:
        out.append(i)
        i = u.find(p, i + 1)
    return out
