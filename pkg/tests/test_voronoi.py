import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from matchbox.checks import random_net, voronoi_oracle
from matchbox.delone import DeloneNet
from matchbox.errors import MatchboxError
from matchbox.voronoi import (VoronoiCell, area, cells, convex_hull, geometry_equal, halfspace_form, interior_sites,
                              star, tessellation_check)

H = Fraction(1, 2)


def z2_net(r=5):
    return DeloneNet.from_points([(i, j) for i in range(-r, r + 1) for j in range(-r, r + 1)],
                                 window=((-r - H, r + H),) * 2)


def test_line_cells():
    n = DeloneNet.from_points([0, 1, 3])
    assert [c.geometry for c in cells(n)] == [(None, H), (H, 2), (2, None)]
    assert star(n, 0).vertex_set == [0, 1]
    assert halfspace_form(n, 1) == (H, 2)


def test_z2_cell_and_star():
    n = z2_net()
    cs = cells(n)
    c = cs[n.points.index((0, 0))]
    assert geometry_equal(c.geometry, [(-H, -H), (H, -H), (H, H), (-H, H)])
    s = star(n, (0, 0), cs)
    assert len(s.vertex_set) == 9
    # the star is the square [-3/2, 3/2]^2
    hull = convex_hull([v for d in s.cells for v in d.geometry])
    assert geometry_equal(hull, [(-3 * H, -3 * H), (3 * H, -3 * H), (3 * H, 3 * H), (-3 * H, 3 * H)])
    assert sum(area(d.geometry) for d in s.cells) == 9
    assert geometry_equal(halfspace_form(n, (0, 0), cs), c.geometry)


def test_boundary_site_rejected():
    n = z2_net(2)
    with pytest.raises(MatchboxError) as e:
        star(n, (2, 2))
    assert e.value.code == "BOUNDARY_SITE"
    with pytest.raises(MatchboxError) as e:
        star(n, (H, 0))
    assert e.value.code == "NOT_A_SITE"


def test_tessellation_z2():
    n = z2_net(3)
    assert tessellation_check(n)
    # sites whose star avoids the clipped outer ring
    assert [n.points[i] for i in interior_sites(n)] == [(x, y) for x in (-1, 0, 1) for y in (-1, 0, 1)]


def test_vertex_sets_symmetric():
    # z lies in star(y) iff y lies in star(z)
    rng = random.Random(3)
    for dim in (1, 2):
        for _ in range(5):
            n = random_net(rng, dim)
            cs = cells(n)
            inner = interior_sites(n, cs)
            sets = {cs[i].site: set(star(n, cs[i].site, cs).vertex_set) for i in inner}
            for y, vs in sets.items():
                for z in vs:
                    if z in sets:
                        assert y in sets[z]


def _nearest(points, p):
    """Independent oracle: sites at minimum squared distance."""
    if isinstance(p, tuple):
        ds = [(q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2 for q in points]
    else:
        ds = [(q - p) ** 2 for q in points]
    return {i for i, d in enumerate(ds) if d == min(ds)}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([1, 2]))
def test_random_nets_oracle(seed, dim):
    rng = random.Random(seed)
    n = random_net(rng, dim, max_sites=12)
    checked, fails = voronoi_oracle(n)
    assert checked > 0 and fails == []
    # interior points of each cell have that site as unique nearest site
    for i, c in enumerate(cells(n)):
        if dim == 1:
            lo, hi = c.geometry
            if lo is not None and hi is not None:
                assert _nearest(n.points, (lo + hi) / 2) == {i}
        else:
            g = c.geometry
            centroid = (sum(v[0] for v in g) / len(g), sum(v[1] for v in g) / len(g))
            assert i in _nearest(n.points, centroid)


def test_negative_control(monkeypatch):
    # a wrong cell must be reported by the oracle
    import matchbox.checks as checks
    n = DeloneNet.from_points([0, 1, 3, 4, 6], window=(-2, 8))
    real = checks.cells

    def broken(dnet):
        cs = real(dnet)
        cs[2] = VoronoiCell(cs[2].site, (cs[2].geometry[0], cs[2].geometry[1] + H))
        return cs

    monkeypatch.setattr(checks, "cells", broken)
    _, fails = voronoi_oracle(n)
    assert fails
