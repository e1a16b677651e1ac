"""Exact Voronoi cells, stars and the half-space identity for Delone nets.

d = 1 cells are closed intervals ``(lo, hi)`` (``None`` for an unbounded
end); d = 2 cells are convex polygons given as counterclockwise lists of
rational vertices, clipped to the net's window box.
"""
from dataclasses import dataclass
from fractions import Fraction

from .errors import MatchboxError


@dataclass
class VoronoiCell:
    site: object
    geometry: object
    clipped: bool = False

    @property
    def bounded(self):
        if isinstance(self.geometry, tuple) and len(self.geometry) == 2 and not isinstance(self.geometry[0], tuple):
            return self.geometry[0] is not None and self.geometry[1] is not None
        return True


@dataclass
class StarNeighborhood:
    site: object
    vertex_set: list
    cells: list

    def bounds(self):
        """Union interval for d = 1 stars."""
        los = [c.geometry[0] for c in self.cells]
        his = [c.geometry[1] for c in self.cells]
        lo = None if any(x is None for x in los) else min(los)
        hi = None if any(x is None for x in his) else max(his)
        return lo, hi


# ---------------------------------------------------------------------------
# polygon helpers


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


def _dist_sq(a, b):
    d = _sub(a, b)
    return _dot(d, d)


def clip(poly, a, c):
    """Intersect a convex polygon with the half-plane a.p <= c."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp, fq = _dot(a, p) - c, _dot(a, q) - c
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return normalize_polygon(out)


def normalize_polygon(pts):
    """Drop repeats and collinear points; start at the smallest vertex."""
    clean = []
    for p in pts:
        if not clean or clean[-1] != p:
            clean.append(p)
    while len(clean) > 1 and clean[0] == clean[-1]:
        clean.pop()
    changed = True
    while changed and len(clean) >= 3:
        changed = False
        for i in range(len(clean)):
            a, b, c = clean[i - 1], clean[i], clean[(i + 1) % len(clean)]
            if _cross(_sub(b, a), _sub(c, b)) == 0:
                del clean[i]
                changed = True
                break
    if not clean:
        return []
    k = clean.index(min(clean))
    return clean[k:] + clean[:k]


def area(poly):
    if len(poly) < 3:
        return Fraction(0)
    s = sum(_cross(poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly)))
    return Fraction(s) / 2


def polygon_contains(poly, p):
    """Closed containment for a counterclockwise convex polygon."""
    n = len(poly)
    if n == 1:
        return poly[0] == p
    if n == 2:
        a, b = poly
        return _cross(_sub(b, a), _sub(p, a)) == 0 and _dot(_sub(p, a), _sub(p, b)) <= 0
    return all(_cross(_sub(poly[(i + 1) % n], poly[i]), _sub(p, poly[i])) >= 0 for i in range(n))


def _axes(poly):
    n = len(poly)
    out = []
    for i in range(n):
        e = _sub(poly[(i + 1) % n], poly[i])
        out.append((-e[1], e[0]))
    return out


def _bbox(poly):
    xs = [v[0] for v in poly]
    ys = [v[1] for v in poly]
    return min(xs), max(xs), min(ys), max(ys)


def _bbox_gap_sq(p, q):
    """Squared distance between bounding boxes (a lower bound for the polygons)."""
    a, b = _bbox(p), _bbox(q)
    dx = max(a[0] - b[1], b[0] - a[1], 0)
    dy = max(a[2] - b[3], b[2] - a[3], 0)
    return dx * dx + dy * dy


def polygons_intersect(p, q):
    """Closed convex polygons meet (separating axis test, exact)."""
    if _bbox_gap_sq(p, q) > 0:
        return False
    for axis in _axes(p) + _axes(q):
        if axis == (0, 0):
            continue
        pa = [_dot(axis, v) for v in p]
        qa = [_dot(axis, v) for v in q]
        if max(pa) < min(qa) or max(qa) < min(pa):
            return False
    return True


def convex_hull(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def half(seq):
        h = []
        for p in seq:
            while len(h) >= 2 and _cross(_sub(h[-1], h[-2]), _sub(p, h[-2])) <= 0:
                h.pop()
            h.append(p)
        return h

    lower, upper = half(pts), half(reversed(pts))
    return normalize_polygon(lower[:-1] + upper[:-1])


def _seg_dist_sq(p, a, b):
    ab = _sub(b, a)
    L = _dot(ab, ab)
    if L == 0:
        return _dist_sq(p, a)
    t = _dot(_sub(p, a), ab) / L
    t = min(max(t, Fraction(0)), Fraction(1))
    proj = (a[0] + t * ab[0], a[1] + t * ab[1])
    return _dist_sq(p, proj)


def polygon_distance_sq(p, q):
    if polygons_intersect(p, q):
        return Fraction(0)
    best = None
    for x, poly in ((p, q), (q, p)):
        for v in x:
            for i in range(len(poly)):
                d = _seg_dist_sq(v, poly[i], poly[(i + 1) % len(poly)])
                if best is None or d < best:
                    best = d
    return best


def _box(window):
    (x0, x1), (y0, y1) = window
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


def _on_box(p, window):
    (x0, x1), (y0, y1) = window
    return p[0] in (x0, x1) or p[1] in (y0, y1)


# ---------------------------------------------------------------------------
# cells


def _cell_2d(sites, i, window, order=None):
    y = sites[i]
    poly = _box(window)
    others = order if order is not None else sorted(
        (j for j in range(len(sites)) if j != i), key=lambda j: _dist_sq(sites[j], y))
    for j in others:
        z = sites[j]
        reach = max(_dist_sq(v, y) for v in poly)
        if _dist_sq(z, y) > 4 * reach:
            break
        a = (2 * (z[0] - y[0]), 2 * (z[1] - y[1]))
        c = _dot(z, z) - _dot(y, y)
        poly = clip(poly, a, c)
    return poly


def cells(dnet):
    """Voronoi cell of every net point, in net order."""
    pts = dnet.points
    if len(pts) < 2:
        raise MatchboxError("SINGLETON_NET", "need at least two net points")
    out = []
    if dnet.dimension == 1:
        lo_w, hi_w = dnet.window if dnet.window else (None, None)
        for i, y in enumerate(pts):
            lo = (pts[i - 1] + y) / 2 if i > 0 else lo_w
            hi = (y + pts[i + 1]) / 2 if i + 1 < len(pts) else hi_w
            clipped = (i == 0 or i + 1 == len(pts)) and dnet.window is not None
            out.append(VoronoiCell(y, (lo, hi), clipped))
        return out
    if dnet.window is None:
        raise MatchboxError("UNBOUNDED", "planar nets need a window box")
    for i, y in enumerate(pts):
        poly = _cell_2d(pts, i, dnet.window)
        out.append(VoronoiCell(y, poly, any(_on_box(v, dnet.window) for v in poly)))
    return out


def _cells_meet(c1, c2, dim):
    if dim == 1:
        lo1, hi1 = c1.geometry
        lo2, hi2 = c2.geometry
        lo = max(x for x in (lo1, lo2) if x is not None) if (lo1 is not None or lo2 is not None) else None
        hi = min(x for x in (hi1, hi2) if x is not None) if (hi1 is not None or hi2 is not None) else None
        return lo is None or hi is None or lo <= hi
    return polygons_intersect(c1.geometry, c2.geometry)


def _site_index(dnet, y):
    y = tuple(Fraction(v) for v in y) if isinstance(y, (tuple, list)) else Fraction(y)
    try:
        return dnet.points.index(y)
    except ValueError:
        raise MatchboxError("NOT_A_SITE", f"{y} is not a net point") from None


def star(dnet, y, all_cells=None):
    cs = all_cells if all_cells is not None else cells(dnet)
    i = _site_index(dnet, y)
    if cs[i].clipped:
        raise MatchboxError("BOUNDARY_SITE", f"cell of {y} is clipped by the window")
    members = [j for j in range(len(cs)) if _cells_meet(cs[i], cs[j], dnet.dimension)]
    return StarNeighborhood(dnet.points[i], [dnet.points[j] for j in members], [cs[j] for j in members])


def halfspace_form(dnet, y, all_cells=None):
    """star(y) intersected with the bisector half-spaces of its vertex set."""
    cs = all_cells if all_cells is not None else cells(dnet)
    st = star(dnet, y, cs)
    y = st.site
    others = [z for z in st.vertex_set if z != y]
    if dnet.dimension == 1:
        lo, hi = st.bounds()
        for z in others:
            m = (y + z) / 2
            if z < y:
                lo = m if lo is None else max(lo, m)
            else:
                hi = m if hi is None else min(hi, m)
        return (lo, hi)
    pieces = []
    for c in st.cells:
        poly = c.geometry
        for z in others:
            a = (2 * (z[0] - y[0]), 2 * (z[1] - y[1]))
            poly = clip(poly, a, _dot(z, z) - _dot(y, y))
            if not poly:
                break
        if len(poly) >= 3:
            pieces.append(poly)
    hull = convex_hull([v for p in pieces for v in p])
    if sum(area(p) for p in pieces) != area(hull):
        raise MatchboxError("HALFSPACE_MISMATCH", "half-space pieces do not tile a convex cell")
    return hull


def geometry_equal(a, b):
    if isinstance(a, tuple) and isinstance(b, tuple) and len(a) == 2 and not isinstance(a[0], tuple):
        return a == b
    return normalize_polygon(list(a)) == normalize_polygon(list(b))


def interior_sites(dnet, all_cells=None):
    """Indices of sites whose whole star avoids the window boundary."""
    cs = all_cells if all_cells is not None else cells(dnet)
    out = []
    for i, c in enumerate(cs):
        if c.clipped or not c.bounded:
            continue
        ok = True
        for j, d in enumerate(cs):
            if _cells_meet(c, d, dnet.dimension) and (d.clipped or not d.bounded):
                ok = False
                break
        if ok:
            out.append(i)
    return out


def covering_radius_sq(dnet):
    """Squared covering radius over interior cells (planar nets)."""
    cs = cells(dnet)
    best = Fraction(0)
    for i in interior_sites(dnet, cs):
        best = max(best, max(_dist_sq(v, cs[i].site) for v in cs[i].geometry))
    return best


def diameter_sq(geometry):
    if isinstance(geometry, tuple):
        return (geometry[1] - geometry[0]) ** 2
    return max((_dist_sq(p, q) for p in geometry for q in geometry), default=Fraction(0))


def check_cell_bounds(dnet, st, all_cells=None):
    """Verify the cell, ball and star bounds on interior cells.

    Returns a report with the per-site margin ``cell inside star`` and a
    list of failures (empty when everything holds).
    """
    cs = all_cells if all_cells is not None else cells(dnet)
    e = st.e_W
    e_sq = st.e_W_sq if st.e_W_sq is not None else (e * e if e is not None else None)
    lam_sq = st.lambda1_sq if st.lambda1_sq is not None else st.lambda1 ** 2
    failures, margins = [], {}
    interior = interior_sites(dnet, cs)
    for i in interior:
        c = cs[i]
        y = c.site
        sn = star(dnet, y, cs)
        if e_sq is not None and diameter_sq(c.geometry) > 4 * e_sq:
            failures.append((y, "diameter"))
        if dnet.dimension == 1:
            lo, hi = c.geometry
            half = st.lambda1 / 2
            if not (lo <= y - half and y + half <= hi):
                failures.append((y, "ball"))
            slo, shi = sn.bounds()
            if e is not None and not (y - 3 * e <= slo and shi <= y + 3 * e):
                failures.append((y, "star"))
            margin = min(lo - slo, shi - hi)
        else:
            poly = c.geometry
            n = len(poly)
            for k in range(n):
                a, b = poly[k], poly[(k + 1) % n]
                edge = _sub(b, a)
                num = _cross(edge, _sub(y, a))
                if num * num * 4 < lam_sq * _dot(edge, edge):
                    failures.append((y, "ball"))
                    break
            if e_sq is not None and any(_dist_sq(v, y) > 9 * e_sq for d in sn.cells for v in d.geometry):
                failures.append((y, "star"))
            outside = sorted(((_bbox_gap_sq(poly, d.geometry), d) for d in cs if d.site not in sn.vertex_set),
                             key=lambda t: t[0])
            margin = None
            for gap, d in outside:
                if margin is not None and gap >= margin:
                    break
                m = polygon_distance_sq(poly, d.geometry)
                margin = m if margin is None else min(margin, m)
        if margin is not None and margin <= 0:
            failures.append((y, "interior"))
        margins[y] = margin
    return {"checked": len(interior), "failures": failures, "margins": margins}


def tessellation_check(dnet, all_cells=None):
    """Cells cover the window with disjoint interiors (exact accounting)."""
    cs = all_cells if all_cells is not None else cells(dnet)
    if dnet.dimension == 1:
        ok = all(a.geometry[1] == b.geometry[0] for a, b in zip(cs, cs[1:]))
        if dnet.window is not None:
            ok = ok and cs[0].geometry[0] == dnet.window[0] and cs[-1].geometry[1] == dnet.window[1]
        return ok
    (x0, x1), (y0, y1) = dnet.window
    return sum(area(c.geometry) for c in cs) == (x1 - x0) * (y1 - y0)


def nearest_sites(points, p):
    """Brute force: indices of all sites at minimum distance from p."""
    if isinstance(p, tuple):
        ds = [_dist_sq(q, p) for q in points]
    else:
        ds = [abs(q - p) for q in points]
    m = min(ds)
    return {i for i, d in enumerate(ds) if d == m}


def in_cell(geometry, p):
    if isinstance(geometry, tuple) and not isinstance(geometry[0], tuple) and len(geometry) == 2 \
            and not isinstance(p, tuple):
        lo, hi = geometry
        return (lo is None or lo <= p) and (hi is None or p <= hi)
    return polygon_contains(geometry, p)


def render_geometry(geometry):
    if isinstance(geometry, tuple) and len(geometry) == 2 and not isinstance(geometry[0], tuple):
        lo, hi = geometry
        return f"[{'-inf' if lo is None else lo}, {'inf' if hi is None else hi}]"
    return "[" + ", ".join(f"({x}, {y})" for x, y in geometry) + "]"
