"""Property suites behind ``mbf check``: each returns a JSON-ready report.

A report has ``passed`` (bool), ``checked`` (count) and ``failures`` (list of
strings naming the broken invariant). Randomness comes only from ``seed``.
"""
import itertools
import random
from fractions import Fraction
from math import lcm

from .clopen import ClopenSet
from .coding import build_hierarchy, check_codes, check_level
from .delone import DeloneNet, NetStats, net, stats
from .errors import MatchboxError
from .invlim import compose_check, corrupt, matrix_functoriality, thread_check
from .voronoi import (area, cells, check_cell_bounds, geometry_equal, halfspace_form, in_cell, interior_sites,
                      tessellation_check, _dist_sq)

SUITES = ("partition", "coding", "voronoi", "bonding", "threads")


def _report(checked, failures, **extra):
    return {"passed": not failures, "checked": checked, "failures": failures, **extra}


def _skipped(reason):
    return {"passed": True, "checked": 0, "failures": [], "skipped": reason}


# ---------------------------------------------------------------------------
# partition laws


def partition_suite(system, hierarchy, seed=0, n_sets=40):
    """Boolean-algebra laws on random clopen sets, plus level partitions."""
    rng = random.Random(seed)
    X = ClopenSet.whole(system)
    pools = [system.words(k) for k in range(1, 5)]

    def rand_set():
        pool = rng.choice(pools)
        return ClopenSet(system, tuple(w for w in pool if rng.random() < 0.4))

    fails, checked = [], 0
    sets = [rand_set() for _ in range(n_sets)]
    for A, B, C in zip(sets, sets[1:], sets[2:]):
        laws = {
            "union commutes": (A | B) == (B | A),
            "intersection distributes": (A & (B | C)) == ((A & B) | (A & C)),
            "difference": (A - B) == (A & (X - B)),
            "de morgan": (X - (A | B)) == ((X - A) & (X - B)),
            "split": ((A - B) | (A & B)) == A and (A - B).isdisjoint(A & B),
            "subset": (A & B).issubset(A) and A.issubset(A | B),
        }
        checked += len(laws)
        fails += [f"partition law: {name}" for name, ok in laws.items() if not ok]
    for lv in hierarchy:
        fine = [b for _, b in lv.fine_list()]
        checked += 1
        union = ClopenSet.empty(system)
        for b in fine:
            union = union | b
        disjoint = all(a.isdisjoint(b) for a, b in itertools.combinations(fine, 2))
        if union != lv.V or not disjoint:
            fails.append(f"level {lv.level}: fine blocks do not partition V")
    return _report(checked, fails)


# ---------------------------------------------------------------------------
# coding soundness


def coding_suite(system, levels=3):
    """Level invariants and local constancy / distinct codes on a coding hierarchy."""
    if system.dimension != 1:
        return _skipped("coding hierarchies need a one-dimensional action")
    h = build_hierarchy(system, levels, strategy="coding")
    w = h.basepoint
    fails, checked = [], 0
    for lv in h:
        blocks = sum(len(row) for row in lv.fine_blocks)
        checked += blocks
        fails += [f"level {lv.level}: {f}" for f in check_level(lv, w)]
        fails += [f"level {lv.level}: {f}" for f in check_codes(lv, w)]
    return _report(checked, fails, levels=len(h.levels))


# ---------------------------------------------------------------------------
# Voronoi oracle


def voronoi_oracle(dnet, st=None, extra_points=()):
    """Exact checks on one net; returns (checked, failures)."""
    cs = cells(dnet)
    fails, checked = [], 0
    if not tessellation_check(dnet, cs):
        fails.append("tessellation")
    interior = interior_sites(dnet, cs)
    for i in interior:
        checked += 1
        if not geometry_equal(halfspace_form(dnet, cs[i].site, cs), cs[i].geometry):
            fails.append(f"half-space identity at {cs[i].site}")
    if st is None:
        st = _generic_stats(dnet, cs)
    bounds = check_cell_bounds(dnet, st, cs)
    fails += [f"cell bound ({kind}) at {y}" for y, kind in bounds["failures"]]
    # brute-force nearest-site classification of a dense rational sample
    sample = list(_dense_sample(dnet)) + list(extra_points)
    if dnet.dimension == 2:
        sample += [v for c in cs for v in c.geometry]
    nearest, owners = _IntegerOracle(dnet.points), _cell_tests(cs, dnet.dimension)
    for p in sample:
        checked += 1
        if owners(p) != nearest(p):
            fails.append(f"classification at {p}")
    return checked, fails


def _lcm_den(values):
    d = 1
    for v in values:
        d = lcm(d, Fraction(v).denominator)
    return d


class _IntegerOracle:
    """Brute-force nearest sites, with coordinates scaled to integers."""

    def __init__(self, points):
        self.dim = 2 if isinstance(points[0], tuple) else 1
        coords = [c for p in points for c in (p if self.dim == 2 else (p,))]
        self.den = _lcm_den(coords)
        self.sites = [tuple(int(c * self.den) for c in (p if self.dim == 2 else (p,))) for p in points]

    def __call__(self, p):
        p = p if self.dim == 2 else (p,)
        d = _lcm_den(p)
        q = [int(c * d) for c in p]
        # |p - s|^2 scaled by (d * den)^2
        ds = [sum((qi * self.den - si * d) ** 2 for qi, si in zip(q, s)) for s in self.sites]
        m = min(ds)
        return {i for i, x in enumerate(ds) if x == m}


def _cell_tests(cs, dim):
    """Membership of a point in every closed cell, via integer half-plane tests."""
    if dim == 1:
        def owners(p):
            return {i for i, c in enumerate(cs) if in_cell(c.geometry, p)}
        return owners
    rows = []
    for c in cs:
        poly = c.geometry
        n = len(poly)
        sign = 1 if area(poly) >= 0 else -1
        ineq = []
        for k in range(n):
            (ax, ay), (bx, by) = poly[k], poly[(k + 1) % n]
            # sign * cross(b - a, p - a) >= 0, written as A x + B y + C >= 0
            A, B = -(by - ay) * sign, (bx - ax) * sign
            C = -(A * ax + B * ay)
            den = _lcm_den((A, B, C))
            ineq.append((int(A * den), int(B * den), int(C * den)))
        rows.append(ineq)

    def owners(p):
        d = _lcm_den(p)
        X, Y = int(p[0] * d), int(p[1] * d)
        return {i for i, ineq in enumerate(rows) if all(A * X + B * Y + C * d >= 0 for A, B, C in ineq)}
    return owners


def _generic_stats(dnet, cs):
    """Separation and a covering bound for an arbitrary net (e_W := covering radius)."""
    pts = dnet.points
    if dnet.dimension == 1:
        gaps = [b - a for a, b in zip(pts, pts[1:])]
        lam, cov = min(gaps), max(gaps) / 2
        return NetStats(lam, cov, None, cov, lam * lam, cov * cov)
    lam_sq = min(_dist_sq(p, q) for p, q in itertools.combinations(pts, 2))
    cov_sq = max((max(_dist_sq(v, c.site) for v in c.geometry) for c in cs if c.bounded and not c.clipped),
                 default=Fraction(0))
    return NetStats(None, None, None, None, lam_sq, cov_sq, cov_sq)


def _dense_sample(dnet):
    if dnet.dimension == 1:
        lo, hi = dnet.window
        step = Fraction(1, 8)
        n = int((hi - lo) / step)
        return [lo + k * step for k in range(n + 1)]
    (x0, x1), (y0, y1) = dnet.window
    step = Fraction(1, 2)
    nx, ny = int((x1 - x0) / step), int((y1 - y0) / step)
    return [(x0 + i * step, y0 + j * step) for i in range(nx + 1) for j in range(ny + 1)]


def random_net(rng, dim, max_sites=20):
    """Random rational net with at most ``max_sites`` sites and a window around it."""
    n = rng.randint(3, max_sites)
    if dim == 1:
        pts = set()
        while len(pts) < n:
            d = rng.choice((1, 2, 3, 4))
            pts.add(Fraction(rng.randint(-10 * d, 10 * d), d))
        return DeloneNet.from_points(sorted(pts), window=(-12, 12))
    pts = set()
    while len(pts) < n:
        pts.add((Fraction(rng.randint(-10, 10), 2), Fraction(rng.randint(-10, 10), 2)))
    return DeloneNet.from_points(sorted(pts), window=((-6, 6), (-6, 6)))


def lattice_nets(system=None):
    """Named lattice examples, plus the basepoint net of ``system`` when given."""
    out = [
        ("Z", DeloneNet.from_points(range(-9, 10), window=(-10, 10)), None),
        ("Z2", DeloneNet.from_points([(x, y) for x in range(-4, 5) for y in range(-4, 5)],
                                     window=((Fraction(-9, 2), Fraction(9, 2)),) * 2), None),
    ]
    if system is not None:
        w = system.point(0)
        depth = 2
        W = ClopenSet.cylinder(system, w.prefix(depth))
        R = 12 if system.dimension == 1 else 6
        dnet = net(w, W, R)
        if len(dnet) >= 2:
            out.append((f"{system.kind} net", dnet, stats(dnet)))
    return out


def voronoi_suite(system=None, nets=100, seed=0):
    rng = random.Random(seed)
    fails, checked, per_dim = [], 0, {1: 0, 2: 0}
    for name, dnet, st in lattice_nets(system):
        c, f = voronoi_oracle(dnet, st)
        checked += c
        fails += [f"{name}: {x}" for x in f]
    for k in range(nets):
        dim = 1 + k % 2
        dnet = random_net(rng, dim)
        c, f = voronoi_oracle(dnet)
        checked += c
        per_dim[dim] += 1
        fails += [f"random net {k} (d={dim}): {x}" for x in f]
    return _report(checked, fails, nets=nets, nets_by_dimension={str(d): n for d, n in per_dim.items()})


# ---------------------------------------------------------------------------
# bonding maps and threads


def odometer_oracle(inv):
    """Simplified bondings of a d = 1 odometer are [n_{l+1} / n_l]."""
    system = inv.system
    fails = []
    for b in inv.bondings():
        ks, kt = (len(inv.hierarchy[inv.index(lv)].V.words[0]) for lv in (b.source, b.target))
        want = [[system.index(ks) // system.index(kt)]]
        if b.matrix.tolist() != want:
            fails.append(f"odometer oracle: M({b.source},{b.target}) = {b.matrix.tolist()}, want {want}")
    return fails


def bonding_suite(inv, corrupt_maps=False, seed=0):
    if inv is None:
        return _skipped("bonding maps are built for one-dimensional systems")
    levels = inv.levels
    fails, checked = [], 0
    for a, b, c in itertools.combinations(levels, 3):
        q21, q32, q31 = inv.bonding(b, a), inv.bonding(c, b), inv.bonding(c, a)
        if corrupt_maps:
            q32 = corrupt(q32, seed)
        checked += 2
        if not compose_check(q31, q21, q32):
            fails.append(f"compose_check failed for levels {c}>{b}>{a}")
        if not corrupt_maps and not matrix_functoriality(q31, q21, q32):
            fails.append(f"matrix functoriality failed for levels {c}>{b}>{a}")
    if corrupt_maps and len(levels) < 3:
        fails.append("compose_check: corrupt mode needs at least three levels")
    if inv.system.kind == "odometer":
        checked += len(levels) - 1
        fails += odometer_oracle(inv)
    return _report(checked, fails)


def threads_suite(inv, seed=0, n_samples=100):
    if inv is None:
        return _skipped("thread checks need a one-dimensional inverse system")
    rep = thread_check(inv, n_samples=n_samples, seed=seed)
    fails = [f"thread_check: {name}" for name in ("injectivity", "surjectivity", "diameters")
             if not getattr(rep, name)]
    return _report(rep.threads, fails, **rep.to_json())


def run_suites(res, suites=SUITES, nets=100, seed=0, corrupt_maps=False, coding_levels=None):
    """Run the named suites on a pipeline result; returns name -> report."""
    out = {}
    for name in suites:
        try:
            if name == "partition":
                out[name] = partition_suite(res.system, res.hierarchy, seed)
            elif name == "coding":
                out[name] = coding_suite(res.system, coding_levels or len(res.levels))
            elif name == "voronoi":
                out[name] = voronoi_suite(res.system, nets, seed)
            elif name == "bonding":
                out[name] = bonding_suite(res.inverse, corrupt_maps, seed)
            elif name == "threads":
                out[name] = threads_suite(res.inverse, seed)
            else:
                raise MatchboxError("BAD_SUITE", f"unknown suite {name!r}")
        except MatchboxError as e:
            if e.code == "BAD_SUITE":
                raise
            out[name] = _report(0, [f"{name}: {e}"])
    return out
