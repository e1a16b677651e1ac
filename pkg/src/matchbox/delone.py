"""Delone nets of return vectors on the leaf through a point, with statistics."""
from dataclasses import dataclass
from fractions import Fraction

from .errors import MatchboxError
from .holonomy import _leaf_exponents, alpha_W


@dataclass
class DeloneNet:
    """Return vectors of a leaf window, sorted, with transversal labels.

    ``window`` is ``(lo, hi)`` for d = 1 and ``((x0, x1), (y0, y1))`` for
    d = 2; it is None for an explicit net that stands for the whole leaf.
    """
    points: list
    labels: list = None
    exponents: list = None
    center: object = None
    target: object = None
    radius: Fraction = None
    window: tuple = None
    dimension: int = 1

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_points(cls, points, window=None):
        pts = [tuple(Fraction(x) for x in p) if isinstance(p, (tuple, list)) else Fraction(p) for p in points]
        dim = 2 if pts and isinstance(pts[0], tuple) else 1
        pts = sorted(set(pts))
        if window is not None:
            if dim == 1:
                window = (Fraction(window[0]), Fraction(window[1]))
            else:
                window = tuple((Fraction(a), Fraction(b)) for a, b in window)
        return cls(pts, window=window, dimension=dim)

    def restrict(self, R):
        R = Fraction(R)
        keep = [i for i, p in enumerate(self.points) if _norm_sq(p) <= R * R]
        return DeloneNet([self.points[i] for i in keep],
                         [self.labels[i] for i in keep] if self.labels else None,
                         [self.exponents[i] for i in keep] if self.exponents else None,
                         self.center, self.target, R, _window(self.dimension, R), self.dimension)

    def dump(self):
        out = []
        for i, p in enumerate(self.points):
            v = str(p) if self.dimension == 1 else f"({p[0]}, {p[1]})"
            lab = self.labels[i] if self.labels else ""
            out.append(f"{v} {lab}".rstrip())
        return "\n".join(out) + "\n"


def _norm_sq(p):
    if isinstance(p, tuple):
        return sum(x * x for x in p)
    return p * p


def _window(dim, R):
    if dim == 1:
        return (-R, R)
    return ((-R, R), (-R, R))


def net(w, W, R):
    """Return vectors v with leafwise length <= R and sigma^v(w) in W."""
    system = w.system
    R = Fraction(R)
    points, labels, exps = [], [], []
    base = system.coord(w.position)
    for g in _leaf_exponents(system, w.position, R, True):
        p = system.shift(w.position, g)
        word = system.word_at(p, W.depth)
        if not W.contains_word(word):
            continue
        c = system.coord(p)
        if system.dimension == 1:
            v = c - base
        else:
            v = tuple(a - b for a, b in zip(c, base))
        points.append(v)
        labels.append(system.render_cylinder(word))
        exps.append(g)
    order = sorted(range(len(points)), key=lambda i: points[i])
    return DeloneNet([points[i] for i in order], [labels[i] for i in order], [exps[i] for i in order],
                     w, W, R, _window(system.dimension, R), system.dimension)


@dataclass
class NetStats:
    lambda1: Fraction
    covering_radius: Fraction
    alpha_W: int = None
    e_W: Fraction = None
    lambda1_sq: Fraction = None
    covering_radius_sq: Fraction = None
    e_W_sq: Fraction = None


def stats(dnet, alpha_scan=None, alpha=None, max_tile=None):
    """lambda_1, covering radius, alpha_W and e_W of a net."""
    if len(dnet.points) < 2:
        raise MatchboxError("SINGLETON_NET", "need at least two net points")
    if alpha is None and dnet.target is not None:
        alpha = alpha_W(dnet.target)
        if alpha_scan is not None and alpha > alpha_scan:
            raise MatchboxError("DEPTH_INSUFFICIENT", f"alpha_W exceeds scan bound {alpha_scan}")
    if max_tile is None:
        max_tile = dnet.center.system.max_tile if dnet.center is not None else Fraction(1)
    e = (2 * alpha + 1) * max_tile if alpha is not None else None
    pts = dnet.points
    if dnet.dimension == 1:
        gaps = [b - a for a, b in zip(pts, pts[1:])]
        lam, cov = min(gaps), max(gaps) / 2
        return NetStats(lam, cov, alpha, e, lam * lam, cov * cov)
    lam_sq = min(_norm_sq(tuple(x - y for x, y in zip(p, q))) for i, p in enumerate(pts) for q in pts[i + 1:])
    from .voronoi import covering_radius_sq
    cov_sq = covering_radius_sq(dnet)
    return NetStats(_exact_sqrt(lam_sq), _exact_sqrt(cov_sq), alpha, e, lam_sq, cov_sq)


def _exact_sqrt(q):
    """Square root when it is rational, else None."""
    from math import isqrt
    if q is None:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def lambda1_profile(levels, R, w=None):
    """lambda_1 of the basepoint-leaf net for each clopen set in turn."""
    out = []
    for V in levels:
        center = w if w is not None else V.system.point(0)
        dnet = net(center, V, R)
        if len(dnet.points) < 2:
            raise MatchboxError("SINGLETON_NET", "window too small for this level")
        out.append(min(b - a for a, b in zip(dnet.points, dnet.points[1:])))
    return out


def delone_check(dnet, st):
    """Separation and covering inside the window (d = 1), exact."""
    pts = dnet.points
    sep = all(b - a >= st.lambda1 for a, b in zip(pts, pts[1:]))
    lo, hi = dnet.window if dnet.window else (pts[0], pts[-1])
    cover = all(b - a <= 2 * st.covering_radius for a, b in zip(pts, pts[1:]))
    return sep and cover and pts[0] - lo >= 0 and hi - pts[-1] >= 0
