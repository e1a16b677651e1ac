"""Holonomy pseudogroup on the symbolic transversal.

Elements are shift powers (substitutions) or translations (odometers)
restricted to clopen domains.  For substitutions the transversal is the
one-sided orbit closure, so forward powers and their preimages are exact;
a negative power is represented as the inverse of a forward element and
its domain is the clopen hull of the forward image.
"""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .clopen import ClopenSet, Partition, intersect, position_labels, subtract, union_all
from .errors import DepthInsufficient, MatchboxError
from .systems import CantorPoint


def _is_zero(g):
    return g == 0 if isinstance(g, int) else all(x == 0 for x in g)


def _neg(g):
    return -g if isinstance(g, int) else tuple(-x for x in g)


def _add(a, b):
    return a + b if isinstance(a, int) else tuple(x + y for x, y in zip(a, b))


def word_norm(g):
    return abs(g) if isinstance(g, int) else sum(abs(x) for x in g)


# ---------------------------------------------------------------------------
# clopen transport


def translate(S, g):
    """Odometer translate S + g (exact)."""
    system = S.system
    words = []
    for w in S.words:
        r = system.representative(w)
        words.append(system.word_at(system.shift(r, g), len(w)))
    return ClopenSet(system, words)


def _mask_runs(mask):
    m = np.concatenate([[False], mask, [False]]).astype(np.int8)
    d = np.diff(m)
    starts = np.nonzero(d == 1)[0]
    ends = np.nonzero(d == -1)[0]
    return list(zip(starts.tolist(), ends.tolist()))


def preimage(S, g):
    """{x : x + g in S} for an odometer or a forward shift (g >= 0)."""
    system = S.system
    if system.kind == "odometer":
        return translate(S, _neg(g))
    if g < 0:
        raise MatchboxError("UNSUPPORTED", "backward preimages need the two-sided view")
    if g == 0 or S.is_empty():
        return S
    idx = system.sample_index(S.depth + g)
    labels = position_labels(system, Partition([S], check=False), idx.size + g)
    mask = labels[np.asarray(idx.positions) + g] == 0
    return ClopenSet.from_runs(system, _mask_runs(mask))


def image_hull(S, m, depth=None):
    """Clopen hull, at the given depth, of the forward image sigma^m(S)."""
    system = S.system
    if system.kind == "odometer":
        return translate(S, m)
    if m == 0:
        return S
    depth = depth or max(S.depth, 1)
    system.sample_index(S.depth + m + depth)
    words = {system.word_at(p + m, depth) for p in S.positions()}
    return ClopenSet(system, words)


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True, eq=False)
class HolonomyElement:
    system: object
    exponent: object
    domain: ClopenSet
    inverse_of: object = field(default=None, repr=False)

    @property
    def word_length(self):
        return word_norm(self.exponent)

    def is_identity(self):
        return _is_zero(self.exponent)

    def path_length(self, w):
        return path_length(self.system, w.position, self.exponent)

    def lengths(self, w):
        return length_pair(self, w)

    def __repr__(self):
        return f"HolonomyElement({self.exponent}, {self.domain.render()})"


def identity(system, domain=None):
    return HolonomyElement(system, 0 if system.dimension == 1 else (0, 0),
                           domain if domain is not None else ClopenSet.whole(system))


def element(system, exponent, domain=None):
    return HolonomyElement(system, exponent, domain if domain is not None else ClopenSet.whole(system))


def apply(h, x):
    if x.system is not h.system:
        raise MatchboxError("SYSTEM_MISMATCH", "point from another system")
    if not h.domain.contains(x):
        raise MatchboxError("OUT_OF_DOMAIN", f"{x} not in {h.domain.render()}")
    return CantorPoint(x.system, x.system.shift(x.position, h.exponent))


def compose(h2, h1):
    """h2 after h1 with its maximal clopen domain."""
    if h1.system is not h2.system:
        raise MatchboxError("SYSTEM_MISMATCH", "elements from different systems")
    system = h1.system
    g1 = h1.exponent
    if system.kind == "odometer" or g1 >= 0:
        dom = intersect(h1.domain, preimage(h2.domain, g1))
    elif h1.inverse_of is not None:
        f = h1.inverse_of
        dom = intersect(h1.domain, image_hull(intersect(f.domain, h2.domain), f.exponent,
                                              depth=max(h1.domain.depth, 1)))
    else:
        raise MatchboxError("UNSUPPORTED", "backward composition without a forward witness")
    if dom.is_empty():
        raise MatchboxError("EMPTY_COMPOSITION", "maximal domain is empty")
    return HolonomyElement(system, _add(g1, h2.exponent), dom)


def inverse(h):
    system = h.system
    if system.kind == "odometer":
        return HolonomyElement(system, _neg(h.exponent), translate(h.domain, h.exponent))
    if h.exponent < 0 and h.inverse_of is not None:
        return h.inverse_of
    if h.exponent == 0:
        return h
    return HolonomyElement(system, -h.exponent, image_hull(h.domain, h.exponent), inverse_of=h)


def germ_equal(h1, h2, w):
    if not (h1.domain.contains(w) and h2.domain.contains(w)):
        raise MatchboxError("OUT_OF_DOMAIN", "germ point outside a domain")
    return h1.exponent == h2.exponent


# ---------------------------------------------------------------------------
# lengths


def path_length(system, position, g):
    """Leafwise length of the path from the point to its translate."""
    return system.path_length(position, g)


@dataclass(frozen=True)
class LengthPair:
    word_length: int
    path_length: Fraction  # for d = 2 this is the squared Euclidean length


def length_pair(h, w):
    return LengthPair(h.word_length, h.path_length(w))


def comparison_bounds_hold(pair, system):
    """ell/(2 max_tile) <= word length <= 1 + ell/min_tile (d = 1)."""
    ell = pair.path_length
    return ell / (2 * system.max_tile) <= pair.word_length <= 1 + ell / system.min_tile


# ---------------------------------------------------------------------------
# filtrations


@dataclass
class Filtration:
    basepoint: CantorPoint
    target: ClopenSet
    radius: Fraction
    elements: list
    two_sided: bool = True

    @property
    def exponents(self):
        return [h.exponent for h in self.elements]

    def dump(self):
        lines = []
        for h in self.elements:
            ell = h.path_length(self.basepoint)
            lines.append(f"{h.exponent}, {ell}, {h.domain.render()}")
        return "\n".join(lines) + ("\n" if lines else "")


def _leaf_exponents(system, position, R, two_sided):
    """Exponents whose path length from ``position`` is at most R."""
    R = Fraction(R)
    if system.dimension == 2:
        r = int(R)
        out = [(x, y) for x in range(-r, r + 1) for y in range(-r, r + 1) if x * x + y * y <= R * R]
        if not two_sided:
            out = [g for g in out if g >= (0, 0)]
        return sorted(out)
    out = []
    k = 0
    while system.path_length(position, k) <= R:
        out.append(k)
        k += 1
    if two_sided:
        k = -1
        while system.path_length(position, k) <= R:
            out.append(k)
            k -= 1
    return sorted(out)


def filtration(w, W, R, scan_depth=None, two_sided=True):
    """Germs at w landing in W with leafwise length at most R."""
    system = w.system
    exps = _leaf_exponents(system, w.position, R, two_sided)
    hits = [g for g in exps if W.contains_word(system.word_at(system.shift(w.position, g), W.depth))]
    if system.kind == "substitution":
        needed = W.depth + max((abs(g) for g in hits), default=0)
    else:
        needed = W.depth
    if scan_depth is not None and needed > scan_depth:
        raise DepthInsufficient(needed, scan_depth, "filtration membership")
    elements = []
    for g in hits:
        if system.kind == "odometer" or g >= 0:
            elements.append(HolonomyElement(system, g, preimage(W, g)))
        else:
            fwd = HolonomyElement(system, -g, W)
            elements.append(inverse(fwd))
    return Filtration(w, W, Fraction(R), elements, two_sided)


# ---------------------------------------------------------------------------
# returns and covering numbers


def hitting_times(W, max_time=None):
    """For every sample point, the least t >= 0 with sigma^t x in W.

    Returns (positions, times, index) over the sample at sufficient depth.
    Substitutions and one-dimensional odometers only.
    """
    system = W.system
    if W.is_empty():
        raise MatchboxError("EMPTY_INPUT", "empty target set")
    span = max(16, 4 * W.depth)
    while True:
        if max_time is not None and span > max_time + 1:
            raise MatchboxError("NOT_MINIMAL", "a point does not reach the set within the scan bound")
        idx = system.sample_index(W.depth + (span if system.kind == "substitution" else 0))
        labels = position_labels(system, Partition([W], check=False), idx.size + span + 1)
        hits = np.nonzero(labels == 0)[0]
        pos = np.asarray(idx.positions)
        j = np.searchsorted(hits, pos, side="left")
        ok = j < len(hits)
        times = np.full(len(pos), -1, dtype=np.int64)
        times[ok] = hits[j[ok]] - pos[ok]
        if ok.all() and times.max() <= span:
            return pos, times, idx
        span *= 2
        if system.kind == "substitution" and W.depth + span > system.depth_cap:
            raise MatchboxError("NOT_MINIMAL", "a point does not reach the set within the scan bound")


def return_times(W):
    """First return time (>= 1) of each sample point of W; (positions, times, idx)."""
    system = W.system
    span = max(16, 4 * W.depth)
    while True:
        idx = system.sample_index(W.depth + (span if system.kind == "substitution" else 0))
        labels = position_labels(system, Partition([W], check=False), idx.size + span + 1)
        hits = np.nonzero(labels == 0)[0]
        pos = np.asarray(idx.positions)
        inW = labels[pos] == 0
        pw = pos[inW]
        j = np.searchsorted(hits, pw, side="right")
        ok = j < len(hits)
        times = np.full(len(pw), -1, dtype=np.int64)
        times[ok] = hits[j[ok]] - pw[ok]
        ranks = np.nonzero(inW)[0]
        if ok.all() and len(pw) and times.max() <= span:
            return pw, times, ranks, idx
        span *= 2
        if system.kind == "substitution" and W.depth + span > system.depth_cap:
            raise MatchboxError("NOT_MINIMAL", "a point fails to return within the scan bound")


def alpha_W(W):
    """Least N with W, sigma^-1 W, ..., sigma^-N W covering the transversal."""
    system = W.system
    if system.kind == "odometer":
        return alpha_bfs(W)
    _, times, _ = hitting_times(W)
    return int(times.max())


def alpha_bfs(W, cap=100_000):
    """Breadth-first covering search with exact clopen unions."""
    system = W.system
    whole = ClopenSet.whole(system)
    cover = W
    n = 0
    while cover != whole:
        n += 1
        if n > cap:
            raise MatchboxError("NOT_MINIMAL", "covering search exceeded its bound")
        if system.dimension == 1:
            step = translate(W, n) if system.kind == "odometer" else preimage(W, n)
            cover = union_all(system, [cover, step])
        else:
            ring = [(x, n - abs(x)) for x in range(-n, n + 1)]
            ring += [(x, -(n - abs(x))) for x in range(-n + 1, n) if n - abs(x)]
            cover = union_all(system, [cover] + [translate(W, g) for g in ring])
    return n


@dataclass
class ReturnGenerators:
    generators: list
    beta: Fraction

    def __iter__(self):
        return iter(self.generators)

    def __len__(self):
        return len(self.generators)

    def __getitem__(self, i):
        return self.generators[i]


def induced_generators(W):
    """First-return maps to W with maximal clopen domains partitioning W."""
    system = W.system
    if system.dimension == 2:
        if len(W.words) != 1:
            raise MatchboxError("UNSUPPORTED", "Z^2 returns need a single coset")
        k = len(W.words[0])
        b = system.basis(k)
        gens = [HolonomyElement(system, (b[0][j], b[1][j]), W) for j in range(2)]
        return ReturnGenerators(gens, Fraction(2 * alpha_W(W)) * system.max_tile + 1)
    _, times, ranks, idx = return_times(W)
    gens = []
    for t in sorted(set(times.tolist())):
        mask = np.zeros(idx.size, dtype=bool)
        mask[ranks[times == t]] = True
        gens.append(HolonomyElement(system, int(t), ClopenSet.from_runs(system, _mask_runs(mask))))
    Partition([g.domain for g in gens], ambient=W)
    beta = 2 * alpha_W(W) * system.max_tile + 1
    return ReturnGenerators(gens, Fraction(beta))


def min_return_length(W):
    """Exact minimum leafwise length of a first return to W (lambda_1)."""
    system = W.system
    if system.dimension == 2:
        return _lattice_lambda1(W)
    pos, times, _, _ = return_times(W)
    if system.kind == "odometer":
        return Fraction(int(times.min()))
    best = None
    for p, t in zip(pos.tolist(), times.tolist()):
        ell = system.path_length(p, t)
        if best is None or ell < best:
            best = ell
    return best


def _gauss_reduce(u, v):
    """Lagrange-Gauss reduction; returns a shortest nonzero vector of the lattice."""
    def n2(a):
        return a[0] * a[0] + a[1] * a[1]
    if n2(u) > n2(v):
        u, v = v, u
    while True:
        m = round(Fraction(u[0] * v[0] + u[1] * v[1], n2(u)))
        v = (v[0] - m * u[0], v[1] - m * u[1])
        if n2(v) >= n2(u):
            return u
        u, v = v, u


def _lattice_lambda1(W):
    """lambda_1 for a single Z^2 cylinder: shortest vector of its subgroup."""
    system = W.system
    if len(W.words) != 1:
        raise MatchboxError("UNSUPPORTED", "Z^2 return lengths need a single cylinder")
    b = system.basis(len(W.words[0]))
    u = _gauss_reduce((b[0][0], b[1][0]), (b[0][1], b[1][1]))
    from .delone import _exact_sqrt
    root = _exact_sqrt(Fraction(u[0] * u[0] + u[1] * u[1]))
    if root is None:
        raise MatchboxError("UNSUPPORTED", "shortest return length is irrational")
    return root


def max_return_length(W):
    system = W.system
    pos, times, _, _ = return_times(W)
    if system.kind == "odometer":
        return Fraction(int(times.max()))
    return max(system.path_length(p, t) for p, t in zip(pos.tolist(), times.tolist()))


# ---------------------------------------------------------------------------
# dynamics classifier


@dataclass
class DynamicsEvidence:
    kind: str  # "equicontinuous" or "expansive"
    depth: int
    eps: Fraction
    witness: dict


def classify_at_depth(system, depth, eps=Fraction(1, 2)):
    """Finite-depth evidence for equicontinuous versus expansive dynamics."""
    eps = Fraction(eps)
    if depth <= 0:
        raise MatchboxError("INCONCLUSIVE", "no elements scanned at depth 0")
    words = system.words(depth)
    if system.dimension == 1:
        shifts = list(range(1, depth + 1))
    else:
        shifts = [(x, y) for x in range(-depth, depth + 1) for y in range(-depth, depth + 1)
                  if 0 < abs(x) + abs(y) <= depth]

    def image_words(w, g):
        if system.kind == "odometer":
            return [system.word_at(system.shift(system.representative(w), g), len(w))]
        return [w[g:]] if g <= len(w) else [""]

    equi = True
    for w in words:
        for g in shifts:
            if any(len(v) != len(w) for v in image_words(w, g)):
                equi = False
                break
        if not equi:
            break
    if equi:
        return DynamicsEvidence("equicontinuous", depth, eps, {"cylinders": len(words), "elements": len(shifts)})

    def far(a, b):
        k = 0
        while k < min(len(a), len(b)) and a[k] == b[k]:
            k += 1
        if k >= min(len(a), len(b)):
            return False
        return Fraction(1, 2 ** k) >= eps

    pairs = 0
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            a, b = words[i], words[j]
            pairs += 1
            if far(a, b):
                continue
            if not any(far(x, y) for g in shifts for x in image_words(a, g) for y in image_words(b, g)):
                raise MatchboxError("INCONCLUSIVE", "neither certificate holds at this depth")
    return DynamicsEvidence("expansive", depth, eps, {"pairs": pairs, "elements": len(shifts)})
