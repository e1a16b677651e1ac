"""Concrete minimal Cantor systems and their transversal model.

Two families are supported:

* substitution subshifts, suspended with positive rational tile lengths;
* odometers on Z^d (d = 1, 2) given by a descending chain of subgroups.

Every system exposes the same small interface used by the rest of the
package.  Points of the transversal are orbit points of the basepoint
``w0`` indexed by an integer position (a vector for Z^2).  Cylinders are
words over an internal one-character-per-symbol alphabet, so that plain
string comparison gives the lexicographic order of the user's alphabet.
"""
import bisect
import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm

import numpy as np

from .errors import DepthInsufficient, MatchboxError

_CODE_BASE = 0xE000
DEFAULT_DEPTH_CAP = 250_000


def encode_index(i):
    return chr(_CODE_BASE + i)


def decode_char(c):
    return ord(c) - _CODE_BASE


def depth_cap_from_env(default=DEFAULT_DEPTH_CAP):
    raw = os.environ.get("MBF_SCAN_DEPTH_CAP")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        syms = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", syms)
        if not syms:
            raise MatchboxError("EMPTY_ALPHABET", "alphabet must be nonempty")
        if len(set(syms)) != len(syms):
            raise MatchboxError("DUPLICATE_SYMBOL", f"duplicate symbols in {syms}")

    def __len__(self):
        return len(self.symbols)

    def index(self, symbol):
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise MatchboxError("UNKNOWN_SYMBOL", f"{symbol!r} not in alphabet") from None

    def split(self, word):
        """Split a user word (string or sequence) into symbols."""
        if isinstance(word, str):
            if all(len(s) == 1 for s in self.symbols):
                return list(word)
            return word.split() if " " in word else word.split(".")
        return [str(s) for s in word]

    def encode(self, word):
        return "".join(encode_index(self.index(s)) for s in self.split(word))

    def decode(self, code):
        return tuple(self.symbols[decode_char(c)] for c in code)

    def render(self, code):
        syms = self.decode(code)
        sep = "" if all(len(s) == 1 for s in self.symbols) else "."
        return sep.join(syms)


@dataclass(frozen=True)
class SubstitutionRule:
    """Substitution on a finite alphabet with per-symbol tile lengths."""
    alphabet: Alphabet
    images: tuple  # images[i] = tuple of symbols, in alphabet order
    tile_lengths: tuple = None  # Fractions, in alphabet order

    def __post_init__(self):
        n = len(self.alphabet)
        if len(self.images) != n:
            raise MatchboxError("BAD_SPEC", "one image per symbol required")
        for img in self.images:
            if not img:
                raise MatchboxError("BAD_SPEC", "images must be nonempty")
            for s in img:
                self.alphabet.index(s)
        lengths = self.tile_lengths
        if lengths is None:
            lengths = (Fraction(1),) * n
        lengths = tuple(Fraction(x) for x in lengths)
        if len(lengths) != n or any(x <= 0 for x in lengths):
            raise MatchboxError("BAD_SPEC", "tile lengths must be positive rationals")
        object.__setattr__(self, "tile_lengths", lengths)

    @classmethod
    def from_dict(cls, rules, alphabet=None, lengths=None):
        """Build from ``{"a": "ab", "b": "a"}`` style data."""
        alphabet = Alphabet(tuple(alphabet) if alphabet else tuple(rules))
        images = tuple(tuple(alphabet.split(rules[s])) for s in alphabet.symbols)
        tl = None
        if lengths:
            tl = tuple(Fraction(str(lengths.get(s, 1))) for s in alphabet.symbols)
        return cls(alphabet, images, tl)

    def matrix(self):
        """Substitution matrix M[a][b] = number of b's in the image of a."""
        n = len(self.alphabet)
        m = np.zeros((n, n), dtype=np.int64)
        for i, img in enumerate(self.images):
            for s in img:
                m[i, self.alphabet.index(s)] += 1
        return m


@dataclass(frozen=True)
class OdometerSpec:
    """Descending chain H_1 > H_2 > ... of finite-index subgroups of Z^d.

    Each subgroup is given by an integer basis matrix whose columns span it.
    For d = 1 plain integers are accepted (``[2, 4, 8]``).
    """
    dimension: int
    subgroup_chain: tuple

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise MatchboxError("BAD_SPEC", "odometer dimension must be 1 or 2")
        chain = []
        for m in self.subgroup_chain:
            if isinstance(m, (int, np.integer)):
                m = ((int(m),),)
            mat = tuple(tuple(int(x) for x in row) for row in m)
            if len(mat) != self.dimension or any(len(r) != self.dimension for r in mat):
                raise MatchboxError("BAD_SPEC", f"basis {m} has wrong shape")
            chain.append(mat)
        if not chain:
            raise MatchboxError("BAD_SPEC", "subgroup chain must be nonempty")
        object.__setattr__(self, "subgroup_chain", tuple(chain))


@dataclass
class ValidationReport:
    kind: str
    minimal: bool
    aperiodic: bool
    accepted: bool
    witnesses: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# small integer linear algebra for d <= 2


def _det(m):
    if len(m) == 1:
        return m[0][0]
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def _matmul(a, b):
    n = len(a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n))


def _solve(m, v):
    """Exact solution x of m x = v (Fractions)."""
    if len(m) == 1:
        return (Fraction(v[0], m[0][0]),)
    d = _det(m)
    x0 = Fraction(v[0] * m[1][1] - m[0][1] * v[1], d)
    x1 = Fraction(m[0][0] * v[1] - m[1][0] * v[0], d)
    return (x0, x1)


def _relative(a, b):
    """Integer matrix t with b = a t, or None when b is not inside a."""
    n = len(a)
    cols = []
    for j in range(n):
        x = _solve(a, [b[i][j] for i in range(n)])
        if any(c.denominator != 1 for c in x):
            return None
        cols.append([int(c) for c in x])
    return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))


def _hnf(t):
    """Lower-triangular column basis ((a, 0), (b, c)) of the lattice t Z^d."""
    if len(t) == 1:
        return (abs(t[0][0]),)
    c1 = [t[0][0], t[1][0]]
    c2 = [t[0][1], t[1][1]]
    # column operations until the first row is (g, 0)
    while c2[0] != 0:
        q = c1[0] // c2[0]
        c1 = [c1[0] - q * c2[0], c1[1] - q * c2[1]]
        c1, c2 = c2, c1
    if c1[0] < 0:
        c1 = [-c1[0], -c1[1]]
    c = abs(c2[1])
    b = c1[1] % c
    return (c1[0], b, c)


class _CosetReps:
    """Canonical representatives of Z^d / t Z^d."""

    def __init__(self, t):
        self.h = _hnf(t)
        if len(self.h) == 1:
            self.size = self.h[0]
        else:
            self.size = self.h[0] * self.h[2]

    def reduce(self, v):
        """Return (index, representative) of v modulo the lattice."""
        if len(self.h) == 1:
            r = v[0] % self.h[0]
            return r, (r,)
        a, b, c = self.h
        q1 = v[0] // a
        x, y = v[0] - q1 * a, v[1] - q1 * b
        y %= c
        return x * c + y, (x, y)

    def rep(self, index):
        if len(self.h) == 1:
            return (index,)
        c = self.h[2]
        return (index // c, index % c)


# ---------------------------------------------------------------------------
# sorted sample of transversal points


class SampleIndex:
    """Finite sample of orbit points, sorted by their depth-N words.

    Every legal word of length <= N occurs as the prefix of some sample
    point, so a clopen set of depth <= N is determined by the sample points
    it contains.  Cylinders correspond to contiguous rank intervals, and
    ``lcp[k]`` is the common prefix length of ranks k-1 and k (capped at N,
    with sentinels -1 at both ends).
    """

    def __init__(self, system, depth, positions, lcp):
        self.system = system
        self.depth = depth
        self.positions = positions
        self.lcp = lcp
        self.size = len(positions)
        self._intervals = {}

    def word(self, k, d):
        return self.system.word_at(self.positions[k], d)

    def interval(self, word):
        """Half-open rank interval of the cylinder [word]."""
        hit = self._intervals.get(word)
        if hit is not None:
            return hit
        d = len(word)
        if d > self.depth:
            raise DepthInsufficient(d, self.depth, "cylinder deeper than sample")
        key = lambda k: self.word(k, d)  # noqa: E731
        lo = bisect.bisect_left(range(self.size), word, key=key)
        hi = bisect.bisect_right(range(self.size), word, lo=lo, key=key)
        self._intervals[word] = (lo, hi)
        return lo, hi

    def decompose(self, runs):
        """Normal-form cylinder words of a union of rank intervals."""
        lcp = self.lcp
        out = []
        for lo, hi in runs:
            stack = [(lo, hi)]
            while stack:
                a, b = stack.pop()
                d = max(lcp[a], lcp[b]) + 1
                m = self.depth if b - a == 1 else int(lcp[a + 1:b].min())
                if d <= m:
                    out.append(self.word(a, d))
                    continue
                cuts = (a + 1 + np.nonzero(lcp[a + 1:b] == m)[0]).tolist()
                bounds = [a] + cuts + [b]
                for s, e in zip(bounds, bounds[1:]):
                    stack.append((s, e))
        out.sort()
        return tuple(out)


def _suffix_array(codes):
    """Suffix array by prefix doubling (numpy)."""
    n = len(codes)
    rank = np.asarray(codes, dtype=np.int64)
    k = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        if k < n:
            second[: n - k] = rank[k:]
        sa = np.lexsort((second, rank))
        r, s = rank[sa], second[sa]
        change = np.empty(n, dtype=bool)
        change[0] = True
        change[1:] = (r[1:] != r[:-1]) | (s[1:] != s[:-1])
        new = np.cumsum(change) - 1
        rank = np.empty(n, dtype=np.int64)
        rank[sa] = new
        if new[-1] == n - 1:
            return sa
        k *= 2


def _kasai(text, sa):
    """lcp[k] = common prefix of suffixes sa[k-1], sa[k] (lcp[0] = 0)."""
    n = len(text)
    rank = [0] * n
    for i, p in enumerate(sa.tolist()):
        rank[p] = i
    sal = sa.tolist()
    lcp = [0] * n
    h = 0
    for i in range(n):
        r = rank[i]
        if r == 0:
            h = 0
            continue
        j = sal[r - 1]
        while i + h < n and j + h < n and text[i + h] == text[j + h]:
            h += 1
        lcp[r] = h
        if h:
            h -= 1
    return np.asarray(lcp, dtype=np.int64)


# ---------------------------------------------------------------------------
# systems


class _System:
    """Shared behaviour of the concrete systems."""

    kind = ""
    dimension = 1

    def __init__(self, depth_cap=None):
        self.depth_cap = depth_cap if depth_cap is not None else depth_cap_from_env()
        self._index = None
        self.max_requested = 0

    # points -------------------------------------------------------------
    def point(self, position=0):
        return CantorPoint(self, self._norm_pos(position))

    def _norm_pos(self, position):
        if self.dimension == 1:
            return int(position)
        if isinstance(position, (int, np.integer)) and position == 0:
            return (0,) * self.dimension
        return tuple(int(x) for x in position)

    def shift(self, position, g):
        if self.dimension == 1:
            return position + g
        return tuple(a + b for a, b in zip(position, g))

    # sampling -------------------------------------------------------------
    def sample_index(self, depth=0):
        """Sample index of depth >= ``depth`` (rebuilt only when deeper)."""
        self.max_requested = max(self.max_requested, depth)
        if self._index is not None and self._index.depth >= depth:
            return self._index
        if depth > self.depth_cap:
            raise DepthInsufficient(depth, self.depth_cap, "scan depth cap")
        current = self._index.depth if self._index is not None else 0
        target = max(depth, min(self.depth_cap, max(8, current * 5 // 4)))
        self._index = self._build_index(target)
        return self._index

    def ensure_depth(self, depth):
        return self.sample_index(depth)

    def render_word(self, word):
        raise NotImplementedError

    def words(self, n):
        """All legal words of length n (encoded), sorted."""
        idx = self.sample_index(n)
        out = []
        k = 0
        while k < idx.size:
            w = idx.word(k, n)
            out.append(w)
            k = idx.interval(w)[1]
        return out


class SubstitutionSystem(_System):
    """Two-sided orbit of a substitution fixed point and its language."""

    kind = "substitution"
    dimension = 1

    def __init__(self, rule, depth_cap=None, period_bound=64):
        super().__init__(depth_cap)
        self.rule = rule
        self.alphabet = rule.alphabet
        self.period_bound = period_bound
        n = len(self.alphabet)
        self._img = {encode_index(i): "".join(encode_index(self.alphabet.index(s)) for s in rule.images[i])
                     for i in range(n)}
        self._tile = {encode_index(i): rule.tile_lengths[i] for i in range(n)}
        self._scale = lcm(*[x.denominator for x in rule.tile_lengths])
        self._tile_int = {c: int(x * self._scale) for c, x in self._tile.items()}
        self.max_tile = max(rule.tile_lengths)
        self.min_tile = min(rule.tile_lengths)
        self._l2 = _two_letter_closure(self._img)
        self.power, self.seed, self.left_seed = _find_seeds(self._img, self._l2, self.alphabet)
        self._right = self.seed
        self._left = self.left_seed
        self._cum_right = None
        self._cum_left = None
        self._m2 = None

    # substitution helpers --------------------------------------------------
    def _apply(self, word, times=1):
        for _ in range(times):
            word = "".join(self._img[c] for c in word)
        return word

    def _grow_right(self, n):
        while len(self._right) < n:
            nxt = self._apply(self._right, self.power)
            if len(nxt) <= len(self._right):
                raise MatchboxError("NO_SEED", "fixed point does not grow")
            self._right = nxt
            self._cum_right = None

    def _grow_left(self, n):
        while len(self._left) < n:
            nxt = self._apply(self._left, self.power)
            if len(nxt) <= len(self._left):
                raise MatchboxError("NO_SEED", "left fixed point does not grow")
            self._left = nxt
            self._cum_left = None

    def prefix(self, n):
        """First n coordinates (encoded) of the right-infinite fixed point."""
        self._grow_right(n)
        return self._right[:n]

    def word_at(self, position, d):
        """Coordinates position .. position+d-1 of the two-sided basepoint."""
        if position >= 0:
            self._grow_right(position + d)
            return self._right[position:position + d]
        self._grow_left(-position)
        left = self._left
        start = len(left) + position
        if position + d <= 0:
            return left[start:start + d]
        self._grow_right(position + d)
        return left[start:] + self._right[:position + d]

    def symbol_at(self, position):
        return self.word_at(position, 1)

    def tile_at(self, position):
        return self._tile[self.symbol_at(position)]

    def symbol_codes(self, n):
        """Symbol indices of positions 0..n-1 as an integer array."""
        text = self.prefix(n)
        return np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32).astype(np.int64) - _CODE_BASE

    def symbol_name(self, i):
        return self.alphabet.symbols[i]

    def tile_length(self, i):
        return self.rule.tile_lengths[i]

    # leaf coordinates ------------------------------------------------------
    def _cum(self, side, n):
        if side > 0:
            self._grow_right(n)
            if self._cum_right is None or len(self._cum_right) <= n:
                vals = [self._tile_int[c] for c in self._right]
                self._cum_right = np.concatenate([[0], np.cumsum(vals, dtype=np.int64)])
            return self._cum_right
        self._grow_left(n)
        if self._cum_left is None or len(self._cum_left) <= n:
            vals = [self._tile_int[c] for c in reversed(self._left)]
            self._cum_left = np.concatenate([[0], np.cumsum(vals, dtype=np.int64)])
        return self._cum_left

    def coord(self, position):
        """Signed leafwise coordinate of the orbit point at ``position``."""
        if position >= 0:
            v = int(self._cum(1, position)[position])
        else:
            v = -int(self._cum(-1, -position)[-position])
        return Fraction(v, self._scale)

    def path_length(self, position, k):
        return abs(self.coord(position + k) - self.coord(position))

    # language --------------------------------------------------------------
    def _min_pair_prefix(self):
        if self._m2 is None:
            need = set(self._l2)
            m = 2
            while True:
                self._grow_right(m)
                need.discard(self._right[m - 2:m])
                if not need:
                    break
                m += 1
            self._m2 = m
        return self._m2

    def prefix_bound(self, n):
        """A prefix length of the fixed point containing every legal n-word."""
        m2 = self._min_pair_prefix()
        if n <= 2:
            return m2
        lengths = {c: 1 for c in self._img}
        k = 0
        while min(lengths.values()) < n - 1:
            lengths = {c: sum(lengths[x] for x in self._apply(c, self.power)) for c in self._img}
            k += 1
        return sum(lengths[c] for c in self.prefix(m2))

    def language(self, n):
        """Set of legal words of length n, encoded."""
        if n == 0:
            return {""}
        p = self.prefix_bound(n)
        u = self.prefix(p)
        return {u[i:i + n] for i in range(p - n + 1)}

    def _build_index(self, depth):
        p = self.prefix_bound(depth + 1)
        valid = p - depth
        total = p + depth + 1
        text = self.prefix(total)
        codes = np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32).astype(np.int64) - _CODE_BASE
        sa = _suffix_array(codes)
        lcp_full = _kasai(text, sa)
        keep = np.nonzero(sa < valid)[0]
        positions = sa[keep]
        lcp = np.empty(len(keep) + 1, dtype=np.int64)
        lcp[0] = lcp[-1] = -1
        if len(keep) > 1:
            # lcp between consecutive kept suffixes = min over the gap
            lcp[1:-1] = _range_min(lcp_full, keep)
        np.minimum(lcp, depth, out=lcp)
        return SampleIndex(self, depth, positions, lcp)

    def render_word(self, word):
        return self.alphabet.render(word)

    def render_cylinder(self, word):
        return "[" + self.render_word(word) + "]"

    def parse_word(self, text):
        return self.alphabet.encode(text.strip().strip("[]"))


def _range_min(lcp_full, keep):
    """min(lcp_full[keep[i]+1 .. keep[i+1]]) for consecutive kept ranks."""
    # reduceat covers [keep[i]+1, keep[i+1]+1); truncating the array makes the
    # last segment stop at keep[-1] as well
    return np.minimum.reduceat(lcp_full[: keep[-1] + 1], keep[:-1] + 1)


def _two_letter_closure(images):
    found = set()
    for img in images.values():
        found.update(img[i:i + 2] for i in range(len(img) - 1))
    frontier = list(found)
    while frontier:
        xy = frontier.pop()
        img = images[xy[0]] + images[xy[1]]
        for i in range(len(img) - 1):
            f = img[i:i + 2]
            if f not in found:
                found.add(f)
                frontier.append(f)
    return found


def _find_seeds(images, l2, alphabet):
    """Power Q and seeds a (right) and b (left) with a two-sided fixed point."""
    chars = [encode_index(i) for i in range(len(alphabet))]

    def first(c, k):
        for _ in range(k):
            c = images[c][0]
        return c

    def last(c, k):
        for _ in range(k):
            c = images[c][-1]
        return c

    n = len(chars)
    right = None
    for p in range(1, n + 1):
        for a in chars:
            if first(a, p) == a:
                right = (p, a)
                break
        if right:
            break
    if right is None:
        raise MatchboxError("NO_SEED", "no symbol generates a fixed or periodic point")
    p, a = right
    best = None
    for b in chars:
        if b + a not in l2:
            continue
        for q in range(1, n + 1):
            if last(b, q) == b:
                cand = (lcm(p, q), b)
                if best is None or cand < best:
                    best = cand
                break
    if best is None:
        raise MatchboxError("NO_SEED", "no legal left seed for a two-sided fixed point")
    power, b = best
    # make sure the images actually grow under the chosen power
    w = a
    for _ in range(4 * n + 4):
        w2 = w
        for _ in range(power):
            w2 = "".join(images[c] for c in w2)
        if len(w2) > 1:
            break
        power *= 2
    return power, a, b


class OdometerSystem(_System):
    """Z^d odometer: the inverse limit of Z^d / H_k with translation action."""

    kind = "odometer"

    def __init__(self, spec, depth_cap=None):
        super().__init__(depth_cap)
        self.spec = spec
        self.dimension = spec.dimension
        d = spec.dimension
        ident = tuple(tuple(int(i == j) for j in range(d)) for i in range(d))
        self._bases = [ident] + list(spec.subgroup_chain)
        self._rel = []
        for a, b in zip(self._bases, self._bases[1:]):
            t = _relative(a, b)
            if t is None or abs(_det(t)) < 2:
                raise MatchboxError("BAD_SPEC", "each subgroup must strictly contain the next")
            self._rel.append(t)
        self._growth = self._rel[-1]
        self._reps = [_CosetReps(t) for t in self._rel]
        self.max_tile = Fraction(1)
        self.min_tile = Fraction(1)

    def _extend(self, k):
        while len(self._rel) < k:
            t = self._growth
            self._bases.append(_matmul(self._bases[-1], t))
            self._rel.append(t)
            self._reps.append(_CosetReps(t))

    def basis(self, k):
        self._extend(k)
        return self._bases[k]

    def index(self, k):
        """|Z^d : H_k|."""
        return abs(_det(self.basis(k)))

    def digits(self, position, n):
        self._extend(n)
        if self.dimension == 1:
            v = position
            out = []
            for k in range(n):
                t = self._rel[k][0][0]
                r = v % t
                out.append(r)
                v = (v - r) // t
            return out
        v = tuple(position)
        out = []
        for k in range(n):
            idx, rep = self._reps[k].reduce(v)
            out.append(idx)
            t = self._rel[k]
            diff = (v[0] - rep[0], v[1] - rep[1])
            x = _solve(t, diff)
            v = (int(x[0]), int(x[1]))
        return out

    def word_at(self, position, d):
        return "".join(encode_index(x) for x in self.digits(position, d))

    def symbol_at(self, position):
        return ""

    def tile_at(self, position):
        return Fraction(1)

    def symbol_codes(self, n):
        return np.zeros(n, dtype=np.int64)

    def symbol_name(self, i):
        return "e"

    def tile_length(self, i):
        return Fraction(1)

    def coord(self, position):
        if self.dimension == 1:
            return Fraction(position)
        return tuple(Fraction(x) for x in position)

    def path_length(self, position, k):
        if self.dimension == 1:
            return Fraction(abs(k))
        # Euclidean length is compared through its square elsewhere
        return Fraction(sum(x * x for x in k))

    def representative(self, word):
        """Smallest coset representative of a digit word."""
        self._extend(len(word))
        d = self.dimension
        r = [0] * d
        for k, c in enumerate(word):
            rep = self._reps[k].rep(decode_char(c))
            b = self._bases[k]
            for i in range(d):
                r[i] += sum(b[i][j] * rep[j] for j in range(d))
        if d == 1:
            return r[0] % self.index(len(word)) if word else 0
        return tuple(r)

    def _build_index(self, depth):
        self._extend(depth)
        sizes = [self._reps[k].size for k in range(depth)]
        total = 1
        for s in sizes:
            total *= s
        if total > 2_000_000:
            raise DepthInsufficient(depth, depth - 1, "odometer sample too large")
        words = [""]
        for s in sizes:
            words = [w + encode_index(i) for w in words for i in range(s)]
        positions = [self.representative(w) for w in words]
        lcp = np.empty(len(words) + 1, dtype=np.int64)
        lcp[0] = lcp[-1] = -1
        for k in range(1, len(words)):
            a, b = words[k - 1], words[k]
            h = 0
            while h < depth and a[h] == b[h]:
                h += 1
            lcp[k] = h
        idx = SampleIndex(self, depth, positions, lcp)
        idx.words_cache = words
        return idx

    def render_word(self, word):
        r = self.representative(word)
        n = len(word)
        if self.dimension == 1:
            return f"{r} mod {self.index(n)}"
        return f"({r[0]},{r[1]}) mod H{n}"

    def render_cylinder(self, word):
        return "[" + self.render_word(word) + "]"

    def parse_word(self, text):
        """Parse ``"r mod n"`` (d = 1) or ``"(x,y) mod Hk"`` (d = 2) into a digit word."""
        text = text.strip().strip("[]")
        if self.dimension == 2:
            pt, k = text.split("mod")
            x, y = (int(v) for v in pt.strip().strip("()").split(","))
            return self.word_at((x, y), int(k.strip().lstrip("H")))
        r, n = (int(x) for x in text.split("mod"))
        k = 0
        while self.index(k) < n:
            k += 1
        if self.index(k) != n:
            raise MatchboxError("BAD_CYLINDER", f"{n} is not a chain index")
        return self.word_at(r, k)


@dataclass(frozen=True)
class CantorPoint:
    """Orbit point of the basepoint, addressed by its position."""
    system: object
    position: object

    def prefix(self, k):
        return self.system.word_at(self.position, k)

    def word(self, k):
        return self.system.render_word(self.prefix(k))

    def __repr__(self):
        return f"CantorPoint({self.system.kind}, {self.position})"


# ---------------------------------------------------------------------------
# public operations


def make_system(spec, depth_cap=None):
    """Runtime system object for a rule or odometer spec (or pass through)."""
    if isinstance(spec, _System):
        return spec
    if isinstance(spec, SubstitutionRule):
        return SubstitutionSystem(spec, depth_cap)
    if isinstance(spec, OdometerSpec):
        return OdometerSystem(spec, depth_cap)
    raise MatchboxError("BAD_SPEC", f"unsupported spec {type(spec).__name__}")


def _primitive_power(m):
    n = m.shape[0]
    b = (m > 0).astype(np.int64)
    p = b.copy()
    for k in range(1, n * n + 1):
        if (p > 0).all():
            return k
        p = ((p @ b) > 0).astype(np.int64)
    return None


def validate_system(spec, period_bound=64):
    """Check the hypotheses of the pipeline: minimality and aperiodicity."""
    if isinstance(spec, OdometerSpec):
        OdometerSystem(spec)  # raises on a malformed chain
        return ValidationReport("odometer", True, True, True, {"reason": "odometers are minimal"})
    rule = spec.rule if isinstance(spec, SubstitutionSystem) else spec
    power = _primitive_power(rule.matrix())
    if power is None:
        raise MatchboxError("REJECT_NOT_PRIMITIVE", "no power of the substitution matrix is positive")
    system = spec if isinstance(spec, SubstitutionSystem) else SubstitutionSystem(rule)
    n = 4 * period_bound
    u = system.prefix(n)
    for p in range(1, period_bound + 1):
        if u[p:] == u[:n - p]:
            raise MatchboxError("REJECT_PERIODIC", f"fixed point has period {p}", period=p)
    return ValidationReport("substitution", True, True, True,
                            {"primitive_power": power, "period_scan": n,
                             "seed": rule.alphabet.decode(system.seed)[0],
                             "fixed_point_power": system.power})


def fixed_point_prefix(rule, n):
    system = rule if isinstance(rule, SubstitutionSystem) else SubstitutionSystem(rule)
    return system.render_word(system.prefix(n))


def language(rule, n):
    """Legal words of length n, rendered."""
    system = rule if isinstance(rule, SubstitutionSystem) else SubstitutionSystem(rule)
    return {system.render_word(w) for w in system.language(n)}


def metric_distance(x, y, depth_cap=64):
    """2^-k for the first disagreement depth k; 0 if none below depth_cap."""
    if x.system is not y.system:
        raise MatchboxError("SYSTEM_MISMATCH", "points come from different systems")
    a, b = x.prefix(depth_cap), y.prefix(depth_cap)
    for k, (s, t) in enumerate(zip(a, b)):
        if s != t:
            return Fraction(1, 2 ** k)
    return Fraction(0)


def first_disagreement(a, b):
    """Length of the common prefix of two words."""
    n = min(len(a), len(b))
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if a[:mid] == b[:mid]:
            lo = mid
        else:
            hi = mid - 1
    return lo
