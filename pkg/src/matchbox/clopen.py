"""Exact Boolean algebra of clopen subsets of the transversal.

A clopen set is stored as its normal form: a sorted tuple of pairwise
disjoint cylinder words in which no full family of siblings survives (a
parent whose every child is present is merged, repeatedly, including
parents with a single child).  Equal sets therefore have identical normal
forms.  Internally each cylinder is a contiguous interval of the system's
sorted sample, and Boolean operations are interval-list operations.
"""
import bisect
from fractions import Fraction

import numpy as np

from .errors import MatchboxError
from .systems import first_disagreement


def _merge_runs(runs):
    runs = sorted(r for r in runs if r[0] < r[1])
    out = []
    for lo, hi in runs:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def _intersect_runs(a, b):
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return out


def _subtract_runs(a, b):
    out = []
    j = 0
    for lo, hi in a:
        cur = lo
        while j < len(b) and b[j][1] <= cur:
            j += 1
        k = j
        while k < len(b) and b[k][0] < hi:
            if b[k][0] > cur:
                out.append((cur, b[k][0]))
            cur = max(cur, b[k][1])
            k += 1
        if cur < hi:
            out.append((cur, hi))
    return out


class ClopenSet:
    """Finite union of cylinders in normal form."""

    __slots__ = ("system", "words", "_runs")

    def __init__(self, system, words=(), normalized=False):
        self.system = system
        words = tuple(words)
        if normalized:
            self.words = words
        else:
            self.words = _normalize(system, words)
        self._runs = None

    # construction ----------------------------------------------------------
    @classmethod
    def whole(cls, system):
        return cls(system, ("",), normalized=True)

    @classmethod
    def empty(cls, system):
        return cls(system, (), normalized=True)

    @classmethod
    def cylinder(cls, system, word):
        return cls(system, (word,))

    @classmethod
    def parse(cls, system, *texts):
        """Cylinders from user notation: ``"ab"`` or ``"3 mod 4"``."""
        return cls(system, tuple(system.parse_word(t) for t in texts))

    @classmethod
    def from_runs(cls, system, runs):
        idx = system.sample_index(0)
        words = idx.decompose(_merge_runs(runs))
        out = cls(system, words, normalized=True)
        return out

    # basic properties -------------------------------------------------------
    @property
    def depth(self):
        return max((len(w) for w in self.words), default=0)

    def is_empty(self):
        return not self.words

    def __bool__(self):
        return bool(self.words)

    def __eq__(self, other):
        return isinstance(other, ClopenSet) and other.system is self.system and other.words == self.words

    def __hash__(self):
        return hash((id(self.system), self.words))

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def runs(self):
        """Merged rank intervals in the system's current sample."""
        idx = self.system.sample_index(self.depth)
        if self._runs is None or self._runs[0] is not idx:
            self._runs = (idx, _merge_runs(idx.interval(w) for w in self.words))
        return self._runs[1]

    def contains_word(self, word):
        """True if the cylinder point set with this prefix lies in a cylinder of the set."""
        i = bisect.bisect_right(self.words, word) - 1
        return i >= 0 and word.startswith(self.words[i])

    def contains(self, point):
        if point.system is not self.system:
            raise MatchboxError("SYSTEM_MISMATCH", "point from another system")
        return self.contains_word(point.prefix(self.depth))

    def render(self):
        if not self.words:
            return "{}"
        return "{" + ", ".join(self.system.render_cylinder(w) for w in self.words) + "}"

    def __repr__(self):
        return f"ClopenSet({self.render()})"

    # algebra ----------------------------------------------------------------
    def _check(self, other):
        if other.system is not self.system:
            raise MatchboxError("SYSTEM_MISMATCH", "clopen sets from different systems")
        self.system.sample_index(max(self.depth, other.depth))

    def __and__(self, other):
        return intersect(self, other)

    def __or__(self, other):
        return union(self, other)

    def __sub__(self, other):
        return subtract(self, other)

    def issubset(self, other):
        return subtract(self, other).is_empty()

    def isdisjoint(self, other):
        return intersect(self, other).is_empty()

    def positions(self):
        """Sample positions inside the set, in rank order."""
        idx = self.system.sample_index(self.depth)
        pos = idx.positions
        out = []
        for lo, hi in self.runs():
            out.extend(pos[lo:hi].tolist() if isinstance(pos, np.ndarray) else pos[lo:hi])
        return out


def _normalize(system, words):
    if not words:
        return ()
    depth = max(len(w) for w in words)
    idx = system.sample_index(depth)
    runs = []
    for w in words:
        lo, hi = idx.interval(w)
        if lo == hi:
            raise MatchboxError("ILLEGAL_WORD", f"{system.render_word(w)!r} is not a legal word")
        runs.append((lo, hi))
    return idx.decompose(_merge_runs(runs))


def intersect(a, b):
    a._check(b)
    return ClopenSet.from_runs(a.system, _intersect_runs(a.runs(), b.runs()))


def union(a, b):
    a._check(b)
    return ClopenSet.from_runs(a.system, a.runs() + b.runs())


def subtract(a, b):
    a._check(b)
    return ClopenSet.from_runs(a.system, _subtract_runs(a.runs(), b.runs()))


def union_all(system, sets):
    runs = []
    sets = list(sets)
    system.sample_index(max((s.depth for s in sets), default=0))
    for s in sets:
        runs.extend(s.runs())
    return ClopenSet.from_runs(system, runs)


def diameter(a):
    """Nominal diameter of the normal form: 2^-k, k = shallowest split."""
    if not a.words:
        return Fraction(0)
    if len(a.words) == 1:
        return Fraction(1, 2 ** len(a.words[0]))
    k = first_disagreement(a.words[0], a.words[-1])
    return Fraction(1, 2 ** k)


def distance(a, b):
    """min over points of the ultrametric; both sets nonempty."""
    if not a.words or not b.words:
        raise MatchboxError("EMPTY_INPUT", "distance needs nonempty sets")
    if a.system is not b.system:
        raise MatchboxError("SYSTEM_MISMATCH", "clopen sets from different systems")
    if not a.isdisjoint(b):
        return Fraction(0)
    merged = sorted([(w, 0) for w in a.words] + [(w, 1) for w in b.words])
    best = -1
    for (w1, s1), (w2, s2) in zip(merged, merged[1:]):
        if s1 != s2:
            best = max(best, first_disagreement(w1, w2))
    return Fraction(1, 2 ** best)


class Partition:
    """Ordered list of pairwise disjoint nonempty clopen blocks."""

    def __init__(self, blocks, ambient=None, check=True):
        self.blocks = tuple(blocks)
        if not self.blocks:
            raise MatchboxError("EMPTY_PARTITION", "a partition needs at least one block")
        self.system = self.blocks[0].system
        if check:
            for blk in self.blocks:
                if blk.is_empty():
                    raise MatchboxError("EMPTY_BLOCK", "partition blocks must be nonempty")
            total = 0
            runs = []
            for blk in self.blocks:
                r = blk.runs()
                total += sum(hi - lo for lo, hi in r)
                runs.extend(r)
            merged = _merge_runs(runs)
            if sum(hi - lo for lo, hi in merged) != total:
                raise MatchboxError("OVERLAP", "partition blocks intersect")
            union_set = ClopenSet.from_runs(self.system, merged)
            if ambient is not None and union_set != ambient:
                raise MatchboxError("AMBIENT_MISMATCH", "blocks do not cover the ambient set")
            self.ambient = union_set
        else:
            self.ambient = ambient if ambient is not None else union_all(self.system, self.blocks)

    @classmethod
    def canonical(cls, blocks, ambient=None, first=None):
        """Blocks sorted by smallest cylinder word; ``first`` block moved up front."""
        blocks = sorted(blocks, key=lambda b: b.words[0])
        if first is not None:
            head = [b for b in blocks if first(b)]
            blocks = head + [b for b in blocks if not first(b)]
        return cls(blocks, ambient)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]

    def __eq__(self, other):
        return isinstance(other, Partition) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def locate_word(self, word):
        """Index of the block containing every point with this prefix, or -1."""
        for i, blk in enumerate(self.blocks):
            if blk.contains_word(word):
                return i
        return -1

    def sorted_cylinders(self):
        """All cylinder words with their block index, sorted for bisection."""
        pairs = sorted((w, i) for i, b in enumerate(self.blocks) for w in b.words)
        return [w for w, _ in pairs], [i for _, i in pairs]

    def render(self):
        return "\n".join(f"{i}: {b.render()}" for i, b in enumerate(self.blocks))


def refine_common(p, q):
    """All nonempty pairwise intersections, in canonical order."""
    if p.ambient != q.ambient:
        raise MatchboxError("AMBIENT_MISMATCH", "partitions of different sets")
    blocks = []
    for a in p:
        for b in q:
            c = intersect(a, b)
            if c:
                blocks.append(c)
    return Partition.canonical(blocks, p.ambient)


def symbol_partition(system):
    """Depth-1 cylinders (the trivial partition {X} for odometers with index 1)."""
    return Partition.canonical([ClopenSet.cylinder(system, w) for w in system.words(1)])


def position_labels(system, partition, horizon):
    """Block index of the orbit point at each position 0..horizon-1 (-1 if none).

    Valid sample positions are labelled through their rank; the remaining
    positions fall back to a prefix lookup.
    """
    depth = max(b.depth for b in partition)
    idx = system.sample_index(depth)
    by_rank = np.full(idx.size, -1, dtype=np.int64)
    for i, blk in enumerate(partition):
        for lo, hi in blk.runs():
            by_rank[lo:hi] = i
    out = np.full(horizon, -1, dtype=np.int64)
    if system.kind == "odometer":
        if system.dimension != 1:
            raise MatchboxError("UNSUPPORTED", "orbit labels need a one-dimensional action")
        period = system.index(idx.depth)
        res = np.empty(period, dtype=np.int64)
        res[np.asarray(idx.positions)] = by_rank
        return res[np.arange(horizon) % period]
    pos = idx.positions
    inside = pos < horizon
    out[pos[inside]] = by_rank[inside]
    valid = idx.size
    words, owners = partition.sorted_cylinders()
    for p in range(valid, horizon):
        w = system.word_at(p, depth)
        j = bisect.bisect_right(words, w) - 1
        if j >= 0 and w.startswith(words[j]):
            out[p] = owners[j]
    return out
