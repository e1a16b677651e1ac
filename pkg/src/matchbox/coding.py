"""Orbit codes, constant-code refinement and the nested level hierarchy.

A code records, for each germ exponent g in 0..K, which block of a
clopen partition the point sigma^g(x) lies in.  Codes over a window of
length K+1 depend only on a cylinder of depth K + depth(partition), so all
refinements here are exact clopen computations on the sample index.
"""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .clopen import ClopenSet, Partition, diameter, distance, position_labels, symbol_partition
from .errors import MatchboxError
from .holonomy import _mask_runs, alpha_W, min_return_length, return_times


@dataclass(frozen=True)
class CodeWord:
    """Block index of gamma(u) for each germ exponent gamma."""
    entries: tuple

    @property
    def exponents(self):
        return tuple(g for g, _ in self.entries)

    @property
    def blocks(self):
        return tuple(b for _, b in self.entries)

    def as_dict(self):
        return dict(self.entries)

    def __len__(self):
        return len(self.entries)


def germ_range(w, R):
    """Largest K with path length of sigma^K from w at most R (-1 if R < 0)."""
    system = w.system
    R = Fraction(R)
    if R < 0:
        return -1
    within = lambda k: system.path_length(w.position, k) <= R  # noqa: E731
    hi = 1
    while within(hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if within(mid):
            lo = mid
        else:
            hi = mid
    return lo if within(lo) else 0


def _exponents(germs):
    if hasattr(germs, "exponents"):
        return list(germs.exponents)
    return [int(g) for g in germs]


def _partition_depth(partition):
    return max(b.depth for b in partition)


def _reach_depth(system, K, partition):
    """Cylinder depth fixing the labels of sigma^g x for 0 <= g <= K."""
    if system.kind == "odometer":
        return _partition_depth(partition)
    return K + _partition_depth(partition)


def _labels(system, partition, horizon):
    return position_labels(system, partition, horizon)


def code(u, germs, partition):
    """CodeWord of the clopen set u over the germ exponents (filtration or list)."""
    system = u.system
    if u.is_empty():
        raise MatchboxError("EMPTY_INPUT", "cannot code an empty set")
    exps = _exponents(germs)
    if system.dimension != 1:
        raise MatchboxError("UNSUPPORTED", "codes need a one-dimensional action")
    if system.kind == "substitution" and any(g < 0 for g in exps):
        raise MatchboxError("UNSUPPORTED", "one-sided codes use forward germs")
    reach = max((abs(g) for g in exps), default=0)
    system.ensure_depth(max(u.depth, _reach_depth(system, reach, partition)))
    pos = np.asarray(u.positions(), dtype=np.int64)
    idx = system.sample_index(0)
    if system.kind == "odometer":
        period = system.index(idx.depth)
        labels = _labels(system, partition, period)
        at = lambda g: labels[(pos + g) % period]  # noqa: E731
    else:
        labels = _labels(system, partition, idx.size + reach + 1)
        at = lambda g: labels[pos + g]  # noqa: E731
    entries = []
    for g in exps:
        vals = np.unique(at(g))
        if len(vals) != 1:
            raise MatchboxError("BLOCK_SPLIT", f"germ {g} maps the set across blocks {vals.tolist()}")
        if vals[0] < 0:
            raise MatchboxError("UNCOVERED", f"germ {g} leaves the partition's ambient set")
        entries.append((g, int(vals[0])))
    return CodeWord(tuple(entries))


def _rank_pairs(a, b):
    key = a.astype(np.int64) * (int(b.max()) + 2) + (b.astype(np.int64) + 1)
    _, inv = np.unique(key, return_inverse=True)
    return inv.astype(np.int64)


def window_classes(labels, K):
    """Class id of labels[p..p+K] for every p with p+K in range (prefix doubling)."""
    labels = np.asarray(labels, dtype=np.int64)
    n = len(labels)
    width = K + 1
    if width <= 0 or n < width:
        return np.zeros(max(n - width + 1, 0), dtype=np.int64)
    _, cls = np.unique(labels, return_inverse=True)
    m = 1
    while 2 * m <= width:
        cls = _rank_pairs(cls[: len(cls) - m], cls[m:])
        m *= 2
    shift = width - m
    if shift:
        cls = _rank_pairs(cls[: len(cls) - shift], cls[shift:])
    return cls[: n - width + 1]


def _code_classes(system, partition, K, depth):
    """Sample index and the code class of each sample position (cached on the partition)."""
    need = max(depth, _reach_depth(system, K, partition), 1)
    idx = system.sample_index(need)
    cache = partition.__dict__.setdefault("_code_cache", {})
    hit = cache.get(K)
    if hit is not None and hit[0] is idx:
        return hit
    pos = np.asarray(idx.positions, dtype=np.int64)
    if system.kind == "odometer":
        period = system.index(idx.depth)
        labels = _labels(system, partition, period + K + 1)
    else:
        labels = _labels(system, partition, idx.size + K + 1)
    cls = window_classes(labels, K)[pos]
    cache[K] = (idx, cls)
    return idx, cls


def _code_groups(block, K, partition):
    """Rank masks of the sample points of ``block`` grouped by their code."""
    system = block.system
    idx, cls = _code_classes(system, partition, K, block.depth)
    runs = block.runs()
    ranks = np.concatenate([np.arange(lo, hi) for lo, hi in runs]) if runs else np.zeros(0, int)
    keys = cls[ranks]
    groups = []
    for key in np.unique(keys):
        mask = np.zeros(idx.size, dtype=bool)
        mask[ranks[keys == key]] = True
        groups.append(mask)
    return groups


def refine_by_code(W_block, w, R, partition=None):
    """Partition of W_block into the maximal sets with constant code over 0..K(R).

    Blocks come in canonical order, the one containing w first.
    """
    system = W_block.system
    if system.dimension != 1:
        raise MatchboxError("UNSUPPORTED", "code refinement needs a one-dimensional action")
    if W_block.is_empty():
        raise MatchboxError("EMPTY_INPUT", "cannot refine an empty block")
    partition = partition if partition is not None else symbol_partition(system)
    K = germ_range(w, R)
    if K <= 0:
        return Partition([W_block])
    blocks = [ClopenSet.from_runs(system, _mask_runs(m)) for m in _code_groups(W_block, K, partition)]
    return Partition.canonical(blocks, W_block, first=lambda b: b.contains(w))


# ---------------------------------------------------------------------------
# levels


CONSTANT_NAMES = ("eps", "alpha", "theta", "R_prime", "R", "delta_hat", "lambda1")


@dataclass
class LevelData:
    level: int
    V: ClopenSet
    W_blocks: Partition
    code_blocks: list
    fine_blocks: list
    constants: dict
    alphabet: Partition = None
    flags: list = field(default_factory=list)

    def fine_list(self):
        """All fine blocks with their (i, j, k) labels, in canonical order."""
        out = []
        for i, row in enumerate(self.fine_blocks):
            for j, part in enumerate(row):
                for k, blk in enumerate(part):
                    out.append(((i, j, k), blk))
        return out

    def fine_partition(self):
        return Partition([b for _, b in self.fine_list()], check=False, ambient=self.V)

    @property
    def base(self):
        """V(l;1,1,1): the fine block holding the basepoint."""
        return self.fine_blocks[0][0][0]


@dataclass
class CodingHierarchy:
    system: object
    levels: list
    strategy: str = "coding"
    basepoint: object = None

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, i):
        return self.levels[i]

    def __iter__(self):
        return iter(self.levels)

    def lambda1_profile(self):
        return [lv.constants["lambda1"] for lv in self.levels]

    def dump(self):
        return dump_hierarchy(self)


def _constants(V, previous, max_tile):
    alpha = alpha_W(V)
    theta = (2 * alpha + 1) * max_tile
    r_prime = 2 * theta + max_tile
    whole = ClopenSet.whole(V.system)
    rest = whole - V
    delta = Fraction(1) if rest.is_empty() else distance(V, rest)
    if previous is not None and len(previous.W_blocks) > 1:
        blocks = list(previous.W_blocks)
        gaps = [distance(a, b) for i, a in enumerate(blocks) for b in blocks[i + 1:]]
        delta = min([delta] + gaps)
    return {
        "eps": diameter(V),
        "alpha": alpha,
        "theta": theta,
        "R_prime": r_prime,
        "R": 2 * r_prime,
        "delta_hat": delta,
        "lambda1": min_return_length(V),
    }


def _split_cylinders(V, depth):
    """Cylinders inside V whose normal-form depth is at least ``depth``.

    Walks the lcp tree of the sample: a rank interval is a cylinder whose
    normal form has length max(boundary lcp) + 1; shallower ones are split
    at their internal lcp minima.
    """
    system = V.system
    need = max(depth, V.depth) + 1
    while True:
        idx = system.sample_index(need)
        lcp = idx.lcp
        out, stuck = [], False
        stack = list(V.runs())
        while stack and not stuck:
            a, b = stack.pop()
            d = max(lcp[a], lcp[b]) + 1
            m = idx.depth if b - a == 1 else int(lcp[a + 1:b].min())
            if d <= m and d >= depth:
                out.append(idx.word(a, d))
                continue
            if b - a == 1 or m >= idx.depth:
                stuck = True
                break
            cuts = (a + 1 + np.nonzero(lcp[a + 1:b] == m)[0]).tolist()
            bounds = [a] + cuts + [b]
            stack.extend(zip(bounds, bounds[1:]))
        if not stuck:
            return [ClopenSet(system, (w,), normalized=True) for w in sorted(out)]
        need *= 2


def _alphabet(W_blocks, previous, V):
    rest = []
    for blk in previous:
        r = blk - V
        if r:
            rest.append(r)
    return Partition(list(W_blocks) + rest)


def _initial_partition(system):
    if system.kind == "odometer":
        return Partition.canonical([ClopenSet.cylinder(system, w) for w in system.words(1)])
    return symbol_partition(system)


def default_initial(system, w=None):
    """X for odometers, the symbol cylinder of the basepoint for substitutions."""
    w = w if w is not None else system.point(0)
    if system.kind == "odometer":
        return ClopenSet.whole(system)
    return ClopenSet.cylinder(system, w.prefix(1))


def _coding_level(level, V, w, previous, prev_alphabet):
    system = V.system
    const = _constants(V, previous, system.max_tile)
    delta = const["delta_hat"]
    target = V.depth + 2
    while Fraction(1, 2 ** target) >= delta:
        target += 1
    W = _split_cylinders(V, target)
    W = list(Partition.canonical(W, V, first=lambda b: b.contains(w)))
    if any(diameter(b) >= delta for b in W):
        raise MatchboxError("LEVEL_INVARIANT", "W block not below delta_hat")
    W_part = Partition(W, ambient=V)
    alphabet = _alphabet(W_part, prev_alphabet, V)
    codes, fines = [], []
    for blk in W_part:
        cp = refine_by_code(blk, w, const["R_prime"], alphabet)
        codes.append(cp)
        fines.append([refine_by_code(c, w, const["R"], alphabet) for c in cp])
    flags = []
    if len(V.words) == 1 and level == 1 and len(W) == 1:
        flags.append("kappa1_single_block")
    return LevelData(level, V, W_part, codes, fines, const, alphabet, flags)


def next_V(level, w, max_depth=None):
    """Shortest basepoint prefix cylinder inside V(l;1,1,1) with lambda_1 > R_l."""
    system = w.system
    base = level.base
    R = level.constants["R"]
    half = level.constants["eps"] / 2
    start = max(level.V.depth + 1, 1)
    cap = max_depth if max_depth is not None else system.depth_cap

    def ok(k):
        cand = ClopenSet.cylinder(system, w.prefix(k))
        if not cand.issubset(base) or diameter(cand) > half:
            return False
        return min_return_length(cand) > R

    hi = start
    while not ok(hi):
        if hi >= cap:
            raise MatchboxError("LEVEL_STALL", f"no admissible cylinder up to depth {cap}")
        hi = min(cap, hi * 2)
    lo = start
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return ClopenSet.cylinder(system, w.prefix(lo))


def build_hierarchy(system, L, initial=None, w=None, strategy="coding"):
    """Nested levels V_1 > V_2 > ... with their code partitions."""
    if L < 1:
        raise MatchboxError("BAD_LEVELS", "need at least one level")
    if strategy == "chain":
        return chain_hierarchy(system, L, w)
    if strategy != "coding":
        raise MatchboxError("BAD_STRATEGY", f"unknown strategy {strategy!r}")
    if system.dimension != 1:
        raise MatchboxError("UNSUPPORTED", "coding hierarchies need a one-dimensional action")
    w = w if w is not None else system.point(0)
    V = initial if initial is not None else default_initial(system, w)
    if not V.contains(w):
        raise MatchboxError("BASEPOINT_OUTSIDE", "initial set must contain the basepoint")
    levels = []
    prev, alphabet = None, _initial_partition(system)
    for ell in range(1, L + 1):
        lv = _coding_level(ell, V, w, prev, alphabet)
        levels.append(lv)
        prev, alphabet = lv, lv.alphabet
        if ell < L:
            V = next_V(lv, w)
    return CodingHierarchy(system, levels, "coding", w)


# ---------------------------------------------------------------------------
# chain strategy: prefix cylinders of the basepoint split by return word


def return_word_partition(V):
    """Blocks of V on which the first-return journey (word and time) is constant."""
    system = V.system
    pw, times, ranks, idx = return_times(V)
    keys = {}
    for p, t, r in zip(pw.tolist(), times.tolist(), ranks.tolist()):
        key = (t, system.word_at(p, t)) if system.kind == "substitution" else (t,)
        keys.setdefault(key, []).append(r)
    blocks = []
    for key in sorted(keys):
        mask = np.zeros(idx.size, dtype=bool)
        mask[keys[key]] = True
        blocks.append(ClopenSet.from_runs(system, _mask_runs(mask)))
    return blocks


def _journey_key(V):
    system = V.system
    pw, times, _, _ = return_times(V)
    if system.kind == "odometer":
        return frozenset(times.tolist())
    return frozenset(system.word_at(p, t) for p, t in zip(pw.tolist(), times.tolist()))


def chain_depths(system, L, w=None):
    """Prefix depths at which the set of return words changes."""
    w = w if w is not None else system.point(0)
    if system.kind == "odometer":
        return list(range(1, L + 1))
    out = []
    k, last = 1, None
    while len(out) < L:
        V = ClopenSet.cylinder(system, w.prefix(k))
        key = _journey_key(V)
        if key != last and (not out or len(V.words[0]) > len(ClopenSet.cylinder(system, w.prefix(out[-1])).words[0])):
            out.append(k)
            last = key
        k += 1
        if k > system.depth_cap:
            raise MatchboxError("LEVEL_STALL", "return words stopped changing within the depth cap")
    return out


def chain_hierarchy(system, L, w=None):
    w = w if w is not None else system.point(0)
    levels = []
    prev, alphabet = None, _initial_partition(system)
    for ell, k in enumerate(chain_depths(system, L, w), start=1):
        V = ClopenSet.cylinder(system, w.prefix(k))
        const = _constants(V, prev, system.max_tile)
        if system.dimension == 1:
            blocks = return_word_partition(V)
        else:
            blocks = [V]
        W = Partition.canonical(blocks, V, first=lambda b: b.contains(w))
        A = _alphabet(W, alphabet, V)
        lv = LevelData(ell, V, W, [Partition([b]) for b in W], [[Partition([b])] for b in W], const, A,
                       ["chain"])
        levels.append(lv)
        prev, alphabet = lv, A
    return CodingHierarchy(system, levels, "chain", w)


# ---------------------------------------------------------------------------
# checks and dump


def check_level(level, w):
    """Exact invariants of one level; returns a list of failure strings."""
    fails = []
    V = level.V
    if not level.base.contains(w):
        fails.append("basepoint not in V(l;1,1,1)")
    union = []
    for i, W in enumerate(level.W_blocks):
        if not W.issubset(V):
            fails.append(f"W{i} not inside V")
        if diameter(W) >= level.constants["delta_hat"] and "chain" not in level.flags:
            fails.append(f"W{i} diameter not below delta_hat")
        cp = level.code_blocks[i]
        if cp.ambient != W:
            fails.append(f"code blocks of W{i} do not partition it")
        for j, c in enumerate(cp):
            if level.fine_blocks[i][j].ambient != c:
                fails.append(f"fine blocks of V({i},{j}) do not partition it")
        union.append(W)
    return fails


def check_codes(level, w, partition=None):
    """Local constancy and distinct-code separation at both radii (exact)."""
    A = partition if partition is not None else level.alphabet
    fails = []
    for radius, stage in (("R_prime", "code"), ("R", "fine")):
        K = germ_range(w, level.constants[radius])
        germs = list(range(K + 1))
        if stage == "code":
            groups = [(f"W{i}", list(p)) for i, p in enumerate(level.code_blocks)]
        else:
            groups = [(f"V{i}.{j}", list(p)) for i, row in enumerate(level.fine_blocks) for j, p in enumerate(row)]
        for name, blocks in groups:
            seen = {}
            for b in blocks:
                try:
                    cw = code(b, germs, A)
                except MatchboxError as exc:
                    fails.append(f"{stage} {name}: {exc.code}")
                    continue
                if cw in seen:
                    fails.append(f"{stage} {name}: repeated code")
                seen[cw] = b
    return fails


def _render_set(S):
    return S.render()


def dump_hierarchy(h):
    """Stable text dump: constants then blocks in canonical order, per level."""
    system = h.system
    lines = ["# matchbox hierarchy v1", f"system {system.kind} {system.dimension}", f"strategy {h.strategy}"]
    for lv in h.levels:
        lines.append(f"level {lv.level}")
        lines.append(f"  V {_render_set(lv.V)}")
        for name in CONSTANT_NAMES:
            lines.append(f"  const {name} {lv.constants[name]}")
        for flag in lv.flags:
            lines.append(f"  flag {flag}")
        for i, W in enumerate(lv.W_blocks):
            lines.append(f"  W {i} {_render_set(W)}")
        for i, part in enumerate(lv.code_blocks):
            for j, c in enumerate(part):
                lines.append(f"  code {i} {j} {_render_set(c)}")
        for (i, j, k), b in lv.fine_list():
            lines.append(f"  fine {i} {j} {k} {_render_set(b)}")
    return "\n".join(lines) + "\n"
