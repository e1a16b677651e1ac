"""Bonding maps between quotient graphs, transition matrices and thread checks.

Every level's tower assigns each orbit position of the basepoint a cell
(column, height).  Because V_l' sits inside V_l and the finer blocks
determine the coarser journeys, the level-l' cell of a position fixes its
level-l cell; that function on cells is the bonding map.
"""
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import MatchboxError
from .systems import first_disagreement
from .tower import build_tower, collapse, raw_to_simplified, simplify


@dataclass
class TransitionMatrix:
    """Rows are target simplified edges, columns source simplified edges."""
    rows: list

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __matmul__(self, other):
        return TransitionMatrix(_matmul(self.rows, other.rows))

    def __eq__(self, other):
        return isinstance(other, TransitionMatrix) and self.rows == other.rows

    def tolist(self):
        return [list(r) for r in self.rows]

    def char_poly(self):
        return char_poly(self.rows)


@dataclass
class BondingMap:
    source: int
    target: int
    cell_map: np.ndarray
    vertex_map: dict
    edge_paths: list = None
    matrix: TransitionMatrix = None
    cellular: bool = True


def _matmul(a, b):
    if not a or not b:
        return []
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def rank_exact(rows):
    """Rank over the rationals by Gaussian elimination on Fractions."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    rank, ncols = 0, len(m[0])
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def char_poly(rows):
    """Integer characteristic polynomial det(xI - M), highest degree first (Faddeev-LeVerrier)."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise MatchboxError("NOT_SQUARE", "characteristic polynomial needs a square matrix")
    a = [[Fraction(x) for x in r] for r in rows]
    coeffs = [Fraction(1)]
    mk = [[Fraction(0)] * n for _ in range(n)]
    ident = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    c = Fraction(1)
    for k in range(1, n + 1):
        mk = _matmul(a, [[mk[i][j] + c * ident[i][j] for j in range(n)] for i in range(n)])
        c = -sum(mk[i][i] for i in range(n)) / k
        coeffs.append(c)
    return [int(x) for x in coeffs]


def nonzero_spectrum_poly(rows):
    """Characteristic polynomial with the factors of x removed."""
    p = char_poly(rows)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


class InverseSystem:
    """Towers, quotient graphs and bonding maps for every hierarchy level."""

    def __init__(self, hierarchy, towers=None):
        self.hierarchy = hierarchy
        self.system = hierarchy.system
        self.towers = towers if towers is not None else [build_tower(lv) for lv in hierarchy]
        self.levels = [t.level for t in self.towers]
        self.raw = [collapse(t) for t in self.towers]
        self.horizon = max(t.horizon() for t in self.towers)
        self._journeys = {}
        self._maps = {}
        self._simplified = None

    def index(self, level):
        return self.levels.index(level)

    def journey(self, level):
        i = self.index(level)
        if i not in self._journeys:
            self._journeys[i] = self.towers[i].journey(self.horizon)
        return self._journeys[i]

    def cell_map(self, src, tgt):
        """Level-src cell id -> level-tgt cell id, read off the shared orbit."""
        if src < tgt:
            raise MatchboxError("LEVEL_MISMATCH", "bonding maps go from finer to coarser levels")
        key = (src, tgt)
        if key in self._maps:
            return self._maps[key]
        js, jt = self.journey(src), self.journey(tgt)
        ok = (js >= 0) & (jt >= 0)
        n = self.towers[self.index(src)].n_cells
        out = np.full(n, -1, dtype=np.int64)
        out[js[ok]] = jt[ok]
        if not (out[js[ok]] == jt[ok]).all():
            raise MatchboxError("NOT_NESTED", f"level {src} cells do not determine level {tgt} cells")
        if (out < 0).any():
            raise MatchboxError("DEPTH_INSUFFICIENT", f"some level {src} cells never occur on the orbit")
        self._maps[key] = out
        return out

    def vertex_map(self, src, tgt):
        """Raw vertex map induced by the cell map (cell start -> cell start)."""
        ts, tt = self.towers[self.index(src)], self.towers[self.index(tgt)]
        cs, ct = self.raw[self.index(src)], self.raw[self.index(tgt)]
        m = self.cell_map(src, tgt)
        out = {}
        for cid in range(ts.n_cells):
            v = cs.edges[cs.cell_edge[cid]][0]
            u = ct.edges[ct.cell_edge[int(m[cid])]][0]
            if out.setdefault(v, u) != u:
                raise MatchboxError("NOT_NESTED", f"vertex {v} has two images")
        return out

    def basepoint_vertex(self, level):
        i = self.index(level)
        cid = int(self.journey(level)[0])
        if cid < 0:
            return None
        cx = self.raw[i]
        return cx.edges[cx.cell_edge[cid]][0]

    def simplified(self):
        """Simplified graphs, finest first, protecting images of kept vertices."""
        if self._simplified is None:
            out = [None] * len(self.levels)
            protected = set()
            for i in range(len(self.levels) - 1, -1, -1):
                lv = self.levels[i]
                pref = [v for v in [self.basepoint_vertex(lv)] if v is not None]
                out[i] = simplify(self.raw[i], protected, pref)
                if i > 0:
                    vm = self.vertex_map(lv, self.levels[i - 1])
                    protected = {vm[v] for v in out[i].vertex_raw}
            self._simplified = out
        return self._simplified

    def bonding(self, src, tgt):
        if src == tgt:
            i = self.index(src)
            n = self.towers[i].n_cells
            s = self.simplified()[i]
            eye = [[int(a == b) for b in range(len(s.edges))] for a in range(len(s.edges))]
            return BondingMap(src, tgt, np.arange(n), {v: v for v in range(self.raw[i].n_vertices)},
                              [[e] for e in range(len(s.edges))], TransitionMatrix(eye), True)
        m = self.cell_map(src, tgt)
        vm = self.vertex_map(src, tgt)
        ss, st = self.simplified()[self.index(src)], self.simplified()[self.index(tgt)]
        cs, ct = self.raw[self.index(src)], self.raw[self.index(tgt)]
        where = raw_to_simplified(st)
        cellular = True
        for cid in range(len(m)):
            a, b = cs.edges[cs.cell_edge[cid]][:2]
            e = ct.edges[ct.cell_edge[int(m[cid])]]
            if vm[a] != e[0] or (b in vm and vm[b] != e[1]):
                cellular = False
        rows = [[0] * len(ss.edges) for _ in range(len(st.edges))]
        paths = []
        for j, path in enumerate(ss.edge_paths):
            image = [ct.cell_edge[int(m[cs_cell])] for cs_cell in _cells_of_path(cs, path)]
            seq, k = [], 0
            while k < len(image):
                edge, pos = where[image[k]]
                length = len(st.edge_paths[edge])
                chunk = image[k:k + length]
                if pos != 0 or chunk != st.edge_paths[edge]:
                    cellular = False
                    break
                seq.append(edge)
                rows[edge][j] += 1
                k += length
            paths.append(seq)
        return BondingMap(src, tgt, m, vm, paths, TransitionMatrix(rows), cellular)

    def bondings(self):
        """Consecutive bonding maps, coarse to fine."""
        return [self.bonding(self.levels[i + 1], self.levels[i]) for i in range(len(self.levels) - 1)]


def _cells_of_path(cx, path):
    """Raw edge ids equal cell ids (edges are emitted in cell order)."""
    return path


def bonding(inv, src, tgt):
    return inv.bonding(src, tgt)


def compose_check(q31, q21, q32):
    """q31 = q21 o q32 cell by cell."""
    if q31.source != q32.source or q31.target != q21.target or q32.target != q21.source:
        raise MatchboxError("LEVEL_MISMATCH", "bonding maps do not form a triangle")
    return bool(np.array_equal(q31.cell_map, q21.cell_map[q32.cell_map]))


def matrix_functoriality(q31, q21, q32):
    return q31.matrix == q21.matrix @ q32.matrix


def corrupt(bonding_map, seed=0):
    """Copy of a bonding map with one cell sent elsewhere (negative control)."""
    rng = random.Random(seed)
    m = bonding_map.cell_map.copy()
    i = rng.randrange(len(m))
    m[i] = (m[i] + 1) % (int(m.max()) + 1)
    return BondingMap(bonding_map.source, bonding_map.target, m, bonding_map.vertex_map,
                      bonding_map.edge_paths, bonding_map.matrix, bonding_map.cellular)


@dataclass
class H1Limit:
    rank: int
    tail_ranks: list
    eventual: TransitionMatrix = None
    flags: list = field(default_factory=list)


def h1_limit(matrices):
    """Rational rank of the direct limit of transposed transition matrices.

    ``matrices`` run coarse to fine: M_{2,1}, M_{3,2}, ...
    """
    mats = [m.rows if isinstance(m, TransitionMatrix) else m for m in matrices]
    if len(mats) < 2:
        raise MatchboxError("INSUFFICIENT_DATA", "need at least two transition matrices")
    n = len(mats)
    tail = []
    for k in range(n):
        prod = mats[k]
        for m in mats[k + 1:]:
            prod = _matmul(prod, m)
        tail.append(rank_exact(prod))
    start = max(0, n - 2)
    rank = tail[start]
    flags = []
    if len(set(tail[: start + 1])) > 1:
        flags.append("DIMENSION_DRIFT")
    shape = (len(mats[-1]), len(mats[-1][0]))
    square = shape[0] == shape[1] and shape == (len(mats[-2]), len(mats[-2][0]))
    eventual = TransitionMatrix(mats[-1]) if square else None
    if eventual is None:
        flags.append("DIMENSION_DRIFT")
    return H1Limit(rank, tail, eventual, sorted(set(flags)))


# ---------------------------------------------------------------------------
# finite-depth thread checks


def _class_diameters(inv, level):
    """Largest transversal diameter over edge and vertex classes at one level."""
    system = inv.system
    i = inv.index(level)
    cells = inv.journey(level)
    idx = system.sample_index(0)
    if system.kind == "odometer":
        n = len(idx.positions)
        rank_of = np.empty(n, dtype=np.int64)
        rank_of[np.asarray(idx.positions)] = np.arange(n)
        q = np.nonzero(cells >= 0)[0]
        ranks = rank_of[q % n]
    else:
        rank_of = np.full(idx.size, -1, dtype=np.int64)
        rank_of[np.asarray(idx.positions)] = np.arange(idx.size)
        q = np.nonzero(cells[: idx.size] >= 0)[0]
        ranks = rank_of[q]
    c = cells[q]
    ncell = inv.towers[i].n_cells
    lo = np.full(ncell, np.iinfo(np.int64).max)
    hi = np.full(ncell, -1)
    np.minimum.at(lo, c, ranks)
    np.maximum.at(hi, c, ranks)
    cx = inv.raw[i]
    vlo, vhi = {}, {}
    for cid in range(ncell):
        v = cx.edges[cx.cell_edge[cid]][0]
        vlo[v] = min(vlo.get(v, lo[cid]), lo[cid])
        vhi[v] = max(vhi.get(v, hi[cid]), hi[cid])
    pairs = list(zip(lo.tolist(), hi.tolist())) + [(vlo[v], vhi[v]) for v in sorted(vlo)]
    worst = 0
    for a, b in set(pairs):
        if b < 0:
            continue
        if a == b:
            continue
        k = first_disagreement(idx.word(a, idx.depth), idx.word(b, idx.depth))
        d = Fraction(1, 2 ** k)
        worst = max(worst, d)
    return Fraction(worst)


def format_dyadic(x):
    """``2^-k`` for reciprocal powers of two, else the plain fraction."""
    x = Fraction(x)
    if x > 0 and x.numerator == 1 and x.denominator & (x.denominator - 1) == 0:
        k = x.denominator.bit_length() - 1
        return "1" if k == 0 else f"2^-{k}"
    return str(x)


@dataclass
class ThreadReport:
    depth: int
    injectivity: bool
    surjectivity: bool
    diameters: bool
    threads: int
    exhaustive: bool
    max_diameters: list
    delta_hat: list
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.injectivity and self.surjectivity and self.diameters

    def to_json(self):
        return {
            "depth": self.depth,
            "injectivity": self.injectivity,
            "surjectivity": self.surjectivity,
            "diameters": self.diameters,
            "threads": self.threads,
            "exhaustive": self.exhaustive,
            "max_diameters": [format_dyadic(x) for x in self.max_diameters],
            "delta_hat": [format_dyadic(x) for x in self.delta_hat],
            "passed": self.passed,
        }


def thread_check(inv, depth=None, n_samples=100, seed=0, limit=10_000):
    """Injectivity, surjectivity and class-diameter proxies through ``depth`` levels."""
    levels = inv.levels[: depth or len(inv.levels)]
    L = levels[-1]
    rng = random.Random(seed)
    jL = inv.journey(L)
    maps = {lv: inv.cell_map(L, lv) for lv in levels}
    cxL = inv.raw[inv.index(L)]
    valid = np.nonzero(jL >= 0)[0]
    # (a) distinct level-L cells stay distinct and every level agrees with the orbit
    inj = True
    tries = 0
    done = 0
    while done < n_samples and tries < 20 * n_samples:
        tries += 1
        q1, q2 = (int(valid[rng.randrange(len(valid))]) for _ in range(2))
        c1, c2 = int(jL[q1]), int(jL[q2])
        if c1 == c2:
            continue
        done += 1
        if cxL.cell_edge[c1] == cxL.cell_edge[c2]:
            inj = False
        for lv in levels:
            j = inv.journey(lv)
            if maps[lv][c1] != j[q1] or maps[lv][c2] != j[q2]:
                inj = False
    # (b) every compatible thread is realized by an orbit point
    n_threads = inv.towers[inv.index(L)].n_cells
    exhaustive = n_threads <= limit
    wanted = range(n_threads) if exhaustive else rng.sample(range(n_threads), limit)
    first = np.full(n_threads, -1, dtype=np.int64)
    order = valid[::-1]
    first[jL[order]] = order
    surj = True
    for c in wanted:
        q = int(first[c])
        if q < 0:
            surj = False
            continue
        for lv in levels:
            if inv.journey(lv)[q] != maps[lv][c]:
                surj = False
    # (c) class diameters shrink and stay below delta_hat
    diams = [_class_diameters(inv, lv) for lv in levels]
    deltas = [inv.hierarchy[inv.index(lv)].constants["delta_hat"] for lv in levels]
    ok_diam = all(d <= e for d, e in zip(diams, deltas)) and all(b <= a for a, b in zip(diams, diams[1:]))
    return ThreadReport(len(levels), inj, surj, ok_diam, n_threads, exhaustive, diams, deltas,
                        {"pairs": done})


# ---------------------------------------------------------------------------
# emitted summaries


def matrices_csv(inv):
    lines = ["source_level,target_level,row,col,value"]
    for b in inv.bondings():
        for r, row in enumerate(b.matrix.rows):
            for c, v in enumerate(row):
                lines.append(f"{b.source},{b.target},{r},{c},{v}")
    return "\n".join(lines) + "\n"


def parse_matrices_csv(text):
    out = {}
    rows = text.strip().splitlines()
    if not rows or rows[0] != "source_level,target_level,row,col,value":
        raise MatchboxError("BAD_FORMAT", "unexpected matrices header")
    for line in rows[1:]:
        s, t, r, c, v = (int(x) for x in line.split(","))
        m = out.setdefault((s, t), {})
        m[(r, c)] = v
    result = {}
    for key, cells in out.items():
        nr = max(r for r, _ in cells) + 1
        nc = max(c for _, c in cells) + 1
        result[key] = [[cells.get((r, c), 0) for c in range(nc)] for r in range(nr)]
    return result


def summary(inv, report=None, h1=None):
    simp = inv.simplified()
    bonds = inv.bondings()
    out = {
        "system": inv.system.kind,
        "strategy": inv.hierarchy.strategy,
        "levels": [{
            "level": lv,
            "cells": inv.towers[i].n_cells,
            "columns": len(inv.towers[i].columns),
            "heights": sorted(set(inv.towers[i].heights())),
            "raw": {"vertices": inv.raw[i].n_vertices, "edges": len(inv.raw[i].edges)},
            "simplified": {"vertices": simp[i].n_vertices, "edges": len(simp[i].edges),
                           "lengths": [str(x) for x in simp[i].lengths()]},
        } for i, lv in enumerate(inv.levels)],
        "matrices": [{"source": b.source, "target": b.target, "rows": b.matrix.tolist(),
                      "cellular": b.cellular} for b in bonds],
    }
    if h1 is not None:
        out["h1_limit"] = {"rank": h1.rank, "tail_ranks": h1.tail_ranks, "flags": h1.flags,
                           "eventual": h1.eventual.tolist() if h1.eventual else None}
    if report is not None:
        out["threads"] = report.to_json()
    return out
