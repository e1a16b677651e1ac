"""Reeb columns over base blocks, fiber gluing and the quotient graphs M_l.

A tower over a clopen set V with a block partition has one column per
block: the first-return journey of the block back to V, cut into unit
tile cells.  Collapsing every transversal fiber to a point turns each
column into a chain of edges; the top of a column is glued to the bottom
of every column that can follow it.
"""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .clopen import ClopenSet, Partition, position_labels
from .errors import MatchboxError
from .holonomy import return_times


@dataclass
class ReebColumn:
    index: int
    base: ClopenSet
    label: tuple
    profile: tuple  # (cell index, symbol index, tile length) per cell
    successors: tuple = ()
    predecessors: tuple = ()

    @property
    def height(self):
        return len(self.profile)

    @property
    def length(self):
        return sum((c[2] for c in self.profile), Fraction(0))

    def symbols(self):
        return tuple(c[1] for c in self.profile)


@dataclass
class TowerLevel:
    level: int
    V: ClopenSet
    columns: list
    depth: int
    offsets: list = field(default_factory=list)

    def __post_init__(self):
        self.offsets = []
        total = 0
        for c in self.columns:
            self.offsets.append(total)
            total += c.height
        self.n_cells = total

    @property
    def system(self):
        return self.V.system

    def heights(self):
        return [c.height for c in self.columns]

    def cell_id(self, column, t):
        return self.offsets[column] + t

    def cell_of(self, cid):
        """(column, height) of a cell id."""
        c = int(np.searchsorted(self.offsets, cid, side="right")) - 1
        return c, cid - self.offsets[c]

    def partition(self):
        return Partition([c.base for c in self.columns], ambient=self.V, check=False)

    def journey(self, horizon):
        """Cell id of every orbit position 0..horizon-1 (-1 before the first visit)."""
        labels = position_labels(self.system, self.partition(), horizon)
        visit = labels >= 0
        q = np.arange(horizon)
        last = np.maximum.accumulate(np.where(visit, q, -1))
        out = np.full(horizon, -1, dtype=np.int64)
        ok = last >= 0
        offs = np.asarray(self.offsets, dtype=np.int64)
        heights = np.asarray(self.heights(), dtype=np.int64)
        col = labels[last[ok]]
        t = q[ok] - last[ok]
        if (t >= heights[col]).any():
            raise MatchboxError("NONCONSTANT_HEIGHT", "a journey overruns its column")
        out[ok] = offs[col] + t
        return out

    def horizon(self):
        """Orbit length over which every column occurs with a complete return."""
        system = self.system
        hmax = max(self.heights())
        idx = system.sample_index(self.depth)
        if system.kind == "odometer":
            return system.index(max(c.base.depth for c in self.columns)) + 2 * hmax + 1
        return idx.size + hmax + 1

    def adjacency(self):
        return {c.index: list(c.successors) for c in self.columns}

    def to_json(self):
        system = self.system
        return {
            "level": self.level,
            "V": self.V.render(),
            "columns": [{
                "index": c.index,
                "label": list(c.label),
                "base": c.base.render(),
                "height": c.height,
                "length": str(c.length),
                "symbols": [system.symbol_name(s) for s in c.symbols()],
                "successors": list(c.successors),
            } for c in self.columns],
        }


def build_tower(level, blocks=None, number=None):
    """Columns over the blocks of V (LevelData fine blocks, or V plus blocks).

    Heights, symbol profiles and successor sets are read off every sample
    occurrence of each block; the sample depth covers block depth plus the
    longest return, so the result is exact.
    """
    from .coding import LevelData, return_word_partition
    if isinstance(level, LevelData):
        V = level.V
        labelled = level.fine_list()
        number = level.level if number is None else number
    else:
        V = level
        bl = blocks if blocks is not None else return_word_partition(V)
        labelled = [((i,), b) for i, b in enumerate(bl)]
        number = 0 if number is None else number
    system = V.system
    if system.dimension != 1:
        raise MatchboxError("UNSUPPORTED", "towers are built for one-dimensional actions")
    part = Partition([b for _, b in labelled], ambient=V)
    _, times, _, _ = return_times(V)
    hmax = int(times.max())
    dmax = max(b.depth for _, b in labelled)
    if system.kind == "odometer":
        depth = dmax
        idx = system.sample_index(depth)
        horizon = system.index(dmax) + 2 * hmax + 1
    else:
        depth = 2 * dmax + hmax
        idx = system.sample_index(depth)
        horizon = idx.size + hmax + 1
    labels = position_labels(system, part, horizon + hmax + 1)
    syms = system.symbol_codes(horizon + hmax + 1)
    visits = np.nonzero(labels >= 0)[0]
    starts, ends = visits[:-1], visits[1:]
    keep = starts < horizon
    starts, ends = starts[keep], ends[keep]
    cols = []
    for c in range(len(labelled)):
        sel = labels[starts] == c
        s, e = starts[sel], ends[sel]
        if len(s) == 0:
            raise MatchboxError("DEPTH_INSUFFICIENT", f"block {c} has no complete return in the sample")
        hs = np.unique(e - s)
        if len(hs) != 1:
            raise MatchboxError("NONCONSTANT_HEIGHT", f"block {c} returns after {hs.tolist()} steps")
        h = int(hs[0])
        rows = syms[s[:, None] + np.arange(h)[None, :]]
        if not (rows == rows[0]).all():
            raise MatchboxError("NONCONSTANT_HEIGHT", f"block {c} has varying tile profiles")
        prof = tuple((t, int(rows[0][t]), system.tile_length(int(rows[0][t]))) for t in range(h))
        succ = tuple(sorted(set(labels[e].tolist())))
        cols.append(ReebColumn(c, labelled[c][1], labelled[c][0], prof, succ))
    preds = {c: [] for c in range(len(cols))}
    for col in cols:
        for d in col.successors:
            preds[d].append(col.index)
    for col in cols:
        col.predecessors = tuple(preds[col.index])
    return TowerLevel(number, V, cols, depth)


def covering_check(tower, horizon=None):
    """Column windows along the basepoint orbit tile the leaf window exactly."""
    system = tower.system
    horizon = horizon or tower.horizon()
    cells = tower.journey(horizon)
    first = int(np.argmax(cells >= 0))
    if cells[first] < 0:
        return False
    if (cells[first:] < 0).any():
        return False
    # consecutive cells advance by one tile, restarting at column bottoms
    prev = cells[first:-1]
    nxt = cells[first + 1:]
    ends = set(tower.offsets[c.index] + c.height - 1 for c in tower.columns)
    starts = set(tower.offsets)
    ok_step = (nxt == prev + 1) | (np.isin(prev, list(ends)) & np.isin(nxt, list(starts)))
    if not ok_step.all():
        return False
    total = sum(system.tile_at(q) for q in range(first, min(horizon, first + 200)))
    return total == system.coord(min(horizon, first + 200)) - system.coord(first)


# ---------------------------------------------------------------------------
# equivalence closure


class EquivalenceStore:
    """Union-find with deterministic representatives (smallest member)."""

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def classes(self):
        out = {}
        for x in range(len(self.parent)):
            out.setdefault(self.find(x), []).append(x)
        return sorted(out.values())

    def __len__(self):
        return len(self.parent)


def equivalence_closure(n, generators):
    store = EquivalenceStore(n)
    for a, b in generators:
        store.union(a, b)
    return store


def _slot_ids(tower):
    """Vertex slots (c, t), 0 <= t <= h_c, numbered column by column."""
    ids = {}
    for col in tower.columns:
        for t in range(col.height + 1):
            ids[(col.index, t)] = len(ids)
    return ids


def gluing_generators(tower):
    """Slot pairs identified by the fibration: column tops with successor bottoms."""
    ids = _slot_ids(tower)
    gens = []
    for col in tower.columns:
        for d in col.successors:
            gens.append((ids[(col.index, col.height)], ids[(d, 0)]))
    return ids, gens


# ---------------------------------------------------------------------------
# branched complexes


@dataclass
class BranchedComplex:
    """Directed multigraph with tile lengths; ``cell_edge`` maps tower cells to edges.

    For a simplified complex ``edge_paths`` lists the raw edges each edge
    runs through and ``raw`` keeps the unsimplified graph.
    """
    n_vertices: int
    edges: list  # (src, dst, label, length)
    cell_edge: list = None
    slot_vertex: dict = None
    edge_paths: list = None
    raw: object = None
    vertex_raw: list = None

    def euler(self):
        return self.n_vertices - len(self.edges)

    def degrees(self):
        ins = [0] * self.n_vertices
        outs = [0] * self.n_vertices
        for s, d, _, _ in self.edges:
            outs[s] += 1
            ins[d] += 1
        return ins, outs

    def is_connected(self):
        adj = {v: set() for v in range(self.n_vertices)}
        for s, d, _, _ in self.edges:
            adj[s].add(d)
            adj[d].add(s)
        seen, stack = {0}, [0]
        while stack:
            v = stack.pop()
            for u in adj[v] - seen:
                seen.add(u)
                stack.append(u)
        return len(seen) == self.n_vertices

    def strongly_connected(self):
        """Every edge lies on a closed directed walk (equivalent here)."""
        fwd = {v: set() for v in range(self.n_vertices)}
        rev = {v: set() for v in range(self.n_vertices)}
        for s, d, _, _ in self.edges:
            fwd[s].add(d)
            rev[d].add(s)

        def reach(adj):
            seen, stack = {0}, [0]
            while stack:
                v = stack.pop()
                for u in adj[v] - seen:
                    seen.add(u)
                    stack.append(u)
            return len(seen)
        return reach(fwd) == self.n_vertices and reach(rev) == self.n_vertices

    def lengths(self):
        return [e[3] for e in self.edges]

    def to_dot(self, name="M"):
        lines = [f"digraph {name} {{"]
        for v in range(self.n_vertices):
            lines.append(f"  v{v};")
        for i, (s, d, lab, ln) in enumerate(self.edges):
            lines.append(f'  v{s} -> v{d} [label="{lab}:{ln}", id="e{i}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self):
        return {
            "vertices": self.n_vertices,
            "edges": [{"src": s, "dst": d, "label": lab, "length": str(ln)} for s, d, lab, ln in self.edges],
        }


def collapse(tower, store=None):
    """Quotient graph of a tower: one edge per cell, glued fibers as vertices."""
    ids, gens = gluing_generators(tower)
    store = store if store is not None else equivalence_closure(len(ids), gens)
    if len(store) != len(ids):
        raise MatchboxError("GLUE_MISMATCH", "equivalence store does not match the tower")
    order = {}
    slot_vertex = {}
    for key, sid in ids.items():
        root = store.find(sid)
        if root not in order:
            order[root] = len(order)
        slot_vertex[key] = order[root]
    system = tower.system
    edges, cell_edge = [], []
    for col in tower.columns:
        for t, sym, ln in col.profile:
            src, dst = slot_vertex[(col.index, t)], slot_vertex[(col.index, t + 1)]
            cell_edge.append(len(edges))
            edges.append((src, dst, system.symbol_name(sym), ln))
    cx = BranchedComplex(len(order), edges, cell_edge, slot_vertex)
    if len(cell_edge) != tower.n_cells:
        raise MatchboxError("GLUE_MISMATCH", "a cell was not assigned exactly one edge")
    if not cx.is_connected():
        raise MatchboxError("GLUE_MISMATCH", "quotient is not connected")
    return cx


def simplify(cx, protected=(), prefer=()):
    """Collapse valence-2 vertices (one edge in, one out, not a loop).

    ``protected`` vertices are always kept.  On a cycle made only of
    collapsible vertices, the first vertex of ``prefer`` on it, else the
    smallest id, is kept.
    """
    ins, outs = cx.degrees()
    out_edge, in_edge = {}, {}
    for i, (s, d, _, _) in enumerate(cx.edges):
        out_edge.setdefault(s, []).append(i)
        in_edge.setdefault(d, []).append(i)
    protected = set(protected)

    def collapsible(v):
        if v in protected or ins[v] != 1 or outs[v] != 1:
            return False
        return out_edge[v][0] != in_edge[v][0]

    keep = {v for v in range(cx.n_vertices) if not collapsible(v)}
    covered = set()
    for v in keep:
        for e in out_edge.get(v, []):
            covered.add(e)
    # walk chains from kept vertices
    paths = []

    def walk(e):
        path = [e]
        d = cx.edges[e][1]
        while d not in keep:
            e = out_edge[d][0]
            path.append(e)
            d = cx.edges[e][1]
        return path

    for v in sorted(keep):
        for e in out_edge.get(v, []):
            paths.append(walk(e))
    used = {e for p in paths for e in p}
    pref = list(prefer)
    while len(used) < len(cx.edges):
        free = sorted({cx.edges[e][0] for e in range(len(cx.edges)) if e not in used})
        cyc = [v for v in pref if v in free]
        v = cyc[0] if cyc else free[0]
        # restrict the preference to this cycle
        cycle, e = [], out_edge[v][0]
        while True:
            cycle.append(cx.edges[e][0])
            d = cx.edges[e][1]
            if d == v:
                break
            e = out_edge[d][0]
        on = [u for u in pref if u in cycle]
        v = on[0] if on else min(cycle)
        keep.add(v)
        p = walk(out_edge[v][0])
        paths.append(p)
        used.update(p)
    kept = sorted(keep)
    new_id = {v: i for i, v in enumerate(kept)}
    edges, edge_paths = [], []
    for p in sorted(paths, key=lambda p: (new_id[cx.edges[p[0]][0]], p[0])):
        src = new_id[cx.edges[p[0]][0]]
        dst = new_id[cx.edges[p[-1]][1]]
        label = "".join(cx.edges[e][2] for e in p) if len(p) <= 12 else f"{cx.edges[p[0]][2]}..{len(p)}"
        edges.append((src, dst, label, sum((cx.edges[e][3] for e in p), Fraction(0))))
        edge_paths.append(list(p))
    return BranchedComplex(len(kept), edges, None, None, edge_paths, cx, kept)


def raw_to_simplified(scx):
    """Map raw edge -> (simplified edge, position along its path)."""
    out = {}
    for i, p in enumerate(scx.edge_paths):
        for k, e in enumerate(p):
            out[e] = (i, k)
    return out


# ---------------------------------------------------------------------------
# Z^2 odometer levels: square tori


@dataclass
class SquareComplex:
    """Torus Z^2 / H_k subdivided into unit squares."""
    vertices: list  # coset words
    edges: list  # (v, v + e_i) as (vertex, direction)
    faces: list  # lower-left vertex
    index: int

    def euler(self):
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def to_json(self):
        return {
            "vertices": len(self.vertices),
            "edges": [{"from": v, "dir": d} for v, d in self.edges],
            "faces": self.faces,
            "index": self.index,
        }


def square_complex(system, k):
    """Square-complex quotient of the Z^2 odometer at chain level k."""
    if system.dimension != 2:
        raise MatchboxError("UNSUPPORTED", "square complexes need a Z^2 odometer")
    n = system.index(k)
    idx = system.sample_index(k)
    words = sorted(set(system.word_at(p, k) for p in idx.positions))
    vid = {w: i for i, w in enumerate(words)}
    reps = {vid[w]: system.representative(w) for w in words}
    if len(words) != n:
        raise MatchboxError("GLUE_MISMATCH", "coset count does not match the index")
    edges, faces = [], []
    for v in range(n):
        x, y = reps[v]
        for d in (0, 1):
            edges.append((v, d))
        faces.append(v)
        for dx, dy in ((1, 0), (0, 1)):
            vid[system.word_at((x + dx, y + dy), k)]
    return SquareComplex(words, edges, faces, n)
