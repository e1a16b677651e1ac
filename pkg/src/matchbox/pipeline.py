"""End-to-end run: spec -> hierarchy -> towers -> inverse system -> artifacts."""
import logging
from dataclasses import dataclass, field

from .coding import build_hierarchy, dump_hierarchy
from .errors import DepthInsufficient, MatchboxError
from .invlim import InverseSystem, TransitionMatrix, h1_limit, matrices_csv, summary, thread_check
from .io import dumps_json, load_spec, parse_clopen
from .systems import _relative, depth_cap_from_env, make_system, validate_system
from .tower import square_complex

log = logging.getLogger("matchbox")

EMIT_CHOICES = ("dot", "json", "csv")


def min_scan_depth(levels):
    """Smallest scan depth worth attempting for a given number of levels."""
    return levels + 2


@dataclass
class PipelineResult:
    spec: object
    system: object
    hierarchy: object
    seed: int
    inverse: object = None
    report: object = None
    h1: object = None
    squares: list = field(default_factory=list)
    square_matrices: list = field(default_factory=list)

    @property
    def levels(self):
        return [lv.level for lv in self.hierarchy]


def run(spec, levels, strategy="chain", scan_depth=None, seed=0, n_samples=100, threads=True, initial=None):
    """Validate ``spec`` (anything ``load_spec`` takes) and build every stage for ``levels`` levels."""
    spec = load_spec(spec)
    validate_system(spec)
    if levels < 1:
        raise MatchboxError("BAD_LEVELS", "need at least one level")
    cap = depth_cap_from_env()
    if scan_depth is not None:
        if scan_depth < min_scan_depth(levels):
            log.warning("scan depth %d raised to %d", scan_depth, min_scan_depth(levels))
            scan_depth = min_scan_depth(levels)
        cap = min(cap, scan_depth)
    system = make_system(spec, depth_cap=cap)
    if isinstance(initial, str):
        initial = parse_clopen(system, initial)
    hierarchy = build_hierarchy(system, levels, initial=initial, strategy=strategy)
    res = PipelineResult(spec, system, hierarchy, seed)
    if system.dimension == 2:
        res.squares = [square_complex(system, len(lv.V.words[0])) for lv in hierarchy]
        ks = [len(lv.V.words[0]) for lv in hierarchy]
        res.square_matrices = [TransitionMatrix([list(r) for r in _relative(system.basis(a), system.basis(b))])
                               for a, b in zip(ks, ks[1:])]
        if len(res.square_matrices) >= 2:
            res.h1 = h1_limit(res.square_matrices)
        return res
    inv = InverseSystem(hierarchy)
    res.inverse = inv
    bonds = inv.bondings()
    if len(bonds) >= 2:
        res.h1 = h1_limit([b.matrix for b in bonds])
    if threads:
        res.report = thread_check(inv, n_samples=n_samples, seed=seed)
    return res


def sufficient_depth(spec, levels, strategy="chain", seed=0):
    """Smallest scan depth at which the pipeline completes, found by replay.

    Each attempt records the deepest sample it asked for; rerunning with that
    cap either succeeds or reports a deeper need.
    """
    cap = depth_cap_from_env()
    try:
        res = run(spec, levels, strategy, seed=seed)
    except DepthInsufficient as e:
        return None, e.needed
    want = max(res.system.max_requested, min_scan_depth(levels))
    while want <= cap:
        try:
            run(spec, levels, strategy, scan_depth=want, seed=seed, threads=True)
            return want, None
        except DepthInsufficient as e:
            want = max(want + 1, e.needed)
    return None, want


# ---------------------------------------------------------------------------
# artifacts


def artifacts(res, emit=EMIT_CHOICES):
    """File name -> text for every requested format (hierarchy always)."""
    out = {"hierarchy.txt": dump_hierarchy(res.hierarchy)}
    emit = set(emit)
    if res.system.dimension == 2:
        if "json" in emit:
            out["squares.json"] = dumps_json([{"level": lv, **sq.to_json()}
                                              for lv, sq in zip(res.levels, res.squares)])
            out["summary.json"] = dumps_json(_square_summary(res))
        if "csv" in emit:
            out["matrices.csv"] = _square_csv(res)
        return out
    inv = res.inverse
    simp = inv.simplified()
    if "json" in emit:
        out["towers.json"] = dumps_json([t.to_json() for t in inv.towers])
        out["complexes.json"] = dumps_json([{"level": lv, "raw": inv.raw[i].to_json(), "simplified": simp[i].to_json()}
                                            for i, lv in enumerate(inv.levels)])
        body = summary(inv, res.report, res.h1)
        body["seed"] = res.seed
        out["summary.json"] = dumps_json(body)
    if "dot" in emit:
        for i, lv in enumerate(inv.levels):
            out[f"M{lv}.dot"] = inv.raw[i].to_dot(f"M{lv}")
            out[f"M{lv}_simplified.dot"] = simp[i].to_dot(f"M{lv}s")
    if "csv" in emit:
        out["matrices.csv"] = matrices_csv(inv)
    return out


def _square_csv(res):
    lines = ["source_level,target_level,row,col,value"]
    for k, m in enumerate(res.square_matrices):
        src, tgt = res.levels[k + 1], res.levels[k]
        for r, row in enumerate(m.rows):
            for c, v in enumerate(row):
                lines.append(f"{src},{tgt},{r},{c},{v}")
    return "\n".join(lines) + "\n"


def _square_summary(res):
    out = {
        "system": res.system.kind,
        "dimension": 2,
        "strategy": res.hierarchy.strategy,
        "seed": res.seed,
        "levels": [{"level": lv, "index": sq.index, "vertices": len(sq.vertices), "edges": len(sq.edges),
                    "faces": len(sq.faces), "euler": sq.euler()} for lv, sq in zip(res.levels, res.squares)],
        "matrices": [{"source": res.levels[k + 1], "target": res.levels[k], "rows": m.tolist()}
                     for k, m in enumerate(res.square_matrices)],
    }
    if res.h1 is not None:
        out["h1_limit"] = {"rank": res.h1.rank, "tail_ranks": res.h1.tail_ranks, "flags": res.h1.flags,
                           "eventual": res.h1.eventual.tolist() if res.h1.eventual else None}
    return out
