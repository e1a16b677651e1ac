"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest -v -s tests/test_acceptance.py`` to see the lines, or
``python3 tests/test_acceptance.py`` for the lines alone.
"""
import filecmp
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from matchbox.checks import voronoi_suite
from matchbox.cli import main
from matchbox.clopen import ClopenSet
from matchbox.coding import build_hierarchy, check_codes, check_level
from matchbox.invlim import InverseSystem, char_poly, compose_check, h1_limit, thread_check
from matchbox.io import load_spec
from matchbox.systems import make_system
from matchbox.tower import build_tower, collapse, simplify

SYSTEMS = ("dyadic", "fibonacci", "thue_morse")
_cache = {}


def system(name):
    return make_system(load_spec(name))


def coding_hierarchy(name):
    if name not in _cache:
        _cache[name] = build_hierarchy(system(name), 3, strategy="coding")
    return _cache[name]


def fixed_point(rules, n):
    w = "a"
    while len(w) < n:
        w = "".join(rules[c] for c in w)
    return w[:n]


def dyadic_solenoid():
    t = time.perf_counter()
    inv = InverseSystem(build_hierarchy(system("dyadic"), 6, strategy="chain"))
    circles = all(s.n_vertices == 1 and len(s.edges) == 1 for s in inv.simplified())
    mats = [b.matrix.rows for b in inv.bondings()]
    rank = h1_limit(mats).rank
    lv = inv.levels
    triples = [(a, b, c) for a in lv for b in lv for c in lv if a < b < c]
    composed = all(compose_check(inv.bonding(c, a), inv.bonding(b, a), inv.bonding(c, b)) for a, b, c in triples)
    dt = time.perf_counter() - t
    ok = circles and mats == [[[2]]] * 5 and rank == 1 and composed and dt < 5
    return ok, f"circles={circles} matrices={mats} rank={rank} triples={len(triples)} compose={composed} {dt:.2f}s"


def fibonacci_towers():
    t = time.perf_counter()
    fib = system("fibonacci")
    heights = sorted(set(build_tower(ClopenSet.parse(fib, "aa")).heights()))
    # oracle: gaps between occurrences of "aa" in the fixed point
    u = fixed_point({"a": "ab", "b": "a"}, 5000)
    hits = [p for p in range(4900) if u.startswith("aa", p)]
    scan = sorted(set(np.diff(hits).tolist()))
    inv = InverseSystem(build_hierarchy(fib, 3, strategy="chain"))
    eventual = inv.bondings()[-1].matrix.rows
    sub_poly = [round(c) for c in np.poly(np.array([[1, 1], [1, 0]], dtype=float))]
    poly = char_poly(eventual)
    rank = h1_limit([b.matrix for b in inv.bondings()]).rank
    dt = time.perf_counter() - t
    ok = heights == scan == [3, 5] and poly == sub_poly == [1, -1, -1] and rank == 2 and dt < 10
    return ok, f"heights={heights} scan={scan} charpoly={poly} rank={rank} {dt:.2f}s"


def coding_soundness():
    fails, blocks = [], 0
    for name in SYSTEMS:
        h = coding_hierarchy(name)
        for lv in h:
            blocks += len(lv.fine_list())
            fails += [f"{name} l{lv.level}: {f}" for f in check_level(lv, h.basepoint) + check_codes(lv, h.basepoint)]
    return not fails, f"levels=3 systems={len(SYSTEMS)} fine_blocks={blocks} failures={fails[:3]}"


def voronoi_oracle_suite():
    t = time.perf_counter()
    rep = voronoi_suite(None, nets=100, seed=0)
    dt = time.perf_counter() - t
    ok = rep["passed"] and rep["nets"] >= 100 and dt < 30
    return ok, f"nets={rep['nets']} by_dim={rep['nets_by_dimension']} checked={rep['checked']} " \
               f"failures={len(rep['failures'])} {dt:.2f}s"


def lambda1_growth():
    out, ok = [], True
    for name in SYSTEMS:
        h = coding_hierarchy(name)
        prof = h.lambda1_profile()
        mono = all(a <= b for a, b in zip(prof, prof[1:])) and any(a < b for a, b in zip(prof, prof[1:]))
        sep = all(b.constants["lambda1"] > a.constants["R"] for a, b in zip(h, list(h)[1:]))
        ok = ok and mono and sep and len(h) >= 3
        out.append(f"{name}={[str(x) for x in prof]}")
    return ok, " ".join(out)


def inverse_limit_threads():
    t = time.perf_counter()
    out, ok = [], True
    for name in SYSTEMS:
        inv = InverseSystem(build_hierarchy(system(name), 3, strategy="chain"))
        r = thread_check(inv, 3, n_samples=100)
        ok = ok and r.passed and (r.exhaustive or r.threads > 10_000)
        out.append(f"{name}:threads={r.threads},exhaustive={r.exhaustive},passed={r.passed}")
    dt = time.perf_counter() - t
    return ok and dt < 30, " ".join(out) + f" {dt:.2f}s"


def determinism():
    with tempfile.TemporaryDirectory() as d:
        a, b = Path(d) / "a", Path(d) / "b"
        codes = [main(["build", "--system", "fibonacci", "--levels", "3", "--seed", "7", "--out-dir", str(p)])
                 for p in (a, b)]
        names = sorted(p.name for p in a.iterdir())
        _, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    ok = codes == [0, 0] and names and not mismatch and not errors
    return ok, f"files={len(names)} mismatched={mismatch + errors}"


CRITERIA = [
    ("dyadic solenoid reconstruction", dyadic_solenoid),
    ("fibonacci towers", fibonacci_towers),
    ("coding soundness", coding_soundness),
    ("voronoi oracle suite", voronoi_oracle_suite),
    ("lambda1 growth", lambda1_growth),
    ("inverse-limit threads", inverse_limit_threads),
    ("determinism", determinism),
]


def report(name, fn):
    ok, detail = fn()
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return ok


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(name, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, detail


if __name__ == "__main__":
    results = [report(n, f) for n, f in CRITERIA]
    sys.exit(0 if all(results) else 1)
