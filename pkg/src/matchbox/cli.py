"""``mbf`` command line: build, check and classify.

Exit codes: 0 success, 1 a check suite failed, 2 invalid input, 3 the scan
depth was too small (the smallest sufficient depth is printed).
"""
import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .checks import SUITES, run_suites
from .errors import DepthInsufficient, MatchboxError
from .holonomy import classify_at_depth
from .io import dumps_json, write_atomic
from .pipeline import EMIT_CHOICES, artifacts, run, sufficient_depth
from .systems import make_system
from .validation import check_levels, check_scan_depth, check_spec, check_strategy

log = logging.getLogger("matchbox")


def _emit_set(text):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    bad = [p for p in parts if p not in EMIT_CHOICES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s) {bad}; choose from {','.join(EMIT_CHOICES)}")
    return tuple(sorted(set(parts)))


def _suite_list(text):
    if text == "all":
        return SUITES
    parts = [p.strip() for p in text.split(",") if p.strip()]
    bad = [p for p in parts if p not in SUITES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown suite(s) {bad}; choose from all,{','.join(SUITES)}")
    return tuple(parts)


def build_parser():
    p = argparse.ArgumentParser(prog="mbf", description="Inverse-limit presentations of tiling and odometer systems.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--system", required=True,
                        help="spec JSON path or shipped name (dyadic, fibonacci, thue_morse, z2, periodic)")
        sp.add_argument("--levels", type=int, default=3, help="number of levels (default 3)")
        sp.add_argument("--strategy", default="chain", help="chain or coding (default chain)")
        sp.add_argument("--scan-depth", type=int, default=None, help="cap on sample depth")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized checks (default 0)")

    b = sub.add_parser("build", help="run the pipeline and write artifacts")
    common(b)
    b.add_argument("--emit", type=_emit_set, default=EMIT_CHOICES, help="comma list of dot,json,csv (default all)")
    b.add_argument("--out-dir", default="mbf_out", help="output directory (default mbf_out)")

    c = sub.add_parser("check", help="run property suites and print a JSON report")
    common(c)
    c.add_argument("--suite", type=_suite_list, default=SUITES, help="all or a comma list of " + ",".join(SUITES))
    c.add_argument("--nets", type=int, default=100, help="random nets for the voronoi suite (default 100)")
    c.add_argument("--corrupt", action="store_true", help="negative control: corrupt one bonding map")
    c.add_argument("--report", default=None, help="also write the JSON report to this path")

    k = sub.add_parser("classify", help="finite-depth equicontinuous or expansive evidence")
    k.add_argument("--system", required=True)
    k.add_argument("--depth", type=int, default=4)
    k.add_argument("--eps", type=Fraction, default=Fraction(1, 2))
    return p


def _config(args):
    levels = check_levels(args.levels)
    strategy = check_strategy(args.strategy)
    scan_depth = check_scan_depth(args.scan_depth)
    spec = check_spec(args.system)
    return spec, levels, strategy, scan_depth


def _depth_failure(spec, args, levels, strategy, err):
    ok, need = sufficient_depth(spec, levels, strategy, args.seed)
    if ok is not None:
        print(f"{err}; minimal sufficient scan depth: {ok}", file=sys.stderr)
        print(f"suggested --scan-depth {ok}")
    else:
        print(f"{err}; needs at least {need}, above MBF_SCAN_DEPTH_CAP", file=sys.stderr)
        print(f"suggested --scan-depth {need}")
    return 3


def cmd_build(args):
    spec, levels, strategy, scan_depth = _config(args)
    try:
        res = run(spec, levels, strategy, scan_depth=scan_depth, seed=args.seed)
    except DepthInsufficient as e:
        return _depth_failure(spec, args, levels, strategy, e)
    out = Path(args.out_dir)
    files = artifacts(res, args.emit)
    for name in sorted(files):
        write_atomic(out / name, files[name])
        log.info("wrote %s", out / name)
    print(f"wrote {len(files)} files to {out}")
    return 0


def cmd_check(args):
    spec, levels, strategy, scan_depth = _config(args)
    if args.nets < 0:
        raise MatchboxError("BAD_INPUT", "--nets must be nonnegative")
    try:
        res = run(spec, levels, strategy, scan_depth=scan_depth, seed=args.seed, threads=False)
    except DepthInsufficient as e:
        return _depth_failure(spec, args, levels, strategy, e)
    log.info("seed %d", args.seed)
    suites = run_suites(res, args.suite, nets=args.nets, seed=args.seed, corrupt_maps=args.corrupt)
    failing = [f for rep in suites.values() for f in rep["failures"]]
    report = {"system": args.system, "levels": levels, "strategy": strategy, "seed": args.seed,
              "corrupt": args.corrupt, "passed": not failing, "suites": suites}
    text = dumps_json(report)
    if args.report:
        write_atomic(args.report, text)
    sys.stdout.write(text)
    for f in failing:
        print(f"FAILED {f}", file=sys.stderr)
    return 0 if not failing else 1


def cmd_classify(args):
    spec = check_spec(args.system)
    system = make_system(spec)
    try:
        ev = classify_at_depth(system, args.depth, args.eps)
        body = {"kind": ev.kind, "depth": ev.depth, "eps": str(ev.eps), "witness": ev.witness}
    except MatchboxError as e:
        if e.code != "INCONCLUSIVE":
            raise
        body = {"kind": "inconclusive", "depth": args.depth, "eps": str(args.eps), "reason": str(e)}
    sys.stdout.write(json.dumps(body, sort_keys=True) + "\n")
    return 0


COMMANDS = {"build": cmd_build, "check": cmd_check, "classify": cmd_classify}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except DepthInsufficient as e:
        print(str(e), file=sys.stderr)
        return 3
    except MatchboxError as e:
        print(str(e), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
