"""System spec files, artifact parsers and atomic writes.

Every emitted format has a parser here so that parse(emit(x)) is a fixpoint:
hierarchy dumps, tower and summary JSON, DOT graphs and matrix CSV.
"""
import json
import os
import re
import tempfile
from importlib import resources
from pathlib import Path

from .clopen import ClopenSet
from .errors import MatchboxError
from .invlim import parse_matrices_csv
from .systems import OdometerSpec, SubstitutionRule, _System

SHIPPED = ("dyadic", "fibonacci", "thue_morse", "z2", "periodic")


# ---------------------------------------------------------------------------
# system specs


def spec_from_dict(data):
    """Rule or odometer spec from the JSON schema documented in the README."""
    if not isinstance(data, dict):
        raise MatchboxError("BAD_SPEC", "spec must be a JSON object")
    kind = data.get("kind")
    if kind == "substitution":
        rules = data.get("rules")
        if not isinstance(rules, dict) or not rules:
            raise MatchboxError("BAD_SPEC", "substitution needs a nonempty 'rules' object")
        rules = {k: "".join(v) if isinstance(v, list) else v for k, v in rules.items()}
        alphabet = data.get("alphabet")
        if alphabet is not None and set(alphabet) != set(rules):
            raise MatchboxError("BAD_SPEC", "alphabet and rule keys differ")
        return SubstitutionRule.from_dict(rules, alphabet, data.get("lengths"))
    if kind == "odometer":
        chain = data.get("chain")
        if not isinstance(chain, list) or not chain:
            raise MatchboxError("BAD_SPEC", "odometer needs a nonempty 'chain' list")
        return OdometerSpec(int(data.get("dimension", 1)), tuple(_tupled(m) for m in chain))
    raise MatchboxError("BAD_SPEC", f"unknown kind {kind!r}")


def _tupled(m):
    if isinstance(m, list):
        return tuple(_tupled(x) for x in m)
    return m


def spec_to_dict(spec):
    if isinstance(spec, SubstitutionRule):
        syms = spec.alphabet.symbols
        return {
            "kind": "substitution",
            "alphabet": list(syms),
            "rules": {s: "".join(spec.images[i]) for i, s in enumerate(syms)},
            "lengths": {s: str(spec.tile_lengths[i]) for i, s in enumerate(syms)},
        }
    if isinstance(spec, OdometerSpec):
        chain = [m[0][0] if spec.dimension == 1 else [list(r) for r in m] for m in spec.subgroup_chain]
        return {"kind": "odometer", "dimension": spec.dimension, "chain": chain}
    raise MatchboxError("BAD_SPEC", f"cannot serialize {type(spec).__name__}")


def shipped_path(name):
    return resources.files("matchbox") / "data" / f"{name}.json"


def load_spec(source):
    """Spec from a path, a shipped example name, a dict, or a spec object."""
    if isinstance(source, (SubstitutionRule, OdometerSpec, _System)):
        return source
    if isinstance(source, dict):
        return spec_from_dict(source)
    text = str(source)
    if text in SHIPPED and not Path(text).exists():
        return spec_from_dict(json.loads(shipped_path(text).read_text()))
    try:
        data = json.loads(Path(text).read_text())
    except FileNotFoundError:
        raise MatchboxError("BAD_SPEC", f"no such spec file: {text}") from None
    except json.JSONDecodeError as e:
        raise MatchboxError("BAD_SPEC", f"invalid JSON in {text}: {e}") from None
    return spec_from_dict(data)


# ---------------------------------------------------------------------------
# emitted text formats


def dumps_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def parse_hierarchy(text):
    """Hierarchy dump -> nested dict (sets kept as rendered strings)."""
    lines = text.splitlines()
    if not lines or lines[0] != "# matchbox hierarchy v1":
        raise MatchboxError("BAD_FORMAT", "not a hierarchy dump")
    out = {"levels": []}
    cur = None
    for line in lines[1:]:
        if not line.strip():
            continue
        if not line.startswith("  "):
            key, _, rest = line.partition(" ")
            if key == "system":
                kind, dim = rest.split()
                out["system"] = {"kind": kind, "dimension": int(dim)}
            elif key == "strategy":
                out["strategy"] = rest
            elif key == "level":
                cur = {"level": int(rest), "V": None, "const": {}, "flags": [], "W": [], "code": [], "fine": []}
                out["levels"].append(cur)
            else:
                raise MatchboxError("BAD_FORMAT", f"unexpected line {line!r}")
            continue
        if cur is None:
            raise MatchboxError("BAD_FORMAT", "block line before any level")
        key, _, rest = line.strip().partition(" ")
        if key == "V":
            cur["V"] = rest
        elif key == "const":
            name, _, value = rest.partition(" ")
            cur["const"][name] = value
        elif key == "flag":
            cur["flags"].append(rest)
        elif key in ("W", "code", "fine"):
            n = {"W": 1, "code": 2, "fine": 3}[key]
            parts = rest.split(" ", n)
            cur[key].append([int(x) for x in parts[:n]] + [parts[n]])
        else:
            raise MatchboxError("BAD_FORMAT", f"unexpected line {line!r}")
    return out


def emit_hierarchy(data):
    sysd = data["system"]
    lines = ["# matchbox hierarchy v1", f"system {sysd['kind']} {sysd['dimension']}", f"strategy {data['strategy']}"]
    for lv in data["levels"]:
        lines.append(f"level {lv['level']}")
        lines.append(f"  V {lv['V']}")
        for name, value in lv["const"].items():
            lines.append(f"  const {name} {value}")
        for flag in lv["flags"]:
            lines.append(f"  flag {flag}")
        for key in ("W", "code", "fine"):
            for row in lv[key]:
                lines.append(f"  {key} " + " ".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


def parse_clopen(system, text):
    """Rendered clopen set ``{[ab], [aa]}`` (or ``X``, ``{}``) -> ClopenSet."""
    text = text.strip()
    if text == "X":
        return ClopenSet.whole(system)
    inner = text.strip("{}").strip()
    if not inner:
        return ClopenSet.empty(system)
    return ClopenSet.parse(system, *re.findall(r"\[[^\]]*\]", inner))


_NODE = re.compile(r"^  v(\d+);$")
_EDGE = re.compile(r'^  v(\d+) -> v(\d+) \[label="(.*):([^:"]*)", id="e(\d+)"\];$')


def parse_dot(text):
    """DOT graph as written by ``to_dot`` -> {name, vertices, edges}."""
    lines = text.splitlines()
    m = re.match(r"^digraph (\S+) \{$", lines[0]) if lines else None
    if not m or lines[-1] != "}":
        raise MatchboxError("BAD_FORMAT", "not a matchbox DOT graph")
    vertices, edges = [], []
    for line in lines[1:-1]:
        if (n := _NODE.match(line)):
            vertices.append(int(n.group(1)))
        elif (e := _EDGE.match(line)):
            s, d, lab, ln, i = e.groups()
            if int(i) != len(edges):
                raise MatchboxError("BAD_FORMAT", f"edge ids out of order at e{i}")
            edges.append({"src": int(s), "dst": int(d), "label": lab, "length": ln})
        else:
            raise MatchboxError("BAD_FORMAT", f"unexpected DOT line {line!r}")
    return {"name": m.group(1), "vertices": vertices, "edges": edges}


def emit_dot(graph):
    lines = [f"digraph {graph['name']} {{"]
    lines += [f"  v{v};" for v in graph["vertices"]]
    lines += [f'  v{e["src"]} -> v{e["dst"]} [label="{e["label"]}:{e["length"]}", id="e{i}"];'
              for i, e in enumerate(graph["edges"])]
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_matrices_csv(matrices):
    lines = ["source_level,target_level,row,col,value"]
    for (s, t), rows in matrices.items():
        for r, row in enumerate(rows):
            for c, v in enumerate(row):
                lines.append(f"{s},{t},{r},{c},{v}")
    return "\n".join(lines) + "\n"


PARSERS = {
    ".txt": (parse_hierarchy, emit_hierarchy),
    ".json": (json.loads, dumps_json),
    ".dot": (parse_dot, emit_dot),
    ".csv": (parse_matrices_csv, emit_matrices_csv),
}


def roundtrip(path):
    """True when the file text is a parse-emit fixpoint."""
    path = Path(path)
    parse, emit = PARSERS[path.suffix]
    text = path.read_text()
    return emit(parse(text)) == text


def write_atomic(path, text):
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
