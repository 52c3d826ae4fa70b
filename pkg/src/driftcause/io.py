"""File formats: net specs, scenarios, stream CSVs and JSON graphs.

Net file (version 1), one statement per line, ``#`` starts a comment::

    driftcause-net 1
    time T
    feature T 2 early late
    feature rain 2 no yes
    edge T sprinkler
    cpt sprinkler | T rain
      0.3 0.7
      ...

``cpt f | parents`` lists the parents in graph-index order and is followed
by one indented row per parent configuration, lexicographic with the first
parent most significant. :func:`save_net` writes this canonical form, which
:func:`load_net` reads back to an equal net, and re-saving is byte-stable.

Scenario file (version 1)::

    driftcause-scenario 1
    name sprinkler
    net sprinkler_base.net
    pre 2500
    post 2500
    seed 0
    windows 2
    modify sprinkler | rain
      0.8 0.2
      0.98 0.02

The ``net`` path is resolved relative to the scenario file.
"""

from __future__ import annotations

import csv
import io as _io
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .bayesnet import CategoricalBayesNet, validate
from .errors import DataError, FormatError, UnknownFeatureError
from .explain import Explanation
from .graph import Dag, Pdag
from .records import Records
from .stream import TIME, DriftStream, ScenarioSpec, discretize

NET_MAGIC = "driftcause-net"
SCENARIO_MAGIC = "driftcause-scenario"
GRAPH_FORMAT = "driftcause-graph"
FORMAT_VERSION = 1
BUNDLED_PREFIX = "bundled:"


def resolve(path) -> Path:
    """Path on disk; ``bundled:NAME`` refers to a file shipped with the package."""
    s = str(path)
    if s.startswith(BUNDLED_PREFIX):
        name = s[len(BUNDLED_PREFIX):]
        ref = resources.files("driftcause") / "data" / name
        if not ref.is_file():
            raise FileNotFoundError(f"no bundled file {name!r}")
        return Path(str(ref))
    return Path(path)


def bundled_files() -> list[str]:
    return sorted(p.name for p in (resources.files("driftcause") / "data").iterdir()
                  if p.name[0] not in "._")


def _lines(text):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            yield no, line


def _header(lines, magic, path):
    try:
        no, line = next(lines)
    except StopIteration:
        raise FormatError("empty file", path) from None
    tokens = line.split()
    if len(tokens) != 2 or tokens[0] != magic:
        raise FormatError(f"expected '{magic} <version>' header", path, no)
    try:
        version = int(tokens[1])
    except ValueError:
        raise FormatError(f"bad version {tokens[1]!r}", path, no) from None
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported {magic} version {version} (supported: {FORMAT_VERSION})",
                          path, no)


def _floats(tokens, no, path):
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise FormatError(f"non-numeric probability: {exc}", path, no) from None


def _table_block(lines, first, path):
    """Consume indented rows following a header line; returns (rows, line numbers, next line)."""
    rows, nos = [], []
    item = next(lines, None)
    while item is not None and item[1][:1] in (" ", "\t"):
        no, line = item
        rows.append(_floats(line.split(), no, path))
        nos.append(no)
        item = next(lines, None)
    if not rows:
        raise FormatError("table has no rows", path, first)
    return rows, nos, item


def _check_name(name, no, path):
    if name.startswith("#") or any(c.isspace() for c in name):
        raise FormatError(f"invalid feature name {name!r}", path, no)
    return name


def parse_net(text: str, path=None) -> tuple[CategoricalBayesNet, str | None]:
    """Parse net-file text; returns the net and the designated time feature, if any."""
    lines = _lines(text)
    _header(lines, NET_MAGIC, path)
    features, cards, states, edges, blocks = [], {}, {}, [], {}
    time_feature = None
    item = next(lines, None)
    while item is not None:
        no, line = item
        tokens = line.split()
        key = tokens[0]
        if line[:1] in (" ", "\t"):
            raise FormatError("table row outside a cpt block", path, no)
        if key == "time":
            if len(tokens) != 2:
                raise FormatError("usage: time <feature>", path, no)
            time_feature = tokens[1]
        elif key == "feature":
            if len(tokens) < 3:
                raise FormatError("usage: feature <name> <cardinality> [labels...]", path, no)
            name = _check_name(tokens[1], no, path)
            if name in cards:
                raise FormatError(f"feature {name!r} declared twice", path, no)
            try:
                card = int(tokens[2])
            except ValueError:
                raise FormatError(f"bad cardinality {tokens[2]!r}", path, no) from None
            labels = tokens[3:]
            if labels and len(labels) != card:
                raise FormatError(f"{len(labels)} labels for cardinality {card}", path, no)
            features.append(name)
            cards[name] = card
            states[name] = labels or None
        elif key == "edge":
            if len(tokens) != 3:
                raise FormatError("usage: edge <parent> <child>", path, no)
            edges.append((tokens[1], tokens[2], no))
        elif key == "cpt":
            if len(tokens) < 2 or (len(tokens) > 2 and tokens[2] != "|"):
                raise FormatError("usage: cpt <feature> [| parents...]", path, no)
            name = tokens[1]
            if name in blocks:
                raise FormatError(f"second cpt block for {name!r}", path, no)
            rows, nos, item = _table_block(lines, no, path)
            blocks[name] = (tokens[3:], rows, nos, no)
            continue
        else:
            raise FormatError(f"unknown statement {key!r}", path, no)
        item = next(lines, None)

    for u, v, no in edges:
        for f in (u, v):
            if f not in cards:
                raise FormatError(f"edge names undeclared feature {f!r}", path, no)
    try:
        graph = Dag(features, [(u, v) for u, v, _ in edges])
    except Exception as exc:
        raise FormatError(str(exc), path) from None
    if time_feature is not None and time_feature not in cards:
        raise FormatError(f"time feature {time_feature!r} is not declared", path)
    for name, (_, _, _, no) in blocks.items():
        if name not in cards:
            raise FormatError(f"cpt for undeclared feature {name!r}", path, no)
    cpts = {}
    for f in features:
        if f not in blocks:
            raise FormatError(f"missing cpt block for {f!r}", path)
        declared, rows, nos, no = blocks[f]
        expected = graph.sort(graph.parents(f))
        if declared != expected:
            raise FormatError(f"cpt {f}: parents {declared} do not match edges {expected}", path, no)
        for r, n in zip(rows, nos):
            if len(r) != cards[f]:
                raise FormatError(f"cpt {f}: row has {len(r)} entries, expected {cards[f]}", path, n)
        cpts[f] = np.array(rows, dtype=float)
    net = CategoricalBayesNet(graph, cards, cpts, states)
    for v in validate(net):
        _, _, nos, no = blocks[v.feature]
        line = nos[v.row] if v.row is not None and v.row < len(nos) else no
        raise FormatError(str(v), path, line)
    return net, time_feature


def load_net(path) -> CategoricalBayesNet:
    return load_net_with_time(path)[0]


def load_net_with_time(path) -> tuple[CategoricalBayesNet, str | None]:
    path = resolve(path)
    return parse_net(path.read_text(encoding="utf-8"), path)


def _fmt(x):
    return repr(float(x))


def format_net(net: CategoricalBayesNet, time_feature: str | None = None) -> str:
    out = [f"{NET_MAGIC} {FORMAT_VERSION}"]
    if time_feature is not None:
        if time_feature not in net.graph:
            raise UnknownFeatureError(time_feature)
        out.append(f"time {time_feature}")
    for f in net.nodes:
        out.append(f"feature {f} {net.cardinalities[f]} " + " ".join(net.states[f]))
    for u, v in net.graph.sorted_edges():
        out.append(f"edge {u} {v}")
    for f in net.nodes:
        parents = net.parent_order(f)
        out.append(f"cpt {f}" + (" | " + " ".join(parents) if parents else ""))
        for r, row in enumerate(net.cpt(f)):
            line = "  " + " ".join(_fmt(x) for x in row)
            if parents:
                assign = net.row_assignment(f, r)
                line += "  # " + " ".join(f"{p}={net.states[p][assign[p]]}" for p in parents)
            out.append(line)
    return "\n".join(out) + "\n"


def save_net(net: CategoricalBayesNet, path, time_feature: str | None = None):
    net.check()
    Path(path).write_text(format_net(net, time_feature), encoding="utf-8")


def parse_scenario(text: str, path=None, base_dir=None) -> ScenarioSpec:
    lines = _lines(text)
    _header(lines, SCENARIO_MAGIC, path)
    fields = {}
    mods = []
    item = next(lines, None)
    while item is not None:
        no, line = item
        tokens = line.split()
        key = tokens[0]
        if key in ("name", "net") and len(tokens) == 2:
            fields[key] = (tokens[1], no)
        elif key in ("pre", "post", "seed", "windows") and len(tokens) == 2:
            try:
                fields[key] = (int(tokens[1]), no)
            except ValueError:
                raise FormatError(f"{key} needs an integer, got {tokens[1]!r}", path, no) from None
        elif key == "modify" and len(tokens) >= 2:
            if len(tokens) > 2 and tokens[2] != "|":
                raise FormatError("usage: modify <feature> [| parents...]", path, no)
            rows, nos, item = _table_block(lines, no, path)
            mods.append((tokens[1], tokens[3:], rows, nos, no))
            continue
        else:
            raise FormatError(f"cannot parse {line.strip()!r}", path, no)
        item = next(lines, None)
    if "net" not in fields:
        raise FormatError("scenario names no base net", path)
    net_ref, net_no = fields["net"]
    if net_ref.startswith(BUNDLED_PREFIX):
        net_path = net_ref
    else:
        net_path = Path(base_dir or ".") / net_ref
    try:
        base = load_net(net_path)
    except FileNotFoundError:
        raise FormatError(f"base net {net_ref!r} not found", path, net_no) from None
    modifications = []
    for f, declared, rows, nos, no in mods:
        if f not in base.graph:
            raise FormatError(f"modify names unknown feature {f!r}", path, no)
        expected = base.parent_order(f)
        if declared != expected:
            raise FormatError(f"modify {f}: parents {declared} do not match net {expected}", path, no)
        if len(rows) != base.row_count(f):
            raise FormatError(f"modify {f}: {len(rows)} rows, expected {base.row_count(f)}", path, no)
        for r, n in zip(rows, nos):
            if len(r) != base.cardinalities[f] or abs(sum(r) - 1) > 1e-9 or min(r) < 0:
                raise FormatError(f"modify {f}: invalid distribution row", path, n)
        modifications.append((f, np.array(rows)))
    get = lambda k, d: fields[k][0] if k in fields else d  # noqa: E731
    try:
        return ScenarioSpec(base, tuple(modifications), get("pre", 2500), get("post", 2500),
                            get("seed", 0), get("windows", 2), get("name", "scenario"))
    except DataError as exc:
        raise FormatError(str(exc), path) from None


def load_scenario(path) -> ScenarioSpec:
    path = resolve(path)
    return parse_scenario(path.read_text(encoding="utf-8"), path, path.parent)


def format_scenario(spec: ScenarioSpec, net_ref: str) -> str:
    out = [f"{SCENARIO_MAGIC} {FORMAT_VERSION}", f"name {spec.name}", f"net {net_ref}",
           f"pre {spec.pre_count}", f"post {spec.post_count}", f"seed {spec.seed}",
           f"windows {spec.windows}"]
    net = spec.base_net
    for f, cpt in spec.modifications:
        parents = net.parent_order(f)
        out.append(f"modify {f}" + (" | " + " ".join(parents) if parents else ""))
        for r, row in enumerate(np.asarray(cpt).reshape(net.row_count(f), -1)):
            line = "  " + " ".join(_fmt(x) for x in row)
            if parents:
                assign = net.row_assignment(f, r)
                line += "  # " + " ".join(f"{p}={net.states[p][assign[p]]}" for p in parents)
            out.append(line)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# CSV

def format_records(records: Records) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(records.names)
    w.writerows(records.values.tolist())
    return buf.getvalue()


def write_records(records: Records, path):
    Path(path).write_text(format_records(records), encoding="utf-8")


def _code_column(name, raw, bins):
    try:
        ints = np.array([int(v) for v in raw], dtype=np.int64)
        if len(ints) and ints.min() < 0:
            raise DataError(f"column {name!r} has negative codes")
        return ints, max(2, int(ints.max()) + 1 if len(ints) else 2)
    except ValueError:
        pass
    try:
        nums = np.array([float(v) for v in raw])
    except ValueError:
        labels = sorted(set(raw))
        lookup = {s: i for i, s in enumerate(labels)}
        return np.array([lookup[v] for v in raw], dtype=np.int64), max(2, len(labels))
    if bins is None:
        raise DataError(f"column {name!r} is continuous; pass a bin count to discretize it")
    codes = discretize(nums, bins).codes
    return codes, max(2, int(codes.max()) + 1)


def read_records(path, bins: int | None = None) -> Records:
    """Categorical records from a CSV with a header row.

    Integer columns are taken as state codes, other text columns are coded
    by sorted label, and numeric non-integer columns are quantile-binned
    when ``bins`` is given.
    """
    path = resolve(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError("empty CSV", path)
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise FormatError("duplicate column names", path, 1)
    body = rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise FormatError(f"row has {len(r)} fields, header has {len(header)}", path, i)
    cols, cards = [], []
    for j, name in enumerate(header):
        codes, card = _code_column(name, [r[j].strip() for r in body], bins)
        cols.append(codes)
        cards.append(card)
    values = np.stack(cols, axis=1) if body else np.zeros((0, len(header)), dtype=np.int64)
    return Records(tuple(header), values, tuple(cards))


def read_stream(path, time_feature: str = TIME, bins: int | None = None) -> DriftStream:
    records = read_records(path, bins)
    if time_feature not in records.names:
        raise DataError(f"stream file has no {time_feature!r} column")
    return DriftStream.from_records(records, time_feature)


def write_stream(stream: DriftStream, path):
    write_records(stream.records, path)


# ---------------------------------------------------------------------------
# JSON

def graph_to_dict(g: Dag | Pdag) -> dict:
    if isinstance(g, Dag):
        kind, directed, undirected = "dag", g.sorted_edges(), []
    else:
        kind, directed, undirected = "pdag", g.sorted_directed(), g.sorted_undirected()
    return {"format": GRAPH_FORMAT, "version": FORMAT_VERSION, "kind": kind, "nodes": list(g.nodes),
            "directed": [list(e) for e in directed], "undirected": [list(e) for e in undirected]}


def graph_from_dict(d: dict, path=None) -> Dag | Pdag:
    if d.get("format") != GRAPH_FORMAT:
        raise FormatError("not a graph file", path)
    if d.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported graph version {d.get('version')}", path)
    kind = d.get("kind", "pdag" if d.get("undirected") else "dag")
    if kind not in ("dag", "pdag") or (kind == "dag" and d.get("undirected")):
        raise FormatError(f"bad graph kind {kind!r}", path)
    try:
        if kind == "pdag":
            return Pdag(d["nodes"], [tuple(e) for e in d.get("directed", [])],
                        d.get("undirected", []))
        return Dag(d["nodes"], [tuple(e) for e in d.get("directed", [])])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed graph: {exc}", path) from None


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def save_graph(g, path):
    Path(path).write_text(dump_json(graph_to_dict(g)), encoding="utf-8")


def load_graph(path) -> Dag | Pdag:
    path = resolve(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, path, exc.lineno) from None
    return graph_from_dict(d, path)


def explanation_to_dict(e: Explanation) -> dict:
    return {**e.to_dict(), "graph": graph_to_dict(e.graph)}
