"""PC algorithm: skeleton search, v-structures, Meek rules, causeless-time background."""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .citest import DEFAULT_ADEQUACY, DEFAULT_ALPHA, CiTest, GSquareTest
from .errors import DataError, DriftCauseError, UnknownFeatureError
from .graph import Pdag
from .records import Records

log = logging.getLogger(__name__)


class CiQueryError(DriftCauseError):
    """A CI test raised; the failing query is attached."""

    def __init__(self, query, cause):
        self.query = query
        x, y, z = query
        super().__init__(f"CI test failed on {x} _||_ {y} | {list(z)}: {cause}")


@dataclass(frozen=True)
class PcConfig:
    alpha: float = DEFAULT_ALPHA
    max_cond_size: int | None = None
    background: str | None = None
    stable: bool = True
    adequacy: float = DEFAULT_ADEQUACY

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.max_cond_size is not None and self.max_cond_size < 0:
            raise ValueError("max_cond_size must be non-negative")


@dataclass(frozen=True)
class LogEntry:
    step: str
    x: str
    y: str
    z: tuple[str, ...] = ()
    statistic: float | None = None
    p_value: float | None = None
    independent: bool | None = None
    action: str = ""


@dataclass
class RunLog:
    """Ordered audit trail of every test and orientation decision."""

    entries: list[LogEntry] = field(default_factory=list)

    def add(self, *args, **kw):
        self.entries.append(LogEntry(*args, **kw))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def of_step(self, step) -> list[LogEntry]:
        return [e for e in self.entries if e.step == step]

    def to_json(self) -> str:
        rows = [{**asdict(e), "z": list(e.z)} for e in self.entries]
        return json.dumps(rows, indent=1, sort_keys=True)


class SepsetMap:
    """Separating set per removed pair."""

    def __init__(self):
        self._sets: dict[frozenset, tuple[str, ...]] = {}

    def record(self, x, y, z):
        if x in z or y in z:
            raise ValueError("an endpoint cannot be in its own separating set")
        self._sets[frozenset((x, y))] = tuple(z)

    def get(self, x, y) -> tuple[str, ...] | None:
        return self._sets.get(frozenset((x, y)))

    def __contains__(self, pair):
        return frozenset(pair) in self._sets

    def __len__(self):
        return len(self._sets)

    def items(self):
        return self._sets.items()


@dataclass
class PcResult:
    graph: Pdag
    sepsets: SepsetMap
    log: RunLog


class _Graph:
    """Mutable working copy used while orienting."""

    def __init__(self, pdag: Pdag):
        self.nodes = pdag.nodes
        self.index = {n: i for i, n in enumerate(self.nodes)}
        self.directed = set(pdag.directed)
        self.undirected = set(pdag.undirected)
        self.adj = {n: set() for n in self.nodes}
        for u, v in self.directed:
            self.adj[u].add(v)
            self.adj[v].add(u)
        for e in self.undirected:
            u, v = tuple(e)
            self.adj[u].add(v)
            self.adj[v].add(u)

    def freeze(self) -> Pdag:
        return Pdag(self.nodes, self.directed, self.undirected)

    def is_undirected(self, u, v):
        return frozenset((u, v)) in self.undirected

    def undirected_pairs(self):
        pairs = [tuple(sorted(e, key=self.index.__getitem__)) for e in self.undirected]
        return sorted(pairs, key=lambda p: (self.index[p[0]], self.index[p[1]]))

    def sorted(self, names):
        return sorted(names, key=self.index.__getitem__)

    def reaches(self, src, dst):
        """Directed path src ~> dst over oriented edges."""
        stack, seen = [src], {src}
        while stack:
            n = stack.pop()
            if n == dst:
                return True
            for u, v in self.directed:
                if u == n and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return False

    def orient(self, u, v, step, runlog, background=None):
        """Orient u -> v; returns True iff the graph changed."""
        if (u, v) in self.directed:
            return False
        if (v, u) in self.directed:
            runlog.add(step, u, v, action=f"conflict: {v}->{u} already oriented, kept")
            log.debug("orientation conflict on %s-%s (%s)", u, v, step)
            return False
        if v == background:
            runlog.add(step, u, v, action=f"suppressed: {v} is causeless")
            return False
        if self.reaches(v, u):
            runlog.add(step, u, v, action=f"conflict: {u}->{v} would close a cycle, left undirected")
            return False
        self.undirected.discard(frozenset((u, v)))
        self.directed.add((u, v))
        runlog.add(step, u, v, action=f"orient {u}->{v}")
        return True


def _check_features(features, test):
    features = tuple(features)
    if len(features) < 2:
        raise DataError("discovery needs at least two features")
    known = set(getattr(test, "features", features))
    for f in features:
        if f not in known:
            raise UnknownFeatureError(f)
    return features


def pc_skeleton(features: Sequence[str], test: CiTest, config: PcConfig = PcConfig(),
                runlog: RunLog | None = None) -> tuple[Pdag, SepsetMap]:
    """Adjacency search from the complete graph, growing the conditioning-set size.

    Subsets are drawn from the neighbourhood of x minus y, then of y minus x,
    in lexicographic index order; the first accepted independence removes the
    edge. In stable mode neighbourhoods are frozen at the start of each level.
    """
    features = _check_features(features, test)
    runlog = runlog if runlog is not None else RunLog()
    index = {f: i for i, f in enumerate(features)}
    adj = {f: set(features) - {f} for f in features}
    sepsets = SepsetMap()
    level = 0
    while config.max_cond_size is None or level <= config.max_cond_size:
        frozen = {f: sorted(adj[f], key=index.__getitem__) for f in features} if config.stable else None
        any_tested = False
        for x, y in itertools.combinations(features, 2):
            if y not in adj[x]:
                continue
            tried = set()
            removed = False
            for a, b in ((x, y), (y, x)):
                pool = frozen[a] if config.stable else sorted(adj[a], key=index.__getitem__)
                pool = [n for n in pool if n != b]
                if len(pool) < level:
                    continue
                any_tested = True
                for z in itertools.combinations(pool, level):
                    key = frozenset(z)
                    if key in tried:
                        continue
                    tried.add(key)
                    try:
                        r = test(x, y, z)
                    except DriftCauseError:
                        raise
                    except Exception as exc:
                        raise CiQueryError((x, y, z), exc) from exc
                    action = "remove" if r.independent else "keep"
                    runlog.add("skeleton", x, y, tuple(z), r.statistic, r.p_value,
                               r.independent, action)
                    if r.independent:
                        adj[x].discard(y)
                        adj[y].discard(x)
                        sepsets.record(x, y, z)
                        removed = True
                        break
                if removed:
                    break
        if not any_tested:
            break
        level += 1
    undirected = {frozenset((x, y)) for x in features for y in adj[x]}
    return Pdag(features, (), undirected), sepsets


def orient_background(pdag: Pdag, background: str, runlog: RunLog | None = None) -> Pdag:
    """Point every edge at a causeless feature away from it."""
    runlog = runlog if runlog is not None else RunLog()
    if background not in pdag:
        raise UnknownFeatureError(background)
    g = _Graph(pdag)
    for f in g.sorted(g.adj[background]):
        if (f, background) in g.directed:
            g.directed.discard((f, background))
            g.undirected.add(frozenset((f, background)))
            runlog.add("background", f, background, action=f"dropped {f}->{background}")
        g.orient(background, f, "background", runlog)
    return g.freeze()


def orient_v_structures(pdag: Pdag, sepsets: SepsetMap, runlog: RunLog | None = None,
                        background: str | None = None) -> Pdag:
    """Orient x -> z <- y for every unshielded triple with z outside sepset(x, y).

    Triples are visited by (x, y, z) index order. An edge already oriented
    the other way is left alone and the conflict is logged.
    """
    runlog = runlog if runlog is not None else RunLog()
    g = _Graph(pdag)
    for x, y in itertools.combinations(g.nodes, 2):
        if y in g.adj[x]:
            continue
        sep = sepsets.get(x, y)
        if sep is None:
            continue
        for z in g.sorted(g.adj[x] & g.adj[y]):
            if z in sep:
                continue
            runlog.add("v-structure", x, y, (z,), action=f"collider {x}->{z}<-{y}")
            g.orient(x, z, "v-structure", runlog, background)
            g.orient(y, z, "v-structure", runlog, background)
    return g.freeze()


def _meek_pass(g: _Graph, runlog, background):
    for a, b in g.undirected_pairs():
        for u, v in ((a, b), (b, a)):
            if not g.is_undirected(u, v):
                break
            # R1: w -> u - v, w and v non-adjacent
            if any((w, u) in g.directed and v not in g.adj[w] for w in g.adj[u]):
                if g.orient(u, v, "meek-R1", runlog, background):
                    return True
                continue
            # R2: u -> w -> v
            if any((u, w) in g.directed and (w, v) in g.directed for w in g.adj[u]):
                if g.orient(u, v, "meek-R2", runlog, background):
                    return True
                continue
            # R3: u - c -> v, u - d -> v, c and d non-adjacent
            into_v = [c for c in g.sorted(g.adj[u]) if g.is_undirected(u, c) and (c, v) in g.directed]
            if any(d not in g.adj[c] for c, d in itertools.combinations(into_v, 2)):
                if g.orient(u, v, "meek-R3", runlog, background):
                    return True
                continue
            # R4: u - d -> c -> v, u adjacent c, d and v non-adjacent
            if any(g.is_undirected(u, d) and v not in g.adj[d]
                   and any((d, c) in g.directed and (c, v) in g.directed and c in g.adj[u]
                           for c in g.adj[d])
                   for d in g.adj[u]):
                if g.orient(u, v, "meek-R4", runlog, background):
                    return True
    return False


def meek_rules(pdag: Pdag, runlog: RunLog | None = None, background: str | None = None) -> Pdag:
    """Apply Meek rules R1-R4 until nothing changes."""
    runlog = runlog if runlog is not None else RunLog()
    g = _Graph(pdag)
    while _meek_pass(g, runlog, background):
        pass
    return g.freeze()


def discover(data: Records | Sequence[str], test: CiTest | None = None,
             config: PcConfig = PcConfig()) -> PcResult:
    """Full PC run with its separating sets and audit log.

    ``data`` is either a record table (a g-square test on it is used unless
    ``test`` is given) or just the feature names, in which case ``test`` is
    required.
    """
    if isinstance(data, Records):
        features = data.names
        if test is None:
            test = GSquareTest(data, config.alpha, config.adequacy)
    else:
        features = tuple(data)
        if test is None:
            raise ValueError("a CI test is required when no records are given")
    if config.background is not None and config.background not in features:
        raise UnknownFeatureError(config.background)
    runlog = RunLog()
    skeleton, sepsets = pc_skeleton(features, test, config, runlog)
    g = skeleton
    if config.background is not None:
        g = orient_background(g, config.background, runlog)
    g = orient_v_structures(g, sepsets, runlog, config.background)
    g = meek_rules(g, runlog, config.background)
    return PcResult(g, sepsets, runlog)


def pc(data: Records | Sequence[str], test: CiTest | None = None,
       config: PcConfig = PcConfig()) -> Pdag:
    return discover(data, test, config).graph


def sepset_pairs(sepsets: SepsetMap) -> Iterable[tuple[str, str, tuple[str, ...]]]:
    for pair, z in sepsets.items():
        x, y = sorted(pair)
        yield x, y, z
