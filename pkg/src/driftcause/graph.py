"""Directed and partially directed graphs over named features.

Nodes are plain strings. Each graph assigns a dense index to its nodes in
the order they were given, and every tie in this package (topological
order, subset enumeration, DOT output) is broken by that index.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import GraphError, UnknownFeatureError

Edge = tuple[str, str]


def _index_nodes(nodes):
    nodes = tuple(nodes)
    index = {}
    for i, n in enumerate(nodes):
        if not isinstance(n, str):
            raise GraphError(f"node names must be strings, got {n!r}")
        if n in index:
            raise GraphError(f"duplicate node {n!r}")
        index[n] = i
    return nodes, index


class Dag:
    """Immutable directed acyclic graph.

    >>> g = Dag(["a", "b", "c"], [("a", "b"), ("b", "c")])
    >>> sorted(g.ancestors("c"))
    ['a', 'b']
    """

    __slots__ = ("nodes", "edges", "_index", "_parents", "_children", "_order")

    def __init__(self, nodes: Iterable[str], edges: Iterable[Edge] = ()):
        self.nodes, self._index = _index_nodes(nodes)
        parents = {n: set() for n in self.nodes}
        children = {n: set() for n in self.nodes}
        seen = set()
        for u, v in edges:
            self._check(u)
            self._check(v)
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
            if (u, v) in seen:
                raise GraphError(f"duplicate edge {u!r} -> {v!r}")
            seen.add((u, v))
            parents[v].add(u)
            children[u].add(v)
        self.edges = frozenset(seen)
        self._parents = {n: frozenset(p) for n, p in parents.items()}
        self._children = {n: frozenset(c) for n, c in children.items()}
        self._order = self._toposort()

    def _check(self, f):
        if f not in self._index:
            raise UnknownFeatureError(f)

    def _toposort(self):
        indeg = {n: len(self._parents[n]) for n in self.nodes}
        heap = [self._index[n] for n in self.nodes if indeg[n] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            n = self.nodes[heapq.heappop(heap)]
            order.append(n)
            for c in self._children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, self._index[c])
        if len(order) != len(self.nodes):
            cyclic = sorted(n for n in self.nodes if indeg[n] > 0)
            raise GraphError(f"graph has a directed cycle through {cyclic}")
        return tuple(order)

    def index(self, f: str) -> int:
        self._check(f)
        return self._index[f]

    def sort(self, names: Iterable[str]) -> list[str]:
        """Sort node names by their index in this graph."""
        return sorted(names, key=self.index)

    def __contains__(self, f):
        return f in self._index

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def __hash__(self):
        return hash((self.nodes, self.edges))

    def __repr__(self):
        edges = ", ".join(f"{u}->{v}" for u, v in self.sorted_edges())
        return f"Dag(nodes={list(self.nodes)}, edges=[{edges}])"

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges, key=lambda e: (self._index[e[0]], self._index[e[1]]))

    def children(self, f: str) -> frozenset[str]:
        self._check(f)
        return self._children[f]

    def parents(self, f: str) -> frozenset[str]:
        self._check(f)
        return self._parents[f]

    def ancestors(self, f: str) -> frozenset[str]:
        self._check(f)
        return frozenset(_reach(f, self._parents.__getitem__))

    def descendants(self, f: str) -> frozenset[str]:
        self._check(f)
        return frozenset(_reach(f, self._children.__getitem__))

    def topological_order(self) -> tuple[str, ...]:
        return self._order

    def is_adjacent(self, u, v) -> bool:
        return (u, v) in self.edges or (v, u) in self.edges

    def skeleton(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(e) for e in self.edges)

    def v_structures(self) -> frozenset[tuple[str, str, str]]:
        """Unshielded colliders as (a, c, b) with a before b in index order."""
        out = set()
        for c in self.nodes:
            pa = self.sort(self._parents[c])
            for i, a in enumerate(pa):
                for b in pa[i + 1:]:
                    if not self.is_adjacent(a, b):
                        out.add((a, c, b))
        return frozenset(out)

    def add_edges(self, edges: Iterable[Edge]) -> Dag:
        return Dag(self.nodes, set(self.edges) | set(edges))

    def remove_nodes(self, drop: Iterable[str]) -> Dag:
        drop = set(drop)
        for f in drop:
            self._check(f)
        return Dag(
            [n for n in self.nodes if n not in drop],
            [(u, v) for u, v in self.edges if u not in drop and v not in drop],
        )

    def d_separated(self, x: str, y: str, z: Iterable[str] = ()) -> bool:
        return d_separated(self, x, y, z)


def _reach(start, step):
    seen = set()
    queue = deque(step(start))
    while queue:
        n = queue.popleft()
        if n in seen:
            continue
        seen.add(n)
        queue.extend(step(n))
    seen.discard(start)
    return seen


class Pdag:
    """Partially directed graph: the output shape of constraint-based discovery."""

    __slots__ = ("nodes", "directed", "undirected", "_index")

    def __init__(self, nodes: Iterable[str], directed: Iterable[Edge] = (),
                 undirected: Iterable[Iterable[str]] = ()):
        self.nodes, self._index = _index_nodes(nodes)
        d = set()
        for u, v in directed:
            self._check(u)
            self._check(v)
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
            d.add((u, v))
        und = set()
        for e in undirected:
            e = frozenset(e)
            if len(e) != 2:
                raise GraphError(f"undirected edge needs two distinct endpoints: {sorted(e)}")
            for n in e:
                self._check(n)
            und.add(e)
        for u, v in d:
            if (v, u) in d:
                raise GraphError(f"edge {u!r}-{v!r} directed both ways")
            if frozenset((u, v)) in und:
                raise GraphError(f"edge {u!r}-{v!r} both directed and undirected")
        self.directed = frozenset(d)
        self.undirected = frozenset(und)

    @classmethod
    def from_dag(cls, g: Dag) -> Pdag:
        return cls(g.nodes, g.edges)

    def _check(self, f):
        if f not in self._index:
            raise UnknownFeatureError(f)

    def index(self, f):
        self._check(f)
        return self._index[f]

    def __contains__(self, f):
        return f in self._index

    def __eq__(self, other):
        if not isinstance(other, Pdag):
            return NotImplemented
        return (set(self.nodes) == set(other.nodes) and self.directed == other.directed
                and self.undirected == other.undirected)

    def __hash__(self):
        return hash((frozenset(self.nodes), self.directed, self.undirected))

    def __repr__(self):
        d = ", ".join(f"{u}->{v}" for u, v in self.sorted_directed())
        u = ", ".join(f"{a}--{b}" for a, b in self.sorted_undirected())
        return f"Pdag(nodes={list(self.nodes)}, directed=[{d}], undirected=[{u}])"

    def sorted_directed(self) -> list[Edge]:
        return sorted(self.directed, key=lambda e: (self._index[e[0]], self._index[e[1]]))

    def sorted_undirected(self) -> list[Edge]:
        pairs = [tuple(sorted(e, key=self._index.__getitem__)) for e in self.undirected]
        return sorted(pairs, key=lambda e: (self._index[e[0]], self._index[e[1]]))

    def parents(self, f) -> frozenset[str]:
        self._check(f)
        return frozenset(u for u, v in self.directed if v == f)

    def children(self, f) -> frozenset[str]:
        self._check(f)
        return frozenset(v for u, v in self.directed if u == f)

    def neighbors(self, f) -> frozenset[str]:
        """Endpoints of undirected edges at f."""
        self._check(f)
        return frozenset(n for e in self.undirected if f in e for n in e if n != f)

    def adjacent(self, f) -> frozenset[str]:
        return self.parents(f) | self.children(f) | self.neighbors(f)

    def is_adjacent(self, u, v) -> bool:
        return ((u, v) in self.directed or (v, u) in self.directed
                or frozenset((u, v)) in self.undirected)

    def skeleton(self) -> frozenset[frozenset[str]]:
        return frozenset({frozenset(e) for e in self.directed} | set(self.undirected))

    def possible_parents(self, f) -> frozenset[str]:
        """Directed parents plus undirected neighbours."""
        return self.parents(f) | self.neighbors(f)

    def possible_ancestors(self, f) -> frozenset[str]:
        """Ancestors when undirected edges are read in both directions."""
        self._check(f)
        return frozenset(_reach(f, self.possible_parents))

    def is_fully_directed(self) -> bool:
        return not self.undirected


def d_separated(g: Dag, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """True iff every path between x and y is blocked by z.

    Reachability formulation: a ball travels from x, passing through
    non-colliders outside z and through colliders with a descendant in z.
    """
    z = frozenset(z)
    for f in (x, y, *z):
        g._check(f)
    if x == y or x in z or y in z:
        raise GraphError("d_separated requires distinct x, y outside the conditioning set")

    # z together with all ancestors: colliders in this set are open
    opened = set(z)
    for f in z:
        opened |= g.ancestors(f)

    visited = set()
    queue = deque([(x, "up")])
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node == y:
            return False
        if direction == "up" and node not in z:
            queue.extend((p, "up") for p in g.parents(node))
            queue.extend((c, "down") for c in g.children(node))
        elif direction == "down":
            if node not in z:
                queue.extend((c, "down") for c in g.children(node))
            if node in opened:
                queue.extend((p, "up") for p in g.parents(node))
    return True


CORRECT = "correct"
REVERSED = "reversed"
MISSING = "missing"
EXTRA = "extra"


@dataclass(frozen=True)
class EdgeDiff:
    correct: int
    reversed: int
    missing: int
    extra: int
    per_edge: tuple[tuple[Edge, str], ...] = field(default=())

    def as_dict(self):
        return {
            "correct": self.correct,
            "reversed": self.reversed,
            "missing": self.missing,
            "extra": self.extra,
            "per_edge": [[u, v, kind] for (u, v), kind in self.per_edge],
        }


def compare_edges(truth: Dag, found: Pdag | Dag) -> EdgeDiff:
    """Classify every truth edge against a discovered graph.

    An undirected found edge over a truth adjacency counts as reversed: the
    adjacency was found but its orientation was not. Found adjacencies
    absent from the truth are extra and are listed in (lower, higher)
    index order.
    """
    if isinstance(found, Dag):
        found = Pdag.from_dag(found)
    if set(truth.nodes) != set(found.nodes):
        raise GraphError(
            "node sets differ: "
            f"truth-only {sorted(set(truth.nodes) - set(found.nodes))}, "
            f"found-only {sorted(set(found.nodes) - set(truth.nodes))}")
    per_edge = []
    counts = {CORRECT: 0, REVERSED: 0, MISSING: 0, EXTRA: 0}
    for u, v in truth.sorted_edges():
        if (u, v) in found.directed:
            kind = CORRECT
        elif (v, u) in found.directed or frozenset((u, v)) in found.undirected:
            kind = REVERSED
        else:
            kind = MISSING
        counts[kind] += 1
        per_edge.append(((u, v), kind))
    truth_adj = truth.skeleton()
    extras = [e for e in found.sorted_directed() if frozenset(e) not in truth_adj]
    extras += [e for e in found.sorted_undirected() if frozenset(e) not in truth_adj]
    for e in sorted(extras, key=lambda e: (truth.index(e[0]), truth.index(e[1]))):
        counts[EXTRA] += 1
        per_edge.append((e, EXTRA))
    return EdgeDiff(counts[CORRECT], counts[REVERSED], counts[MISSING], counts[EXTRA],
                    tuple(per_edge))


def _quote(name):
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _attrs(attrs: Mapping[str, object] | None) -> str:
    if not attrs:
        return ""
    body = ", ".join(f"{k}={_quote(str(v))}" for k, v in sorted(attrs.items()))
    return f" [{body}]"


def to_dot(g: Dag | Pdag, *, name: str = "G",
           node_attrs: Mapping[str, Mapping[str, object]] | None = None,
           edge_attrs: Mapping[Edge, Mapping[str, object]] | None = None,
           extra_edges: Iterable[tuple[Edge, Mapping[str, object]]] = (),
           preamble: Iterable[str] = ()) -> str:
    """Render a graph as DOT text.

    ``edge_attrs`` is keyed by (u, v) for directed edges and by the pair in
    index order for undirected ones. ``extra_edges`` are drawn after the
    graph's own edges, in the order given.
    """
    node_attrs = node_attrs or {}
    edge_attrs = edge_attrs or {}
    lines = [f"digraph {_quote(name)} {{"]
    lines.extend(f"  {line}" for line in preamble)
    for n in g.nodes:
        lines.append(f"  {_quote(n)}{_attrs(node_attrs.get(n))};")
    if isinstance(g, Dag):
        directed, undirected = g.sorted_edges(), []
    else:
        directed, undirected = g.sorted_directed(), g.sorted_undirected()
    for u, v in directed:
        lines.append(f"  {_quote(u)} -> {_quote(v)}{_attrs(edge_attrs.get((u, v)))};")
    for u, v in undirected:
        attrs = {"dir": "none", **edge_attrs.get((u, v), {})}
        lines.append(f"  {_quote(u)} -> {_quote(v)}{_attrs(attrs)};")
    for (u, v), attrs in extra_edges:
        lines.append(f"  {_quote(u)} -> {_quote(v)}{_attrs(attrs)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


DIFF_STYLE = {
    CORRECT: {"color": "darkgreen", "penwidth": "2"},
    REVERSED: {"color": "orange", "penwidth": "2"},
    MISSING: {"color": "gray50", "style": "dashed"},
    EXTRA: {"color": "red", "style": "bold"},
}


def diff_dot(truth: Dag, found: Pdag | Dag, *, name: str = "diff") -> str:
    """DOT rendering of :func:`compare_edges`: one styled edge per classified pair.

    Reversed edges are drawn the way they were found, undirected ones
    without arrowheads.
    """
    if isinstance(found, Dag):
        found = Pdag.from_dag(found)
    diff = compare_edges(truth, found)
    edges = []
    for (u, v), kind in diff.per_edge:
        attrs = dict(DIFF_STYLE[kind])
        if kind in (REVERSED, EXTRA) and frozenset((u, v)) in found.undirected:
            attrs["dir"] = "none"
        elif kind == REVERSED:
            u, v = v, u
        edges.append(((u, v), attrs))
    empty = Dag(truth.nodes)
    return to_dot(empty, name=name, extra_edges=edges)
