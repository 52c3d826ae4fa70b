"""Categorical Bayesian networks with exact enumeration and the do-operator.

CPT layout: ``cpt(f)`` is a ``(rows, card(f))`` array. Rows enumerate the
joint states of f's parents lexicographically, parents taken in graph-index
order with the first parent most significant. Joint tables use the same
convention over all features.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (GraphError, InvalidNetError, StateSpaceError, UnknownFeatureError,
                     ZeroProbabilityError)
from .graph import Dag
from .records import Records

DEFAULT_STATE_CAP = 2 ** 20
ROW_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Violation:
    feature: str
    row: int | None
    message: str

    def __str__(self):
        where = self.feature if self.row is None else f"{self.feature}[row {self.row}]"
        return f"{where}: {self.message}"


class CategoricalBayesNet:
    """A DAG with one conditional probability table per feature.

    The constructor only coerces shapes; call :meth:`validate` (or any
    operation that needs a well-formed net) to check the tables.
    """

    __slots__ = ("graph", "cardinalities", "cpts", "states")

    def __init__(self, graph: Dag, cardinalities: Mapping[str, int],
                 cpts: Mapping[str, object],
                 states: Mapping[str, Sequence[str]] | None = None):
        self.graph = graph
        missing = [f for f in graph.nodes if f not in cardinalities or f not in cpts]
        if missing:
            raise InvalidNetError([Violation(f, None, "missing cardinality or CPT") for f in missing])
        for f in list(cardinalities) + list(cpts):
            if f not in graph:
                raise UnknownFeatureError(f)
        self.cardinalities = {f: int(cardinalities[f]) for f in graph.nodes}
        tables = {}
        for f in graph.nodes:
            t = np.array(cpts[f], dtype=float)
            if t.ndim == 1:
                t = t.reshape(1, -1)
            t.setflags(write=False)
            tables[f] = t
        self.cpts = tables
        states = states or {}
        self.states = {f: tuple(states.get(f) or (str(s) for s in range(self.cardinalities[f])))
                       for f in graph.nodes}

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.graph.nodes

    def parent_order(self, f: str) -> list[str]:
        return self.graph.sort(self.graph.parents(f))

    def cpt(self, f: str) -> np.ndarray:
        if f not in self.graph:
            raise UnknownFeatureError(f)
        return self.cpts[f]

    def row_count(self, f: str) -> int:
        return math.prod(self.cardinalities[p] for p in self.parent_order(f))

    def row_index(self, f: str, parent_states: Mapping[str, int]) -> int:
        row = 0
        for p in self.parent_order(f):
            row = row * self.cardinalities[p] + int(parent_states[p])
        return row

    def row_assignment(self, f: str, row: int) -> dict[str, int]:
        parents = self.parent_order(f)
        shape = [self.cardinalities[p] for p in parents]
        return dict(zip(parents, (int(i) for i in np.unravel_index(row, shape)))) if parents else {}

    def validate(self) -> list[Violation]:
        return validate(self)

    def check(self) -> CategoricalBayesNet:
        problems = validate(self)
        if problems:
            raise InvalidNetError(problems)
        return self

    def __eq__(self, other):
        if not isinstance(other, CategoricalBayesNet):
            return NotImplemented
        return (self.graph == other.graph and self.cardinalities == other.cardinalities
                and self.states == other.states
                and all(self.cpts[f].shape == other.cpts[f].shape
                        and np.array_equal(self.cpts[f], other.cpts[f]) for f in self.nodes))

    __hash__ = None

    def __repr__(self):
        return f"CategoricalBayesNet({self.graph!r}, cardinalities={self.cardinalities})"


def validate(net: CategoricalBayesNet) -> list[Violation]:
    """Every problem with the net's tables, located by feature and row."""
    out = []
    for f in net.nodes:
        card = net.cardinalities[f]
        if card < 2:
            out.append(Violation(f, None, f"cardinality {card} < 2"))
        if len(net.states[f]) != card:
            out.append(Violation(f, None, f"{len(net.states[f])} state labels for cardinality {card}"))
        t = net.cpts[f]
        rows = net.row_count(f)
        if t.ndim != 2 or t.shape != (rows, card):
            out.append(Violation(f, None, f"CPT shape {t.shape}, expected ({rows}, {card})"))
            continue
        for r in range(rows):
            row = t[r]
            if not np.all(np.isfinite(row)) or np.any(row < 0):
                out.append(Violation(f, r, "negative or non-finite entry"))
            elif abs(row.sum() - 1.0) > ROW_TOLERANCE:
                out.append(Violation(f, r, f"row sums to {row.sum():.12g}"))
    return out


def sample(net: CategoricalBayesNet, n: int, seed=None) -> Records:
    """Ancestral sampling: each feature drawn from its CPT row given the already drawn parents."""
    net.check()
    if n < 0:
        raise ValueError("sample count must be non-negative")
    rng = np.random.default_rng(seed)
    index = {f: j for j, f in enumerate(net.nodes)}
    values = np.zeros((n, len(net.nodes)), dtype=np.int64)
    for f in net.graph.topological_order():
        rows = np.zeros(n, dtype=np.int64)
        for p in net.parent_order(f):
            rows = rows * net.cardinalities[p] + values[:, index[p]]
        cum = np.cumsum(net.cpts[f], axis=1)
        cum[:, -1] = np.inf
        u = rng.random(n)
        values[:, index[f]] = (u[:, None] >= cum[rows]).sum(axis=1)
    return Records(net.nodes, values, tuple(net.cardinalities[f] for f in net.nodes))


class JointTable:
    """Dense joint distribution, C-ordered over ``names`` (first name most significant)."""

    __slots__ = ("names", "cardinalities", "probs")

    def __init__(self, names: Sequence[str], cardinalities: Sequence[int], probs):
        self.names = tuple(names)
        self.cardinalities = tuple(int(c) for c in cardinalities)
        probs = np.array(probs, dtype=float).reshape(-1)
        if probs.size != math.prod(self.cardinalities):
            raise ValueError(f"{probs.size} probabilities for state space {self.cardinalities}")
        probs.setflags(write=False)
        self.probs = probs

    @property
    def tensor(self) -> np.ndarray:
        return self.probs.reshape(self.cardinalities)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownFeatureError(name) from None

    def prob(self, assignment: Mapping[str, int]) -> float:
        """Probability of a partial assignment."""
        return float(self.marginal(list(assignment)).tensor[tuple(assignment.values())])

    def marginal(self, names: Sequence[str]) -> JointTable:
        names = list(names)
        axes = [self.axis(n) for n in names]
        drop = tuple(i for i in range(len(self.names)) if i not in axes)
        t = self.tensor.sum(axis=drop) if drop else self.tensor
        kept = [i for i in range(len(self.names)) if i in axes]
        t = np.transpose(t, [kept.index(a) for a in axes])
        return JointTable(names, [self.cardinalities[a] for a in axes], t)

    def __repr__(self):
        return f"JointTable(names={self.names}, cardinalities={self.cardinalities})"


def enumerate_joint(net: CategoricalBayesNet, cap: int = DEFAULT_STATE_CAP) -> JointTable:
    """Exact joint as the product of all CPT entries."""
    net.check()
    cards = [net.cardinalities[f] for f in net.nodes]
    size = math.prod(cards)
    if size > cap:
        raise StateSpaceError(f"joint state space {size} exceeds cap {cap}")
    k = len(cards)
    joint = np.ones(cards, dtype=float)
    for f in net.nodes:
        parents = net.parent_order(f)
        axes = [net.graph.index(p) for p in parents] + [net.graph.index(f)]
        factor = net.cpts[f].reshape([net.cardinalities[p] for p in parents] + [cards[axes[-1]]])
        perm = np.argsort(axes)
        factor = np.transpose(factor, perm)
        shape = [1] * k
        for a in axes:
            shape[a] = cards[a]
        joint = joint * factor.reshape(shape)
    return JointTable(net.nodes, cards, joint)


def condition(joint: JointTable, evidence: Mapping[str, int | Iterable[int]]) -> JointTable:
    """Exact conditional over the features not named in ``evidence``.

    An evidence value may be a single state or a collection of states; in
    the latter case the feature is conditioned on that event and then
    marginalised out.
    """
    for name in evidence:
        joint.axis(name)
    sub = joint.tensor
    ev_axes = []
    for axis, (name, card) in enumerate(zip(joint.names, joint.cardinalities)):
        if name not in evidence:
            continue
        v = evidence[name]
        states = [int(v)] if isinstance(v, (int, np.integer)) else sorted({int(s) for s in v})
        if not states or min(states) < 0 or max(states) >= card:
            raise ValueError(f"evidence {name}={v!r} outside 0..{card - 1}")
        sub = np.take(sub, states, axis=axis)
        ev_axes.append(axis)
    sub = sub.sum(axis=tuple(ev_axes)) if ev_axes else sub
    mass = sub.sum()
    if mass <= 0:
        raise ZeroProbabilityError(f"evidence {dict(evidence)} has probability zero")
    keep = [(n, c) for n, c in zip(joint.names, joint.cardinalities) if n not in evidence]
    return JointTable([n for n, _ in keep], [c for _, c in keep], sub / mass)


def total_variation(p: JointTable, q: JointTable) -> float:
    if p.names != q.names or p.cardinalities != q.cardinalities:
        raise ValueError(f"tables over different spaces: {p.names}{p.cardinalities} "
                         f"vs {q.names}{q.cardinalities}")
    return float(0.5 * np.abs(p.probs - q.probs).sum())


def conditional_table(joint: JointTable, child: str, parents: Sequence[str],
                      fallback: np.ndarray | None = None) -> np.ndarray:
    """P(child | parents) as a CPT in the lexicographic row layout.

    Rows whose parent configuration has probability zero get ``fallback``
    (the matching row of it), or the uniform distribution.
    """
    m = joint.marginal(list(parents) + [child]).tensor
    card = m.shape[-1]
    m = m.reshape(-1, card)
    mass = m.sum(axis=1, keepdims=True)
    out = np.empty_like(m)
    positive = mass[:, 0] > 0
    out[positive] = m[positive] / mass[positive]
    if fallback is not None:
        out[~positive] = np.asarray(fallback, dtype=float)[~positive]
    else:
        out[~positive] = 1.0 / card
    return out


@dataclass(frozen=True)
class Intervention:
    """Forced assignment ``do(X_F = x)`` for the features in ``values``."""

    values: Mapping[str, int]

    def __post_init__(self):
        if not self.values:
            raise ValueError("an intervention needs at least one target")
        object.__setattr__(self, "values", {k: int(v) for k, v in self.values.items()})

    @property
    def targets(self) -> frozenset[str]:
        return frozenset(self.values)


def do(net: CategoricalBayesNet, iv: Intervention | Mapping[str, int]) -> CategoricalBayesNet:
    """Graph surgery: cut the in-edges of every target and pin it to its value."""
    if not isinstance(iv, Intervention):
        iv = Intervention(iv)
    net.check()
    for t, v in iv.values.items():
        if t not in net.graph:
            raise UnknownFeatureError(t)
        if not 0 <= v < net.cardinalities[t]:
            raise ValueError(f"do({t}={v}) outside 0..{net.cardinalities[t] - 1}")
    graph = Dag(net.nodes, [(u, v) for u, v in net.graph.edges if v not in iv.targets])
    cpts = dict(net.cpts)
    for t, v in iv.values.items():
        row = np.zeros((1, net.cardinalities[t]))
        row[0, v] = 1.0
        cpts[t] = row
    return CategoricalBayesNet(graph, net.cardinalities, cpts, net.states)


def modify_cpt(net: CategoricalBayesNet, feature: str, new_cpt) -> CategoricalBayesNet:
    """Copy of ``net`` with one CPT replaced; the result is validated."""
    if feature not in net.graph:
        raise UnknownFeatureError(feature)
    t = np.array(new_cpt, dtype=float)
    if t.ndim == 1:
        t = t.reshape(1, -1)
    expected = (net.row_count(feature), net.cardinalities[feature])
    if t.shape != expected:
        raise InvalidNetError([Violation(feature, None, f"CPT shape {t.shape}, expected {expected}")])
    cpts = dict(net.cpts)
    cpts[feature] = t
    return CategoricalBayesNet(net.graph, net.cardinalities, cpts, net.states).check()


def add_root_parent(net: CategoricalBayesNet, root: str, prior, kernels: Mapping[str, Sequence],
                    states: Sequence[str] | None = None) -> CategoricalBayesNet:
    """Append a new root feature that becomes a parent of every key of ``kernels``.

    ``kernels[f][s]`` is f's CPT (in f's current row layout) for root state s.
    The root is appended as the last node.
    """
    if root in net.graph:
        raise GraphError(f"feature {root!r} already present")
    prior = np.asarray(prior, dtype=float).reshape(1, -1)
    card = prior.shape[1]
    graph = Dag(net.nodes + (root,), set(net.graph.edges) | {(root, f) for f in kernels})
    cpts = dict(net.cpts)
    cpts[root] = prior
    for f, per_state in kernels.items():
        if len(per_state) != card:
            raise InvalidNetError([Violation(f, None, f"need {card} kernels, got {len(per_state)}")])
        blocks = [np.asarray(k, dtype=float).reshape(net.row_count(f), net.cardinalities[f])
                  for k in per_state]
        # root has the highest index, so it is the least significant parent
        cpts[f] = np.stack(blocks, axis=1).reshape(-1, net.cardinalities[f])
    cards = dict(net.cardinalities)
    cards[root] = card
    st = dict(net.states)
    if states is not None:
        st[root] = tuple(states)
    return CategoricalBayesNet(graph, cards, cpts, st).check()


# ---------------------------------------------------------------------------
# random fixtures

def random_dag(n: int, edge_prob: float, rng, names: Sequence[str] | None = None) -> Dag:
    """Erdos-Renyi DAG: a random causal order, each forward pair linked with ``edge_prob``."""
    names = list(names) if names is not None else [f"x{i}" for i in range(n)]
    order = rng.permutation(n)
    edges = [(names[order[i]], names[order[j]])
             for i in range(n) for j in range(i + 1, n) if rng.random() < edge_prob]
    return Dag(names, edges)


def random_cpts(graph: Dag, cardinalities: Mapping[str, int], rng) -> CategoricalBayesNet:
    """Each CPT row drawn from a flat Dirichlet."""
    cpts = {}
    for f in graph.nodes:
        rows = math.prod(cardinalities[p] for p in graph.parents(f))
        cpts[f] = rng.dirichlet(np.ones(cardinalities[f]), size=rows)
    return CategoricalBayesNet(graph, cardinalities, cpts)


def exact_independent(joint: JointTable, x: str, y: str, z: Iterable[str] = (),
                      tol: float = 1e-9) -> bool:
    """Whether x and y are independent given z in an exact joint, up to ``tol``."""
    z = list(z)
    t = joint.marginal(z + [x, y]).tensor
    t = t.reshape(-1, t.shape[-2], t.shape[-1])
    for block in t:
        mass = block.sum()
        if mass <= 0:
            continue
        p = block / mass
        if np.abs(p - np.outer(p.sum(axis=1), p.sum(axis=0))).max() > tol:
            return False
    return True


def conditional_mutual_information(joint: JointTable, x: str, y: str,
                                   z: Iterable[str] = ()) -> float:
    z = list(z)
    t = joint.marginal(z + [x, y]).tensor
    t = t.reshape(-1, t.shape[-2], t.shape[-1])
    total = 0.0
    for block in t:
        mass = block.sum()
        if mass <= 0:
            continue
        px = block.sum(axis=1, keepdims=True)
        py = block.sum(axis=0, keepdims=True)
        nz = block > 0
        total += float((block[nz] * np.log(block[nz] * mass / (px @ py)[nz])).sum())
    return total


def ci_queries(nodes: Sequence[str]):
    """All (x, y, z) with x before y and z a subset of the remaining nodes."""
    nodes = list(nodes)
    for i, x in enumerate(nodes):
        for y in nodes[i + 1:]:
            rest = [n for n in nodes if n not in (x, y)]
            for k in range(len(rest) + 1):
                for z in itertools.combinations(rest, k):
                    yield x, y, z


def is_faithful(net: CategoricalBayesNet, tol: float = 1e-6, min_dependence: float = 0.0,
                joint: JointTable | None = None) -> bool:
    """Every exact conditional independence is a d-separation.

    With ``min_dependence`` > 0, d-connected triples must also carry at
    least that much conditional mutual information (nats).
    """
    joint = joint or enumerate_joint(net)
    for x, y, z in ci_queries(net.nodes):
        if net.graph.d_separated(x, y, z):
            continue
        if exact_independent(joint, x, y, z, tol):
            return False
        if min_dependence > 0 and conditional_mutual_information(joint, x, y, z) < min_dependence:
            return False
    return True


def random_generic_net(graph: Dag, cardinalities: Mapping[str, int], rng, *,
                       tol: float = 1e-6, min_dependence: float = 0.0,
                       max_tries: int = 1000) -> CategoricalBayesNet:
    """Flat-Dirichlet CPTs, redrawn until the net is faithful to ``graph``."""
    for _ in range(max_tries):
        net = random_cpts(graph, cardinalities, rng)
        if is_faithful(net, tol, min_dependence):
            return net
    raise RuntimeError(f"no faithful CPT draw in {max_tries} tries for {graph!r}")
