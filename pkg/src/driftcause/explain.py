"""Causal drift explanations and the drift-reversing conditional intervention.

Drift is read off a discovered graph over the data features plus an explicit
time feature: the children of time are what an operator has to act on
(conditioned on their other parents), and children together with all their
ancestors form an unconditional drift-reversing set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .bayesnet import (DEFAULT_STATE_CAP, CategoricalBayesNet, JointTable, condition,
                       conditional_table, enumerate_joint, total_variation)
from .citest import CiTest
from .errors import DataError, DriftCauseError, UnknownFeatureError, ZeroProbabilityError
from .graph import Dag, Pdag
from .pc import PcConfig, discover
from .stream import TIME, DriftStream

WITNESS_TOLERANCE = 1e-9


class InvalidGroundTruthError(DriftCauseError, ValueError):
    """The time feature has parents in a graph claimed as ground truth."""


@dataclass(frozen=True, eq=False)
class Explanation:
    """(children, conditional parents, ancestors) of the time feature.

    ``ambiguous`` lists members whose inclusion rests on an undirected edge
    of the discovered graph. ``ancestors`` may contain children of time that
    are ancestors of other children; ``ancestors_excluding_children`` drops
    those.
    """

    children: frozenset[str]
    conditional_parents: frozenset[str]
    ancestors: frozenset[str]
    graph: Pdag
    time_feature: str = TIME
    ambiguous: frozenset[str] = frozenset()
    evidence: dict = field(default_factory=dict)

    @property
    def ancestors_excluding_children(self) -> frozenset[str]:
        return self.ancestors - self.children

    @property
    def has_drift(self) -> bool:
        return bool(self.children)

    def _ordered(self, names):
        return sorted(names, key=self.graph.index)

    def to_dict(self) -> dict:
        return {
            "time_feature": self.time_feature,
            "children": self._ordered(self.children),
            "conditional_parents": self._ordered(self.conditional_parents),
            "ancestors": self._ordered(self.ancestors),
            "ancestors_excluding_children": self._ordered(self.ancestors_excluding_children),
            "ambiguous": self._ordered(self.ambiguous),
            "evidence": {k: self.evidence[k] for k in sorted(self.evidence)},
        }

    def summary(self) -> str:
        def fmt(names):
            names = self._ordered(names)
            return "{" + ", ".join(f"{n}?" if n in self.ambiguous else n for n in names) + "}"
        return (f"C = {fmt(self.children)}\n"
                f"P = {fmt(self.conditional_parents)}\n"
                f"A = {fmt(self.ancestors)}\n")


def explain_graph(graph: Pdag | Dag, time_feature: str = TIME) -> Explanation:
    """Children, their other parents and their ancestors of ``time_feature``.

    Undirected edges at time count their far end as a child. For parents
    and ancestors undirected edges are followed in both directions; every
    feature that is only reached that way is flagged ambiguous.
    """
    if isinstance(graph, Dag):
        graph = Pdag.from_dag(graph)
    if time_feature not in graph:
        raise UnknownFeatureError(time_feature)
    direct = graph.children(time_feature)
    loose = graph.neighbors(time_feature)
    children = direct | loose
    parents_all, parents_dir, anc_all, anc_dir = set(), set(), set(), set()
    for f in children:
        parents_all |= graph.possible_parents(f)
        parents_dir |= graph.parents(f)
        anc_all |= graph.possible_ancestors(f)
        anc_dir |= _directed_ancestors(graph, f)
    excluded = {time_feature} | children
    cond_parents = frozenset(parents_all - excluded)
    ancestors = frozenset(anc_all - {time_feature})
    ambiguous = (set(loose) | (cond_parents - parents_dir) | (ancestors - anc_dir))
    return Explanation(frozenset(children), cond_parents, ancestors, graph, time_feature,
                       frozenset(ambiguous))


def _directed_ancestors(graph: Pdag, f):
    seen, stack = set(), [f]
    while stack:
        for p in graph.parents(stack.pop()):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    seen.discard(f)
    return seen


def explain_drift(stream: DriftStream, config: PcConfig | None = None,
                  test: CiTest | None = None) -> Explanation:
    """Discover a graph over the time-augmented stream and explain the drift in it.

    By default time is declared causeless (no edge may point into it); pass
    a config with ``background=None`` to run discovery unconstrained.
    """
    if stream.windows < 2:
        raise DataError("explaining drift needs at least two windows")
    if config is None:
        config = PcConfig(background=stream.time_feature)
    result = discover(stream.records, test, config)
    return explain_graph(result.graph, stream.time_feature)


def ground_truth_sets(g: Dag, time_feature: str = TIME) -> Explanation:
    """Exact explanation sets read from a true graph in which time is a root."""
    if time_feature not in g:
        raise UnknownFeatureError(time_feature)
    if g.parents(time_feature):
        raise InvalidGroundTruthError(
            f"time feature {time_feature!r} has parents {sorted(g.parents(time_feature))}")
    return explain_graph(g, time_feature)


# ---------------------------------------------------------------------------
# exact drift reversal on enumerable nets

@dataclass(frozen=True, eq=False)
class ReversalModel:
    """A net over the data features whose joint equals the window distribution.

    Only the ``altered`` features carry kernels conditioned on the window;
    ``added_edges`` link altered features along the topological order.
    """

    net: CategoricalBayesNet
    window: int
    altered: frozenset[str]
    added_edges: tuple[tuple[str, str], ...]
    time_feature: str = TIME

    @property
    def graph(self) -> Dag:
        return self.net.graph

    def changed_kernels(self, original: CategoricalBayesNet) -> list[str]:
        """Features whose kernel differs from the original one (or whose parents changed)."""
        out = []
        for f in self.net.nodes:
            if original.graph.parents(f) != self.net.graph.parents(f):
                out.append(f)
            elif not np.array_equal(original.cpt(f), self.net.cpt(f)):
                out.append(f)
        return out


def _time_checks(net: CategoricalBayesNet, time_feature: str):
    if time_feature not in net.graph:
        raise UnknownFeatureError(time_feature)
    if net.graph.parents(time_feature):
        raise InvalidGroundTruthError(f"time feature {time_feature!r} must be a root")


def _window_joint(joint: JointTable, time_feature, window, card):
    if not 0 <= int(window) < card:
        raise DataError(f"window {window} outside 0..{card - 1}")
    try:
        return condition(joint, {time_feature: int(window)})
    except ZeroProbabilityError:
        raise ZeroProbabilityError(f"window {window} has probability zero") from None


def build_reversal(net: CategoricalBayesNet, window: int, time_feature: str = TIME,
                   altered: Iterable[str] | None = None, *, cap: int = DEFAULT_STATE_CAP,
                   joint: JointTable | None = None) -> ReversalModel:
    """Net over the data features reproducing ``P(X | time = window)``.

    Altered features (default: the children of time) are fully connected
    along the topological order and given kernels conditioned on the window;
    every other feature keeps its time-free kernel. Altering a set that
    misses a child of time leaves that child with its time-averaged kernel,
    so the result no longer matches the window.
    """
    _time_checks(net, time_feature)
    joint = joint or enumerate_joint(net, cap)
    in_window = _window_joint(joint, time_feature, window, net.cardinalities[time_feature])
    data_nodes = [f for f in net.nodes if f != time_feature]
    observed = joint.marginal(data_nodes)
    children = net.graph.children(time_feature)
    altered = set(children) if altered is None else set(altered)
    for f in altered:
        if f not in net.graph or f == time_feature:
            raise UnknownFeatureError(f)
    order = [f for f in net.graph.topological_order() if f in altered]
    added = [(g, f) for i, g in enumerate(order) for f in order[i + 1:]
             if (g, f) not in net.graph.edges]
    graph = net.graph.remove_nodes([time_feature]).add_edges(added)
    cpts = {}
    for f in graph.nodes:
        parents = graph.sort(graph.parents(f))
        if f in altered:
            fallback = conditional_table(observed, f, parents)
            cpts[f] = conditional_table(in_window, f, parents, fallback)
        elif f in children:
            cpts[f] = conditional_table(observed, f, parents)
        else:
            cpts[f] = net.cpt(f)
    model_net = CategoricalBayesNet(graph, {f: net.cardinalities[f] for f in graph.nodes}, cpts,
                                    {f: net.states[f] for f in graph.nodes})
    return ReversalModel(model_net.check(), int(window), frozenset(altered), tuple(added),
                         time_feature)


def verify_reversal(net: CategoricalBayesNet, window: int, model: ReversalModel,
                    time_feature: str = TIME, *, cap: int = DEFAULT_STATE_CAP) -> float:
    """Total variation between the window distribution and the model's joint."""
    _time_checks(net, time_feature)
    target = _window_joint(enumerate_joint(net, cap), time_feature, window,
                           net.cardinalities[time_feature])
    return total_variation(target, enumerate_joint(model.net, cap))


def reversal_error(net: CategoricalBayesNet, altered: Iterable[str] | None = None,
                   time_feature: str = TIME, *, cap: int = DEFAULT_STATE_CAP) -> float:
    """Largest total variation over all positive-probability windows."""
    _time_checks(net, time_feature)
    joint = enumerate_joint(net, cap)
    prior = joint.marginal([time_feature]).probs
    altered = None if altered is None else list(altered)
    worst = 0.0
    for w in np.flatnonzero(prior > 0):
        model = build_reversal(net, int(w), time_feature, altered, joint=joint)
        target = condition(joint, {time_feature: int(w)})
        worst = max(worst, total_variation(target, enumerate_joint(model.net, cap)))
    return worst


@dataclass(frozen=True)
class Witness:
    """A kernel row of ``feature`` that must change to reproduce ``window``."""

    feature: str
    window: int
    row: int
    parent_states: Mapping[str, int]
    difference: float


@dataclass(frozen=True)
class MinimalityResult:
    witnesses: tuple[Witness, ...]
    unfaithful: tuple[str, ...] = ()

    @property
    def complete(self) -> bool:
        """Every child of time has a witness."""
        return not self.unfaithful

    def for_feature(self, f) -> Witness | None:
        return next((w for w in self.witnesses if w.feature == f), None)


def minimality_witness(net: CategoricalBayesNet, window: int | None = None,
                       time_feature: str = TIME, *, tol: float = WITNESS_TOLERANCE,
                       cap: int = DEFAULT_STATE_CAP) -> MinimalityResult:
    """For each child of time, a window and row where its kernel has to change.

    The reference is the time-averaged kernel over the same parents, i.e.
    what the feature follows when nobody intervenes on it. Windows are
    searched starting at ``window`` (default 0); within the first window
    that shows a difference the row with the largest difference is
    reported. Children without any such row are listed as ``unfaithful``.
    """
    _time_checks(net, time_feature)
    joint = enumerate_joint(net, cap)
    prior = joint.marginal([time_feature]).probs
    card = net.cardinalities[time_feature]
    start = 0 if window is None else int(window)
    windows = [w for w in list(range(start, card)) + list(range(start)) if prior[w] > 0]
    if not windows:
        raise ZeroProbabilityError("no window has positive probability")
    model = build_reversal(net, windows[0], time_feature, joint=joint)
    graph = model.graph
    observed = joint.marginal([f for f in net.nodes if f != time_feature])
    witnesses, unfaithful = [], []
    for f in net.graph.sort(net.graph.children(time_feature)):
        parents = graph.sort(graph.parents(f))
        reference = conditional_table(observed, f, parents)
        found = None
        for w in windows:
            in_window = condition(joint, {time_feature: w})
            mass = in_window.marginal(parents).probs if parents else np.ones(1)
            diff = np.abs(conditional_table(in_window, f, parents) - reference).max(axis=1)
            diff[mass <= 0] = 0.0
            row = int(np.argmax(diff))
            if diff[row] > tol:
                states = (dict(zip(parents, (int(i) for i in np.unravel_index(
                    row, [net.cardinalities[p] for p in parents])))) if parents else {})
                found = Witness(f, w, row, states, float(diff[row]))
                break
        if found is None:
            unfaithful.append(f)
        else:
            witnesses.append(found)
    return MinimalityResult(tuple(witnesses), tuple(unfaithful))
