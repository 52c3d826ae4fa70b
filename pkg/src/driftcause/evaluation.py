"""Repeated stream generation + discovery, scored against a known graph."""

from __future__ import annotations

import json
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .citest import CiTest
from .errors import GraphError, UnknownFeatureError
from .explain import Explanation, explain_drift, ground_truth_sets
from .graph import CORRECT, EXTRA, MISSING, REVERSED, Dag, EdgeDiff, compare_edges, to_dot
from .pc import PcConfig
from .stream import TIME, DriftStream, ScenarioSpec, build_stream, truth_graph

TestFactory = Callable[[DriftStream], CiTest]


@dataclass
class RunRecord:
    run: int
    seed: int
    diff: EdgeDiff | None = None
    explanation: Explanation | None = None
    error: str | None = None
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self, include_timing=False) -> dict:
        d = {"run": self.run, "seed": self.seed, "ok": self.ok}
        if self.error is not None:
            d["error"] = self.error
        if self.diff is not None:
            d["edges"] = self.diff.as_dict()
        if self.explanation is not None:
            d["explanation"] = self.explanation.to_dict()
            g = self.explanation.graph
            d["graph"] = {"directed": [list(e) for e in g.sorted_directed()],
                          "undirected": [list(e) for e in g.sorted_undirected()]}
        if include_timing:
            d["wall_time"] = self.wall_time
        return d


@dataclass
class RunReport:
    """Per-run records plus the aggregates recomputed from them."""

    name: str
    truth: Dag
    time_feature: str
    config: PcConfig
    runs: list[RunRecord] = field(default_factory=list)

    @property
    def n_runs(self) -> int:
        return len(self.runs)

    @property
    def failed(self) -> list[int]:
        return [r.run for r in self.runs if not r.ok]

    def _explained(self):
        return [r.explanation for r in self.runs if r.explanation is not None]

    def child_counts(self) -> Counter:
        return Counter(f for e in self._explained() for f in e.children)

    def parent_counts(self) -> Counter:
        return Counter(f for e in self._explained() for f in e.conditional_parents)

    def ancestor_counts(self) -> Counter:
        return Counter(f for e in self._explained() for f in e.ancestors)

    def edge_counts(self) -> Counter:
        """Found edges over all runs, keyed (u, "->" or "--", v); undirected in index order."""
        c = Counter()
        for e in self._explained():
            c.update((u, "->", v) for u, v in e.graph.sorted_directed())
            c.update((u, "--", v) for u, v in e.graph.sorted_undirected())
        return c

    def diff_totals(self) -> dict[str, int]:
        totals = {CORRECT: 0, REVERSED: 0, MISSING: 0, EXTRA: 0}
        for r in self.runs:
            if r.diff is not None:
                for k in totals:
                    totals[k] += getattr(r.diff, k)
        return totals

    def truth_sets(self) -> Explanation:
        return ground_truth_sets(self.truth, self.time_feature)

    def to_dict(self, include_timing=False) -> dict:
        n = self.n_runs
        truth = self.truth_sets()
        cfg = self.config
        return {
            "name": self.name,
            "time_feature": self.time_feature,
            "config": {"alpha": cfg.alpha, "adequacy": cfg.adequacy,
                       "max_cond_size": cfg.max_cond_size, "background": cfg.background,
                       "stable": cfg.stable},
            "truth": {"nodes": list(self.truth.nodes),
                      "edges": [list(e) for e in self.truth.sorted_edges()],
                      "explanation": truth.to_dict()},
            "runs": [r.to_dict(include_timing) for r in self.runs],
            "aggregate": {
                "runs": n,
                "failed": self.failed,
                "edge_totals": self.diff_totals(),
                "edge_counts": {" ".join(k): c for k, c in sorted(self.edge_counts().items())},
                "child_counts": dict(sorted(self.child_counts().items())),
                "parent_counts": dict(sorted(self.parent_counts().items())),
                "ancestor_counts": dict(sorted(self.ancestor_counts().items())),
                "child_detection_rate": {f: detection_rate(self, f)
                                         for f in truth._ordered(truth.children)},
            },
        }

    def to_json(self, include_timing=False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=1, sort_keys=True) + "\n"


def run_experiment(spec: ScenarioSpec, truth: Dag | None = None, runs: int = 10,
                   config: PcConfig | None = None, test_factory: TestFactory | None = None,
                   time_feature: str = TIME) -> RunReport:
    """Run the scenario ``runs`` times with seeds ``spec.seed + i``.

    A run that raises is recorded with its error and does not stop the
    others. ``test_factory`` builds the CI test per stream (e.g. an oracle);
    the default is the g-square test from ``config``.
    """
    if runs < 1:
        raise ValueError("at least one run is required")
    truth = truth_graph(spec, time_feature) if truth is None else truth
    expected = set(spec.base_net.nodes) | {time_feature}
    if set(truth.nodes) != expected:
        raise GraphError(f"truth nodes {sorted(truth.nodes)} do not match scenario {sorted(expected)}")
    ground_truth_sets(truth, time_feature)
    config = PcConfig(background=time_feature) if config is None else config
    report = RunReport(spec.name, truth, time_feature, config)
    for i in range(runs):
        seed = spec.seed + i
        record = RunRecord(i, seed)
        start = time.perf_counter()
        try:
            stream = build_stream(spec, seed=seed, time_feature=time_feature)
            test = test_factory(stream) if test_factory is not None else None
            record.explanation = explain_drift(stream, config, test)
            record.diff = compare_edges(truth, record.explanation.graph)
        except Exception as exc:  # recorded per run
            record.error = f"{type(exc).__name__}: {exc}"
        record.wall_time = time.perf_counter() - start
        report.runs.append(record)
    return report


def detection_rate(report: RunReport, feature: str) -> float:
    """Share of all runs whose explanation lists ``feature`` as a child of time."""
    if feature not in report.truth:
        raise UnknownFeatureError(feature)
    return report.child_counts()[feature] / report.n_runs


def render_report(report: RunReport, truth: Dag | None = None) -> tuple[str, str]:
    """Annotated DOT plus a plain-text summary.

    Truth edges are black, detections green with pen width growing with the
    number of runs that found them; children of time are outlined green,
    again weighted by detections.
    """
    n = max(report.n_runs, 1)
    truth = report.truth if truth is None else truth
    t = report.time_feature
    child_counts = report.child_counts()
    true_children = truth.children(t) if t in truth else frozenset()
    node_attrs = {}
    for f in truth.nodes:
        if f in true_children or child_counts[f]:
            k = child_counts[f]
            node_attrs[f] = {"color": "green3", "penwidth": f"{1 + 3 * k / n:.2f}",
                             "xlabel": f"{k}/{n}"}
    edges = [((u, v), {"color": "black"}) for u, v in truth.sorted_edges()]
    for (u, kind, v), k in sorted(report.edge_counts().items()):
        attrs = {"color": "green3", "penwidth": f"{1 + 4 * k / n:.2f}", "label": str(k)}
        if kind == "--":
            attrs["dir"] = "none"
        edges.append(((u, v), attrs))
    legend = [
        "subgraph cluster_legend {",
        '  label="legend"; style="dashed";',
        f'  "legend_text" [shape="note", label="black: ground truth\\ngreen: detected '
        f'(width ~ runs, {n} total)\\ngreen outline: child of {t}"];',
        "}",
    ]
    dot = to_dot(Dag(truth.nodes), name=report.name, node_attrs=node_attrs,
                 extra_edges=edges, preamble=legend)

    totals = report.diff_totals()
    lines = [f"scenario: {report.name}", f"runs: {report.n_runs} (failed: {len(report.failed)})",
             f"truth edges: {len(truth.edges)}", "",
             "edge totals over runs:"]
    lines += [f"  {k:<9}{totals[k]:>6}" for k in (CORRECT, REVERSED, MISSING, EXTRA)]
    lines += ["", f"children of {t}:", f"  {'feature':<20}{'truth':>6}{'detected':>10}{'rate':>7}"]
    for f in truth.nodes:
        if f == t or not (f in true_children or child_counts[f]):
            continue
        mark = "yes" if f in true_children else "no"
        lines.append(f"  {f:<20}{mark:>6}{child_counts[f]:>10}{child_counts[f] / n:>7.2f}")
    parents = report.parent_counts()
    if parents:
        lines += ["", "conditional parents (runs):"]
        lines += [f"  {f:<20}{parents[f]:>6}" for f in truth.nodes if parents[f]]
    return dot, "\n".join(lines) + "\n"
