"""Hand-written example nets and scenarios; the bundled data files are generated from these."""

from __future__ import annotations

from pathlib import Path

from .bayesnet import CategoricalBayesNet
from .graph import Dag
from .stream import ScenarioSpec, build_stream


def _net(spec, edges):
    """spec: name -> (states, cpt rows), in node order."""
    graph = Dag(list(spec), edges)
    return CategoricalBayesNet(graph, {f: len(s) for f, (s, _) in spec.items()},
                               {f: rows for f, (_, rows) in spec.items()},
                               {f: s for f, (s, _) in spec.items()}).check()


SPRINKLER_PRE = [[0.3, 0.7], [0.9, 0.1]]
SPRINKLER_POST = [[0.8, 0.2], [0.98, 0.02]]
WET = [[0.95, 0.05], [0.1, 0.9], [0.15, 0.85], [0.03, 0.97]]


def sprinkler_net() -> CategoricalBayesNet:
    """Rain and a sprinkler wetting the lawn; the sprinkler schedule changes over time."""
    return _net({
        "T": (("early", "late"), [[0.5, 0.5]]),
        "rain": (("no", "yes"), [[0.7, 0.3]]),
        "sprinkler": (("off", "on"), SPRINKLER_PRE + SPRINKLER_POST),
        "wet": (("dry", "wet"), WET),
    }, [("T", "sprinkler"), ("rain", "sprinkler"), ("rain", "wet"), ("sprinkler", "wet")])


def sprinkler_base_net() -> CategoricalBayesNet:
    return _net({
        "rain": (("no", "yes"), [[0.7, 0.3]]),
        "sprinkler": (("off", "on"), SPRINKLER_PRE),
        "wet": (("dry", "wet"), WET),
    }, [("rain", "sprinkler"), ("rain", "wet"), ("sprinkler", "wet")])


def sprinkler_scenario(pre=2500, post=2500, seed=0) -> ScenarioSpec:
    return ScenarioSpec(sprinkler_base_net(), (("sprinkler", SPRINKLER_POST),), pre, post, seed,
                        name="sprinkler")


def negative_scenario(pre=2500, post=2500, seed=0) -> ScenarioSpec:
    return ScenarioSpec(sprinkler_base_net(), (), pre, post, seed, name="negative")


def inflation_base_net() -> CategoricalBayesNet:
    """Census-like net in which capital gain, capital loss and income share education as a cause."""
    return _net({
        "age": (("young", "old"), [[0.6, 0.4]]),
        "sex": (("female", "male"), [[0.5, 0.5]]),
        "education": (("low", "mid", "high"), [[0.3, 0.5, 0.2], [0.4, 0.4, 0.2]]),
        "marital": (("single", "married"), [[0.7, 0.3], [0.3, 0.7]]),
        "relationship": (("other", "spouse"),
                         [[0.9, 0.1], [0.2, 0.8], [0.95, 0.05], [0.15, 0.85]]),
        "occupation": (("manual", "professional"),
                       [[0.8, 0.2], [0.5, 0.5], [0.2, 0.8], [0.7, 0.3], [0.45, 0.55], [0.15, 0.85]]),
        "hours": (("part", "full"), [[0.4, 0.6], [0.1, 0.9]]),
        "capital_gain": (("none", "some"), [[0.9, 0.1], [0.75, 0.25], [0.5, 0.5]]),
        "capital_loss": (("none", "some"), [[0.85, 0.15], [0.75, 0.25], [0.6, 0.4]]),
        "income": (("low", "high"), [[0.8, 0.2], [0.55, 0.45], [0.3, 0.7], [0.2, 0.8]]),
    }, [("age", "education"), ("age", "marital"), ("sex", "relationship"),
        ("marital", "relationship"), ("sex", "occupation"), ("education", "occupation"),
        ("occupation", "hours"), ("education", "capital_gain"), ("education", "capital_loss"),
        ("capital_gain", "income"), ("capital_loss", "income")])


def inflation_scenario(pre=5000, post=5000, seed=0) -> ScenarioSpec:
    return ScenarioSpec(inflation_base_net(), (
        ("capital_gain", [[0.7, 0.3], [0.5, 0.5], [0.25, 0.75]]),
        ("capital_loss", [[0.65, 0.35], [0.5, 0.5], [0.35, 0.65]]),
        ("income", [[0.55, 0.45], [0.35, 0.65], [0.1, 0.9], [0.05, 0.95]]),
    ), pre, post, seed, name="inflation")


def support_base_net() -> CategoricalBayesNet:
    """Student-like net; extra school support depends on sex."""
    return _net({
        "sex": (("F", "M"), [[0.5, 0.5]]),
        "address": (("urban", "rural"), [[0.7, 0.3]]),
        "famsup": (("no", "yes"), [[0.4, 0.6], [0.55, 0.45]]),
        "studytime": (("low", "high"), [[0.4, 0.6], [0.25, 0.75], [0.65, 0.35], [0.5, 0.5]]),
        "schoolsup": (("no", "yes"), [[0.85, 0.15], [0.9, 0.1]]),
        "failures": (("none", "some"), [[0.7, 0.3], [0.9, 0.1]]),
        "absences": (("low", "high"), [[0.6, 0.4], [0.45, 0.55]]),
        "grade": (("fail", "pass"), [[0.25, 0.75], [0.15, 0.85], [0.65, 0.35], [0.45, 0.55]]),
    }, [("address", "famsup"), ("sex", "studytime"), ("famsup", "studytime"),
        ("sex", "schoolsup"), ("studytime", "failures"), ("address", "absences"),
        ("failures", "grade"), ("schoolsup", "grade")])


def support_scenario(group="girls", pre=5000, post=5000, seed=0) -> ScenarioSpec:
    """Support is extended to one group only: the row for that sex changes."""
    rows = {"girls": [[0.45, 0.55], [0.9, 0.1]], "boys": [[0.85, 0.15], [0.5, 0.5]]}[group]
    return ScenarioSpec(support_base_net(), (("schoolsup", rows),), pre, post, seed,
                        name=f"support_{group}")


def bundled_contents() -> dict[str, str]:
    """File name -> text of every bundled data file."""
    from .io import format_net, format_records, format_scenario

    files = {
        "sprinkler.net": format_net(sprinkler_net(), "T"),
        "sprinkler_base.net": format_net(sprinkler_base_net()),
        "inflation_base.net": format_net(inflation_base_net()),
        "support_base.net": format_net(support_base_net()),
        "sprinkler.scenario": format_scenario(sprinkler_scenario(), "sprinkler_base.net"),
        "negative.scenario": format_scenario(negative_scenario(), "sprinkler_base.net"),
        "inflation.scenario": format_scenario(inflation_scenario(), "inflation_base.net"),
        "support_girls.scenario": format_scenario(support_scenario("girls"), "support_base.net"),
        "support_boys.scenario": format_scenario(support_scenario("boys"), "support_base.net"),
        "sprinkler_stream.csv": format_records(build_stream(sprinkler_scenario()).records),
    }
    return files


def write_bundled(directory) -> list[Path]:
    directory = Path(directory)
    out = []
    for name, text in bundled_contents().items():
        p = directory / name
        p.write_text(text, encoding="utf-8")
        out.append(p)
    return out
