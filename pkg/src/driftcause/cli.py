"""Command-line front end.

Exit status: 0 success, 1 usage error, 2 bad input (missing file, parse or
data error), 3 internal error or a failed reversal check.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .bayesnet import sample
from .errors import DriftCauseError
from .evaluation import render_report, run_experiment
from .explain import build_reversal, explain_drift, minimality_witness, verify_reversal
from .graph import Dag, diff_dot, to_dot
from .pc import PcConfig, discover
from .stream import TIME, attach_time, build_stream

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
REVERSAL_TOLERANCE = 1e-9

log = logging.getLogger("driftcause")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(text: str, path):
    """Write to ``path``, or to standard output when no path is given."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _config(args, time_feature) -> PcConfig:
    background = time_feature if args.background_time == "on" else None
    return PcConfig(alpha=args.alpha, max_cond_size=args.max_cond_size, background=background,
                    adequacy=args.adequacy)


def _stream(args):
    stream = io.read_stream(args.stream, args.time_feature, args.bins)
    if args.windows is not None and args.windows != stream.windows:
        stream = attach_time(stream.data, args.windows, args.time_feature)
    return stream


def cmd_sample(args):
    net = io.load_net(args.net)
    records = sample(net, args.n, args.seed)
    _emit(io.format_records(records), args.output)


def cmd_scenario(args):
    spec = io.load_scenario(args.scenario)
    if args.seed is not None:
        spec = spec.replace(seed=args.seed)
    stream = build_stream(spec, args.windows, align=not args.unaligned,
                          time_feature=args.time_feature)
    _emit(io.format_records(stream.records), args.output)


def cmd_discover(args):
    stream = _stream(args)
    result = discover(stream.records, None, _config(args, stream.time_feature))
    _emit(io.dump_json(io.graph_to_dict(result.graph)), args.output)
    if args.log:
        Path(args.log).write_text(result.log.to_json() + "\n", encoding="utf-8")


def cmd_explain(args):
    stream = _stream(args)
    explanation = explain_drift(stream, _config(args, stream.time_feature))
    sys.stdout.write(explanation.summary())
    if args.json:
        Path(args.json).write_text(io.dump_json(io.explanation_to_dict(explanation)),
                                   encoding="utf-8")


def cmd_evaluate(args):
    spec = io.load_scenario(args.scenario)
    if args.seed is not None:
        spec = spec.replace(seed=args.seed)
    if args.windows is not None:
        spec = spec.replace(windows=args.windows)
    truth = io.load_graph(args.truth) if args.truth else None
    if truth is not None and not isinstance(truth, Dag):
        raise DriftCauseError("the truth graph must be fully directed")
    report = run_experiment(spec, truth, args.runs, _config(args, args.time_feature),
                            time_feature=args.time_feature)
    dot, text = render_report(report)
    _emit(report.to_json(include_timing=args.timing), args.output)
    if args.dot:
        Path(args.dot).write_text(dot, encoding="utf-8")
    if args.text:
        Path(args.text).write_text(text, encoding="utf-8")
    if report.failed:
        log.warning("%d of %d runs failed", len(report.failed), report.n_runs)


def cmd_verify_thm3(args):
    net, designated = io.load_net_with_time(args.net)
    time_feature = args.time_feature or designated or TIME
    card = net.cardinalities.get(time_feature)
    if card is None:
        raise DriftCauseError(f"net has no time feature {time_feature!r}")
    windows = range(card) if args.window is None else [args.window]
    worst = 0.0
    for w in windows:
        model = build_reversal(net, w, time_feature)
        tv = verify_reversal(net, w, model, time_feature)
        worst = max(worst, tv)
        print(f"window {w}: altered {{{', '.join(net.graph.sort(model.altered))}}} "
              f"added edges {len(model.added_edges)} TV {tv:.3e}")
        if args.export:
            io.save_net(model.net, f"{args.export}.w{w}.net")
    for wit in minimality_witness(net, args.window, time_feature).witnesses:
        states = " ".join(f"{p}={net.states[p][s]}" for p, s in wit.parent_states.items())
        print(f"witness {wit.feature}: window {wit.window} {states or '(no parents)'} "
              f"difference {wit.difference:.4f}")
    ok = worst < REVERSAL_TOLERANCE
    print(f"max TV {worst:.3e} {'<' if ok else '>='} {REVERSAL_TOLERANCE:g}")
    return EXIT_OK if ok else EXIT_INTERNAL


def cmd_dot(args):
    path = io.resolve(args.graph)
    if path.read_text(encoding="utf-8").startswith(io.NET_MAGIC):
        g = io.load_net(path).graph
    else:
        g = io.load_graph(path)
    if args.truth:
        truth = io.load_graph(args.truth)
        if not isinstance(truth, Dag):
            raise DriftCauseError("the truth graph must be fully directed")
        text = diff_dot(truth, g)
    else:
        text = to_dot(g)
    _emit(text, args.output)


def _discovery_flags(p):
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")
    p.add_argument("--adequacy", type=float, default=10.0,
                   help="samples required per degree of freedom (default 10)")
    p.add_argument("--max-cond-size", type=int, default=None)
    p.add_argument("--background-time", choices=("on", "off"), default="on",
                   help="forbid edges into the time feature (default on)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="driftcause", description="Explain concept drift with causal discovery.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="sample records from a net file")
    p.add_argument("net")
    p.add_argument("-n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("scenario", help="generate a drifting stream CSV from a scenario file")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--windows", type=int)
    p.add_argument("--unaligned", action="store_true",
                   help="cut equal windows without regard to the drift point")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_scenario)

    for name, func, helptext in (("discover", cmd_discover, "learn a PDAG from a stream CSV"),
                                 ("explain", cmd_explain, "explain the drift in a stream CSV")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("stream")
        p.add_argument("--windows", type=int, help="re-cut the stream into this many windows")
        p.add_argument("--bins", type=int, help="quantile bins for continuous columns")
        _discovery_flags(p)
        p.set_defaults(func=func)
    sub.choices["discover"].add_argument("-o", "--output")
    sub.choices["discover"].add_argument("--log", help="write the decision log as JSON")
    sub.choices["explain"].add_argument("--json", help="write the explanation as JSON")

    p = sub.add_parser("evaluate", help="repeat a scenario and score it against the truth")
    p.add_argument("scenario")
    p.add_argument("--truth", help="graph JSON; default: base net plus time -> drifting features")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int)
    p.add_argument("--windows", type=int)
    p.add_argument("--timing", action="store_true", help="include wall times in the report")
    p.add_argument("-o", "--output")
    p.add_argument("--dot")
    p.add_argument("--text")
    _discovery_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("verify-thm3", help="check the conditional drift reversal on a net file")
    p.add_argument("net")
    p.add_argument("--window", type=int)
    p.add_argument("--time", dest="time_feature", default=None)
    p.add_argument("--export", help="path prefix for the reversal nets")
    p.set_defaults(func=cmd_verify_thm3)

    p = sub.add_parser("dot", help="render a graph JSON or net file as DOT")
    p.add_argument("graph")
    p.add_argument("--truth", help="graph JSON to diff against")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_dot)

    for name in ("scenario", "discover", "explain", "evaluate"):
        sub.choices[name].add_argument("--time-feature", default=TIME)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s: %(message)s")
    try:
        status = args.func(args)
    except (DriftCauseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK if status is None else status
