"""Explain concept drift in categorical data streams by causal discovery over a time feature."""

from .bayesnet import (CategoricalBayesNet, Intervention, JointTable, condition, do,
                       enumerate_joint, modify_cpt, sample, total_variation, validate)
from .citest import CiResult, GSquareTest, OracleTest, chi2_sf, g_square, oracle_ci
from .errors import (DataError, DriftCauseError, FormatError, GraphError, InvalidNetError,
                     StateSpaceError, UnknownFeatureError, ZeroProbabilityError)
from .evaluation import RunReport, detection_rate, render_report, run_experiment
from .explain import (Explanation, ReversalModel, build_reversal, explain_drift, explain_graph,
                      ground_truth_sets, minimality_witness, verify_reversal)
from .graph import Dag, Pdag, compare_edges, d_separated, to_dot
from .pc import PcConfig, PcResult, discover, pc
from .records import Records
from .stream import TIME, DriftStream, ScenarioSpec, attach_time, build_stream, truth_graph

__version__ = "0.1.0"

__all__ = [
    "CategoricalBayesNet", "Intervention", "JointTable", "condition", "do", "enumerate_joint",
    "modify_cpt", "sample", "total_variation", "validate",
    "CiResult", "GSquareTest", "OracleTest", "chi2_sf", "g_square", "oracle_ci",
    "DataError", "DriftCauseError", "FormatError", "GraphError", "InvalidNetError",
    "StateSpaceError", "UnknownFeatureError", "ZeroProbabilityError",
    "RunReport", "detection_rate", "render_report", "run_experiment",
    "Explanation", "ReversalModel", "build_reversal", "explain_drift", "explain_graph",
    "ground_truth_sets", "minimality_witness", "verify_reversal",
    "Dag", "Pdag", "compare_edges", "d_separated", "to_dot",
    "PcConfig", "PcResult", "discover", "pc",
    "Records",
    "TIME", "DriftStream", "ScenarioSpec", "attach_time", "build_stream", "truth_graph",
]
