"""Hypothesis-management probabilistic database engine.

Deterministic scientific models, their competing parameterizations, and
the analyst's confidence in each are encoded as uncertain relations over
a table of independent discrete random variables; predictions can then be
ranked by exact probability and conditioned on observed data.
"""

from .algebra import (
    Comparison,
    conf,
    eq,
    join,
    possible,
    project,
    repair_key,
    select,
    union_all,
)
from .analytics import (
    Observation,
    RankedPrediction,
    bayes_condition,
    observe,
    rank_predictions,
    writeback_posteriors,
)
from .errors import HypoDBError
from .fd import FD, FDSet, RelationScheme, synthesize_3nf, u_ptc
from .ingest import (
    TrialInput,
    TrialOutput,
    UncertaintyFactor,
    learn_factors,
    load_trials,
)
from .modeling import HypothesisModel, evaluate, extract_fds, parse_model
from .pipeline import Engine, Hypothesis, Phenomenon, Project, build, load_project
from .worlds import (
    Attribute,
    Descriptor,
    URelation,
    WorldTable,
    descriptor_probability,
    enumerate_worlds,
    event_probability,
)

__version__ = "0.1.0"

__all__ = [
    "Attribute",
    "Comparison",
    "Descriptor",
    "Engine",
    "FD",
    "FDSet",
    "HypoDBError",
    "Hypothesis",
    "HypothesisModel",
    "Observation",
    "Phenomenon",
    "Project",
    "RankedPrediction",
    "RelationScheme",
    "TrialInput",
    "TrialOutput",
    "URelation",
    "UncertaintyFactor",
    "WorldTable",
    "bayes_condition",
    "build",
    "conf",
    "descriptor_probability",
    "enumerate_worlds",
    "eq",
    "evaluate",
    "event_probability",
    "extract_fds",
    "join",
    "learn_factors",
    "load_project",
    "load_trials",
    "observe",
    "parse_model",
    "possible",
    "project",
    "rank_predictions",
    "repair_key",
    "select",
    "synthesize_3nf",
    "u_ptc",
    "union_all",
    "writeback_posteriors",
]
