"""Evaluation and formulation toolkit for linear programming word problems."""

from .canonical import (
    AccuracyReport,
    CanonConstraint,
    CanonForm,
    CanonObjective,
    MatchResult,
    canonicalize,
    decl_equal,
    mapping_accuracy,
    match_declarations,
)
from .entities import (
    AnnotatedProblem,
    EntityType,
    Span,
    TokenTag,
    bio_to_spans,
    dataset_stats,
    load_dataset,
    spans_to_bio,
)
from .errors import LpwpError
from .ir import (
    ConstraintDecl,
    Direction,
    LinExpr,
    ObjectiveDecl,
    ProblemFormulation,
    Relation,
    VarOrderMap,
    normalize_direction_phrase,
    parse_ir,
    serialize_ir,
)
from .lp import LpModel, build_model, emit_lp_format, emit_mps
from .ner_scorer import NerScore, count_matches, score_ner
from .simplex import Solution, SolveStatus, enumerate_vertices, solve_simplex

__version__ = "0.1.0"
