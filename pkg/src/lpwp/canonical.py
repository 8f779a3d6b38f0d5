"""Canonical coefficient-vector form and declaration-level mapping accuracy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CanonicalizationError, DimensionError, LpwpError
from .ir import ConstraintDecl, Direction, LinExpr, ProblemFormulation, Relation, VarOrderMap

DEFAULT_TOL = 1e-6


@dataclass(eq=False)
class CanonObjective:
    direction: Direction
    coeffs: np.ndarray

    def __repr__(self) -> str:
        return f"CanonObjective({self.direction.value}, {self.coeffs.tolist()})"


@dataclass(eq=False)
class CanonConstraint:
    coeffs: np.ndarray
    relation: Relation
    bound: float

    def __post_init__(self) -> None:
        if self.relation is Relation.GE:
            raise ValueError("GE constraints must be normalized to LE")

    def __repr__(self) -> str:
        return f"CanonConstraint({self.coeffs.tolist()}, {self.relation.value}, {self.bound})"


@dataclass(eq=False)
class CanonForm:
    objective: CanonObjective
    constraints: list[CanonConstraint]
    vars: VarOrderMap

    @property
    def n_declarations(self) -> int:
        return 1 + len(self.constraints)


def _dense(expr: LinExpr, order: VarOrderMap) -> np.ndarray:
    v = np.zeros(len(order))
    for name, c in expr.terms.items():
        v[order.index(name)] += c
    return v


def canonicalize_constraint(c: ConstraintDecl, order: VarOrderMap, *,
                            normalize_scale: bool = False) -> CanonConstraint:
    coeffs = _dense(c.lhs, order) - _dense(c.rhs, order)
    bound = c.rhs.constant - c.lhs.constant
    if not coeffs.any():
        raise CanonicalizationError("constraint reduces to a comparison of constants")
    relation = c.relation
    if relation is Relation.GE:
        coeffs, bound, relation = -coeffs, -bound, Relation.LE
    if normalize_scale:
        scale = np.abs(coeffs).max()
        coeffs, bound = coeffs / scale, bound / scale
    # drop negative zeros so reports never print "-0"
    return CanonConstraint(coeffs + 0.0, relation, float(bound) + 0.0)


def canonicalize(f: ProblemFormulation, *, normalize_scale: bool = False) -> CanonForm:
    """Move variables left and constants right; flip GE rows into LE rows.

    With ``normalize_scale`` each constraint is divided by its largest
    absolute coefficient, so ``2x + 2y <= 10`` and ``x + y <= 5`` coincide.
    """
    order = f.vars
    obj = _dense(f.objective.expr, order)
    if not obj.any():
        raise CanonicalizationError("objective has only zero coefficients")
    constraints = []
    for i, c in enumerate(f.constraints, 1):
        try:
            constraints.append(canonicalize_constraint(c, order, normalize_scale=normalize_scale))
        except CanonicalizationError as exc:
            raise CanonicalizationError(f"constraint {i}: {exc}") from None
    return CanonForm(CanonObjective(f.objective.direction, obj), constraints, order)


def decl_equal(a: CanonObjective | CanonConstraint, b: CanonObjective | CanonConstraint,
               tol: float = DEFAULT_TOL) -> bool:
    if type(a) is not type(b):
        raise TypeError("cannot compare an objective with a constraint")
    if a.coeffs.shape != b.coeffs.shape:
        raise DimensionError(f"dimension mismatch: {a.coeffs.shape[0]} vs {b.coeffs.shape[0]}")
    if isinstance(a, CanonObjective):
        if a.direction is not b.direction:
            return False
    else:
        if a.relation is not b.relation or abs(a.bound - b.bound) > tol:
            return False
    return bool(np.all(np.abs(a.coeffs - b.coeffs) <= tol))


@dataclass
class MatchResult:
    D: int
    FP: int
    FN: int
    # (gold index, pred index); index 0 is the objective, i >= 1 constraint i-1
    matched_pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def loss(self) -> int:
        return min(self.FP + self.FN, self.D)


def _reindex(vec: np.ndarray, pred_vars: VarOrderMap, gold_vars: VarOrderMap) -> np.ndarray | None:
    """Express ``vec`` over ``gold_vars``; None if it leans on an unknown variable."""
    out = np.zeros(len(gold_vars))
    for name, c in zip(pred_vars, vec):
        j = gold_vars.get(name)
        if j is None:
            if c != 0:
                return None
        else:
            out[j] = c
    return out


def _max_bipartite(adj: Sequence[Sequence[int]], n_right: int) -> list[tuple[int, int]]:
    """Maximum matching by augmenting paths (Kuhn's algorithm)."""
    match_right: list[int | None] = [None] * n_right

    def augment(u: int, seen: list[bool]) -> bool:
        for v in adj[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] is None or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    for u in range(len(adj)):
        augment(u, [False] * n_right)
    return sorted((u, v) for v, u in enumerate(match_right) if u is not None)


def match_declarations(gold: CanonForm, pred: CanonForm | None,
                       tol: float = DEFAULT_TOL) -> MatchResult:
    """One-to-one maximum matching of predicted to gold declarations.

    ``pred=None`` stands for an empty prediction (missing or unparseable).
    Predicted declarations with a nonzero coefficient on a variable unknown
    to the gold formulation can never match.
    """
    D = gold.n_declarations
    if pred is None:
        return MatchResult(D=D, FP=0, FN=D)

    gold_decls = [gold.objective, *gold.constraints]
    pred_decls = []
    for d in [pred.objective, *pred.constraints]:
        vec = _reindex(d.coeffs, pred.vars, gold.vars)
        if vec is None:
            pred_decls.append(None)
        elif isinstance(d, CanonObjective):
            pred_decls.append(CanonObjective(d.direction, vec))
        else:
            pred_decls.append(CanonConstraint(vec, d.relation, d.bound))

    adj = []
    for g in gold_decls:
        adj.append([j for j, p in enumerate(pred_decls)
                    if p is not None and type(p) is type(g) and decl_equal(g, p, tol)])
    pairs = _max_bipartite(adj, len(pred_decls))
    return MatchResult(D=D, FP=len(pred_decls) - len(pairs), FN=D - len(pairs), matched_pairs=pairs)


def score_prediction(gold: CanonForm, pred: ProblemFormulation | None, tol: float = DEFAULT_TOL, *,
                     normalize_scale: bool = False) -> MatchResult:
    """Match a raw predicted formulation, tolerating declarations without a canonical form.

    Vacuous predicted constraints are dropped and counted as false
    positives; a prediction whose objective is degenerate loses only that
    declaration.
    """
    if pred is None:
        return match_declarations(gold, None, tol)
    order = pred.vars
    dropped = 0
    constraints = []
    for c in pred.constraints:
        try:
            constraints.append(canonicalize_constraint(c, order, normalize_scale=normalize_scale))
        except CanonicalizationError:
            dropped += 1
    obj = _dense(pred.objective.expr, order)
    form = CanonForm(CanonObjective(pred.objective.direction, obj), constraints, order)
    result = match_declarations(gold, form, tol)
    result.FP += dropped
    return result


@dataclass
class AccuracyReport:
    N: int
    per_problem: list[MatchResult]
    acc: float
    ids: list[str] = field(default_factory=list)

    def rows(self) -> list[dict[str, object]]:
        ids = self.ids or [str(i) for i in range(1, self.N + 1)]
        return [{"id": pid, "D": r.D, "FP": r.FP, "FN": r.FN, "loss": r.loss}
                for pid, r in zip(ids, self.per_problem)]

    def to_record(self) -> dict[str, object]:
        return {"N": self.N, "acc": self.acc, "problems": self.rows()}


def accuracy_from_results(results: Sequence[MatchResult], ids: Sequence[str] | None = None) -> AccuracyReport:
    if not results:
        raise LpwpError("accuracy is undefined for an empty problem set")
    total_d = sum(r.D for r in results)
    if total_d == 0:
        raise LpwpError("accuracy is undefined when no gold declarations exist")
    loss = sum(r.loss for r in results)
    return AccuracyReport(N=len(results), per_problem=list(results), acc=1 - loss / total_d,
                          ids=list(ids) if ids is not None else [])


def mapping_accuracy(pairs: Sequence[tuple[CanonForm, CanonForm | None]],
                     tol: float = DEFAULT_TOL, ids: Sequence[str] | None = None) -> AccuracyReport:
    """Declaration-level mapping accuracy over a set of problems.

    Each problem's loss is its unmatched count ``FP + FN`` clamped at ``D``;
    accuracy is one minus total loss over total gold declarations.
    """
    return accuracy_from_results([match_declarations(g, p, tol) for g, p in pairs], ids)
