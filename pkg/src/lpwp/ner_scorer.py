"""Exact-match span scoring: precision, recall and F1 (micro and macro)."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .entities import AnnotatedProblem, EntityType, Span
from .errors import LpwpError


class UnknownProblemError(LpwpError, KeyError):
    def __init__(self, problem_id: str):
        self.problem_id = problem_id
        super().__init__(problem_id)

    def __str__(self) -> str:
        return f"prediction for unknown problem id {self.problem_id!r}"


@dataclass
class TypeCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __iadd__(self, other: TypeCounts) -> TypeCounts:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        return self


@dataclass
class MatchCounts:
    per_type: dict[EntityType, TypeCounts] = field(
        default_factory=lambda: {t: TypeCounts() for t in EntityType}
    )

    def __getitem__(self, label: EntityType) -> TypeCounts:
        return self.per_type[label]

    def __iadd__(self, other: MatchCounts) -> MatchCounts:
        for t, c in other.per_type.items():
            self.per_type[t] += c
        return self

    def pooled(self) -> TypeCounts:
        total = TypeCounts()
        for c in self.per_type.values():
            total += c
        return total


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


@dataclass
class NerScore:
    precision: float
    recall: float
    f1: float
    mode: str
    per_type: dict[EntityType, PRF]
    counts: MatchCounts

    def to_record(self) -> dict[str, object]:
        """Flat record with a fixed field order (overall first, then one row per type)."""
        rows = []
        for t in EntityType:
            c = self.counts[t]
            s = self.per_type[t]
            rows.append({
                "type": t.value, "tp": c.tp, "fp": c.fp, "fn": c.fn,
                "precision": s.precision, "recall": s.recall, "f1": s.f1,
            })
        return {
            "mode": self.mode,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_type": rows,
        }


def _ratio(num: int | float, den: int | float) -> float:
    return num / den if den else 0.0


def f1_score(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def prf(counts: TypeCounts) -> PRF:
    p = _ratio(counts.tp, counts.tp + counts.fp)
    r = _ratio(counts.tp, counts.tp + counts.fn)
    return PRF(p, r, f1_score(p, r))


def count_matches(gold: Iterable[Span], pred: Iterable[Span]) -> MatchCounts:
    """Multiset intersection of exact (start, end, label) triples.

    A gold span absorbs at most one prediction; repeated predictions of the
    same span count as false positives.
    """
    gold_c = Counter((s.start, s.end, s.label) for s in gold)
    pred_c = Counter((s.start, s.end, s.label) for s in pred)
    both = gold_c & pred_c
    counts = MatchCounts()
    for key, n in both.items():
        counts[key[2]].tp += n
    for key, n in gold_c.items():
        counts[key[2]].fn += n - both[key]
    for key, n in pred_c.items():
        counts[key[2]].fp += n - both[key]
    return counts


def _as_span_map(data) -> dict[str, Sequence[Span]]:
    if isinstance(data, Mapping):
        return dict(data)
    out = {}
    for p in data:
        if isinstance(p, AnnotatedProblem):
            out[p.id] = p.spans
        else:
            pid, spans = p
            out[pid] = spans
    return out


def score_ner(gold, pred, mode: str = "micro") -> NerScore:
    """Score predicted spans against gold spans.

    Args:
        gold: AnnotatedProblem list or a mapping ``id -> spans``.
        pred: same shapes as ``gold``. Gold problems without a prediction
            count as empty predictions.
        mode: ``"micro"`` pools counts over types before computing P and R;
            ``"macro"`` averages per-type P and R over the entity types that
            occur in gold or predictions.

    Raises:
        UnknownProblemError: a prediction refers to an id absent from gold.
    """
    if mode not in ("micro", "macro"):
        raise ValueError(f"unknown averaging mode {mode!r}")
    gold_map = _as_span_map(gold)
    pred_map = _as_span_map(pred)
    for pid in sorted(pred_map):
        if pid not in gold_map:
            raise UnknownProblemError(pid)

    counts = MatchCounts()
    for pid, spans in gold_map.items():
        counts += count_matches(spans, pred_map.get(pid, ()))

    per_type = {t: prf(counts[t]) for t in EntityType}
    if mode == "micro":
        overall = prf(counts.pooled())
        p, r = overall.precision, overall.recall
    else:
        active = [t for t in EntityType
                  if counts[t].tp + counts[t].fn + counts[t].fp > 0]
        p = _ratio(sum(per_type[t].precision for t in active), len(active))
        r = _ratio(sum(per_type[t].recall for t in active), len(active))
    return NerScore(p, r, f1_score(p, r), mode, per_type, counts)
