import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import f1_oracle
from lpwp.entities import AnnotatedProblem, EntityType, Span
from lpwp.ner_scorer import (
    TypeCounts,
    UnknownProblemError,
    count_matches,
    f1_score,
    prf,
    score_ner,
)

OD, ON, VAR, LIM = EntityType.OBJ_DIR, EntityType.OBJ_NAME, EntityType.VAR, EntityType.LIMIT


def test_identity_counts():
    c = count_matches([Span(0, 8, OD)], [Span(0, 8, OD)])
    assert c[OD] == TypeCounts(1, 0, 0)


def test_empty_prediction_counts():
    assert count_matches([Span(0, 8, OD)], [])[OD] == TypeCounts(0, 0, 1)


def test_wrong_label_counts_both_ways():
    c = count_matches([Span(0, 8, OD), Span(9, 15, ON)], [Span(0, 8, OD), Span(9, 15, VAR)])
    assert c[OD] == TypeCounts(1, 0, 0)
    assert c[ON] == TypeCounts(0, 0, 1)
    assert c[VAR] == TypeCounts(0, 1, 0)


def test_duplicate_predictions_are_false_positives():
    c = count_matches([Span(0, 2, LIM)], [Span(0, 2, LIM)] * 3)
    assert c[LIM] == TypeCounts(1, 2, 0)


def test_boundary_off_by_one_is_no_match():
    c = count_matches([Span(0, 8, OD)], [Span(0, 7, OD)])
    assert c[OD] == TypeCounts(0, 1, 1)


def test_pooled_3_1_3():
    s = prf(TypeCounts(3, 1, 3))
    assert (s.precision, s.recall, s.f1) == pytest.approx((0.75, 0.5, 0.6), abs=1e-15)
    assert tuple(map(float, f1_oracle(3, 1, 3))) == pytest.approx((0.75, 0.5, 0.6), abs=1e-15)


def test_f1_zero_denominator():
    assert f1_score(0.0, 0.0) == 0.0
    assert prf(TypeCounts()).f1 == 0.0


def _problem(pid, spans, text="x" * 40):
    return AnnotatedProblem(pid, text, tuple(spans), "sales", "dev")


GOLD = [
    _problem("p1", [Span(0, 8, OD), Span(9, 15, ON), Span(16, 17, VAR)]),
    _problem("p2", [Span(0, 2, LIM), Span(3, 5, VAR)]),
]


@pytest.mark.parametrize("mode", ["micro", "macro"])
def test_perfect_prediction(mode):
    s = score_ner(GOLD, {p.id: p.spans for p in GOLD}, mode)
    assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("mode", ["micro", "macro"])
def test_no_predictions(mode):
    s = score_ner(GOLD, {}, mode)
    assert (s.precision, s.recall, s.f1) == (0.0, 0.0, 0.0)


def test_unknown_prediction_id_is_named():
    with pytest.raises(UnknownProblemError, match="p9"):
        score_ner(GOLD, {"p9": []})


def test_unknown_mode():
    with pytest.raises(ValueError):
        score_ner(GOLD, {}, "weighted")


def test_macro_ignores_absent_types():
    gold = {"a": [Span(0, 1, VAR)]}
    s = score_ner(gold, {"a": [Span(0, 1, VAR)]}, "macro")
    assert s.f1 == 1.0


def test_record_field_order_is_stable():
    rec = score_ner(GOLD, {}, "micro").to_record()
    assert list(rec) == ["mode", "precision", "recall", "f1", "per_type"]
    assert [r["type"] for r in rec["per_type"]] == [t.value for t in EntityType]
    assert list(rec["per_type"][0]) == ["type", "tp", "fp", "fn", "precision", "recall", "f1"]


# --- properties --------------------------------------------------------------

LABELS = list(EntityType)


def _random_spans(rng, n):
    out = []
    for _ in range(n):
        s = rng.randrange(0, 10)
        out.append(Span(s, s + rng.randint(1, 3), rng.choice(LABELS)))
    return out


def _random_pair(rng):
    gold = {f"p{i}": _random_spans(rng, rng.randint(0, 5)) for i in range(rng.randint(1, 5))}
    pred = {}
    for pid, spans in gold.items():
        kept = [s for s in spans if rng.random() < 0.6]
        pred[pid] = kept + _random_spans(rng, rng.randint(0, 3))
    return gold, pred


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_micro_matches_rational_oracle(rng):
    gold, pred = _random_pair(rng)
    tp = fp = fn = 0
    for pid in gold:
        g, p = list(gold[pid]), list(pred[pid])
        for s in p:
            if s in g:
                g.remove(s)
                tp += 1
            else:
                fp += 1
        fn += len(g)
    p_, r_, f_ = f1_oracle(tp, fp, fn)
    s = score_ner(gold, pred)
    assert s.precision == pytest.approx(float(p_), abs=1e-12)
    assert s.recall == pytest.approx(float(r_), abs=1e-12)
    assert s.f1 == pytest.approx(float(f_), abs=1e-12)
    assert 0.0 <= s.f1 <= 1.0
    assert (s.f1 == 1.0) == (fp == 0 and fn == 0 and tp > 0)


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_permutation_invariance(rng):
    gold, pred = _random_pair(rng)
    ids = list(gold)
    rng.shuffle(ids)
    gold2 = {pid: rng.sample(gold[pid], len(gold[pid])) for pid in ids}
    pred2 = {pid: rng.sample(pred[pid], len(pred[pid])) for pid in reversed(ids)}
    for mode in ("micro", "macro"):
        a, b = score_ner(gold, pred, mode), score_ner(gold2, pred2, mode)
        assert (a.precision, a.recall, a.f1) == (b.precision, b.recall, b.f1)


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_removing_false_positive_never_hurts_micro_f1(rng):
    gold, pred = _random_pair(rng)
    before = score_ner(gold, pred).f1
    for pid, spans in pred.items():
        fps = [i for i, s in enumerate(spans) if s not in gold[pid]]
        if fps:
            i = rng.choice(fps)
            pred[pid] = spans[:i] + spans[i + 1:]
            break
    assert score_ner(gold, pred).f1 >= before - 1e-15


def test_seeded_shuffle_of_problem_list():
    rng = random.Random(3)
    gold = list(GOLD)
    pred = {"p1": [Span(0, 8, OD)], "p2": [Span(0, 2, LIM), Span(3, 5, LIM)]}
    ref = score_ner(gold, pred, "macro")
    rng.shuffle(gold)
    assert score_ner(gold, pred, "macro").f1 == ref.f1
