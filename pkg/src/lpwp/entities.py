"""Problem/entity types, the BIO codec and dataset ingestion."""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import AnnotationError, BioError, DatasetError


class EntityType(str, Enum):
    CONST_DIR = "CONST_DIR"
    LIMIT = "LIMIT"
    OBJ_DIR = "OBJ_DIR"
    OBJ_NAME = "OBJ_NAME"
    PARAM = "PARAM"
    VAR = "VAR"

    def __str__(self) -> str:
        return self.value


SOURCE_DOMAINS = ("sales", "advertising", "investment")
TARGET_DOMAINS = ("production", "transportation", "sciences")
DOMAINS = SOURCE_DOMAINS + TARGET_DOMAINS
SPLITS = ("train", "dev", "test")


@dataclass(frozen=True, order=True)
class Span:
    start: int
    end: int
    label: EntityType

    def __post_init__(self) -> None:
        if not isinstance(self.label, EntityType):
            object.__setattr__(self, "label", EntityType(self.label))
        if not 0 <= self.start < self.end:
            raise AnnotationError(f"invalid span offsets [{self.start}, {self.end})")


@dataclass(frozen=True)
class TokenTag:
    token: str
    start: int
    end: int
    tag: str = "O"


@dataclass(frozen=True)
class AnnotatedProblem:
    id: str
    text: str
    spans: tuple[Span, ...]
    domain: str
    split: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "spans", tuple(sorted(self.spans)))
        validate_spans(self.text, self.spans, problem_id=self.id)
        if self.domain not in DOMAINS:
            raise AnnotationError(f"problem {self.id}: unknown domain {self.domain!r}")
        if self.split not in SPLITS:
            raise AnnotationError(f"problem {self.id}: unknown split {self.split!r}")
        if self.split == "train" and self.domain not in SOURCE_DOMAINS:
            raise AnnotationError(
                f"problem {self.id}: target domain {self.domain!r} in the train split"
            )


def validate_spans(text: str, spans: Iterable[Span], problem_id: str | None = None) -> None:
    """Check bounds and pairwise disjointness; raise AnnotationError otherwise."""
    who = f"problem {problem_id}: " if problem_id is not None else ""
    previous: Span | None = None
    for span in sorted(spans):
        if span.end > len(text):
            raise AnnotationError(
                f"{who}span [{span.start}, {span.end}) exceeds text length {len(text)}"
            )
        if previous is not None and span.start < previous.end:
            raise AnnotationError(
                f"{who}overlapping spans [{previous.start}, {previous.end}) "
                f"and [{span.start}, {span.end})"
            )
        previous = span


# ---------------------------------------------------------------------------
# tokenizer and BIO codec

PUNCT = frozenset(".,;:!?()")
_CHUNK = re.compile(r"\S+")


def tokenize(text: str) -> list[tuple[str, int, int]]:
    """Whitespace split, then peel leading/trailing punctuation into tokens.

    >>> [t for t, _, _ in tokenize("costs $1.5 (each).")]
    ['costs', '$1.5', '(', 'each', ')', '.']
    """
    tokens = []
    for m in _CHUNK.finditer(text):
        lo, hi = m.start(), m.end()
        head = []
        while lo < hi and text[lo] in PUNCT:
            head.append((text[lo], lo, lo + 1))
            lo += 1
        tail = []
        while hi > lo and text[hi - 1] in PUNCT:
            tail.append((text[hi - 1], hi - 1, hi))
            hi -= 1
        tokens.extend(head)
        if lo < hi:
            tokens.append((text[lo:hi], lo, hi))
        tokens.extend(reversed(tail))
    return tokens


def spans_to_bio(text: str, spans: Sequence[Span]) -> list[TokenTag]:
    validate_spans(text, spans)
    tokens = tokenize(text)
    tags = ["O"] * len(tokens)
    starts = {s: i for i, (_, s, _) in enumerate(tokens)}
    ends = {e: i for i, (_, _, e) in enumerate(tokens)}
    for span in spans:
        first = starts.get(span.start)
        last = ends.get(span.end)
        if first is None or last is None or last < first:
            raise AnnotationError(
                f"span [{span.start}, {span.end}) {span.label} {text[span.start:span.end]!r} "
                "does not fall on token boundaries"
            )
        tags[first] = f"B-{span.label}"
        for i in range(first + 1, last + 1):
            tags[i] = f"I-{span.label}"
    return [TokenTag(tok, s, e, tag) for (tok, s, e), tag in zip(tokens, tags)]


def _split_tag(tag: str, index: int) -> tuple[str, EntityType | None]:
    if tag == "O":
        return "O", None
    prefix, sep, kind = tag.partition("-")
    if not sep or prefix not in ("B", "I"):
        raise BioError(index, f"malformed tag {tag!r}")
    try:
        return prefix, EntityType(kind)
    except ValueError:
        raise BioError(index, f"unknown entity type in tag {tag!r}") from None


def bio_to_spans(tags: Sequence[TokenTag]) -> list[Span]:
    spans = []
    current: list | None = None  # [start, end, label]
    for i, tt in enumerate(tags):
        prefix, label = _split_tag(tt.tag, i)
        if prefix == "I":
            if current is None or current[2] is not label:
                raise BioError(i, f"{tt.tag} does not continue a {label} entity")
            current[1] = tt.end
            continue
        if current is not None:
            spans.append(Span(*current))
            current = None
        if prefix == "B":
            current = [tt.start, tt.end, label]
    if current is not None:
        spans.append(Span(*current))
    return spans


# ---------------------------------------------------------------------------
# dataset I/O

def load_dataset(
    path: str | Path,
    format: str = "span_json",
    *,
    split: str | None = None,
    domain: str | None = None,
) -> list[AnnotatedProblem]:
    """Load annotated problems from ``path``.

    ``span_json`` files are JSON Lines (one object per problem) or a single
    JSON array. ``conll_bio`` files hold ``TOKEN<TAB>TAG`` lines with ``#id``,
    ``#domain``, ``#split`` and ``#text`` comment headers; ``split`` and
    ``domain`` supply fallbacks for files that omit those headers.

    Raises:
        DatasetError: unreadable record, or a problem violating its
            invariants (the message carries the record index).
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read file: {exc.strerror}", source=str(path)) from exc
    if format == "span_json":
        problems = _parse_span_json(raw, str(path))
    elif format == "conll_bio":
        problems = _parse_conll(raw, str(path), split, domain)
    else:
        raise DatasetError(f"unknown dataset format {format!r}", source=str(path))
    seen: set[str] = set()
    for i, p in enumerate(problems):
        if p.id in seen:
            raise DatasetError(f"duplicate problem id {p.id!r}", source=str(path), record=i)
        seen.add(p.id)
    return problems


def load_dataset_dir(path: str | Path, format: str = "span_json") -> list[AnnotatedProblem]:
    """Load a single file, or every dataset file in a directory (sorted by name)."""
    path = Path(path)
    if not path.is_dir():
        return load_dataset(path, format)
    patterns = ("*.json", "*.jsonl") if format == "span_json" else ("*.conll", "*.bio", "*.txt")
    files = sorted({f for pat in patterns for f in path.glob(pat)})
    problems: list[AnnotatedProblem] = []
    for f in files:
        problems.extend(load_dataset(f, format))
    return problems


def _problem_from_record(rec: object, source: str, index: int) -> AnnotatedProblem:
    if not isinstance(rec, dict):
        raise DatasetError("record is not an object", source=source, record=index)
    try:
        spans = []
        for s in rec.get("spans", []):
            if not isinstance(s["start"], int) or not isinstance(s["end"], int):
                raise TypeError("span offsets must be integers")
            label = s["label"]
            if label not in EntityType.__members__:
                raise ValueError(f"unknown label {label!r}")
            spans.append(Span(s["start"], s["end"], EntityType(label)))
        return AnnotatedProblem(
            id=str(rec["id"]),
            text=rec["text"],
            spans=tuple(spans),
            domain=rec["domain"],
            split=rec["split"],
        )
    except KeyError as exc:
        raise DatasetError(f"missing field {exc.args[0]!r}", source=source, record=index) from None
    except (TypeError, ValueError) as exc:
        msg = str(exc) if isinstance(exc, AnnotationError) else f"problem {rec.get('id', '?')}: {exc}"
        raise DatasetError(msg, source=source, record=index) from None


def _parse_span_json(raw: str, source: str) -> list[AnnotatedProblem]:
    stripped = raw.strip()
    if not stripped:
        return []
    if stripped.startswith("["):
        try:
            records = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"invalid JSON: {exc}", source=source) from None
    else:
        records = []
        for lineno, line in enumerate(raw.splitlines()):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DatasetError(
                    f"invalid JSON on line {lineno + 1}: {exc.msg}",
                    source=source, record=len(records),
                ) from None
    return [_problem_from_record(rec, source, i) for i, rec in enumerate(records)]


def _align_tokens(text: str, tokens: Sequence[str], index: int, source: str) -> list[tuple[int, int]]:
    offsets = []
    pos = 0
    for tok in tokens:
        at = text.find(tok, pos)
        if at < 0 or text[pos:at].strip():
            raise DatasetError(f"token {tok!r} not found in text at offset {pos}",
                               source=source, record=index)
        offsets.append((at, at + len(tok)))
        pos = at + len(tok)
    return offsets


def _parse_conll(raw: str, source: str, split: str | None, domain: str | None) -> list[AnnotatedProblem]:
    blocks: list[list[str]] = []
    current: list[str] = []
    for line in raw.splitlines():
        if not line.strip():
            if current:
                blocks.append(current)
                current = []
            continue
        # a new #id header also starts a block, so blank separators are optional
        if line.startswith("#id ") and any(not l.startswith("#") for l in current):
            blocks.append(current)
            current = []
        current.append(line)
    if current:
        blocks.append(current)

    problems = []
    for index, block in enumerate(blocks):
        meta: dict[str, str] = {}
        rows: list[tuple[str, str]] = []
        for line in block:
            if line.startswith("#"):
                key, _, value = line[1:].partition(" ")
                meta[key] = value
                continue
            token, sep, tag = line.rpartition("\t")
            if not sep or not token:
                raise DatasetError(f"expected TOKEN<TAB>TAG, got {line!r}", source=source, record=index)
            rows.append((token, tag.strip()))
        if "id" not in meta:
            raise DatasetError("missing '#id' header", source=source, record=index)
        tokens = [t for t, _ in rows]
        text = meta.get("text", " ".join(tokens))
        offsets = _align_tokens(text, tokens, index, source)
        tags = [TokenTag(tok, s, e, tag) for (tok, tag), (s, e) in zip(rows, offsets)]
        try:
            spans = bio_to_spans(tags)
            problems.append(AnnotatedProblem(
                id=meta["id"],
                text=text,
                spans=tuple(spans),
                domain=meta.get("domain", domain or ""),
                split=meta.get("split", split or ""),
            ))
        except AnnotationError as exc:
            raise DatasetError(f"problem {meta['id']}: {exc}", source=source, record=index) from None
    return problems


def dump_span_json(problems: Iterable[AnnotatedProblem]) -> str:
    lines = []
    for p in problems:
        rec = {
            "id": p.id,
            "text": p.text,
            "spans": [{"start": s.start, "end": s.end, "label": s.label.value} for s in p.spans],
            "domain": p.domain,
            "split": p.split,
        }
        lines.append(json.dumps(rec, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def dump_conll_bio(problems: Iterable[AnnotatedProblem]) -> str:
    out = []
    for p in problems:
        out.append(f"#id {p.id}")
        out.append(f"#domain {p.domain}")
        out.append(f"#split {p.split}")
        out.append(f"#text {p.text}")
        out.extend(f"{t.token}\t{t.tag}" for t in spans_to_bio(p.text, p.spans))
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


# ---------------------------------------------------------------------------
# statistics

@dataclass
class StatsReport:
    total: int = 0
    per_split: dict[str, int] = field(default_factory=dict)
    per_domain: dict[str, int] = field(default_factory=dict)
    per_split_domain: dict[str, dict[str, int]] = field(default_factory=dict)
    source_target: dict[str, tuple[int, int]] = field(default_factory=dict)

    def ratio(self, split: str) -> str:
        src, tgt = self.source_target.get(split, (0, 0))
        return source_target_ratio(src, tgt)

    def rows(self) -> list[dict[str, object]]:
        return [
            {"split": s, "samples": self.per_split[s],
             "source": self.source_target[s][0], "target": self.source_target[s][1],
             "source:target": self.ratio(s)}
            for s in SPLITS
        ]


def source_target_ratio(source: int, target: int) -> str:
    """Render a source:target ratio the way the data-distribution table does.

    The source side is fixed to 1 and the target side is the nearest integer
    multiple, so ``25:74`` reads ``1:3``.
    """
    if source == 0 and target == 0:
        return "0:0"
    if source == 0:
        return "0:1"
    return f"1:{math.floor(target / source + 0.5)}"


def dataset_stats(problems: Iterable[AnnotatedProblem]) -> StatsReport:
    problems = list(problems)
    split_counts = Counter(p.split for p in problems)
    domain_counts = Counter(p.domain for p in problems)
    report = StatsReport(total=len(problems))
    report.per_split = {s: split_counts.get(s, 0) for s in SPLITS}
    report.per_domain = {d: domain_counts.get(d, 0) for d in DOMAINS}
    for s in SPLITS:
        in_split = [p for p in problems if p.split == s]
        report.per_split_domain[s] = {d: sum(p.domain == d for p in in_split) for d in DOMAINS}
        src = sum(p.domain in SOURCE_DOMAINS for p in in_split)
        report.source_target[s] = (src, len(in_split) - src)
    return report
