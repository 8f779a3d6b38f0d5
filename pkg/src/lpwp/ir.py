"""XML-like meaning representation for objective and constraint declarations.

A document is an optional ``<VARS>`` header followed by one
``<DECLARATION>`` block per objective or constraint::

    <DECLARATION><OBJ_DIR norm="MAX">maximize</OBJ_DIR> <OBJ_NAME>profit</OBJ_NAME>
      [IS] <PARAM>5</PARAM> [TIMES] <VAR>x</VAR> [PLUS] <PARAM>4</PARAM> [TIMES] <VAR>y</VAR>
    </DECLARATION>
    <DECLARATION><VAR>x</VAR> <CONST_DIR>at most</CONST_DIR> <LIMIT>6</LIMIT></DECLARATION>

Files holding several problems separate them with ``### <problem-id>`` lines.
"""

from __future__ import annotations

import html
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import IRSyntaxError, LpwpError, UnknownDirectionError


class Direction(str, Enum):
    MAXIMIZE = "MAXIMIZE"
    MINIMIZE = "MINIMIZE"


class Relation(str, Enum):
    LE = "LE"
    GE = "GE"
    EQ = "EQ"


_KEYS: dict[str, Direction | Relation] = {
    "LE": Relation.LE, "GE": Relation.GE, "EQ": Relation.EQ,
    "MAX": Direction.MAXIMIZE, "MAXIMIZE": Direction.MAXIMIZE,
    "MIN": Direction.MINIMIZE, "MINIMIZE": Direction.MINIMIZE,
}
_NORM_KEY = {
    Direction.MAXIMIZE: "MAX", Direction.MINIMIZE: "MIN",
    Relation.LE: "LE", Relation.GE: "GE", Relation.EQ: "EQ",
}
_PHRASE = {
    Direction.MAXIMIZE: "maximize", Direction.MINIMIZE: "minimize",
    Relation.LE: "at most", Relation.GE: "at least", Relation.EQ: "exactly",
}


# ---------------------------------------------------------------------------
# data model

@dataclass
class LinExpr:
    constant: float = 0.0
    terms: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in self.terms:
            if not name:
                raise ValueError("empty variable name")

    def add_term(self, name: str, coeff: float) -> None:
        self.terms[name] = self.terms.get(name, 0.0) + coeff

    @property
    def is_constant(self) -> bool:
        return not self.terms


@dataclass
class ObjectiveDecl:
    direction: Direction
    name: str
    expr: LinExpr

    def __post_init__(self) -> None:
        if not self.expr.terms:
            raise ValueError("objective has no variable terms")
        if self.expr.constant != 0:
            raise ValueError("objective carries a constant term")


@dataclass
class ConstraintDecl:
    lhs: LinExpr
    relation: Relation
    rhs: LinExpr

    def __post_init__(self) -> None:
        if self.relation not in Relation:
            raise ValueError(f"bad relation {self.relation!r}")
        if self.lhs.is_constant and self.rhs.is_constant:
            raise ValueError("constraint compares two constants")


class VarOrderMap:
    """Ordered, duplicate-free variable names with O(1) index lookup."""

    __slots__ = ("_names", "_index")

    def __init__(self, names: Iterable[str] = ()):
        self._names = tuple(names)
        self._index = {n: i for i, n in enumerate(self._names)}
        if len(self._index) != len(self._names):
            raise ValueError("duplicate variable names")
        if any(not n for n in self._names):
            raise ValueError("empty variable name")

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    def index(self, name: str) -> int:
        return self._index[name]

    def get(self, name: str) -> int | None:
        return self._index.get(name)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self._names)

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VarOrderMap) and self._names == other._names

    def __hash__(self) -> int:
        return hash(self._names)

    def __repr__(self) -> str:
        return f"VarOrderMap({list(self._names)!r})"


@dataclass
class ProblemFormulation:
    objective: ObjectiveDecl
    constraints: list[ConstraintDecl]
    vars: VarOrderMap

    def __post_init__(self) -> None:
        for name in mentioned_variables(self):
            if name not in self.vars:
                raise ValueError(f"variable {name!r} missing from the variable order")

    @property
    def declarations(self) -> list[ObjectiveDecl | ConstraintDecl]:
        return [self.objective, *self.constraints]


def mentioned_variables(f: ProblemFormulation) -> list[str]:
    """Variables in first-mention order across the objective then constraints."""
    return _first_mention(f.objective, f.constraints)


def _first_mention(objective: ObjectiveDecl, constraints: Iterable[ConstraintDecl]) -> list[str]:
    seen: dict[str, None] = dict.fromkeys(objective.expr.terms)
    for c in constraints:
        for name in (*c.lhs.terms, *c.rhs.terms):
            seen.setdefault(name)
    return list(seen)


# ---------------------------------------------------------------------------
# direction lexicon

def _normalize_phrase(phrase: str) -> str:
    return " ".join(phrase.lower().split())


def parse_lexicon(text: str) -> dict[str, Direction | Relation]:
    entries = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        phrase, sep, key = line.rpartition("=")
        key = key.strip().upper()
        if not sep or not phrase.strip() or key not in _KEYS:
            raise LpwpError(f"lexicon line {lineno}: expected 'phrase = LE|GE|EQ|MAX|MIN'")
        entries[_normalize_phrase(phrase)] = _KEYS[key]
    return entries


@lru_cache(maxsize=8)
def _lexicon_from(path: str | None) -> dict[str, Direction | Relation]:
    if path is None:
        text = resources.files(__package__).joinpath("lexicon.txt").read_text(encoding="utf-8")
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise LpwpError(f"cannot read lexicon {path}: {exc.strerror}") from exc
    return parse_lexicon(text)


def load_lexicon(path: str | os.PathLike | None = None) -> dict[str, Direction | Relation]:
    """Return the direction lexicon.

    Resolution order: explicit ``path``, the ``LPWP_LEXICON`` environment
    variable, then the packaged default.
    """
    if path is None:
        path = os.environ.get("LPWP_LEXICON") or None
    return _lexicon_from(None if path is None else str(path))


def normalize_direction_phrase(phrase: str, lexicon: Mapping[str, Direction | Relation] | None = None):
    """Map a surface phrase such as ``"no more than"`` to a Relation or Direction."""
    if lexicon is None:
        lexicon = load_lexicon()
    try:
        return lexicon[_normalize_phrase(phrase)]
    except KeyError:
        raise UnknownDirectionError(phrase) from None


# ---------------------------------------------------------------------------
# numerals

_NUMERAL = re.compile(
    r"""^\$?(?P<sign>[+-])?\$?
        (?P<body>\d{1,3}(?:,\d{3})+(?:\.\d*)?|\d+(?:\.\d*)?|\.\d+)
        (?P<exp>[eE][+-]?\d+)?
        (?P<pct>%)?$""",
    re.VERBOSE,
)


def parse_numeral(text: str) -> float:
    """Decimal, scientific or percentage numeral (``"30%"`` -> 0.3)."""
    m = _NUMERAL.match(text.strip())
    if not m:
        raise ValueError(f"not a numeral: {text!r}")
    value = float(m["body"].replace(",", "") + (m["exp"] or ""))
    if m["pct"]:
        value /= 100
    return -value if m["sign"] == "-" else value


def format_number(value: float) -> str:
    """Shortest decimal text that reads back to exactly ``value``."""
    value = float(value)
    if value == 0:
        return "0"
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


# ---------------------------------------------------------------------------
# lexer

LEAF_TAGS = frozenset({"CONST_DIR", "LIMIT", "OBJ_DIR", "OBJ_NAME", "PARAM", "VAR"})
BLOCK_TAGS = frozenset({"DECLARATION", "VARS"})
KEYWORDS = frozenset({"IS", "PLUS", "MINUS", "TIMES"})

_OPEN = re.compile(r'<([A-Za-z_][A-Za-z0-9_]*)((?:\s+[A-Za-z_]+\s*=\s*"[^"]*")*)\s*>')
_CLOSE = re.compile(r"</([A-Za-z_][A-Za-z0-9_]*)\s*>")
_ATTR = re.compile(r'([A-Za-z_]+)\s*=\s*"([^"]*)"')
_KEYWORD = re.compile(r"\[([A-Za-z_]+)\]")
_SPACE = re.compile(r"\s+")


@dataclass
class _Token:
    kind: str  # "open", "close", "leaf", "kw", "eof"
    name: str
    pos: int
    attrs: dict[str, str] = field(default_factory=dict)
    text: str = ""


class _Source:
    def __init__(self, text: str, first_line: int):
        self.text = text
        self.first_line = first_line
        self._line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def error(self, message: str, pos: int) -> IRSyntaxError:
        lo, hi = 0, len(self._line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._line_starts[mid] <= pos:
                lo = mid
            else:
                hi = mid - 1
        return IRSyntaxError(message, self.first_line + lo, pos - self._line_starts[lo] + 1)


def _lex(src: _Source) -> list[_Token]:
    text = src.text
    tokens = []
    open_blocks: list[_Token] = []
    pos = 0
    while True:
        m = _SPACE.match(text, pos)
        if m:
            pos = m.end()
        if pos >= len(text):
            if open_blocks:
                raise src.error(f"unbalanced tag <{open_blocks[-1].name}>", open_blocks[-1].pos)
            tokens.append(_Token("eof", "", pos))
            return tokens
        if text.startswith("</", pos):
            m = _CLOSE.match(text, pos)
            if not m:
                raise src.error("malformed closing tag", pos)
            name = m[1]
            if name in LEAF_TAGS:
                raise src.error(f"unbalanced tag </{name}>", pos)
            if name not in BLOCK_TAGS:
                raise src.error(f"unknown tag </{name}>", pos)
            if not open_blocks or open_blocks.pop().name != name:
                raise src.error(f"unbalanced tag </{name}>", pos)
            tokens.append(_Token("close", name, pos))
            pos = m.end()
        elif text.startswith("<", pos):
            m = _OPEN.match(text, pos)
            if not m:
                raise src.error("malformed tag", pos)
            name = m[1]
            attrs = dict(_ATTR.findall(m[2]))
            if name in BLOCK_TAGS:
                tokens.append(_Token("open", name, pos, attrs))
                open_blocks.append(tokens[-1])
                pos = m.end()
            elif name in LEAF_TAGS:
                content_start = m.end()
                end = text.find("<", content_start)
                closing = f"</{name}>"
                if end < 0 or not text.startswith(closing, end):
                    raise src.error(f"unbalanced tag <{name}>", pos)
                content = html.unescape(" ".join(text[content_start:end].split()))
                tokens.append(_Token("leaf", name, pos, attrs, content))
                pos = end + len(closing)
            else:
                raise src.error(f"unknown tag <{name}>", pos)
        elif text.startswith("[", pos):
            m = _KEYWORD.match(text, pos)
            if not m or m[1].upper() not in KEYWORDS:
                raise src.error("unknown keyword", pos)
            tokens.append(_Token("kw", m[1].upper(), pos))
            pos = m.end()
        else:
            raise src.error("unexpected text outside tags", pos)


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, src: _Source, lexicon):
        self.src = src
        self.lexicon = lexicon
        self.tokens = _lex(src)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at(self, kind: str, name: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (name is None or t.name == name)

    def expect(self, kind: str, name: str, what: str) -> _Token:
        if not self.at(kind, name):
            raise self.error(f"expected {what}, found {self.describe(self.tok)}")
        return self.advance()

    def error(self, message: str, tok: _Token | None = None) -> IRSyntaxError:
        return self.src.error(message, (tok or self.tok).pos)

    @staticmethod
    def describe(tok: _Token) -> str:
        return {
            "open": f"<{tok.name}>", "close": f"</{tok.name}>", "leaf": f"<{tok.name}>",
            "kw": f"[{tok.name}]", "eof": "end of input",
        }[tok.kind]

    def numeral(self, tok: _Token) -> float:
        try:
            return parse_numeral(tok.text)
        except ValueError:
            raise self.error(f"bad numeral {tok.text!r} in <{tok.name}>", tok) from None

    def direction(self, tok: _Token):
        norm = tok.attrs.get("norm")
        if norm is not None:
            try:
                return _KEYS[norm.strip().upper()]
            except KeyError:
                raise self.error(f"unknown norm attribute {norm!r}", tok) from None
        try:
            return normalize_direction_phrase(tok.text, self.lexicon)
        except UnknownDirectionError as exc:
            raise self.error(str(exc), tok) from None

    def parse_document(self) -> ProblemFormulation:
        header: list[str] | None = None
        if self.at("open", "VARS"):
            header = self.parse_vars()
        objective = None
        constraints = []
        while not self.at("eof"):
            start = self.expect("open", "DECLARATION", "<DECLARATION>")
            if self.at("leaf", "OBJ_DIR"):
                if objective is not None:
                    raise self.error("multiple objectives", start)
                objective = self.parse_objective()
            else:
                constraints.append(self.parse_constraint())
            if not self.at("close", "DECLARATION"):
                if self.at("eof"):
                    raise self.error("unbalanced tag <DECLARATION>", start)
                raise self.error(f"unexpected {self.describe(self.tok)} in declaration")
            self.advance()
        if objective is None:
            raise self.error("no objective declaration")

        f_vars = _first_mention(objective, constraints)
        if header is not None:
            missing = [n for n in f_vars if n not in header]
            if missing:
                raise self.error(f"variable {missing[0]!r} not listed in <VARS>", self.tokens[0])
            order = header
        else:
            order = list(f_vars)
        return ProblemFormulation(objective, constraints, VarOrderMap(order))

    def parse_vars(self) -> list[str]:
        open_tok = self.advance()
        names = []
        while self.at("leaf", "VAR"):
            tok = self.advance()
            if not tok.text:
                raise self.error("empty variable name", tok)
            if tok.text in names:
                raise self.error(f"duplicate variable {tok.text!r} in <VARS>", tok)
            names.append(tok.text)
        if not self.at("close", "VARS"):
            if self.at("eof"):
                raise self.error("unbalanced tag <VARS>", open_tok)
            raise self.error(f"unexpected {self.describe(self.tok)} in <VARS>")
        self.advance()
        return names

    def parse_objective(self) -> ObjectiveDecl:
        dir_tok = self.advance()
        direction = self.direction(dir_tok)
        if not isinstance(direction, Direction):
            raise self.error(f"objective direction {dir_tok.text!r} maps to {direction.value}", dir_tok)
        name_tok = self.expect("leaf", "OBJ_NAME", "<OBJ_NAME>")
        self.expect("kw", "IS", "[IS]")
        expr_tok = self.tok
        expr = self.parse_expr()
        if expr is None:
            raise self.error("objective needs an expression", expr_tok)
        if not expr.terms:
            raise self.error("objective has no variable terms", expr_tok)
        if expr.constant != 0:
            raise self.error("objective carries a constant term", expr_tok)
        return ObjectiveDecl(direction, name_tok.text, expr)

    def parse_constraint(self) -> ConstraintDecl:
        start = self.tok
        lhs = self.parse_expr()
        if lhs is None:
            raise self.error(f"expected an expression, found {self.describe(self.tok)}")
        dir_tok = self.expect("leaf", "CONST_DIR", "<CONST_DIR>")
        relation = self.direction(dir_tok)
        if not isinstance(relation, Relation):
            raise self.error(f"constraint direction {dir_tok.text!r} maps to {relation.value}", dir_tok)
        rhs = self.parse_expr()
        if self.at("leaf", "LIMIT"):
            tok = self.advance()
            rhs = rhs or LinExpr()
            rhs.constant += self.numeral(tok)
        if rhs is None:
            raise self.error("constraint has no right-hand side")
        if lhs.is_constant and rhs.is_constant:
            raise self.error("constraint compares two constants", start)
        return ConstraintDecl(lhs, relation, rhs)

    def parse_expr(self) -> LinExpr | None:
        expr = LinExpr()
        sign = 1.0
        if self.at("kw", "MINUS"):
            self.advance()
            sign = -1.0
        elif not (self.at("leaf", "PARAM") or self.at("leaf", "VAR")):
            return None
        self.parse_term(expr, sign)
        while self.at("kw", "PLUS") or self.at("kw", "MINUS"):
            sign = 1.0 if self.advance().name == "PLUS" else -1.0
            self.parse_term(expr, sign)
        return expr

    def parse_term(self, expr: LinExpr, sign: float) -> None:
        coeff = None
        if self.at("leaf", "PARAM"):
            coeff = self.numeral(self.advance())
        if self.at("kw", "TIMES"):
            if coeff is None:
                raise self.error("[TIMES] without a preceding <PARAM>")
            self.advance()
            if not self.at("leaf", "VAR"):
                raise self.error(f"expected <VAR> after [TIMES], found {self.describe(self.tok)}")
        if self.at("leaf", "VAR"):
            tok = self.advance()
            if not tok.text:
                raise self.error("empty variable name", tok)
            expr.add_term(tok.text, sign * (1.0 if coeff is None else coeff))
        elif coeff is None:
            raise self.error(f"expected a term, found {self.describe(self.tok)}")
        else:
            expr.constant += sign * coeff


def parse_ir(text: str, *, lexicon=None, first_line: int = 1) -> ProblemFormulation:
    """Parse one problem's declarations.

    Raises:
        IRSyntaxError: with line/column for unknown tags, unbalanced tags,
            zero or several objectives, unresolvable direction phrases, and
            any other grammar violation.
    """
    if lexicon is None:
        lexicon = load_lexicon()
    return _Parser(_Source(text, first_line), lexicon).parse_document()


_HEADER = re.compile(r"^###\s*(\S.*?)\s*$")


def split_ir_collection(text: str) -> list[tuple[str, str, int]]:
    """Split a multi-problem file into ``(problem_id, body, first_line)``.

    A file without ``###`` headers is a single problem with id ``""``.
    """
    lines = text.splitlines(keepends=True)
    chunks: list[tuple[str, list[str], int]] = []
    preamble: list[str] = []
    for lineno, line in enumerate(lines, 1):
        m = _HEADER.match(line)
        if m:
            chunks.append((m[1], [], lineno + 1))
        elif chunks:
            chunks[-1][1].append(line)
        else:
            preamble.append(line)
    if not chunks:
        return [("", text, 1)]
    if "".join(preamble).strip():
        raise IRSyntaxError("text before the first '### <problem-id>' header", 1, 1)
    seen = set()
    for pid, _, lineno in chunks:
        if pid in seen:
            raise IRSyntaxError(f"duplicate problem id {pid!r}", lineno - 1, 1)
        seen.add(pid)
    return [(pid, "".join(body), first) for pid, body, first in chunks]


def parse_ir_collection(text: str, *, lexicon=None) -> dict[str, ProblemFormulation]:
    return {
        pid: parse_ir(body, lexicon=lexicon, first_line=first)
        for pid, body, first in split_ir_collection(text)
    }


# ---------------------------------------------------------------------------
# serializer

def _esc(text: str) -> str:
    return html.escape(text, quote=False)


def _render_terms(terms: Iterable[tuple[str, float]], constant: float | None) -> str:
    parts = []
    items = [(f"<PARAM>{format_number(abs(c))}</PARAM> [TIMES] <VAR>{_esc(n)}</VAR>", c)
             for n, c in terms]
    if constant is not None:
        items.append((f"<PARAM>{format_number(abs(constant))}</PARAM>", constant))
    for k, (body, value) in enumerate(items):
        if value < 0:
            parts.append(f"[MINUS] {body}")
        else:
            parts.append(body if k == 0 else f"[PLUS] {body}")
    return " ".join(parts)


def _ordered(expr: LinExpr, order: VarOrderMap) -> list[tuple[str, float]]:
    return sorted(expr.terms.items(), key=lambda kv: order.index(kv[0]))


def _render_lhs(expr: LinExpr, order: VarOrderMap) -> str:
    const = expr.constant if expr.constant != 0 or not expr.terms else None
    return _render_terms(_ordered(expr, order), const)


def _render_rhs(expr: LinExpr, order: VarOrderMap) -> str:
    if not expr.terms:
        return f"<LIMIT>{format_number(expr.constant)}</LIMIT>"
    out = _render_terms(_ordered(expr, order), None)
    if expr.constant != 0:
        out += f" <LIMIT>{format_number(expr.constant)}</LIMIT>"
    return out


def serialize_ir(f: ProblemFormulation) -> str:
    """Render ``f`` so that :func:`parse_ir` returns an equal formulation."""
    order = f.vars
    lines = []
    # a header is needed only when the rendered first-mention order differs
    rendered: dict[str, None] = {}
    for expr in (f.objective.expr, *(e for c in f.constraints for e in (c.lhs, c.rhs))):
        for name, _ in _ordered(expr, order):
            rendered.setdefault(name)
    if list(order.names) != list(rendered):
        lines.append("<VARS>" + " ".join(f"<VAR>{_esc(n)}</VAR>" for n in order) + "</VARS>")
    obj = f.objective
    lines.append(
        f'<DECLARATION><OBJ_DIR norm="{_NORM_KEY[obj.direction]}">{_PHRASE[obj.direction]}</OBJ_DIR> '
        f"<OBJ_NAME>{_esc(obj.name)}</OBJ_NAME> [IS] "
        f"{_render_terms(_ordered(obj.expr, order), None)}</DECLARATION>"
    )
    for c in f.constraints:
        lines.append(
            f"<DECLARATION>{_render_lhs(c.lhs, order)} "
            f'<CONST_DIR norm="{_NORM_KEY[c.relation]}">{_PHRASE[c.relation]}</CONST_DIR> '
            f"{_render_rhs(c.rhs, order)}</DECLARATION>"
        )
    return "\n".join(lines) + "\n"


def serialize_ir_collection(problems: Mapping[str, ProblemFormulation]) -> str:
    return "".join(f"### {pid}\n{serialize_ir(f)}" for pid, f in problems.items())
