"""Solver-ready LP model built from a canonical form, plus LP/MPS writers."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .canonical import CanonForm
from .errors import LpwpError
from .ir import Direction, Relation, format_number


@dataclass(eq=False)
class LpModel:
    sense: Direction
    c: np.ndarray
    A: np.ndarray
    rel: list[Relation]
    b: np.ndarray
    var_names: tuple[str, ...]
    lower_bounds: np.ndarray | None = None
    name: str = "LPWP"

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.shape[0]
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.rel = [Relation(r) for r in self.rel]
        self.var_names = tuple(self.var_names)
        if self.lower_bounds is None:
            self.lower_bounds = np.zeros(n)
        self.lower_bounds = np.asarray(self.lower_bounds, dtype=float)
        m = self.A.shape[0]
        if len(self.var_names) != n or self.lower_bounds.shape != (n,):
            raise ValueError("objective, names and bounds disagree on the variable count")
        if len(self.rel) != m or self.b.shape != (m,):
            raise ValueError("constraint matrix, relations and bounds disagree on the row count")
        if any(r is Relation.GE for r in self.rel):
            raise ValueError("LpModel rows must be LE or EQ")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def same_as(self, other: LpModel) -> bool:
        return (
            self.sense is other.sense
            and self.var_names == other.var_names
            and self.rel == other.rel
            and np.array_equal(self.c, other.c)
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.lower_bounds, other.lower_bounds)
        )


def build_model(cf: CanonForm, name: str = "LPWP") -> LpModel:
    n = len(cf.vars)
    A = np.array([con.coeffs for con in cf.constraints], dtype=float).reshape(-1, n)
    return LpModel(
        sense=cf.objective.direction,
        c=cf.objective.coeffs.copy(),
        A=A,
        rel=[con.relation for con in cf.constraints],
        b=np.array([con.bound for con in cf.constraints], dtype=float),
        var_names=tuple(cf.vars),
        name=name,
    )


# ---------------------------------------------------------------------------
# identifiers

_BAD_CHARS = re.compile(r"[^A-Za-z0-9]")


def sanitize_name(name: str) -> str:
    out = _BAD_CHARS.sub("_", name) or "_"
    if out[0].isdigit():
        out = "v_" + out
    return out


def sanitized_names(names: Sequence[str]) -> list[str]:
    """Sanitize and de-duplicate (``a b`` and ``a_b`` become ``a_b``, ``a_b_2``)."""
    out: list[str] = []
    used: set[str] = set()
    for name in names:
        base = sanitize_name(name)
        candidate, k = base, 2
        while candidate in used:
            candidate = f"{base}_{k}"
            k += 1
        used.add(candidate)
        out.append(candidate)
    return out


# ---------------------------------------------------------------------------
# LP format

def _lp_terms(coeffs: np.ndarray, names: Sequence[str]) -> str:
    parts = []
    for c, name in zip(coeffs, names):
        if c == 0:
            continue
        mag = abs(c)
        term = name if mag == 1 else f"{format_number(mag)} {name}"
        if c < 0:
            parts.append(f"- {term}")
        else:
            parts.append(f"+ {term}" if parts else term)
    if not parts:
        return f"0 {names[0]}" if names else "0"
    return " ".join(parts)


_LP_REL = {Relation.LE: "<=", Relation.EQ: "=", Relation.GE: ">="}


def emit_lp_format(m: LpModel) -> str:
    names = sanitized_names(m.var_names)
    lines = ["Maximize" if m.sense is Direction.MAXIMIZE else "Minimize",
             f" obj: {_lp_terms(m.c, names)}"]
    lines.append("Subject To")
    for i, (row, rel, rhs) in enumerate(zip(m.A, m.rel, m.b), 1):
        lines.append(f" c{i}: {_lp_terms(row, names)} {_LP_REL[rel]} {format_number(rhs)}")
    lines.append("Bounds")
    for name, lb in zip(names, m.lower_bounds):
        lines.append(f" {name} free" if lb == -math.inf else f" {name} >= {format_number(lb)}")
    lines.append("End")
    return "\n".join(lines) + "\n"


_LP_TERM = re.compile(r"([+-])?\s*(\d[\d.eE+-]*)?\s*([A-Za-z_][A-Za-z0-9_]*)")


def _parse_lp_expr(text: str, index: dict[str, int]) -> np.ndarray:
    vec = np.zeros(len(index))
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _LP_TERM.match(text, pos)
        if not m:
            raise LpwpError(f"cannot read LP expression {text!r}")
        sign = -1.0 if m[1] == "-" else 1.0
        coeff = float(m[2]) if m[2] else 1.0
        vec[index[m[3]]] += sign * coeff
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return vec


def parse_lp_format(text: str, var_names: Sequence[str] | None = None) -> LpModel:
    """Read back the dialect written by :func:`emit_lp_format`.

    Only that dialect is understood; this is a checking aid, not a general
    LP reader. Column order comes from the Bounds section unless
    ``var_names`` is given.
    """
    lines = [ln.rstrip("\n") for ln in text.splitlines()]
    sense = Direction.MAXIMIZE if lines[0].strip() == "Maximize" else Direction.MINIMIZE
    sections: dict[str, list[str]] = {"obj": [], "Subject To": [], "Bounds": []}
    current = "obj"
    for line in lines[1:]:
        key = line.strip()
        if key in ("Subject To", "Bounds"):
            current = key
        elif key == "End":
            break
        elif key:
            sections[current].append(key)
    if var_names is None:
        var_names = [ln.split()[0] for ln in sections["Bounds"]]
    index = {n: j for j, n in enumerate(var_names)}
    lower = np.zeros(len(var_names))
    for ln in sections["Bounds"]:
        parts = ln.split()
        lower[index[parts[0]]] = -math.inf if parts[1] == "free" else float(parts[2])
    obj_text = sections["obj"][0].split(":", 1)[1]
    c = np.zeros(len(var_names)) if obj_text.strip() == "0" else _parse_lp_expr(obj_text, index)
    rows, rels, rhs = [], [], []
    for ln in sections["Subject To"]:
        body = ln.split(":", 1)[1]
        for sym, rel in (("<=", Relation.LE), (">=", Relation.GE), ("=", Relation.EQ)):
            if f" {sym} " in body:
                lhs, _, right = body.rpartition(f" {sym} ")
                break
        else:
            raise LpwpError(f"no relation in LP row {ln!r}")
        rows.append(_parse_lp_expr(lhs, index))
        rels.append(rel)
        rhs.append(float(right))
    A = np.array(rows).reshape(-1, len(var_names))
    return LpModel(sense, c, A, rels, np.array(rhs), tuple(var_names), lower)


# ---------------------------------------------------------------------------
# MPS format

def emit_mps(m: LpModel) -> str:
    """Free-field MPS: two-space-indented records, whitespace-separated fields."""
    names = sanitized_names(m.var_names)
    rows = [f"c{i}" for i in range(1, m.A.shape[0] + 1)]
    out = [f"NAME {sanitize_name(m.name) if m.name else 'LPWP'}"]
    if m.sense is Direction.MAXIMIZE:
        out += ["OBJSENSE", "  MAX"]
    out += ["ROWS", "  N obj"]
    out += [f"  {'L' if rel is Relation.LE else 'E'} {r}" for rel, r in zip(m.rel, rows)]
    out.append("COLUMNS")
    for j, name in enumerate(names):
        # every column gets its objective entry so unconstrained variables stay listed
        out.append(f"  {name} obj {format_number(m.c[j])}")
        for i, r in enumerate(rows):
            if m.A[i, j] != 0:
                out.append(f"  {name} {r} {format_number(m.A[i, j])}")
    out.append("RHS")
    out += [f"  RHS {r} {format_number(v)}" for r, v in zip(rows, m.b) if v != 0]
    out.append("BOUNDS")
    for name, lb in zip(names, m.lower_bounds):
        out.append(f"  FR BND {name}" if lb == -math.inf else f"  LO BND {name} {format_number(lb)}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"
