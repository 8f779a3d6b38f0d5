"""Text, delimited and figure renderings of scores, statistics and solutions.

Every ``write_*`` function drops a tab-separated table and one or more PNG
figures into a report directory and returns the written paths.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

import numpy as np

from .canonical import AccuracyReport
from .entities import DOMAINS, SPLITS, StatsReport
from .ir import format_number
from .lp import LpModel
from .ner_scorer import NerScore
from .simplex import Solution, SolveStatus


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def delimited(rows: Sequence[dict[str, object]], delimiter: str = "\t") -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), delimiter=delimiter, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _write_table(path: Path, rows: Sequence[dict[str, object]]) -> Path:
    path.write_text(delimited(rows), encoding="utf-8")
    return path


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})
    _pyplot().close(fig)
    return path


# ---------------------------------------------------------------------------
# text

def ner_text(scores: Sequence[NerScore]) -> str:
    lines = []
    for s in scores:
        lines.append(f"[{s.mode}] precision={s.precision:.4f} recall={s.recall:.4f} f1={s.f1:.4f}")
    first = scores[0]
    lines.append(f"{'type':<10} {'tp':>5} {'fp':>5} {'fn':>5} {'P':>7} {'R':>7} {'F1':>7}")
    for row in first.to_record()["per_type"]:
        lines.append(
            f"{row['type']:<10} {row['tp']:>5} {row['fp']:>5} {row['fn']:>5} "
            f"{row['precision']:>7.4f} {row['recall']:>7.4f} {row['f1']:>7.4f}"
        )
    return "\n".join(lines) + "\n"


def accuracy_text(report: AccuracyReport) -> str:
    lines = [f"{'id':<16} {'D':>4} {'FP':>4} {'FN':>4} {'loss':>5}"]
    for row in report.rows():
        lines.append(f"{row['id']:<16} {row['D']:>4} {row['FP']:>4} {row['FN']:>4} {row['loss']:>5}")
    lines.append(f"N={report.N} Acc={report.acc:.6f}")
    return "\n".join(lines) + "\n"


def stats_text(stats: StatsReport) -> str:
    lines = [f"{'split':<6} {'samples':>8} {'source':>7} {'target':>7}  source:target"]
    for row in stats.rows():
        lines.append(f"{row['split']:<6} {row['samples']:>8} {row['source']:>7} {row['target']:>7}  "
                     f"{row['source:target']}")
    lines.append(f"total  {stats.total:>8}")
    return "\n".join(lines) + "\n"


def _display(v: float) -> str:
    # hide last-bit noise such as 45.99999999999999
    return format_number(round(float(v), 9) + 0.0)


def solution_text(sol: Solution) -> str:
    if sol.status is not SolveStatus.OPTIMAL:
        return f"{sol.status.value}\niterations: {sol.iterations}\n"
    lines = [f"{sol.status.value} {_display(sol.objective)}"]
    lines += [f"  {n} = {_display(v)}" for n, v in zip(sol.var_names, sol.x)]
    lines.append(f"iterations: {sol.iterations}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# report directories

def write_ner_report(scores: Sequence[NerScore], out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for s in scores:
        rec = s.to_record()
        rows.append({"mode": s.mode, "type": "ALL", "tp": "", "fp": "", "fn": "",
                     "precision": s.precision, "recall": s.recall, "f1": s.f1})
        rows += [{"mode": s.mode, **r} for r in rec["per_type"]]
    paths = [_write_table(out_dir / "ner_scores.tsv", rows)]

    plt = _pyplot()
    per_type = scores[0].to_record()["per_type"]
    labels = [r["type"] for r in per_type]
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for k, metric in enumerate(("precision", "recall", "f1")):
        ax.bar(x + (k - 1) * 0.27, [r[metric] for r in per_type], width=0.27, label=metric)
    ax.set_xticks(x, labels, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(frameon=False, ncol=3, loc="lower right")
    paths.append(_save(fig, out_dir / "ner_per_type.png"))
    return paths


def write_accuracy_report(report: AccuracyReport, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = report.rows() + [{"id": "ALL", "D": sum(r.D for r in report.per_problem),
                             "FP": "", "FN": "", "loss": f"acc={report.acc!r}"}]
    paths = [_write_table(out_dir / "accuracy.tsv", rows)]

    plt = _pyplot()
    per_problem = [1 - r.loss / r.D for r in report.per_problem]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.hist(per_problem, bins=np.linspace(0, 1, 11), edgecolor="black")
    ax.axvline(report.acc, color="C3", linestyle="--", label=f"Acc = {report.acc:.3f}")
    ax.set_xlabel("per-problem accuracy")
    ax.set_ylabel("problems")
    ax.legend(frameon=False)
    paths.append(_save(fig, out_dir / "accuracy_hist.png"))
    return paths


def write_stats_report(stats: StatsReport, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [_write_table(out_dir / "stats.tsv", stats.rows())]

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 3.5))
    bottom = np.zeros(len(SPLITS))
    for d in DOMAINS:
        counts = np.array([stats.per_split_domain[s][d] for s in SPLITS], dtype=float)
        ax.bar(SPLITS, counts, bottom=bottom, label=d)
        bottom += counts
    ax.set_ylabel("problems")
    ax.legend(frameon=False, fontsize="small")
    paths.append(_save(fig, out_dir / "stats_domains.png"))
    return paths


def write_solution_report(model: LpModel, sol: Solution, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    rec = sol.to_record()
    rows = [{"variable": n, "value": v} for n, v in (rec["values"] or {}).items()]
    rows.append({"variable": "objective", "value": rec["objective"]})
    paths = [_write_table(out_dir / "solution.tsv", rows)]
    if model.A.shape[1] == 2:
        paths.append(_save(_feasible_region(model, sol), out_dir / "feasible_region.png"))
    return paths


def _feasible_region(model: LpModel, sol: Solution):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    hi = 10.0
    if sol.x is not None:
        hi = max(hi, 1.5 * float(np.max(np.abs(sol.x))))
    finite_b = [abs(v) for v in model.b if v != 0]
    if finite_b:
        hi = max(hi, 1.2 * max(finite_b))
    grid = np.linspace(0, hi, 300)
    X, Y = np.meshgrid(grid, grid)
    mask = np.ones_like(X, dtype=bool)
    for row, rel, rhs in zip(model.A, model.rel, model.b):
        lhs = row[0] * X + row[1] * Y
        mask &= lhs <= rhs + 1e-9 if rel.value == "LE" else np.isclose(lhs, rhs, atol=hi / 300)
    ax.contourf(X, Y, mask.astype(float), levels=[0.5, 1.5], alpha=0.3)
    names = model.var_names
    for i, (row, rhs) in enumerate(zip(model.A, model.b), 1):
        if row[1] != 0:
            ax.plot(grid, (rhs - row[0] * grid) / row[1], lw=1, label=f"c{i}")
        elif row[0] != 0:
            ax.axvline(rhs / row[0], lw=1, label=f"c{i}", color=f"C{i % 10}")
    if sol.x is not None:
        ax.plot(*sol.x, "k*", ms=12, label=f"optimum {format_number(sol.objective)}")
    ax.set_xlim(0, hi)
    ax.set_ylim(0, hi)
    ax.set_xlabel(names[0])
    ax.set_ylabel(names[1])
    ax.legend(frameon=False, fontsize="small")
    return fig
