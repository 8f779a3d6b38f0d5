"""Command-line entry point for the lpwp toolkit.

Exit codes: 0 success, 1 input error, 2 internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import report
from .canonical import DEFAULT_TOL, accuracy_from_results, canonicalize, score_prediction
from .entities import load_dataset, load_dataset_dir, dataset_stats
from .errors import IRSyntaxError, LpwpError
from .ir import (
    ProblemFormulation,
    parse_ir,
    parse_ir_collection,
    serialize_ir,
    serialize_ir_collection,
    split_ir_collection,
)
from .lp import build_model, emit_lp_format, emit_mps
from .ner_scorer import score_ner
from .simplex import solve_simplex

COMMANDS = ("score-ner", "score-gen", "parse-ir", "emit-lp", "solve", "stats", "pipeline")


class ConfigError(LpwpError):
    pass


@dataclass
class CliConfig:
    command: str
    input: Path | None = None
    gold: Path | None = None
    pred: Path | None = None
    data: Path | None = None
    problem: str | None = None
    format: str = "span_json"
    mode: str = "micro"
    tol: float = DEFAULT_TOL
    feas_tol: float = 1e-9
    normalize_scale: bool = False
    mps: bool = False
    lp_out: Path | None = None
    out: Path | None = None
    json: bool = False
    report_dir: Path | None = None

    _REQUIRED = {
        "score-ner": ("gold", "pred"),
        "score-gen": ("gold", "pred"),
        "parse-ir": ("input",),
        "emit-lp": ("input",),
        "solve": ("input",),
        "stats": ("data",),
        "pipeline": (),
    }

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for name in self._REQUIRED[self.command]:
            if getattr(self, name) is None:
                raise ConfigError(f"{self.command} requires --{name.replace('_', '-')}")
        if self.command == "pipeline" and self.input is None and self.problem is None:
            raise ConfigError("pipeline requires --input or --problem")
        if not self.tol > 0 or not self.feas_tol > 0:
            raise ConfigError("tolerances must be positive")
        if self.format not in ("span_json", "conll_bio"):
            raise ConfigError(f"unknown dataset format {self.format!r}")
        if self.mode not in ("micro", "macro"):
            raise ConfigError(f"unknown averaging mode {self.mode!r}")


# ---------------------------------------------------------------------------
# helpers

def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LpwpError(f"{path}: {exc.strerror}") from None


def _load_ir(path: Path) -> dict[str, ProblemFormulation]:
    try:
        return parse_ir_collection(_read(path))
    except IRSyntaxError as exc:
        raise LpwpError(f"{path}: {exc}") from None


def _select_problem(path: Path, problem: str | None) -> tuple[str, ProblemFormulation]:
    problems = _load_ir(path)
    if problem is None:
        if len(problems) != 1:
            raise ConfigError(f"{path} holds {len(problems)} problems; pick one with --problem")
        return next(iter(problems.items()))
    if problem not in problems:
        raise ConfigError(f"{path}: no problem with id {problem!r}")
    return problem, problems[problem]


def _resolve_pipeline_input(cfg: CliConfig) -> tuple[Path, str | None]:
    if cfg.input is not None:
        return cfg.input, cfg.problem
    # `pipeline --problem fixture1` may name an IR file directly
    for candidate in (Path(cfg.problem), Path(f"{cfg.problem}.ir")):
        if candidate.is_file():
            return candidate, None
    raise ConfigError(f"no IR input given and no file named {cfg.problem!r} or {cfg.problem + '.ir'!r}")


def _emit(cfg: CliConfig, text: str) -> None:
    if cfg.out is not None:
        cfg.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(record: object) -> str:
    return json.dumps(record, indent=2) + "\n"


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


# ---------------------------------------------------------------------------
# commands

def _score_ner(cfg: CliConfig) -> str:
    gold = load_dataset(cfg.gold, cfg.format)
    pred = load_dataset(cfg.pred, cfg.format)
    modes = (cfg.mode, "macro" if cfg.mode == "micro" else "micro")
    scores = [score_ner(gold, pred, m) for m in modes]
    if cfg.report_dir:
        report.write_ner_report(scores, cfg.report_dir)
    if cfg.json:
        return _dump({s.mode: s.to_record() for s in scores})
    return report.ner_text(scores)


def _score_gen(cfg: CliConfig) -> str:
    gold = _load_ir(cfg.gold)
    pred_text = _read(cfg.pred)
    try:
        chunks = split_ir_collection(pred_text)
    except IRSyntaxError as exc:
        raise LpwpError(f"{cfg.pred}: {exc}") from None
    preds: dict[str, ProblemFormulation | None] = {}
    for pid, body, first in chunks:
        if pid not in gold:
            raise LpwpError(f"{cfg.pred}: prediction for unknown problem id {pid!r}")
        try:
            preds[pid] = parse_ir(body, first_line=first)
        except IRSyntaxError as exc:
            # an unparseable prediction scores as empty
            _warn(f"{cfg.pred}: problem {pid!r}: {exc}")
            preds[pid] = None

    ids = sorted(gold)
    results = []
    for pid in ids:
        try:
            g = canonicalize(gold[pid], normalize_scale=cfg.normalize_scale)
        except LpwpError as exc:
            raise LpwpError(f"{cfg.gold}: problem {pid!r}: {exc}") from None
        results.append(score_prediction(g, preds.get(pid), cfg.tol, normalize_scale=cfg.normalize_scale))
    acc = accuracy_from_results(results, ids)
    if cfg.report_dir:
        report.write_accuracy_report(acc, cfg.report_dir)
    if cfg.json:
        return _dump(acc.to_record())
    return report.accuracy_text(acc)


def _canonical_record(pid: str, f: ProblemFormulation) -> dict[str, object]:
    cf = canonicalize(f)
    return {
        "id": pid,
        "vars": list(cf.vars),
        "objective": {"direction": cf.objective.direction.value,
                      "coeffs": cf.objective.coeffs.tolist()},
        "constraints": [{"coeffs": c.coeffs.tolist(), "relation": c.relation.value, "bound": c.bound}
                        for c in cf.constraints],
    }


def _parse_ir_cmd(cfg: CliConfig) -> str:
    problems = _load_ir(cfg.input)
    if cfg.problem is not None:
        if cfg.problem not in problems:
            raise ConfigError(f"{cfg.input}: no problem with id {cfg.problem!r}")
        problems = {cfg.problem: problems[cfg.problem]}
    if cfg.json:
        return _dump([_canonical_record(pid, f) for pid, f in problems.items()])
    if list(problems) == [""]:
        return serialize_ir(problems[""])
    return serialize_ir_collection(problems)


def _model_for(path: Path, problem: str | None):
    pid, f = _select_problem(path, problem)
    return build_model(canonicalize(f), name=pid or "LPWP")


def _emit_lp(cfg: CliConfig) -> str:
    model = _model_for(cfg.input, cfg.problem)
    return emit_mps(model) if cfg.mps else emit_lp_format(model)


def _solve(cfg: CliConfig, path: Path, problem: str | None, lp_out: Path | None = None) -> str:
    model = _model_for(path, problem)
    if lp_out is not None:
        lp_out.write_text(emit_mps(model) if cfg.mps else emit_lp_format(model), encoding="utf-8")
    sol = solve_simplex(model, feas_tol=cfg.feas_tol)
    if cfg.report_dir:
        report.write_solution_report(model, sol, cfg.report_dir)
    if cfg.json:
        return _dump(sol.to_record())
    return report.solution_text(sol)


def _stats(cfg: CliConfig) -> str:
    if not cfg.data.exists():
        raise LpwpError(f"{cfg.data}: no such file or directory")
    stats = dataset_stats(load_dataset_dir(cfg.data, cfg.format))
    if cfg.report_dir:
        report.write_stats_report(stats, cfg.report_dir)
    if cfg.json:
        return _dump({"total": stats.total, "splits": stats.rows(),
                      "per_split_domain": stats.per_split_domain})
    return report.stats_text(stats)


def _pipeline(cfg: CliConfig) -> str:
    path, problem = _resolve_pipeline_input(cfg)
    if cfg.data is not None:
        pid, f = _select_problem(path, problem)
        by_id = {p.id: p for p in load_dataset_dir(cfg.data, cfg.format)}
        if pid not in by_id:
            raise LpwpError(f"{cfg.data}: no annotated problem with id {pid!r}")
        mentions = {by_id[pid].text[s.start:s.end].lower()
                    for s in by_id[pid].spans if s.label.value == "VAR"}
        for name in f.vars:
            if name.lower() not in mentions:
                _warn(f"variable {name!r} is not tagged as VAR in problem {pid!r}")
    return _solve(cfg, path, problem, cfg.lp_out)


def run(cfg: CliConfig) -> int:
    """Execute one command; returns the process exit code."""
    try:
        if cfg.command == "score-ner":
            text = _score_ner(cfg)
        elif cfg.command == "score-gen":
            text = _score_gen(cfg)
        elif cfg.command == "parse-ir":
            text = _parse_ir_cmd(cfg)
        elif cfg.command == "emit-lp":
            text = _emit_lp(cfg)
        elif cfg.command == "solve":
            text = _solve(cfg, cfg.input, cfg.problem)
        elif cfg.command == "stats":
            text = _stats(cfg)
        else:
            text = _pipeline(cfg)
        _emit(cfg, text)
    except (LpwpError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - the exit-code contract needs a catch-all
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lpwp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", type=Path, help="write the report here instead of stdout")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--report-dir", type=Path,
                       help="also write a TSV table and PNG figures into this directory")

    p = sub.add_parser("score-ner", help="span-level P/R/F1 for entity predictions")
    p.add_argument("--gold", type=Path, required=True)
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--format", choices=("span_json", "conll_bio"), default="span_json")
    p.add_argument("--mode", choices=("micro", "macro"), default="micro",
                   help="headline averaging; both modes are printed")
    common(p)

    p = sub.add_parser("score-gen", help="declaration-level mapping accuracy of IR predictions")
    p.add_argument("--gold", type=Path, required=True)
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--normalize-scale", action="store_true",
                   help="divide each constraint by its largest absolute coefficient")
    common(p)

    for name, helptext in (("parse-ir", "parse and re-serialize an IR file"),
                           ("emit-lp", "write an IR problem as an LP (or MPS) file"),
                           ("solve", "solve an IR problem with the simplex method")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--input", type=Path, required=True)
        p.add_argument("--problem", help="problem id inside a multi-problem file")
        if name != "parse-ir":
            p.add_argument("--mps", action="store_true", help="emit MPS instead of LP format")
        if name == "solve":
            p.add_argument("--feas-tol", type=float, default=1e-9)
        common(p)

    p = sub.add_parser("stats", help="split and domain statistics of a dataset")
    p.add_argument("--data", type=Path, required=True, help="dataset file or directory")
    p.add_argument("--format", choices=("span_json", "conll_bio"), default="span_json")
    common(p)

    p = sub.add_parser("pipeline", help="IR -> canonical form -> LP file -> simplex")
    p.add_argument("--input", "--ir", dest="input", type=Path)
    p.add_argument("--problem", help="problem id, or an IR file path when --input is absent")
    p.add_argument("--data", type=Path, help="annotated dataset used to cross-check VAR mentions")
    p.add_argument("--format", choices=("span_json", "conll_bio"), default="span_json")
    p.add_argument("--lp-out", type=Path, help="also write the model file here")
    p.add_argument("--mps", action="store_true")
    p.add_argument("--feas-tol", type=float, default=1e-9)
    common(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fields = {k.replace("-", "_"): v for k, v in vars(args).items()}
    try:
        cfg = CliConfig(**fields)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
