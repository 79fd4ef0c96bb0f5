"""Experiment runner and report emitter.

Runs A* once per (test problem, heuristic) pair, records expansion counts
and plan quality, computes the optimal cost with A* + LM-cut under the same
timeout where possible, and aggregates coverage / expansions / deviation
per (domain, heuristic).
"""

from __future__ import annotations

import csv
import json
import os
import statistics
from dataclasses import dataclass

from .grounding import GroundedTask, ground_files
from .heuristics import LmCut, make_heuristic
from .model import StripsHgnModel, load_model
from .search import SOLVED, SearchLimits, astar, validate_plan

DEFAULT_SEARCH_TIMEOUT_S = 300.0

CSV_COLUMNS = ["domain", "problem", "heuristic", "status", "expansions", "generated",
               "plan_cost", "optimal_cost", "deviation", "wall_time_s",
               "heuristic_evals"]


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run: problem files, heuristics and limits.

    ``train`` and ``test`` are (domain_path, problem_path) pairs; they must
    not overlap by file identity. ``model_path`` is required when the 'hgn'
    heuristic is requested.
    """

    train: tuple[tuple[str, str], ...]
    test: tuple[tuple[str, str], ...]
    heuristics: tuple[str, ...]
    search_timeout_s: float = DEFAULT_SEARCH_TIMEOUT_S
    repetitions: int = 1
    seed: int = 0
    model_path: str | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        train_files = {os.path.realpath(p) for _, p in self.train}
        test_files = {os.path.realpath(p) for _, p in self.test}
        overlap = train_files & test_files
        if overlap:
            raise ValueError(f"test problems overlap the training set: {sorted(overlap)}")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        doc = json.loads(text)
        return cls(
            train=tuple((d, p) for d, p in doc.get("train", [])),
            test=tuple((d, p) for d, p in doc["test"]),
            heuristics=tuple(doc["heuristics"]),
            search_timeout_s=doc.get("search_timeout_s", DEFAULT_SEARCH_TIMEOUT_S),
            repetitions=doc.get("repetitions", 1),
            seed=doc.get("seed", 0),
            model_path=doc.get("model"),
        )


@dataclass(frozen=True)
class ResultRow:
    domain: str
    problem: str
    heuristic: str
    status: str
    expansions: int
    generated: int
    plan_cost: float | None
    optimal_cost: float | None
    deviation: float | None
    wall_time_s: float
    heuristic_evals: int


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """One row per (test problem, heuristic) per repetition."""
    for domain_path, problem_path in spec.train + spec.test:
        for path in (domain_path, problem_path):
            if not os.path.exists(path):
                raise FileNotFoundError(path)
    model: StripsHgnModel | None = None
    if "hgn" in spec.heuristics:
        if spec.model_path is None:
            raise ValueError("spec requests the hgn heuristic but names no model")
        model = load_model(spec.model_path)

    limits = SearchLimits(timeout_s=spec.search_timeout_s)
    rows: list[ResultRow] = []
    for _ in range(spec.repetitions):
        for domain_path, problem_path in spec.test:
            task = ground_files(domain_path, problem_path)
            domain = os.path.basename(domain_path)
            problem = os.path.basename(problem_path)

            lmcut_result = astar(task, LmCut(task), limits)
            optimal = lmcut_result.plan_cost if lmcut_result.solved else None

            for name in spec.heuristics:
                if name == "lmcut":
                    result = lmcut_result
                else:
                    result = astar(task, make_heuristic(name, task, model), limits)
                rows.append(_to_row(task, domain, problem, name, result, optimal))
    return rows


def _to_row(task: GroundedTask, domain: str, problem: str, heuristic: str,
            result, optimal: float | None) -> ResultRow:
    plan_cost = None
    if result.status == SOLVED:
        plan_cost = validate_plan(task, result.plan)  # re-check before emission
    deviation = None
    if plan_cost is not None and optimal is not None:
        deviation = plan_cost - optimal
    return ResultRow(domain, problem, heuristic, result.status, result.expansions,
                     result.generated, plan_cost, optimal, deviation,
                     result.wall_time, result.heuristic_evals)


# ---------------------------------------------------------------------------
# aggregation


@dataclass(frozen=True)
class ReportEntry:
    domain: str
    heuristic: str
    solved: int
    total: int
    coverage: float  # solved/total rounded to 2 decimals
    mean_expansions: float | None  # over problems solved by every heuristic
    median_expansions: float | None
    mean_deviation: float | None   # over solved rows with a known optimal


def report(rows: list[ResultRow]) -> list[ReportEntry]:
    if not rows:
        raise ValueError("no result rows to report")
    domains = sorted({r.domain for r in rows})
    entries: list[ReportEntry] = []
    for domain in domains:
        d_rows = [r for r in rows if r.domain == domain]
        heuristics = sorted({r.heuristic for r in d_rows})
        problems = sorted({r.problem for r in d_rows})
        common = [p for p in problems
                  if all(any(r.problem == p and r.heuristic == h and r.status == SOLVED
                             for r in d_rows) for h in heuristics)]
        for h in heuristics:
            h_rows = [r for r in d_rows if r.heuristic == h]
            solved = [r for r in h_rows if r.status == SOLVED]
            exp = [r.expansions for r in h_rows
                   if r.problem in common and r.status == SOLVED]
            dev = [r.deviation for r in solved if r.deviation is not None]
            entries.append(ReportEntry(
                domain=domain,
                heuristic=h,
                solved=len(solved),
                total=len(h_rows),
                coverage=round(len(solved) / len(h_rows), 2),
                mean_expansions=statistics.mean(exp) if exp else None,
                median_expansions=statistics.median(exp) if exp else None,
                mean_deviation=statistics.mean(dev) if dev else None,
            ))
    return entries


def render_report(entries: list[ReportEntry]) -> str:
    header = f"{'domain':<20} {'heuristic':<10} {'coverage':>9} {'mean exp':>12} " \
             f"{'median exp':>12} {'mean dev':>9}"
    lines = [header, "-" * len(header)]
    for e in entries:
        mean_exp = f"{e.mean_expansions:.1f}" if e.mean_expansions is not None else "-"
        med_exp = f"{e.median_expansions:.1f}" if e.median_expansions is not None else "-"
        dev = f"{e.mean_deviation:.2f}" if e.mean_deviation is not None else "-"
        lines.append(f"{e.domain:<20} {e.heuristic:<10} {e.coverage:>9.2f} "
                     f"{mean_exp:>12} {med_exp:>12} {dev:>9}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# row serialization


def rows_to_csv(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([
                r.domain, r.problem, r.heuristic, r.status, r.expansions,
                r.generated,
                "" if r.plan_cost is None else r.plan_cost,
                "" if r.optimal_cost is None else r.optimal_cost,
                "" if r.deviation is None else r.deviation,
                f"{r.wall_time_s:.6f}", r.heuristic_evals,
            ])


def rows_from_csv(path: str) -> list[ResultRow]:
    def num(text):
        return None if text == "" else float(text)

    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected results columns {reader.fieldnames}")
        for rec in reader:
            rows.append(ResultRow(
                rec["domain"], rec["problem"], rec["heuristic"], rec["status"],
                int(rec["expansions"]), int(rec["generated"]),
                num(rec["plan_cost"]), num(rec["optimal_cost"]),
                num(rec["deviation"]), float(rec["wall_time_s"]),
                int(rec["heuristic_evals"]),
            ))
    return rows


def rows_to_json(rows: list[ResultRow]) -> str:
    return json.dumps([r.__dict__ for r in rows], indent=2)


__all__ = [
    "DEFAULT_SEARCH_TIMEOUT_S",
    "CSV_COLUMNS",
    "ExperimentSpec",
    "ResultRow",
    "run_experiment",
    "ReportEntry",
    "report",
    "render_report",
    "rows_to_csv",
    "rows_from_csv",
    "rows_to_json",
]
