"""Command-line entry points.

Subcommands: gen-problem, gen-data, train, plan, eval, report.
Set HGNPLAN_LOG (e.g. DEBUG, INFO, WARNING) to control log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import bench, generators, training
from .grounding import ground_files, task_to_json
from .heuristics import make_heuristic
from .hgn import compute_arity_bounds
from .model import ModelHyperparams, load_model, save_model
from .pddl import parse_domain
from .search import SearchLimits, astar
from .training import TaskSource, TrainConfig

log = logging.getLogger(__name__)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_gen_problem(args) -> int:
    params = {}
    if args.domain == "gripper":
        params["balls"] = args.balls
    elif args.domain == "ferry":
        params["locations"] = args.locations
        params["cars"] = args.cars
    else:
        params["blocks"] = args.blocks
    text = generators.gen_problem(args.domain, params, args.seed)
    _write_text(args.out, text)
    if args.domain_out:
        _write_text(args.domain_out, generators.domain_pddl(args.domain))
    return 0


def _cmd_gen_data(args) -> int:
    sources = []
    for problem in args.problem:
        sources.append(TaskSource(args.domain, problem,
                                  ground_files(args.domain, problem)))
    samples = training.generate_training_data(sources, solver_timeout_s=args.timeout)
    training.save_samples(samples, args.out)
    log.info("wrote %d samples to %s", len(samples), args.out)
    return 0


def _cmd_train(args) -> int:
    samples = []
    for path in args.samples:
        samples.extend(training.load_samples(path))
    if not samples:
        log.error("no training samples found")
        return 1
    per_domain = training.group_by_domain(samples)
    domains = []
    for domain_path in sorted({s.domain_id for s in samples}):
        with open(domain_path, encoding="utf-8") as fh:
            domains.append(parse_domain(fh.read()))
    arity = compute_arity_bounds(domains)
    cfg = TrainConfig(
        n_bins=args.bins, k_folds=args.folds, learning_rate=args.lr,
        weight_decay=args.weight_decay, minibatch_size=args.minibatch,
        max_epochs=args.max_epochs, fold_time_budget_s=args.fold_time_budget,
        seed=args.seed,
    )
    hp = ModelHyperparams(message_steps=args.message_steps,
                          latent_width=args.latent)
    result = training.run_kfold_training(per_domain, cfg, hp, arity,
                                         resample_to=args.resample)
    result.model.provenance.update({
        "seed": cfg.seed,
        "training_config_digest": _config_digest(cfg, hp),
        "chosen_fold": result.chosen_fold,
    })
    save_model(result.model, args.out)
    for fold in result.folds:
        print(f"fold {fold.fold_index}: val loss {fold.best_val_loss:.4f} "
              f"at epoch {fold.best_epoch} ({fold.seconds:.1f}s)")
    print(f"chose fold {result.chosen_fold}; model written to {args.out}")
    return 0


def _config_digest(cfg: TrainConfig, hp: ModelHyperparams) -> str:
    import hashlib

    blob = json.dumps({"cfg": cfg.__dict__, "hp": hp.__dict__}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _cmd_plan(args) -> int:
    task = ground_files(args.domain, args.problem)
    if args.dump_task:
        _write_text(args.dump_task, task_to_json(task))
    model = load_model(args.model) if args.model else None
    heuristic = make_heuristic(args.heuristic, task, model)
    result = astar(task, heuristic, SearchLimits(timeout_s=args.timeout))
    print(json.dumps(result.to_json(task), indent=2))
    return 0 if result.solved else 1


def _cmd_eval(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        spec = bench.ExperimentSpec.from_json(fh.read())
    rows = bench.run_experiment(spec)
    bench.rows_to_csv(rows, args.out)
    if args.json:
        _write_text(args.json, bench.rows_to_json(rows))
    print(bench.render_report(bench.report(rows)))
    return 0


def _cmd_report(args) -> int:
    rows = bench.rows_from_csv(args.results)
    print(bench.render_report(bench.report(rows)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hgnplan",
                                     description="Planning heuristics learned "
                                                 "over delete-relaxation hypergraphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-problem", help="generate a PDDL problem")
    p.add_argument("--domain", required=True, choices=generators.GENERATOR_DOMAINS)
    p.add_argument("--balls", type=int, default=1, help="gripper: number of balls")
    p.add_argument("--locations", type=int, default=2, help="ferry: number of locations")
    p.add_argument("--cars", type=int, default=1, help="ferry: number of cars")
    p.add_argument("--blocks", type=int, default=4, help="blocksworld: number of blocks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="problem file (default: stdout)")
    p.add_argument("--domain-out", help="also write the domain PDDL here")
    p.set_defaults(func=_cmd_gen_problem)

    p = sub.add_parser("gen-data", help="harvest optimal-plan training samples")
    p.add_argument("--domain", required=True, help="domain PDDL file")
    p.add_argument("--problem", required=True, action="append",
                   help="problem PDDL file (repeatable)")
    p.add_argument("--timeout", type=float, default=training.DEFAULT_DATA_GEN_TIMEOUT_S,
                   help="per-problem solver timeout in seconds")
    p.add_argument("--out", required=True, help="samples file (JSON lines)")
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="k-fold training over sample files")
    p.add_argument("--samples", required=True, action="append",
                   help="samples file from gen-data (repeatable)")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--bins", type=int, default=TrainConfig.n_bins)
    p.add_argument("--folds", type=int, default=TrainConfig.k_folds)
    p.add_argument("--lr", type=float, default=TrainConfig.learning_rate)
    p.add_argument("--weight-decay", type=float, default=TrainConfig.weight_decay)
    p.add_argument("--minibatch", type=int, default=TrainConfig.minibatch_size)
    p.add_argument("--max-epochs", type=int, default=TrainConfig.max_epochs)
    p.add_argument("--fold-time-budget", type=float,
                   default=TrainConfig.fold_time_budget_s,
                   help="seconds of training per fold")
    p.add_argument("--seed", type=int, default=TrainConfig.seed)
    p.add_argument("--resample", type=int, default=None,
                   help="resample each domain to this many samples")
    p.add_argument("--message-steps", type=int, default=10)
    p.add_argument("--latent", type=int, default=32)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("plan", help="run A* on one problem")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--heuristic", required=True,
                   choices=["blind", "hmax", "hadd", "lmcut", "hgn"])
    p.add_argument("--model", help="model file (required for --heuristic hgn)")
    p.add_argument("--timeout", type=float, default=bench.DEFAULT_SEARCH_TIMEOUT_S)
    p.add_argument("--dump-task", help="write the grounded task as JSON here")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("eval", help="run an experiment spec")
    p.add_argument("--spec", required=True, help="experiment spec JSON file")
    p.add_argument("--out", required=True, help="results CSV file")
    p.add_argument("--json", help="also write results as JSON here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("report", help="summarize a results CSV")
    p.add_argument("--results", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("HGNPLAN_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
