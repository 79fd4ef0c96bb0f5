"""Supervised training pipeline: optimal-plan data generation, quantile
binning, stratified k-fold, per-fold minibatch training with best-epoch
selection on a validation fold, and multi-domain fold merging.

Targets are exact costs-to-go harvested along one optimal trajectory per
training problem (solved with A* + LM-cut), goal state included.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .grounding import GroundedTask, ground_files, state_from_names, state_names
from .heuristics import LmCut
from .hgn import ArityBounds, prepare_structure
from .hypergraph import Hypergraph, build_structure, encode_features
from .model import (
    ModelHyperparams,
    StripsHgnModel,
    copy_parameters,
    init_model,
    loss_gradients,
    model_parameters,
    forward,
    set_parameters,
)
from .nn import AdamState, adam_step
from .search import SearchLimits, astar

log = logging.getLogger(__name__)

DEFAULT_DATA_GEN_TIMEOUT_S = 120.0


@dataclass
class TrainingSample:
    """One (state, optimal cost-to-go) pair from a training problem."""

    domain_id: str
    problem_id: str
    state_names: tuple[str, ...]
    target: float
    graph: Hypergraph | None = None


@dataclass(frozen=True)
class TrainConfig:
    n_bins: int = 4
    k_folds: int = 10
    learning_rate: float = 0.001
    weight_decay: float = 0.00025
    minibatch_size: int = 1
    max_epochs: int = 2000
    fold_time_budget_s: float | None = 600.0
    seed: int = 0


@dataclass(frozen=True)
class TaskSource:
    domain_id: str
    problem_id: str
    task: GroundedTask


# ---------------------------------------------------------------------------
# data generation


def generate_training_data(sources, solver_timeout_s: float = DEFAULT_DATA_GEN_TIMEOUT_S,
                           ) -> list[TrainingSample]:
    """Solve each task optimally and emit every trajectory state.

    Tasks that do not solve within the timeout are skipped with a warning.
    """
    samples: list[TrainingSample] = []
    for src in sources:
        task = src.task
        result = astar(task, LmCut(task), SearchLimits(timeout_s=solver_timeout_s))
        if not result.solved:
            log.warning("skipping %s (%s): %s", src.problem_id, src.domain_id,
                        result.status)
            continue
        structure = build_structure(task)
        state = task.initial_state()
        remaining = result.plan_cost
        for action_id in result.plan:
            samples.append(TrainingSample(
                src.domain_id, src.problem_id, state_names(task, state),
                remaining, encode_features(structure, task, state)))
            action = task.actions[action_id]
            state = (state & ~action.del_mask) | action.add_mask
            remaining -= action.cost
        samples.append(TrainingSample(src.domain_id, src.problem_id,
                                      state_names(task, state), remaining,
                                      encode_features(structure, task, state)))
    return samples


def save_samples(samples: list[TrainingSample], path: str) -> None:
    """Write samples as JSON lines (domain, problem, state names, target)."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps({
                "domain": s.domain_id,
                "problem": s.problem_id,
                "state": list(s.state_names),
                "target": s.target,
            }) + "\n")


def load_samples(path: str) -> list[TrainingSample]:
    """Read a samples file, re-ground referenced tasks, attach hypergraphs."""
    tasks: dict[tuple[str, str], tuple[GroundedTask, object]] = {}
    samples: list[TrainingSample] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            key = (doc["domain"], doc["problem"])
            if key not in tasks:
                task = ground_files(*key)
                tasks[key] = (task, build_structure(task))
            task, structure = tasks[key]
            state = state_from_names(task, doc["state"])
            samples.append(TrainingSample(
                doc["domain"], doc["problem"], tuple(doc["state"]), doc["target"],
                encode_features(structure, task, state)))
    return samples


def group_by_domain(samples: list[TrainingSample]) -> list[list[TrainingSample]]:
    groups: dict[str, list[TrainingSample]] = {}
    for s in samples:
        groups.setdefault(s.domain_id, []).append(s)
    return [groups[k] for k in sorted(groups)]


# ---------------------------------------------------------------------------
# binning, folding, resampling


def quantile_bins(targets, n: int) -> list[int]:
    """Rank-based quantile bin per value; equal values share the bin of
    their lowest rank. Every label is < n."""
    if n < 1:
        raise ValueError("need at least one bin")
    values = list(targets)
    if not values:
        raise ValueError("no targets to bin")
    count = len(values)
    order = sorted(range(count), key=lambda i: values[i])
    bins = [0] * count
    for rank, idx in enumerate(order):
        if rank > 0 and values[idx] == values[order[rank - 1]]:
            bins[idx] = bins[order[rank - 1]]
        else:
            bins[idx] = rank * n // count
    return bins


def stratified_kfold(samples: list, bins: list[int], k: int, seed: int) -> list[list]:
    """Split samples into k disjoint folds preserving per-bin proportions."""
    if k < 2:
        raise ValueError("need at least two folds")
    if k > len(samples):
        raise ValueError(f"cannot make {k} folds from {len(samples)} samples")
    if len(bins) != len(samples):
        raise ValueError("bins/samples length mismatch")
    rng = np.random.default_rng(seed)
    folds: list[list] = [[] for _ in range(k)]
    cursor = 0
    for b in sorted(set(bins)):
        idx = [i for i, bi in enumerate(bins) if bi == b]
        idx = [idx[j] for j in rng.permutation(len(idx))]
        for i in idx:
            folds[cursor % k].append(samples[i])
            cursor += 1
    return folds


def resample_with_replacement(samples: list, bins: list[int], target_size: int,
                              seed: int) -> list:
    """Stratified resampling with replacement to target_size samples.

    Per-bin quotas follow the original proportions (largest remainder)."""
    if target_size < 1:
        raise ValueError("target size must be positive")
    if not samples:
        raise ValueError("cannot resample an empty set")
    if len(bins) != len(samples):
        raise ValueError("bins/samples length mismatch")
    rng = np.random.default_rng(seed)
    labels = sorted(set(bins))
    per_bin = {b: [i for i, bi in enumerate(bins) if bi == b] for b in labels}
    exact = {b: target_size * len(per_bin[b]) / len(samples) for b in labels}
    quota = {b: int(exact[b]) for b in labels}
    shortfall = target_size - sum(quota.values())
    for b in sorted(labels, key=lambda b: (-(exact[b] - quota[b]), b))[:shortfall]:
        quota[b] += 1
    out = []
    for b in labels:
        for i in rng.choice(per_bin[b], size=quota[b], replace=True):
            out.append(samples[int(i)])
    return out


def merge_domain_folds(per_domain_folds: list[list[list]]) -> list[list]:
    """Union fold i across domains into merged fold i."""
    if not per_domain_folds:
        raise ValueError("nothing to merge")
    k = len(per_domain_folds[0])
    if any(len(folds) != k for folds in per_domain_folds):
        raise ValueError("fold counts differ between domains")
    return [[s for folds in per_domain_folds for s in folds[i]] for i in range(k)]


# ---------------------------------------------------------------------------
# training


def _mean_loss(model: StripsHgnModel, samples: list[TrainingSample], prepared) -> float:
    total = 0.0
    for s in samples:
        outputs, _ = forward(model, s.graph, prepared.get(id(s.graph.structure)))
        total += sum((h - s.target) ** 2 for h in outputs) / len(outputs)
    return total / len(samples)


def _prepare_all(samples, arity: ArityBounds) -> dict:
    prepared: dict = {}
    for s in samples:
        key = id(s.graph.structure)
        if key not in prepared:
            prepared[key] = prepare_structure(s.graph.structure, arity)
    return prepared


def train_fold(train: list[TrainingSample], val: list[TrainingSample],
               cfg: TrainConfig, hp: ModelHyperparams, arity: ArityBounds,
               seed: int):
    """Minibatch training; returns the snapshot with the lowest validation
    loss as (model, best_val_loss, best_epoch)."""
    if not train or not val:
        raise ValueError("train and validation sets must be nonempty")
    if any(s.graph is None for s in train + val):
        raise ValueError("samples must carry hypergraphs (see load_samples)")
    ss = np.random.SeedSequence(seed)
    init_seed, shuffle_seed = (int(v) for v in ss.generate_state(2))
    model = init_model(hp, arity, init_seed)
    params = model_parameters(model)
    adam = AdamState.for_params(params)
    rng = np.random.default_rng(shuffle_seed)
    prepared = _prepare_all(train + val, arity)

    best_val = _mean_loss(model, val, prepared)
    best_epoch = 0
    best_params = copy_parameters(model)
    start = time.monotonic()

    for epoch in range(1, cfg.max_epochs + 1):
        if (cfg.fold_time_budget_s is not None
                and time.monotonic() - start > cfg.fold_time_budget_s):
            break
        order = rng.permutation(len(train))
        for lo in range(0, len(order), cfg.minibatch_size):
            batch = [train[i] for i in order[lo:lo + cfg.minibatch_size]]
            grads = None
            for s in batch:
                g, _ = loss_gradients(model, s.graph, s.target,
                                      prepared.get(id(s.graph.structure)))
                if grads is None:
                    grads = g
                else:
                    for a, b in zip(grads, g):
                        a += b
            if len(batch) > 1:
                for a in grads:
                    a /= len(batch)
            adam_step(params, grads, adam, cfg.learning_rate, cfg.weight_decay)
        val_loss = _mean_loss(model, val, prepared)
        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_params = copy_parameters(model)

    set_parameters(model, best_params)
    model.provenance.update({"best_epoch": best_epoch, "fold_seed": seed})
    return model, best_val, best_epoch


@dataclass
class FoldResult:
    fold_index: int
    best_val_loss: float
    best_epoch: int
    train_size: int
    val_size: int
    seconds: float


@dataclass
class KFoldReport:
    folds: list[FoldResult] = field(default_factory=list)
    chosen_fold: int = -1
    model: StripsHgnModel | None = None


def run_kfold_training(samples_per_domain: list[list[TrainingSample]],
                       cfg: TrainConfig, hp: ModelHyperparams, arity: ArityBounds,
                       resample_to: int | None = None) -> KFoldReport:
    """Bin, fold and merge per domain, train one model per fold, and return
    the one with the lowest validation loss (ties to the lowest fold index)."""
    if not samples_per_domain or any(not d for d in samples_per_domain):
        raise ValueError("need at least one nonempty domain sample set")
    base = np.random.SeedSequence(cfg.seed)
    seeds = [int(v) for v in base.generate_state(2 * len(samples_per_domain) + cfg.k_folds)]

    per_domain_folds = []
    for d, domain_samples in enumerate(samples_per_domain):
        resample_seed, fold_seed = seeds[2 * d], seeds[2 * d + 1]
        bins = quantile_bins([s.target for s in domain_samples], cfg.n_bins)
        if resample_to is not None:
            domain_samples = resample_with_replacement(domain_samples, bins,
                                                       resample_to, resample_seed)
            bins = quantile_bins([s.target for s in domain_samples], cfg.n_bins)
        per_domain_folds.append(stratified_kfold(domain_samples, bins,
                                                 cfg.k_folds, fold_seed))
    merged = merge_domain_folds(per_domain_folds)

    report = KFoldReport()
    best: tuple[float, int] | None = None
    for i in range(cfg.k_folds):
        val = merged[i]
        train = [s for j, fold in enumerate(merged) if j != i for s in fold]
        started = time.monotonic()
        model, val_loss, epoch = train_fold(train, val, cfg, hp, arity,
                                            seed=seeds[2 * len(samples_per_domain) + i])
        elapsed = time.monotonic() - started
        report.folds.append(FoldResult(i, val_loss, epoch, len(train), len(val),
                                       elapsed))
        log.info("fold %d: best val loss %.4f at epoch %d (%.1fs)",
                 i, val_loss, epoch, elapsed)
        if best is None or val_loss < best[0]:
            best = (val_loss, i)
            report.model = model
            report.chosen_fold = i
    return report


__all__ = [
    "DEFAULT_DATA_GEN_TIMEOUT_S",
    "TrainingSample",
    "TrainConfig",
    "TaskSource",
    "generate_training_data",
    "save_samples",
    "load_samples",
    "group_by_domain",
    "quantile_bins",
    "stratified_kfold",
    "resample_with_replacement",
    "merge_domain_folds",
    "train_fold",
    "FoldResult",
    "KFoldReport",
    "run_kfold_training",
]
