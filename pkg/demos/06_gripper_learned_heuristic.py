"""Miniature of the full experiment: learn a gripper heuristic from the
1-2 ball instances and compare it against blind search on 3-4 balls.

Training is budgeted to ~40 seconds per fold, so expect a weaker model
than the full run; it still usually beats blind search handily.

Run: python3 demos/06_gripper_learned_heuristic.py   (a few minutes)
"""

from hgnplan.generators import GRIPPER_DOMAIN, gripper_problem
from hgnplan.grounding import ground
from hgnplan.heuristics import Blind
from hgnplan.hgn import compute_arity_bounds
from hgnplan.model import HgnHeuristic, ModelHyperparams
from hgnplan.pddl import parse_domain, parse_problem
from hgnplan.search import SearchLimits, astar
from hgnplan.training import TaskSource, TrainConfig, generate_training_data, run_kfold_training

dom = parse_domain(GRIPPER_DOMAIN)


def task_for(balls: int):
    return ground(dom, parse_problem(gripper_problem(balls), dom))


samples = generate_training_data(
    [TaskSource("gripper", f"g{n}", task_for(n)) for n in (1, 2)])
print(f"training samples: {len(samples)}")

cfg = TrainConfig(k_folds=3, max_epochs=600, fold_time_budget_s=40.0, seed=0)
result = run_kfold_training([samples], cfg, ModelHyperparams(),
                            compute_arity_bounds([dom]), resample_to=30)
for fold in result.folds:
    print(f"fold {fold.fold_index}: val loss {fold.best_val_loss:.3f} "
          f"at epoch {fold.best_epoch} ({fold.seconds:.0f}s)")
model = result.model

print(f"\n{'problem':<10} {'heuristic':<7} {'status':<8} {'cost':>4} {'expansions':>10}")
for balls in (3, 4):
    task = task_for(balls)
    for name, heuristic in (("hgn", HgnHeuristic(model, task)),
                            ("blind", Blind(task))):
        res = astar(task, heuristic, SearchLimits(timeout_s=60.0))
        print(f"gripper-{balls:<2} {name:<7} {res.status:<8} "
              f"{res.plan_cost!s:>4} {res.expansions:>10}")
