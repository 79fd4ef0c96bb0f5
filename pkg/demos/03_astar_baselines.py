"""A* with each baseline heuristic on small gripper instances, plus the
aggregated report table.

Run: python3 demos/03_astar_baselines.py
"""

import tempfile
from pathlib import Path

from hgnplan.bench import ExperimentSpec, render_report, report, run_experiment
from hgnplan.generators import GRIPPER_DOMAIN, gripper_problem

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    dom = root / "gripper.pddl"
    dom.write_text(GRIPPER_DOMAIN)
    tests = []
    for n in (1, 2, 3):
        path = root / f"gripper-{n}.pddl"
        path.write_text(gripper_problem(n))
        tests.append((str(dom), str(path)))

    spec = ExperimentSpec(train=(), test=tuple(tests),
                          heuristics=("blind", "hmax", "hadd", "lmcut"),
                          search_timeout_s=60.0)
    rows = run_experiment(spec)

print(f"{'problem':<14} {'heuristic':<7} {'expansions':>10} {'cost':>5}")
for row in rows:
    print(f"{row.problem:<14} {row.heuristic:<7} {row.expansions:>10} "
          f"{row.plan_cost!s:>5}")
print()
print(render_report(report(rows)))
