"""The four baseline heuristics on hand-built fixtures and gripper states.

Run: python3 demos/02_classic_heuristics.py
"""

from hgnplan import ground, h_add, h_blind, h_lmcut, h_max, make_task, parse_domain, parse_problem
from hgnplan.generators import GRIPPER_DOMAIN, gripper_problem

chain3 = make_task(
    ["a", "b", "g"],
    [("o1", ["a"], ["b"], [], 1), ("o2", ["b"], ["g"], [], 1)],
    ["a"], ["g"])
fork = make_task(
    ["a", "b", "c", "g"],
    [("o1", ["a"], ["b"], [], 1), ("o2", ["a"], ["c"], [], 1),
     ("o3", ["b", "c"], ["g"], [], 1)],
    ["a"], ["g"])

print(f"{'task':<8} {'blind':>6} {'hmax':>6} {'hadd':>6} {'lmcut':>6}")
for name, task in (("chain3", chain3), ("fork", fork)):
    s = task.initial_state()
    print(f"{name:<8} {h_blind(task, s):>6} {h_max(task, s):>6} "
          f"{h_add(task, s):>6} {h_lmcut(task, s):>6}")

dom = parse_domain(GRIPPER_DOMAIN)
for balls in (1, 2, 3):
    task = ground(dom, parse_problem(gripper_problem(balls), dom))
    s = task.initial_state()
    print(f"gripper-{balls}: blind={h_blind(task, s)} hmax={h_max(task, s)} "
          f"hadd={h_add(task, s)} lmcut={h_lmcut(task, s)}")
