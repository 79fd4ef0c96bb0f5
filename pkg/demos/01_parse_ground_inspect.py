"""Parse a PDDL pair, ground it, and poke at the task semantics.

Run: python3 demos/01_parse_ground_inspect.py
"""

import json

from hgnplan import apply_action, ground, is_goal, parse_domain, parse_problem, state_names, task_to_json
from hgnplan.generators import GRIPPER_DOMAIN, gripper_problem

dom = parse_domain(GRIPPER_DOMAIN)
prob = parse_problem(gripper_problem(2), dom)
task = ground(dom, prob)

print(f"grounded gripper-2: {task.n_props} propositions, {len(task.actions)} actions")
print("propositions:", ", ".join(task.props[:6]), "...")
print("first actions:", ", ".join(a.name for a in task.actions[:4]), "...")

state = task.initial_state()
print("\ninitial state:", state_names(task, state))
print("is goal?", is_goal(state, task))

pick = next(a for a in task.actions if a.name == "(pick ball1 rooma left)")
state = apply_action(state, pick)
move = next(a for a in task.actions if a.name == "(move rooma roomb)")
state = apply_action(state, move)
drop = next(a for a in task.actions if a.name == "(drop ball1 roomb left)")
state = apply_action(state, drop)
print("after pick/move/drop:", state_names(task, state))

doc = json.loads(task_to_json(task))
print("\nJSON dump keys:", sorted(doc), "| actions in dump:", len(doc["actions"]))
