import pytest

from hgnplan.generators import (
    blocksworld_problem,
    domain_pddl,
    ferry_problem,
    gen_problem,
    gripper_problem,
)
from hgnplan.grounding import ground
from hgnplan.heuristics import LmCut
from hgnplan.pddl import parse_domain, parse_problem
from hgnplan.search import astar

from oracles import optimal_cost


def _task(domain: str, problem_text: str):
    dom = parse_domain(domain_pddl(domain))
    return ground(dom, parse_problem(problem_text, dom))


def test_gripper_one_ball_optimal_three():
    task = _task("gripper", gripper_problem(1))
    result = astar(task, LmCut(task))
    assert result.status == "solved" and result.plan_cost == 3


def test_gripper_optimal_costs_small():
    # picks + drops + moves: n + n + (2*ceil(n/2) - 1)
    for n, expected in ((1, 3), (2, 5), (3, 9)):
        task = _task("gripper", gripper_problem(n))
        assert optimal_cost(task) == expected


def test_ferry_small_optimal_bound():
    for seed in range(5):
        task = _task("ferry", ferry_problem(2, 1, seed=seed))
        assert optimal_cost(task) <= 4


def test_generation_deterministic():
    assert gripper_problem(3) == gripper_problem(3)
    assert ferry_problem(3, 2, seed=5) == ferry_problem(3, 2, seed=5)
    assert blocksworld_problem(4, seed=9) == blocksworld_problem(4, seed=9)
    assert blocksworld_problem(4, seed=9) != blocksworld_problem(4, seed=10)


def test_gen_problem_dispatch():
    text = gen_problem("gripper", {"balls": 2}, seed=0)
    assert "(at ball2 rooma)" in text
    text = gen_problem("ferry", {"locations": 2, "cars": 1}, seed=0)
    assert "(:domain ferry)" in text
    text = gen_problem("blocksworld", {"blocks": 3}, seed=0)
    assert "(:domain blocksworld)" in text
    with pytest.raises(ValueError):
        gen_problem("sokoban", {}, seed=0)


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        gripper_problem(0)
    with pytest.raises(ValueError):
        ferry_problem(1, 1)
    with pytest.raises(ValueError):
        ferry_problem(2, 0)
    with pytest.raises(ValueError):
        blocksworld_problem(0)


def test_blocksworld_instances_solvable():
    for seed in range(6):
        task = _task("blocksworld", blocksworld_problem(4, seed=seed))
        result = astar(task, LmCut(task))
        assert result.status == "solved"


def test_blocksworld_single_block():
    task = _task("blocksworld", blocksworld_problem(1, seed=0))
    result = astar(task, LmCut(task))
    assert result.status == "solved" and result.plan_cost == 0


def test_blocksworld_goal_is_full_layout():
    text = blocksworld_problem(5, seed=3)
    goal = text.split("(:goal")[1]
    for i in range(1, 6):
        assert f"b{i}" in goal  # every block is constrained in the goal


def test_generated_problems_parse_everywhere():
    for domain, text in (("gripper", gripper_problem(4)),
                         ("ferry", ferry_problem(3, 2, seed=1)),
                         ("blocksworld", blocksworld_problem(5, seed=1))):
        task = _task(domain, text)
        assert task.n_props > 0 and len(task.actions) > 0
