"""Seeded PDDL problem generators for gripper, ferry and blocksworld.

Generated instances are checked for solvability: the goal must be reachable
in the delete relaxation, and small instances are additionally solved with
blind search. Blocksworld initial/goal configurations are random full tower
layouts; blocks are shuffled uniformly and each block then picks uniformly
among "table" and the existing tower tops, which slightly favours layouts
with more towers over exact state-uniform sampling.
"""

from __future__ import annotations

import math

import numpy as np

from .grounding import ground
from .heuristics import HMax
from .pddl import parse_domain, parse_problem
from .search import SearchLimits, astar

GENERATOR_DOMAINS = ("gripper", "ferry", "blocksworld")

_BLIND_CHECK_EXPANSIONS = 200_000

GRIPPER_DOMAIN = """\
(define (domain gripper)
  (:requirements :strips :typing)
  (:types room ball gripper)
  (:predicates (at-robby ?r - room)
               (at ?b - ball ?r - room)
               (free ?g - gripper)
               (carry ?o - ball ?g - gripper))
  (:action move
    :parameters (?from ?to - room)
    :precondition (and (at-robby ?from))
    :effect (and (at-robby ?to) (not (at-robby ?from))))
  (:action pick
    :parameters (?obj - ball ?room - room ?gripper - gripper)
    :precondition (and (at ?obj ?room) (at-robby ?room) (free ?gripper))
    :effect (and (carry ?obj ?gripper) (not (at ?obj ?room)) (not (free ?gripper))))
  (:action drop
    :parameters (?obj - ball ?room - room ?gripper - gripper)
    :precondition (and (carry ?obj ?gripper) (at-robby ?room))
    :effect (and (at ?obj ?room) (free ?gripper) (not (carry ?obj ?gripper)))))
"""

FERRY_DOMAIN = """\
(define (domain ferry)
  (:requirements :strips :typing)
  (:types location car)
  (:predicates (at-ferry ?l - location)
               (at ?c - car ?l - location)
               (empty-ferry)
               (on ?c - car))
  (:action sail
    :parameters (?from ?to - location)
    :precondition (and (at-ferry ?from))
    :effect (and (at-ferry ?to) (not (at-ferry ?from))))
  (:action board
    :parameters (?car - car ?loc - location)
    :precondition (and (at ?car ?loc) (at-ferry ?loc) (empty-ferry))
    :effect (and (on ?car) (not (at ?car ?loc)) (not (empty-ferry))))
  (:action debark
    :parameters (?car - car ?loc - location)
    :precondition (and (on ?car) (at-ferry ?loc))
    :effect (and (at ?car ?loc) (empty-ferry) (not (on ?car)))))
"""

BLOCKSWORLD_DOMAIN = """\
(define (domain blocksworld)
  (:requirements :strips)
  (:predicates (on ?x ?y) (ontable ?x) (clear ?x) (handempty) (holding ?x))
  (:action pick-up
    :parameters (?x)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (holding ?x) (not (ontable ?x)) (not (clear ?x)) (not (handempty))))
  (:action put-down
    :parameters (?x)
    :precondition (holding ?x)
    :effect (and (ontable ?x) (clear ?x) (handempty) (not (holding ?x))))
  (:action stack
    :parameters (?x ?y)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (on ?x ?y) (clear ?x) (handempty) (not (holding ?x)) (not (clear ?y))))
  (:action unstack
    :parameters (?x ?y)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (on ?x ?y)) (not (clear ?x)) (not (handempty)))))
"""

_DOMAIN_TEXT = {
    "gripper": GRIPPER_DOMAIN,
    "ferry": FERRY_DOMAIN,
    "blocksworld": BLOCKSWORLD_DOMAIN,
}


def domain_pddl(domain: str) -> str:
    try:
        return _DOMAIN_TEXT[domain]
    except KeyError:
        raise ValueError(f"unknown generator domain '{domain}'") from None


def gen_problem(domain: str, params: dict, seed: int) -> str:
    """Generate a solvable PDDL problem; deterministic given the seed."""
    if domain == "gripper":
        return gripper_problem(int(params["balls"]), seed)
    if domain == "ferry":
        return ferry_problem(int(params["locations"]), int(params["cars"]), seed)
    if domain == "blocksworld":
        return blocksworld_problem(int(params["blocks"]), seed)
    raise ValueError(f"unknown generator domain '{domain}'")


def gripper_problem(balls: int, seed: int = 0) -> str:
    """All balls start in rooma and must reach roomb; two grippers."""
    if balls < 1:
        raise ValueError("gripper needs at least one ball")
    names = [f"ball{i}" for i in range(1, balls + 1)]
    init = ["(at-robby rooma)", "(free left)", "(free right)"]
    init += [f"(at {b} rooma)" for b in names]
    goal = [f"(at {b} roomb)" for b in names]
    text = _problem_text(f"gripper-{balls}", "gripper", [
        ("rooma roomb", "room"),
        (" ".join(names), "ball"),
        ("left right", "gripper"),
    ], init, goal)
    _verify_solvable("gripper", text, small=balls <= 3)
    return text


def ferry_problem(locations: int, cars: int, seed: int = 0) -> str:
    """Cars at random locations must reach random goal locations."""
    if locations < 2 or cars < 1:
        raise ValueError("ferry needs at least 2 locations and 1 car")
    rng = np.random.default_rng(seed)
    locs = [f"l{i}" for i in range(1, locations + 1)]
    car_names = [f"car{i}" for i in range(1, cars + 1)]
    init = [f"(at-ferry {locs[rng.integers(locations)]})", "(empty-ferry)"]
    init += [f"(at {c} {locs[rng.integers(locations)]})" for c in car_names]
    goal = [f"(at {c} {locs[rng.integers(locations)]})" for c in car_names]
    text = _problem_text(f"ferry-l{locations}-c{cars}-s{seed}", "ferry", [
        (" ".join(locs), "location"),
        (" ".join(car_names), "car"),
    ], init, goal)
    _verify_solvable("ferry", text, small=locations * cars <= 12)
    return text


def blocksworld_problem(blocks: int, seed: int = 0) -> str:
    """Random full initial and goal tower configurations."""
    if blocks < 1:
        raise ValueError("blocksworld needs at least one block")
    rng = np.random.default_rng(seed)
    names = [f"b{i}" for i in range(1, blocks + 1)]
    init_towers = _random_towers(names, rng)
    goal_towers = _random_towers(names, rng)

    init = ["(handempty)"]
    for tower in init_towers:
        init.append(f"(ontable {tower[0]})")
        for lower, upper in zip(tower, tower[1:]):
            init.append(f"(on {upper} {lower})")
        init.append(f"(clear {tower[-1]})")
    goal = []
    for tower in goal_towers:
        goal.append(f"(ontable {tower[0]})")
        for lower, upper in zip(tower, tower[1:]):
            goal.append(f"(on {upper} {lower})")

    text = _problem_text(f"blocksworld-{blocks}-s{seed}", "blocksworld",
                         [(" ".join(names), None)], init, goal)
    _verify_solvable("blocksworld", text, small=blocks <= 5)
    return text


def _random_towers(names: list[str], rng: np.random.Generator) -> list[list[str]]:
    order = [names[i] for i in rng.permutation(len(names))]
    towers: list[list[str]] = []
    for block in order:
        pick = int(rng.integers(len(towers) + 1))
        if pick == 0:
            towers.append([block])
        else:
            towers[pick - 1].append(block)
    return towers


def _problem_text(name: str, domain: str, object_groups, init, goal) -> str:
    lines = [f"(define (problem {name})", f"  (:domain {domain})"]
    decls = []
    for group, group_type in object_groups:
        decls.append(group if group_type is None else f"{group} - {group_type}")
    lines.append(f"  (:objects {' '.join(decls)})")
    lines.append("  (:init " + " ".join(init) + ")")
    lines.append("  (:goal (and " + " ".join(goal) + ")))")
    return "\n".join(lines) + "\n"


def _verify_solvable(domain: str, problem_text: str, small: bool) -> None:
    dom = parse_domain(_DOMAIN_TEXT[domain])
    task = ground(dom, parse_problem(problem_text, dom))
    if math.isinf(HMax(task)(task.initial_state())):
        raise AssertionError(f"generated {domain} instance is relaxed-unreachable")
    if small:
        result = astar(task, lambda s: 0,
                       SearchLimits(timeout_s=60.0,
                                    max_expansions=_BLIND_CHECK_EXPANSIONS))
        if not result.solved:
            raise AssertionError(f"generated {domain} instance failed the blind check")


__all__ = [
    "GENERATOR_DOMAINS",
    "GRIPPER_DOMAIN",
    "FERRY_DOMAIN",
    "BLOCKSWORLD_DOMAIN",
    "domain_pddl",
    "gen_problem",
    "gripper_problem",
    "ferry_problem",
    "blocksworld_problem",
]
