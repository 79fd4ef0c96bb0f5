"""Grounding of typed STRIPS domains into indexed propositional tasks.

States are plain ints used as bitsets over proposition ids (bit i set iff
proposition i is true), which keeps duplicate detection and action
application cheap inside the search loop.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .pddl import Atom, DomainDef, ProblemDef

State = int

DEFAULT_MAX_ACTIONS = 1_000_000


class GroundingLimitError(Exception):
    """Instantiation would exceed the configured action limit."""


class PreconditionError(Exception):
    """An action was applied in a state that does not satisfy its precondition."""


@dataclass(frozen=True)
class GroundedAction:
    name: str
    preconditions: tuple[int, ...]  # sorted ascending, duplicate-free
    add_effects: tuple[int, ...]
    del_effects: tuple[int, ...]
    cost: float | int
    pre_mask: int
    add_mask: int
    del_mask: int


@dataclass(frozen=True)
class GroundedTask:
    """Propositional task: propositions, actions, initial state and goal."""

    props: tuple[str, ...]  # lexicographically sorted; index = proposition id
    actions: tuple[GroundedAction, ...]
    init: tuple[int, ...]
    goal: tuple[int, ...]
    init_mask: int
    goal_mask: int

    @property
    def n_props(self) -> int:
        return len(self.props)

    def initial_state(self) -> State:
        return self.init_mask


def _mask(ids) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def _make_action(name: str, pre, add, dele, cost) -> GroundedAction:
    pre = tuple(sorted(set(pre)))
    add = tuple(sorted(set(add)))
    dele = tuple(sorted(set(dele)))
    if cost < 0:
        raise ValueError(f"negative cost for action '{name}'")
    return GroundedAction(name, pre, add, dele, cost, _mask(pre), _mask(add), _mask(dele))


def make_task(props, actions, init, goal) -> GroundedTask:
    """Build a task directly from names.

    ``actions`` is an iterable of (name, pre_names, add_names, del_names, cost)
    tuples. Propositions are sorted lexicographically and indexed; no pruning
    is applied.
    """
    prop_list = sorted(props)
    if len(set(prop_list)) != len(prop_list):
        raise ValueError("duplicate proposition names")
    index = {p: i for i, p in enumerate(prop_list)}

    def ids(names):
        return [index[n] for n in names]

    grounded = [_make_action(name, ids(pre), ids(add), ids(dele), cost)
                for name, pre, add, dele, cost in actions]
    grounded.sort(key=lambda a: a.name)
    init_ids = tuple(sorted(set(ids(init))))
    goal_ids = tuple(sorted(set(ids(goal))))
    return GroundedTask(tuple(prop_list), tuple(grounded), init_ids, goal_ids,
                        _mask(init_ids), _mask(goal_ids))


# ---------------------------------------------------------------------------
# grounding proper


def _objects_by_type(dom: DomainDef, prob: ProblemDef) -> dict[str, list[str]]:
    all_objects = list(dom.constants) + list(prob.objects)
    by_type: dict[str, list[str]] = {t: [] for t in dom.types}
    for obj, obj_type in all_objects:
        for t in dom.types:
            if dom.is_subtype(obj_type, t):
                by_type[t].append(obj)
    for t in by_type:
        by_type[t].sort()
    return by_type


def _instantiate(atom: Atom, binding: dict[str, str]) -> str:
    args = tuple(binding.get(a, a) for a in atom.args)
    return Atom(atom.predicate, args).format()


def ground(dom: DomainDef, prob: ProblemDef,
           max_actions: int = DEFAULT_MAX_ACTIONS) -> GroundedTask:
    """Ground a parsed domain/problem pair into a :class:`GroundedTask`.

    All type-consistent schema instantiations are enumerated, then
    :func:`prune_task` drops actions unreachable under delete-relaxed
    forward exploration and actions with no add effects, plus propositions
    that appear nowhere. The proposition order is lexicographic by name.
    """
    by_type = _objects_by_type(dom, prob)
    candidates: list[tuple[str, frozenset, frozenset, frozenset, float | int]] = []
    for schema in dom.schemas:
        pools = []
        for var, t in schema.params:
            pools.append(by_type.get(t, []))
        for combo in itertools.product(*pools):
            if len(candidates) >= max_actions:
                raise GroundingLimitError(
                    f"grounding of '{prob.name}' exceeds {max_actions} actions"
                )
            binding = {var: obj for (var, _), obj in zip(schema.params, combo)}
            name = "(" + " ".join((schema.name,) + combo) + ")"
            pre = frozenset(_instantiate(a, binding) for a in schema.preconditions)
            add = frozenset(_instantiate(a, binding) for a in schema.add_effects)
            dele = frozenset(_instantiate(a, binding) for a in schema.del_effects)
            candidates.append((name, pre, add, dele, schema.cost))

    init_names = {a.format() for a in prob.init}
    goal_names = {a.format() for a in prob.goal}
    prop_names = set(init_names) | goal_names
    for _, pre, add, dele, _ in candidates:
        prop_names |= pre | add | dele
    full = make_task(prop_names, candidates, init_names, goal_names)
    return prune_task(full)


def prune_task(task: GroundedTask) -> GroundedTask:
    """Drop relaxed-unreachable and add-free actions, then unused propositions.

    Any plan of the input task stays valid after removing its pruned
    actions, at no greater cost, and the optimal cost is unchanged: pruned
    actions are either inapplicable in every reachable state or add nothing
    (and deleting propositions never helps reach a positive goal).
    """
    keep = _relaxed_reachable(task)
    kept = [a for i, a in enumerate(task.actions) if keep[i] and a.add_effects]

    used = set(task.init) | set(task.goal)
    for a in kept:
        used.update(a.preconditions, a.add_effects, a.del_effects)
    # props are already name-sorted, so a subset keeps the canonical order
    old_ids = sorted(used)
    remap = {old: new for new, old in enumerate(old_ids)}
    props = tuple(task.props[i] for i in old_ids)

    actions = tuple(_make_action(a.name,
                                 (remap[p] for p in a.preconditions),
                                 (remap[p] for p in a.add_effects),
                                 (remap[p] for p in a.del_effects),
                                 a.cost)
                    for a in kept)
    init_ids = tuple(remap[p] for p in task.init)
    goal_ids = tuple(remap[p] for p in task.goal)
    return GroundedTask(props, actions, init_ids, goal_ids,
                        _mask(init_ids), _mask(goal_ids))


def _relaxed_reachable(task: GroundedTask) -> list[bool]:
    """Delete-relaxed forward applicability of every action from init."""
    init = set(task.init)
    waiting_on: dict[int, list[int]] = {}
    counters = []
    for i, action in enumerate(task.actions):
        missing = [p for p in action.preconditions if p not in init]
        counters.append(len(missing))
        for p in missing:
            waiting_on.setdefault(p, []).append(i)

    reached = set(init)
    applicable = [False] * len(task.actions)
    queue = [i for i, c in enumerate(counters) if c == 0]
    while queue:
        i = queue.pop()
        if applicable[i]:
            continue
        applicable[i] = True
        for fact in task.actions[i].add_effects:
            if fact in reached:
                continue
            reached.add(fact)
            for j in waiting_on.get(fact, ()):
                counters[j] -= 1
                if counters[j] == 0:
                    queue.append(j)
    return applicable


def ground_files(domain_path: str, problem_path: str,
                 max_actions: int = DEFAULT_MAX_ACTIONS) -> GroundedTask:
    """Parse and ground a domain/problem file pair."""
    from .pddl import parse_domain, parse_problem

    with open(domain_path, encoding="utf-8") as fh:
        dom = parse_domain(fh.read())
    with open(problem_path, encoding="utf-8") as fh:
        prob = parse_problem(fh.read(), dom)
    return ground(dom, prob, max_actions=max_actions)


# ---------------------------------------------------------------------------
# state semantics


def make_state(ids) -> State:
    return _mask(ids)


def state_ids(s: State) -> list[int]:
    out = []
    i = 0
    while s:
        if s & 1:
            out.append(i)
        s >>= 1
        i += 1
    return out


def state_names(task: GroundedTask, s: State) -> tuple[str, ...]:
    return tuple(task.props[i] for i in state_ids(s))


def state_from_names(task: GroundedTask, names) -> State:
    index = {p: i for i, p in enumerate(task.props)}
    try:
        return _mask(index[n] for n in names)
    except KeyError as exc:
        raise ValueError(f"unknown proposition {exc.args[0]!r}") from None


def applicable(s: State, action: GroundedAction) -> bool:
    return s & action.pre_mask == action.pre_mask


def apply_action(s: State, action: GroundedAction) -> State:
    """Successor state (s minus deletes) union adds; raises if inapplicable."""
    if s & action.pre_mask != action.pre_mask:
        raise PreconditionError(f"precondition of {action.name} not satisfied")
    return (s & ~action.del_mask) | action.add_mask


def is_goal(s: State, task: GroundedTask) -> bool:
    return s & task.goal_mask == task.goal_mask


def delete_relax(task: GroundedTask) -> GroundedTask:
    """The same task with all delete effects removed."""
    relaxed = tuple(
        GroundedAction(a.name, a.preconditions, a.add_effects, (), a.cost,
                       a.pre_mask, a.add_mask, 0)
        for a in task.actions
    )
    return GroundedTask(task.props, relaxed, task.init, task.goal,
                        task.init_mask, task.goal_mask)


# ---------------------------------------------------------------------------
# debugging dump


def task_to_json(task: GroundedTask) -> str:
    """JSON dump of a grounded task (schema documented in the README)."""
    doc = {
        "props": list(task.props),
        "init": list(task.init),
        "goal": list(task.goal),
        "actions": [
            {
                "name": a.name,
                "pre": list(a.preconditions),
                "add": list(a.add_effects),
                "del": list(a.del_effects),
                "cost": a.cost,
            }
            for a in task.actions
        ],
    }
    return json.dumps(doc, indent=2)


__all__ = [
    "State",
    "GroundedAction",
    "GroundedTask",
    "GroundingLimitError",
    "PreconditionError",
    "ground",
    "ground_files",
    "prune_task",
    "make_task",
    "make_state",
    "state_ids",
    "state_names",
    "state_from_names",
    "applicable",
    "apply_action",
    "is_goal",
    "delete_relax",
    "task_to_json",
]
