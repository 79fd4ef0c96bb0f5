"""Brute-force reference implementations used to check the real code.

These deliberately share no machinery with the package beyond task
construction: reachability is plain BFS over bitmask states, optimal
cost-to-go is a backward Dijkstra over the explicit transition graph, and
gradients are checked against central finite differences.
"""

from __future__ import annotations

import math
from heapq import heappop, heappush

import numpy as np

from hgnplan.grounding import GroundedTask, make_task


def reachable_states(task: GroundedTask, limit: int = 500_000) -> set[int]:
    init = task.initial_state()
    seen = {init}
    frontier = [init]
    while frontier:
        state = frontier.pop()
        for action in task.actions:
            if state & action.pre_mask != action.pre_mask:
                continue
            succ = (state & ~action.del_mask) | action.add_mask
            if succ not in seen:
                if len(seen) >= limit:
                    raise RuntimeError("reachable state space too large for the oracle")
                seen.add(succ)
                frontier.append(succ)
    return seen


def optimal_costs_to_go(task: GroundedTask, states: set[int] | None = None) -> dict[int, float]:
    """Exact h*(s) for every reachable state (math.inf for dead ends)."""
    if states is None:
        states = reachable_states(task)
    backward: dict[int, list[tuple[int, float]]] = {s: [] for s in states}
    for state in states:
        for action in task.actions:
            if state & action.pre_mask != action.pre_mask:
                continue
            succ = (state & ~action.del_mask) | action.add_mask
            backward[succ].append((state, action.cost))

    dist = {s: math.inf for s in states}
    heap = []
    for s in states:
        if s & task.goal_mask == task.goal_mask:
            dist[s] = 0
            heappush(heap, (0, s))
    while heap:
        d, s = heappop(heap)
        if d > dist[s]:
            continue
        for prev, cost in backward[s]:
            nd = d + cost
            if nd < dist[prev]:
                dist[prev] = nd
                heappush(heap, (nd, prev))
    return dist


def optimal_cost(task: GroundedTask) -> float:
    return optimal_costs_to_go(task)[task.initial_state()]


def optimal_plan(task: GroundedTask) -> list[int] | None:
    """One optimal plan (action ids) via forward Dijkstra, or None."""
    init = task.initial_state()
    dist = {init: 0.0}
    parent: dict[int, tuple[int, int]] = {}
    heap = [(0.0, init)]
    goal_state = None
    while heap:
        d, state = heappop(heap)
        if d > dist[state]:
            continue
        if state & task.goal_mask == task.goal_mask:
            goal_state = state
            break
        for action_id, action in enumerate(task.actions):
            if state & action.pre_mask != action.pre_mask:
                continue
            succ = (state & ~action.del_mask) | action.add_mask
            nd = d + action.cost
            if nd < dist.get(succ, math.inf):
                dist[succ] = nd
                parent[succ] = (state, action_id)
                heappush(heap, (nd, succ))
    if goal_state is None:
        return None
    plan: list[int] = []
    state = goal_state
    while state in parent:
        state, action_id = parent[state]
        plan.append(action_id)
    plan.reverse()
    return plan


def random_task(rng: np.random.Generator, max_props: int = 12,
                max_actions: int = 20) -> GroundedTask:
    """Small random task; covers zero costs, deletes and dead ends."""
    n_props = int(rng.integers(3, max_props + 1))
    props = [f"p{i:02d}" for i in range(n_props)]
    n_actions = int(rng.integers(1, max_actions + 1))
    actions = []
    for i in range(n_actions):
        pre = rng.choice(n_props, size=int(rng.integers(0, min(3, n_props) + 1)),
                         replace=False)
        add = rng.choice(n_props, size=int(rng.integers(1, min(3, n_props) + 1)),
                         replace=False)
        dele = rng.choice(n_props, size=int(rng.integers(0, min(2, n_props) + 1)),
                          replace=False)
        cost = int(rng.choice([0, 1, 1, 1, 2, 3]))
        actions.append((f"a{i:02d}",
                        [props[j] for j in pre],
                        [props[j] for j in add],
                        [props[j] for j in dele],
                        cost))
    init_size = int(rng.integers(1, max(2, n_props // 2) + 1))
    init = [props[j] for j in rng.choice(n_props, size=init_size, replace=False)]
    goal_size = int(rng.integers(1, min(3, n_props) + 1))
    goal = [props[j] for j in rng.choice(n_props, size=goal_size, replace=False)]
    return make_task(props, actions, init, goal)


def gradient_close(analytic: float, numeric: float,
                   rel_tol: float = 1e-4, abs_tol: float = 1e-8) -> bool:
    return abs(analytic - numeric) <= rel_tol * max(abs(analytic), abs(numeric)) + abs_tol


def central_difference(f, array: np.ndarray, index, step: float = 1e-5) -> float:
    orig = array[index]
    array[index] = orig + step
    plus = f()
    array[index] = orig - step
    minus = f()
    array[index] = orig
    return (plus - minus) / (2 * step)
