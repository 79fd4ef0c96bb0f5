"""A* search with expansion accounting, duplicate detection and reopening.

Tie-breaking on equal f is: lower h first, then FIFO insertion order.
Closed states are re-expanded when rediscovered with a strictly lower g,
so the returned plan is optimal whenever the heuristic is admissible,
even if it is inconsistent.
"""

from __future__ import annotations

import itertools
import math
import resource
import time
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Callable

from .grounding import GroundedTask, State, is_goal

SOLVED = "solved"
TIMEOUT = "timeout"
EXHAUSTED_UNSOLVABLE = "exhausted-unsolvable"
LIMIT_HIT = "limit-hit"

_MEMORY_CHECK_PERIOD = 512


class PlanValidationError(Exception):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class SearchLimits:
    timeout_s: float = 300.0
    max_expansions: int | None = None
    memory_bytes: int | None = None  # best-effort, checked against peak RSS

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout must be positive")


@dataclass(frozen=True)
class SearchResult:
    status: str
    plan: tuple[int, ...] | None
    plan_cost: float | None
    expansions: int
    generated: int
    heuristic_evals: int
    wall_time: float

    @property
    def solved(self) -> bool:
        return self.status == SOLVED

    def to_json(self, task: GroundedTask | None = None) -> dict:
        doc = {
            "status": self.status,
            "plan": list(self.plan) if self.plan is not None else None,
            "plan_cost": self.plan_cost,
            "expansions": self.expansions,
            "generated": self.generated,
            "heuristic_evals": self.heuristic_evals,
            "wall_time": self.wall_time,
        }
        if task is not None and self.plan is not None:
            doc["plan_actions"] = [task.actions[i].name for i in self.plan]
        return doc


def validate_plan(task: GroundedTask, plan) -> float:
    """Total cost of a valid plan from the initial state; raises otherwise."""
    state = task.init_mask
    total: float = 0
    for step, action_id in enumerate(plan):
        action = task.actions[action_id]
        if state & action.pre_mask != action.pre_mask:
            raise PlanValidationError(
                f"action {action.name} inapplicable at step {step}", step=step
            )
        state = (state & ~action.del_mask) | action.add_mask
        total += action.cost
    if state & task.goal_mask != task.goal_mask:
        raise PlanValidationError("goal not reached at end of plan")
    return total


def astar(task: GroundedTask, heuristic: Callable[[State], float],
          limits: SearchLimits = SearchLimits()) -> SearchResult:
    """Best-first search on f = g + h with goal test at pop."""
    start = time.perf_counter()
    deadline = start + limits.timeout_s

    expansions = 0
    generated = 0
    evals = 0

    def result(status, plan=None, cost=None):
        return SearchResult(status, plan, cost, expansions, generated, evals,
                            time.perf_counter() - start)

    init = task.initial_state()
    h_cache: dict[State, float] = {}
    best_g: dict[State, float] = {init: 0}
    parent: dict[State, tuple[State, int]] = {}
    # entries are (f, h, insertion counter, g, state); g is carried explicitly
    # so stale detection does not rely on recovering it from f - h
    open_heap: list[tuple[float, float, int, float, State]] = []
    seq = itertools.count()

    h0 = heuristic(init)
    evals += 1
    h_cache[init] = h0
    if not math.isinf(h0):
        heappush(open_heap, (h0, h0, next(seq), 0, init))

    actions = task.actions
    while open_heap:
        _, _, _, g, state = heappop(open_heap)
        if g > best_g[state]:
            continue  # stale entry, state reached cheaper meanwhile

        if is_goal(state, task):
            plan = _extract_plan(parent, state)
            cost = validate_plan(task, plan)  # solved results always validate
            return result(SOLVED, plan, cost)

        if time.perf_counter() > deadline:
            return result(TIMEOUT)
        if limits.max_expansions is not None and expansions >= limits.max_expansions:
            return result(LIMIT_HIT)
        if (limits.memory_bytes is not None and expansions % _MEMORY_CHECK_PERIOD == 0
                and _peak_rss_bytes() > limits.memory_bytes):
            return result(LIMIT_HIT)

        expansions += 1
        for action_id, action in enumerate(actions):
            if state & action.pre_mask != action.pre_mask:
                continue
            succ = (state & ~action.del_mask) | action.add_mask
            generated += 1
            succ_g = g + action.cost
            known = best_g.get(succ)
            if known is not None and succ_g >= known:
                continue
            succ_h = h_cache.get(succ)
            if succ_h is None:
                succ_h = heuristic(succ)
                evals += 1
                h_cache[succ] = succ_h
            if math.isinf(succ_h):
                continue  # dead end under an admissible heuristic
            best_g[succ] = succ_g
            parent[succ] = (state, action_id)
            heappush(open_heap, (succ_g + succ_h, succ_h, next(seq), succ_g, succ))

    return result(EXHAUSTED_UNSOLVABLE)


def _extract_plan(parent, state) -> tuple[int, ...]:
    plan: list[int] = []
    while state in parent:
        state, action_id = parent[state]
        plan.append(action_id)
    plan.reverse()
    return tuple(plan)


def _peak_rss_bytes() -> int:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


__all__ = [
    "SOLVED",
    "TIMEOUT",
    "EXHAUSTED_UNSOLVABLE",
    "LIMIT_HIT",
    "PlanValidationError",
    "SearchLimits",
    "SearchResult",
    "validate_plan",
    "astar",
]
