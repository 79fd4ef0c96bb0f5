"""Delete-relaxation baseline heuristics: blind, h_max, h_add and LM-cut.

h_max / h_add run a generalized Dijkstra over the relaxation hypergraph
with one unsatisfied-precondition counter per action. LM-cut repeatedly
extracts disjunctive action landmarks from the justification graph built
with the max-cost precondition of each action (ties broken toward the
lowest proposition id) and sums their minimum costs.

Unreachable goals yield ``math.inf``, the distinguished extended cost.
"""

from __future__ import annotations

import math
from collections import deque
from heapq import heappop, heappush

from .grounding import GroundedTask, State, state_ids

INFINITY = math.inf


class Blind:
    """0 on goal states, otherwise the minimum action cost (1 if no actions)."""

    def __init__(self, task: GroundedTask):
        self._goal_mask = task.goal_mask
        self._min_cost = min((a.cost for a in task.actions), default=1)

    def __call__(self, state: State) -> float:
        if state & self._goal_mask == self._goal_mask:
            return 0
        return self._min_cost


class _RelaxedDijkstra:
    """Shared fixpoint machinery for h_max and h_add."""

    _combine_max: bool

    def __init__(self, task: GroundedTask):
        self._task = task
        self._n = task.n_props
        self._pre = [a.preconditions for a in task.actions]
        self._add = [a.add_effects for a in task.actions]
        self._costs = [a.cost for a in task.actions]
        self._pre_of: list[list[int]] = [[] for _ in range(self._n)]
        for i, pre in enumerate(self._pre):
            for p in pre:
                self._pre_of[p].append(i)
        self._no_pre = [i for i, pre in enumerate(self._pre) if not pre]

    def prop_costs(self, state: State) -> list[float]:
        """Least-fixpoint proposition costs from ``state``."""
        cost = [INFINITY] * self._n
        counters = [len(pre) for pre in self._pre]
        acc = [0.0] * len(self._pre)
        heap: list[tuple[float, int]] = []

        def trigger(action: int) -> None:
            value = acc[action] + self._costs[action]
            for q in self._add[action]:
                if value < cost[q]:
                    cost[q] = value
                    heappush(heap, (value, q))

        for p in state_ids(state):
            cost[p] = 0
            heappush(heap, (0, p))
        for i in self._no_pre:
            trigger(i)

        combine_max = self._combine_max
        while heap:
            c, p = heappop(heap)
            if c > cost[p]:
                continue  # stale entry
            for i in self._pre_of[p]:
                counters[i] -= 1
                if combine_max:
                    acc[i] = c  # pops are nondecreasing, so the last one is the max
                else:
                    acc[i] += c
                if counters[i] == 0:
                    trigger(i)
        return cost

    def __call__(self, state: State) -> float:
        cost = self.prop_costs(state)
        goal = self._task.goal
        if not goal:
            return 0
        values = [cost[g] for g in goal]
        if any(math.isinf(v) for v in values):
            return INFINITY
        return max(values) if self._combine_max else sum(values)


class HMax(_RelaxedDijkstra):
    _combine_max = True


class HAdd(_RelaxedDijkstra):
    _combine_max = False


class LmCut:
    """Landmark-cut heuristic over the delete relaxation."""

    def __init__(self, task: GroundedTask):
        self._task = task
        n = task.n_props
        self._goal_prop = n  # virtual proposition achieved by a 0-cost goal action
        self._pre = [a.preconditions for a in task.actions] + [task.goal]
        self._add = [a.add_effects for a in task.actions] + [(self._goal_prop,)]
        self._base_costs: list[float] = [a.cost for a in task.actions] + [0]
        n_ext = len(self._pre)
        self._pre_of: list[list[int]] = [[] for _ in range(n + 1)]
        self._achievers: list[list[int]] = [[] for _ in range(n + 1)]
        for i in range(n_ext):
            for p in self._pre[i]:
                self._pre_of[p].append(i)
            for q in self._add[i]:
                self._achievers[q].append(i)
        self._no_pre = [i for i, pre in enumerate(self._pre) if not pre]

    def _hmax(self, state: State, costs: list[float]):
        """h_max proposition costs plus per-action values and supporters.

        The supporter of an action is its maximum-cost precondition, ties
        broken toward the lowest proposition id; it is the source of the
        action's edges in the justification graph.
        """
        n_ext = len(self._pre)
        cost = [INFINITY] * (self._goal_prop + 1)
        counters = [len(pre) for pre in self._pre]
        acc = [0.0] * n_ext
        heap: list[tuple[float, int]] = []

        def trigger(action: int) -> None:
            value = acc[action] + costs[action]
            for q in self._add[action]:
                if value < cost[q]:
                    cost[q] = value
                    heappush(heap, (value, q))

        for p in state_ids(state):
            cost[p] = 0
            heappush(heap, (0, p))
        for i in self._no_pre:
            trigger(i)

        while heap:
            c, p = heappop(heap)
            if c > cost[p]:
                continue
            for i in self._pre_of[p]:
                counters[i] -= 1
                acc[i] = c
                if counters[i] == 0:
                    trigger(i)

        value: list[float] = [INFINITY] * n_ext
        supporter: list[int | None] = [None] * n_ext
        for i in range(n_ext):
            pre = self._pre[i]
            if not pre:
                value[i] = costs[i]
                continue
            best, best_cost = None, -1.0
            for p in pre:  # ascending ids, so strict '>' keeps the lowest id on ties
                if cost[p] > best_cost:
                    best_cost = cost[p]
                    best = p
            if not math.isinf(best_cost):
                value[i] = best_cost + costs[i]
                supporter[i] = best
        return cost, value, supporter

    def __call__(self, state: State) -> float:
        costs = list(self._base_costs)
        total: float = 0
        while True:
            prop_cost, value, supporter = self._hmax(state, costs)
            goal_cost = prop_cost[self._goal_prop]
            if math.isinf(goal_cost):
                return INFINITY
            if goal_cost <= 0:
                return total

            # goal zone: propositions reaching the goal through 0-cost
            # justification edges
            zone = {self._goal_prop}
            stack = [self._goal_prop]
            while stack:
                p = stack.pop()
                for i in self._achievers[p]:
                    if costs[i] != 0 or math.isinf(value[i]):
                        continue
                    s = supporter[i]
                    if s is not None and s not in zone:
                        zone.add(s)
                        stack.append(s)

            # cut: actions triggered from the state side whose add effects
            # cross into the goal zone
            cut: list[int] = []
            in_cut = [False] * len(self._pre)
            counters = [len(pre) for pre in self._pre]
            seen = [False] * (self._goal_prop + 1)
            queue: deque[int] = deque()

            def reach(p: int) -> None:
                if not seen[p]:
                    seen[p] = True
                    queue.append(p)

            def trigger(i: int) -> None:
                for q in self._add[i]:
                    if seen[q]:
                        continue
                    if q in zone:
                        if not in_cut[i]:
                            in_cut[i] = True
                            cut.append(i)
                    else:
                        reach(q)

            for p in state_ids(state):
                reach(p)
            for i in self._no_pre:
                trigger(i)
            while queue:
                p = queue.popleft()
                for i in self._pre_of[p]:
                    counters[i] -= 1
                    if counters[i] == 0:
                        trigger(i)

            if not cut:
                raise RuntimeError("landmark-cut round produced an empty cut")
            landmark_cost = min(costs[i] for i in cut)
            total += landmark_cost
            for i in cut:
                costs[i] -= landmark_cost


def h_blind(task: GroundedTask, state: State) -> float:
    return Blind(task)(state)


def h_max(task: GroundedTask, state: State) -> float:
    return HMax(task)(state)


def h_add(task: GroundedTask, state: State) -> float:
    return HAdd(task)(state)


def h_lmcut(task: GroundedTask, state: State) -> float:
    return LmCut(task)(state)


CLASSIC_HEURISTICS = {"blind": Blind, "hmax": HMax, "hadd": HAdd, "lmcut": LmCut}


def make_heuristic(name: str, task: GroundedTask, model=None):
    """Evaluator (state -> cost) for a heuristic name; 'hgn' needs a model."""
    if name == "hgn":
        if model is None:
            raise ValueError("heuristic 'hgn' requires a trained model")
        from .model import HgnHeuristic

        return HgnHeuristic(model, task)
    try:
        return CLASSIC_HEURISTICS[name](task)
    except KeyError:
        raise ValueError(f"unknown heuristic '{name}'") from None


__all__ = [
    "INFINITY",
    "Blind",
    "HMax",
    "HAdd",
    "LmCut",
    "h_blind",
    "h_max",
    "h_add",
    "h_lmcut",
    "CLASSIC_HEURISTICS",
    "make_heuristic",
]
