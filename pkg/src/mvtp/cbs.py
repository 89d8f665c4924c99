"""Collaborative trajectory planning by conflict branching.

A group of robots is solved jointly: each robot first plans alone with a
bounded-suboptimal time-indexed search, then the earliest pairwise footprint
collision is found and the search branches into two children, each forbidding
one robot from the other's colliding footprint at that step. Nodes are
explored cheapest-total-cost first, so the first conflict-free node popped is
returned. Robots outside the group are frozen at their current poses for a
few steps and ignored afterward.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

from .config import GroupConfig, PlannerConfig
from .geometry import FootRect, rect_of_state, rects_overlap
from .hybrid_astar import (DynamicConstraints, PlannerContext, SearchResult,
                           SoftTrajectories, plan_focal)
from .model import (Instance, PlanningFailed, RobotState, Solution,
                    arrival_steps_of, at_goal)
from .validate import check_instance

Conflict = tuple[tuple[int, int], int]
ConstraintSet = tuple[tuple[int, FootRect], ...]


def _padded_rect(traj: list[RobotState], t: int, params,
                 cache: dict) -> FootRect:
    k = t if t < len(traj) else len(traj) - 1
    key = (id(traj), k)
    rect = cache.get(key)
    if rect is None:
        rect = rect_of_state(traj[k], params)
        cache[key] = rect
    return rect


def detect_first_conflict(trajs: list[list[RobotState]], params
                          ) -> Conflict | None:
    """Earliest step where two trajectories' footprints collide.

    Trajectories are implicitly padded by repeating their final state, so a
    parked robot keeps blocking. Ties resolve to the lowest robot pair.
    """
    horizon = max(len(t) for t in trajs)
    cache: dict = {}
    n = len(trajs)
    for t in range(1, horizon):
        for a in range(n):
            ra = _padded_rect(trajs[a], t, params, cache)
            for b in range(a + 1, n):
                rb = _padded_rect(trajs[b], t, params, cache)
                if rects_overlap(ra, rb):
                    return (a, b), t
    return None


@dataclass(order=True)
class _Node:
    cost: float
    steps: int
    seq: int
    cons: tuple[ConstraintSet, ...] = field(compare=False)
    trajs: list[SearchResult] = field(compare=False)
    conflict: Conflict | None = field(compare=False)


def _build_constraints(cons: ConstraintSet, outsiders: tuple[FootRect, ...],
                       h_freeze: int) -> DynamicConstraints | None:
    if not cons and not outsiders:
        return None
    dc = DynamicConstraints()
    for rect in outsiders:
        dc.add_window(rect, 1, h_freeze + 1)
    for t, rect in cons:
        dc.add_rect(rect, t)
    return dc


def get_opt_traj(ctx: PlannerContext, states: list[RobotState],
                 goals: list[RobotState],
                 outsiders: tuple[FootRect, ...] = (),
                 w: float | None = None,
                 deadline: float | None = None,
                 max_expansions: int | None = None,
                 horizon: int | None = None) -> list[SearchResult] | None:
    """Jointly collision-free trajectories for one group, or None.

    Each returned trajectory ends exactly at its goal. None means the
    expansion budget, the deadline, or the branch queue ran out first.
    """
    cfg: GroupConfig = ctx.config.group
    if w is None:
        w = cfg.w
    if max_expansions is None:
        max_expansions = cfg.cbs_expansions
    n = len(states)
    params = ctx.params
    hf = cfg.h_freeze

    def replan(r: int, cons: tuple[ConstraintSet, ...],
               trajs: list[list[RobotState]]) -> SearchResult | None:
        if at_goal(states[r], goals[r]):
            return SearchResult([], [states[r]], 0.0, 0)
        dc = _build_constraints(cons[r], outsiders, hf)
        soft = SoftTrajectories([t for k, t in enumerate(trajs) if k != r],
                                params)
        return plan_focal(ctx, states[r], goals[r], dc, soft, w,
                          horizon=horizon, deadline=deadline)

    empty: tuple[ConstraintSet, ...] = tuple(() for _ in range(n))
    root_trajs: list[SearchResult] = []
    planned: list[list[RobotState]] = []
    for r in range(n):
        res = replan(r, empty, planned)
        if res is None:
            return None
        root_trajs.append(res)
        planned.append(res.states)

    seq = 0
    root = _Node(sum(t.cost for t in root_trajs),
                 sum(len(t.motions) for t in root_trajs), seq, empty,
                 root_trajs,
                 detect_first_conflict([t.states for t in root_trajs],
                                       params))
    open_heap = [root]
    expansions = 0
    while open_heap:
        node = heapq.heappop(open_heap)
        if node.conflict is None:
            return node.trajs
        expansions += 1
        if expansions > max_expansions:
            return None
        if deadline is not None and time.monotonic() > deadline:
            return None
        (a, b), t = node.conflict
        cache: dict = {}
        for r, other in ((a, b), (b, a)):
            block = _padded_rect(node.trajs[other].states, t, params, cache)
            cons = list(node.cons)
            cons[r] = cons[r] + ((t, block),)
            cons_t = tuple(cons)
            trajs_states = [tr.states for tr in node.trajs]
            res = replan(r, cons_t, trajs_states)
            if res is None:
                continue   # this half of the split is unsolvable
            new_trajs = list(node.trajs)
            new_trajs[r] = res
            seq += 1
            heapq.heappush(open_heap, _Node(
                sum(tr.cost for tr in new_trajs),
                sum(len(tr.motions) for tr in new_trajs), seq, cons_t,
                new_trajs,
                detect_first_conflict([tr.states for tr in new_trajs],
                                      params)))
    return None


def eccr_solve(instance: Instance, cfg: PlannerConfig | None = None,
               budget: float | None = None, seed: int = 0,
               w: float | None = None) -> Solution:
    """All robots planned as one collaborative group.

    Deterministic (the seed is only recorded). ``w`` defaults to the group
    config's inflation; pass 1.0 for the exact variant.
    """
    check_instance(instance)
    t0 = time.perf_counter()
    cfg = cfg or PlannerConfig()
    ctx = PlannerContext(instance, cfg)
    deadline = time.monotonic() + budget if budget is not None else None
    trajs = get_opt_traj(ctx, list(instance.starts), list(instance.goals),
                         w=w if w is not None else cfg.group.w,
                         deadline=deadline,
                         max_expansions=cfg.group.cbs_expansions)
    if trajs is None:
        raise PlanningFailed("collaborative search exhausted its budget")
    horizon = max(len(t.states) for t in trajs)
    configurations = []
    for t in range(horizon):
        configurations.append(tuple(
            tr.states[min(t, len(tr.states) - 1)] for tr in trajs))
    return Solution(configurations,
                    arrival_steps_of(configurations, list(instance.goals)),
                    planner="eccr", seed=seed,
                    runtime=time.perf_counter() - t0)
