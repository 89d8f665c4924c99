"""Step-based multi-robot planning with priority inheritance and backtracking.

Each planning round decides one next state per robot, highest priority first.
When a robot's preferred move lands on a lower-priority robot's current pose,
that robot is planned immediately (priority inheritance) and the move commits
only if the displaced robot finds an escape; otherwise the reservation is
withdrawn and the next candidate is tried (backtracking).  Priorities grow
with time spent away from the goal and reset on arrival, with a fixed seeded
perturbation breaking ties.

Candidate moves are ranked by a goal-directed heuristic: the cached guidance
step first when one exists, then the motion primitives by ascending
Reeds-Shepp distance to the goal, waiting and reversing slightly penalized.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

from numpy.random import default_rng

from .config import PlannerConfig
from .geometry import FootRect, rect_of_state, rects_overlap
from .hybrid_astar import GreedyPlanCache, PlannerContext, plan_static
from .kinematics import ActionKind, Motion, make_motion, successors
from .model import (Instance, PlanningFailed, RobotState, Solution,
                    arrival_steps_of, at_goal)
from .reeds_shepp import shortest_path
from .validate import check_instance

_BACKWARD = (ActionKind.BACKWARD_STRAIGHT, ActionKind.BACKWARD_LEFT,
             ActionKind.BACKWARD_RIGHT)


@dataclass
class StepContext:
    """Mutable shared state for one planning round."""

    unde: set[int]                       # robots not yet decided
    cur: tuple[RobotState, ...]
    cur_rects: list[FootRect]
    occu: list[FootRect] = field(default_factory=list)   # reserved footprints
    occu_owner: list[int] = field(default_factory=list)
    next_motion: list[Motion | None] = field(default_factory=list)
    tabu: dict[int, frozenset] = field(default_factory=dict)
    pri: list[float] = field(default_factory=list)

    def blocked(self, rect: FootRect) -> bool:
        return any(rects_overlap(rect, r) for r in self.occu)


class StepPlanner:
    """One run's step engine: guidance caches, priorities, round planning.

    Owns everything that persists between rounds so a caller can drive it
    configuration by configuration (the group solver reuses it with some
    robots pre-decided).  Deterministic given (instance, seed).
    """

    def __init__(self, instance: Instance, cfg: PlannerConfig | None = None,
                 seed: int = 0, deadline: float | None = None,
                 ctx: PlannerContext | None = None):
        self.cfg = cfg = cfg if cfg is not None else PlannerConfig()
        self.instance = instance
        self.params = instance.vehicle
        self.goals = list(instance.goals)
        self.deadline = deadline
        self.ctx = ctx if ctx is not None else PlannerContext(instance, cfg)
        self.prepared = self.ctx.prepared
        m = instance.num_robots
        self.eps = default_rng(seed).random(m)
        self.elapsed = [0] * m           # consecutive past steps off goal
        self.guides = [GreedyPlanCache(self.ctx, g, weight=cfg.step.ga_weight)
                       for g in self.goals]
        # committed detour plans (state -> next motion, per robot), the
        # per-round memo of failed detour searches, and a cross-round
        # cooldown so a robot stuck in place does not re-run the same
        # doomed search every round
        self._avoid_chain: list[dict[RobotState, Motion]] = [
            {} for _ in self.goals]
        self._avoid_fail: set[tuple] = set()
        self._detour_block: dict[tuple, int] = {}
        self._round = 0
        self._detour_cfg = replace(
            cfg, search=replace(cfg.search, node_budget=cfg.step.detour_budget))
        ws = instance.workspace
        self.step_cap = int(math.ceil(
            cfg.step.step_cap_factor * max(ws.width, ws.height)
            / self.params.step_length))
        self._radius = self.params.min_turn_radius

    # -- priority bookkeeping ------------------------------------------------

    def priorities(self) -> list[float]:
        return [self.elapsed[i] + self.eps[i] for i in range(len(self.goals))]

    def observe(self, config) -> None:
        """Update the off-goal counters after a configuration is appended."""
        for i, (z, g) in enumerate(zip(config, self.goals)):
            self.elapsed[i] = 0 if at_goal(z, g) else self.elapsed[i] + 1

    def rebuild(self, trace) -> None:
        """Recompute the counters from scratch over a (truncated) trace."""
        self.elapsed = [0] * len(self.goals)
        for config in trace[1:]:
            self.observe(config)
        self._detour_block.clear()
        for chain in self._avoid_chain:
            chain.clear()

    # -- candidate enumeration -----------------------------------------------

    def _heur(self, z: RobotState, goal: RobotState, kind: ActionKind) -> float:
        path = shortest_path(z.x, z.y, z.theta, goal.x, goal.y, goal.theta,
                             self._radius)
        h = path.length if path is not None else math.hypot(goal.x - z.x,
                                                            goal.y - z.y)
        if kind == ActionKind.WAIT:
            h += self.cfg.step.wait_penalty
        elif kind in _BACKWARD:
            h += self.cfg.step.backward_penalty
        return h

    def _robot_clear(self, i: int, rect: FootRect,
                     cur_rects: list[FootRect]) -> bool:
        return not any(rects_overlap(rect, r)
                       for k, r in enumerate(cur_rects) if k != i)

    def _replan_detour(self, i: int, z: RobotState,
                       cur_rects: list[FootRect]) -> Motion | None:
        """Plan around the other robots' current poses and commit to it.

        The round loop's one-step lookahead cannot start the wide swing a
        car-sized footprint needs to clear oncoming traffic, so the swing has
        to come from the guide; committing to the whole plan (instead of
        replanning each round) keeps symmetric encounters from flip-flopping
        between mirror-image detours.
        """
        if (i, z) in self._avoid_fail:
            return None
        key = (i, round(z.x, 1), round(z.y, 1), round(z.theta, 1))
        if self._detour_block.get(key, -1) >= self._round:
            return None
        goal_rect = rect_of_state(self.goals[i], self.params)
        others = [r for k, r in enumerate(cur_rects) if k != i]
        if any(rects_overlap(goal_rect, r) for r in others):
            return None   # goal occupied right now; no point searching yet
        # the others are treated as parked, so a plain search over an
        # augmented obstacle set beats dragging a time axis along
        ctx2 = PlannerContext(self.instance, self._detour_cfg)
        for rect in others:
            ctx2.prepared.add_rect(rect)
        res = plan_static(ctx2, z, self.goals[i], deadline=self.deadline,
                          weight=self.cfg.step.ga_weight)
        if res is None or not res.motions:
            self._avoid_fail.add((i, z))
            self._detour_block[key] = self._round + self.cfg.step.detour_cooldown
            return None
        self._avoid_chain[i] = dict(zip(res.states, res.motions))
        return res.motions[0]

    def _guide_motion(self, i: int, z: RobotState,
                      cur_rects: list[FootRect]) -> Motion | None:
        """The goal-directed guidance step for robot i at state z.

        A committed detour is followed while it stays clear of where the
        others stand; otherwise the plain guidance step is used when nobody
        is on it; otherwise a fresh detour is planned.
        """
        goal = self.goals[i]
        if at_goal(z, goal):
            return None
        chain = self._avoid_chain[i]
        mot = chain.get(z)
        if mot is not None:
            if self._robot_clear(i, rect_of_state(mot.target, self.params),
                                 cur_rects):
                return mot
            chain.clear()     # the world moved into the committed plan
        guide = self.guides[i].motion_from(z, self.deadline)
        if guide is not None and self._robot_clear(
                i, rect_of_state(guide.target, self.params), cur_rects):
            return guide
        return self._replan_detour(i, z, cur_rects)

    def _ranked(self, i: int, z: RobotState, tabu: frozenset,
                cur_rects: list[FootRect]):
        """Yield candidate motions for robot i, best first.

        The guidance step goes first so the primitive ranking (seven
        Reeds-Shepp solves) is only paid when it is unavailable or rejected.
        """
        goal = self.goals[i]
        guide = self._guide_motion(i, z, cur_rects)
        if guide is not None and guide.kind in tabu:
            guide = None
        if guide is not None:
            yield guide
        gt = guide.target if guide is not None else None
        scored = []
        for mot in successors(z, self.prepared, self.params):
            if mot.kind in tabu:
                continue
            t = mot.target
            if (gt is not None and abs(t.x - gt.x) < 1e-9
                    and abs(t.y - gt.y) < 1e-9
                    and abs(t.theta - gt.theta) < 1e-9):
                continue
            scored.append((self._heur(t, goal, mot.kind), int(mot.kind), mot))
        scored.sort(key=lambda e: (e[0], e[1]))
        for _, _, mot in scored:
            yield mot

    # -- the recursive step --------------------------------------------------

    def step(self, sc: StepContext, i: int,
             block: tuple[FootRect, ...] = ()) -> bool:
        """Decide robot i's next state; ``block`` holds the parent's
        current and reserved footprints, which i must also avoid."""
        sc.unde.discard(i)
        for mot in self._ranked(i, sc.cur[i], sc.tabu.get(i, frozenset()),
                                sc.cur_rects):
            rect = rect_of_state(mot.target, self.params)
            if sc.blocked(rect):
                continue
            if any(rects_overlap(rect, r) for r in block):
                continue
            hit = [k for k in sc.unde if rects_overlap(rect, sc.cur_rects[k])]
            if len(hit) > 1:
                continue        # one reservation cannot displace two robots
            sc.occu.append(rect)
            sc.occu_owner.append(i)
            if not hit or self.step(sc, hit[0], (sc.cur_rects[i], rect)):
                sc.next_motion[i] = mot
                return True
            sc.occu.pop()
            sc.occu_owner.pop()
        sc.unde.add(i)
        return False

    # -- one configuration ---------------------------------------------------

    def plan_round(self, cur, predecided: dict[int, Motion] | None = None,
                   tabu: dict[int, frozenset] | None = None
                   ) -> list[Motion] | None:
        """Plan the next configuration from ``cur``.

        ``predecided`` maps robot index to an already-committed motion (group
        plans); those robots are skipped and their targets reserved up front.
        Returns one motion per robot, or None if some robot ends up with no
        admissible move at all (every candidate including holding still is
        blocked) -- the caller picks the fallback.
        """
        m = len(cur)
        self._round += 1
        self._avoid_fail.clear()
        sc = StepContext(
            unde=set(range(m)),
            cur=tuple(cur),
            cur_rects=[rect_of_state(z, self.params) for z in cur],
            next_motion=[None] * m,
            tabu=tabu or {},
        )
        if predecided:
            for i, mot in predecided.items():
                sc.unde.discard(i)
                sc.next_motion[i] = mot
                sc.occu.append(rect_of_state(mot.target, self.params))
                sc.occu_owner.append(i)
        pri = self.priorities()
        sc.pri = pri
        while sc.unde:
            i = max(sc.unde, key=lambda k: (pri[k], -k))
            if self.step(sc, i):
                continue
            # nothing worked for the round's current leader: hold it in
            # place when legal, otherwise report the round as wedged
            rect = sc.cur_rects[i]
            if sc.blocked(rect):
                return None
            sc.unde.discard(i)
            sc.next_motion[i] = make_motion(sc.cur[i], ActionKind.WAIT,
                                            self.params)
            sc.occu.append(rect)
            sc.occu_owner.append(i)
        return sc.next_motion


def pbcr_solve(instance: Instance, cfg: PlannerConfig | None = None,
               budget: float | None = None, seed: int = 0) -> Solution:
    """Plan every robot to its goal, one configuration per step.

    Raises PlanningFailed (with the partial trace) on wall-clock budget
    exhaustion or on exceeding the step cap; raises ValueError for
    structurally invalid instances.
    """
    check_instance(instance)
    t0 = time.monotonic()
    deadline = t0 + budget if budget is not None else None
    planner = StepPlanner(instance, cfg, seed, deadline)
    goals = planner.goals
    trace = [tuple(instance.starts)]
    while not all(at_goal(z, g) for z, g in zip(trace[-1], goals)):
        if len(trace) - 1 >= planner.step_cap:
            raise PlanningFailed("step cap exceeded", trace)
        if deadline is not None and time.monotonic() > deadline:
            raise PlanningFailed("planning budget exhausted", trace)
        motions = planner.plan_round(trace[-1])
        if motions is None:
            nxt = trace[-1]      # wedged round: everyone holds still
        else:
            nxt = tuple(mot.target for mot in motions)
        trace.append(nxt)
        planner.observe(nxt)
    return Solution(trace, arrival_steps_of(trace, goals), planner="pbcr",
                    seed=seed, runtime=time.monotonic() - t0)
