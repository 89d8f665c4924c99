"""Independent solution checking: collisions, bounds, kinematic consistency."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import PreparedObstacles, rect_of_state, rects_overlap
from .kinematics import recover_control
from .model import (GOAL_ANG_TOL, GOAL_POS_TOL, Instance, RobotState, Solution,
                    at_goal, states_close)

KINEMATIC_TOL = 1e-6
STEER_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class Violation:
    robot: int
    step: int
    code: str        # boundary/obstacle, inter_robot, kinematics, steering, goal, shape
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, robot: int, step: int, code: str, message: str):
        self.violations.append(Violation(robot, step, code, message))

    def summary(self) -> str:
        if self.ok:
            return "valid"
        head = "; ".join(f"r{v.robot}@t{v.step} {v.code}: {v.message}"
                         for v in self.violations[:5])
        more = len(self.violations) - 5
        return head + (f" (+{more} more)" if more > 0 else "")


def check_instance(instance: Instance) -> None:
    """Reject structurally broken instances (raises ValueError)."""
    params = instance.vehicle
    prepared = PreparedObstacles(instance.workspace)
    for label, states in (("start", instance.starts), ("goal", instance.goals)):
        for i, st in enumerate(states):
            if abs(st.phi) > params.phi_max + STEER_TOL:
                raise ValueError(f"{label} {i}: steering beyond bound")
            if prepared.rect_collides(rect_of_state(st, params)):
                raise ValueError(f"{label} {i}: footprint collides or exits map")
        rects = [rect_of_state(st, params) for st in states]
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                if rects_overlap(rects[i], rects[j]):
                    raise ValueError(f"{label}s {i} and {j} overlap")


def validate_solution(instance: Instance, solution: Solution) -> ValidationReport:
    """Re-check a solution against every model constraint.

    Checks per step: footprints inside the map and off obstacles, pairwise
    disjoint footprints, steering within bounds, and each consecutive state
    pair reachable by one admissible control replayed through the integrator
    (within 1e-6). Also checks the boundary conditions and that robots stay
    parked at their goals from their arrival steps on.
    """
    report = ValidationReport()
    params = instance.vehicle
    m = instance.num_robots
    cfgs = solution.configurations
    if not cfgs:
        report.add(-1, -1, "shape", "empty solution")
        return report
    for t, cfg in enumerate(cfgs):
        if len(cfg) != m:
            report.add(-1, t, "shape", f"{len(cfg)} robots, instance has {m}")
            return report

    prepared = PreparedObstacles(instance.workspace)

    for i in range(m):
        if not states_close(cfgs[0][i], instance.starts[i]):
            report.add(i, 0, "goal", "does not start at the start state")
        if not at_goal(cfgs[-1][i], instance.goals[i]):
            report.add(i, len(cfgs) - 1, "goal", "does not end at the goal")

    if solution.arrival_steps and len(solution.arrival_steps) == m:
        for i, t_arr in enumerate(solution.arrival_steps):
            if t_arr is None:
                continue  # final-state check above already flags this robot
            for t in range(max(0, t_arr), len(cfgs)):
                if not at_goal(cfgs[t][i], instance.goals[i]):
                    report.add(i, t, "goal", "not parked at goal after arrival")
                    break
    elif solution.arrival_steps:
        report.add(-1, -1, "shape", "arrival_steps length mismatch")

    # per-step geometric constraints
    bound_r = math.hypot(params.l, params.w)  # safe pair prefilter distance
    for t, cfg in enumerate(cfgs):
        rects = [rect_of_state(st, params) for st in cfg]
        for i, (st, rect) in enumerate(zip(cfg, rects)):
            if abs(st.phi) > params.phi_max + STEER_TOL:
                report.add(i, t, "steering", f"|phi|={abs(st.phi):.6f}")
            if prepared.rect_collides(rect):
                report.add(i, t, "obstacle", "footprint hits obstacle or exits map")
        for i in range(m):
            xi, yi = rects[i][0], rects[i][1]
            for j in range(i + 1, m):
                dx = rects[j][0] - xi
                dy = rects[j][1] - yi
                if dx * dx + dy * dy < bound_r * bound_r:
                    if rects_overlap(rects[i], rects[j]):
                        report.add(i, t, "inter_robot", f"overlaps robot {j}")

    # kinematic consistency: each consecutive pair must replay exactly
    for t in range(len(cfgs) - 1):
        for i in range(m):
            if recover_control(cfgs[t][i], cfgs[t + 1][i], params,
                               tol=KINEMATIC_TOL) is None:
                report.add(i, t + 1, "kinematics",
                           "no admissible control reproduces this step")
    return report
