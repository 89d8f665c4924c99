"""Core data model: vehicle, states, workspace, instances, solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi

# A reached goal must match the goal pose this tightly.
GOAL_POS_TOL = 1e-3   # [m]
GOAL_ANG_TOL = 1e-3   # [rad]


def wrap_angle(a: float) -> float:
    """Normalize an angle to [-pi, pi); in-range values pass through bit-exact."""
    if -math.pi <= a < math.pi:
        return a
    return (a + math.pi) % TWO_PI - math.pi


def ang_diff(a: float, b: float) -> float:
    """Smallest signed difference a - b on the circle."""
    return wrap_angle(a - b)


@dataclass(frozen=True, slots=True)
class VehicleParams:
    """Shared car-like vehicle parameters.

    l, w: body length and width [m]; the footprint is anchored at the rear
    axle midpoint with rear overhang (l - l_b) / 2.
    l_b: wheelbase [m].
    v_max: speed bound [m/s], omega_max: steering rate bound [rad/s],
    phi_max: steering angle bound [rad], dt: step duration [s].
    """

    l: float = 3.0
    w: float = 2.0
    l_b: float = 2.0
    v_max: float = 1.0
    phi_max: float = math.radians(40.1)
    dt: float = 1.0
    omega_max: float = -1.0  # default derived in __post_init__
    n_substeps: int = 10

    def __post_init__(self):
        if self.omega_max < 0:
            object.__setattr__(self, "omega_max", 2.0 * self.phi_max / self.dt)
        if min(self.l, self.w, self.l_b, self.v_max, self.phi_max, self.dt,
               self.omega_max) <= 0:
            raise ValueError("vehicle parameters must be positive")
        if self.l_b > self.l:
            raise ValueError("wheelbase longer than body")
        if self.phi_max >= math.pi / 2:
            raise ValueError("steering bound must stay below pi/2")
        if self.n_substeps < 1:
            raise ValueError("need at least one substep")

    @property
    def rear_overhang(self) -> float:
        return 0.5 * (self.l - self.l_b)

    @property
    def step_length(self) -> float:
        """Arc length of a full-speed step [m]."""
        return self.v_max * self.dt

    @property
    def min_turn_radius(self) -> float:
        return self.l_b / math.tan(self.phi_max)


@dataclass(frozen=True, slots=True)
class RobotState:
    """Pose plus steering angle; (x, y) is the rear axle midpoint."""

    x: float
    y: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True, slots=True)
class ControlInput:
    """Speed and steering rate held constant over one step."""

    v: float
    omega: float


@dataclass(frozen=True, slots=True)
class CircleObstacle:
    cx: float
    cy: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("circle radius must be positive")


@dataclass(frozen=True, slots=True)
class RectObstacle:
    """Oriented rectangular obstacle given by center, half extents, yaw."""

    cx: float
    cy: float
    half_x: float
    half_y: float
    yaw: float = 0.0

    def __post_init__(self):
        if min(self.half_x, self.half_y) <= 0:
            raise ValueError("rectangle half extents must be positive")


Obstacle = CircleObstacle | RectObstacle


@dataclass(frozen=True)
class Workspace:
    """Bounded rectangular world [0, width] x [0, height] with obstacles."""

    width: float
    height: float
    obstacles: tuple[Obstacle, ...] = ()

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("workspace dimensions must be positive")
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        for ob in self.obstacles:
            if not self._contains(ob):
                raise ValueError(f"obstacle outside workspace: {ob}")

    def _contains(self, ob: Obstacle) -> bool:
        if isinstance(ob, CircleObstacle):
            return (ob.radius <= ob.cx <= self.width - ob.radius
                    and ob.radius <= ob.cy <= self.height - ob.radius)
        c, s = math.cos(ob.yaw), math.sin(ob.yaw)
        ex = abs(c) * ob.half_x + abs(s) * ob.half_y
        ey = abs(s) * ob.half_x + abs(c) * ob.half_y
        return (ex <= ob.cx <= self.width - ex
                and ey <= ob.cy <= self.height - ey)


Configuration = tuple[RobotState, ...]


@dataclass
class Instance:
    """One planning problem: shared vehicle, workspace, starts and goals."""

    workspace: Workspace
    vehicle: VehicleParams
    starts: list[RobotState]
    goals: list[RobotState]
    name: str = "instance"

    def __post_init__(self):
        self.starts = tuple(self.starts)
        self.goals = tuple(self.goals)
        if not self.starts:
            raise ValueError("instance needs at least one robot")
        if len(self.starts) != len(self.goals):
            raise ValueError("starts and goals must pair up")

    @property
    def num_robots(self) -> int:
        return len(self.starts)


def states_close(a: RobotState, b: RobotState,
                 pos_tol: float = GOAL_POS_TOL,
                 ang_tol: float = GOAL_ANG_TOL) -> bool:
    """Pose match within tolerances (steering included)."""
    return (abs(a.x - b.x) <= pos_tol and abs(a.y - b.y) <= pos_tol
            and abs(ang_diff(a.theta, b.theta)) <= ang_tol
            and abs(a.phi - b.phi) <= ang_tol)


def at_goal(state: RobotState, goal: RobotState,
            pos_tol: float = GOAL_POS_TOL,
            ang_tol: float = GOAL_ANG_TOL) -> bool:
    """Pose match on x, y, theta; the steering angle is free at a goal."""
    return (abs(state.x - goal.x) <= pos_tol
            and abs(state.y - goal.y) <= pos_tol
            and abs(ang_diff(state.theta, goal.theta)) <= ang_tol)


@dataclass
class Solution:
    """A configuration-per-step answer for every robot of an instance.

    configurations[t][i] is robot i at step t; arrival_steps[i] is the first
    step from which robot i stays at its goal; makespan = max arrival step.
    """

    configurations: list[Configuration]
    arrival_steps: tuple[int | None, ...]
    planner: str
    seed: int | None = None
    runtime: float = 0.0

    def __post_init__(self):
        self.configurations = [tuple(cfg) for cfg in self.configurations]
        self.arrival_steps = tuple(self.arrival_steps)

    @property
    def makespan(self) -> int:
        # robots that never arrive count as busy to the end of the trace
        horizon = len(self.configurations) - 1
        arrived = [t for t in self.arrival_steps if t is not None]
        if len(arrived) < len(self.arrival_steps):
            return horizon
        return max(arrived) if arrived else 0

    @property
    def num_robots(self) -> int:
        return len(self.configurations[0]) if self.configurations else 0

    def trajectory(self, i: int) -> list[RobotState]:
        return [cfg[i] for cfg in self.configurations]


def arrival_steps_of(configurations: list[Configuration],
                     goals: list[RobotState]) -> tuple[int | None, ...]:
    """Per robot, the first step after which it sits at its goal for good.

    None for robots whose final state is not at their goal.
    """
    arrivals = []
    for i, goal in enumerate(goals):
        t = len(configurations) - 1
        if not at_goal(configurations[t][i], goal):
            arrivals.append(None)
            continue
        while t > 0 and at_goal(configurations[t - 1][i], goal):
            t -= 1
        arrivals.append(t)
    return tuple(arrivals)


class PlanningFailed(Exception):
    """A planner gave up (timeout, step cap, budget); may carry a partial plan."""

    def __init__(self, reason: str,
                 partial: list[Configuration] | None = None):
        super().__init__(reason)
        self.reason = reason
        self.partial = partial if partial is not None else []
