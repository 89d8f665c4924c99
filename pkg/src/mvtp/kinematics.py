"""Car-like kinematics: substepped Euler integration and motion primitives.

One planning step holds a single control (v, omega) for dt seconds, realized
as n_substeps explicit-Euler updates of the bicycle model

    x'     = v cos(theta)
    y'     = v sin(theta)
    theta' = v tan(phi) / l_b
    phi'   = omega            (clamped to [-phi_max, phi_max] each substep)

with all derivatives evaluated at the substep start. Heading is wrapped once,
on the final state. Every state in a trajectory is exactly the output of
`integrate`, so validation can replay controls bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from .model import ControlInput, RobotState, VehicleParams, ang_diff, wrap_angle

ADMISSIBLE_TOL = 1e-9


class ActionKind(IntEnum):
    """Step action vocabulary; enum order is the canonical tie-break order."""

    FORWARD_STRAIGHT = 0
    FORWARD_LEFT = 1
    FORWARD_RIGHT = 2
    BACKWARD_STRAIGHT = 3
    BACKWARD_LEFT = 4
    BACKWARD_RIGHT = 5
    WAIT = 6
    ANALYTIC = 7  # docking / greedy steps with free admissible controls


MOTION_KINDS = (ActionKind.FORWARD_STRAIGHT, ActionKind.FORWARD_LEFT,
                ActionKind.FORWARD_RIGHT, ActionKind.BACKWARD_STRAIGHT,
                ActionKind.BACKWARD_LEFT, ActionKind.BACKWARD_RIGHT)


@dataclass(frozen=True, slots=True)
class Motion:
    """One committed step: the action label, its control, and where it lands."""

    kind: ActionKind
    control: ControlInput
    target: RobotState


def admissible(control: ControlInput, params: VehicleParams,
               tol: float = ADMISSIBLE_TOL) -> bool:
    return (abs(control.v) <= params.v_max + tol
            and abs(control.omega) <= params.omega_max + tol)


def integrate(state: RobotState, control: ControlInput, params: VehicleParams,
              duration: float | None = None,
              n_substeps: int | None = None) -> RobotState:
    """Apply one constant control over a step and return the end state."""
    if not admissible(control, params):
        raise ValueError(f"inadmissible control {control}")
    if duration is None:
        duration = params.dt
    if n_substeps is None:
        n_substeps = params.n_substeps
    x, y, th, phi = state.x, state.y, state.theta, state.phi
    v, om = control.v, control.omega
    d = duration / n_substeps
    if om == 0.0:
        if phi == 0.0:
            # heading fixed: the substeps collapse to one translation
            return RobotState(x + v * math.cos(th) * duration,
                              y + v * math.sin(th) * duration, th, phi)
        dth = v * math.tan(phi) / params.l_b * d
        sin = math.sin
        cos = math.cos
        for _ in range(n_substeps):
            x += v * cos(th) * d
            y += v * sin(th) * d
            th += dth
        return RobotState(x, y, th, phi)
    inv_lb = 1.0 / params.l_b
    phi_max = params.phi_max
    sin = math.sin
    cos = math.cos
    tan = math.tan
    for _ in range(n_substeps):
        x += v * cos(th) * d
        y += v * sin(th) * d
        th += v * tan(phi) * inv_lb * d
        phi += om * d
        if phi > phi_max:
            phi = phi_max
        elif phi < -phi_max:
            phi = -phi_max
    return RobotState(x, y, th, phi)


def integrate_path(state: RobotState, control: ControlInput,
                   params: VehicleParams, duration: float | None = None,
                   n_substeps: int | None = None) -> list[RobotState]:
    """Like integrate, but returns the start plus every substep state."""
    if not admissible(control, params):
        raise ValueError(f"inadmissible control {control}")
    if duration is None:
        duration = params.dt
    if n_substeps is None:
        n_substeps = params.n_substeps
    x, y, th, phi = state.x, state.y, state.theta, state.phi
    v, om = control.v, control.omega
    d = duration / n_substeps
    inv_lb = 1.0 / params.l_b
    phi_max = params.phi_max
    out = [state]
    for _ in range(n_substeps):
        x += v * math.cos(th) * d
        y += v * math.sin(th) * d
        th += v * math.tan(phi) * inv_lb * d
        phi += om * d
        if phi > phi_max:
            phi = phi_max
        elif phi < -phi_max:
            phi = -phi_max
        out.append(RobotState(x, y, th, phi))
    return out


def steer_rate_to(phi_from: float, phi_target: float,
                  params: VehicleParams) -> float:
    """Steering rate that reaches phi_target within one step, rate-clamped."""
    om = (phi_target - phi_from) / params.dt
    return min(params.omega_max, max(-params.omega_max, om))


def make_motion(state: RobotState, kind: ActionKind,
                params: VehicleParams) -> Motion:
    """Build one of the seven fixed-step actions from a state."""
    if kind == ActionKind.WAIT:
        ctl = ControlInput(0.0, 0.0)
        return Motion(kind, ctl, state)
    v = params.v_max if kind in (ActionKind.FORWARD_STRAIGHT,
                                 ActionKind.FORWARD_LEFT,
                                 ActionKind.FORWARD_RIGHT) else -params.v_max
    if kind in (ActionKind.FORWARD_STRAIGHT, ActionKind.BACKWARD_STRAIGHT):
        phi_target = 0.0
    elif kind in (ActionKind.FORWARD_LEFT, ActionKind.BACKWARD_LEFT):
        phi_target = params.phi_max
    else:
        phi_target = -params.phi_max
    ctl = ControlInput(v, steer_rate_to(state.phi, phi_target, params))
    end = integrate(state, ctl, params)
    if end.phi != phi_target and abs(end.phi - phi_target) < 1e-13:
        # clear the substep rounding residue so straight targets carry an
        # exact zero steering angle (turns already clamp to the exact bound)
        end = RobotState(end.x, end.y, end.theta, phi_target)
    return Motion(kind, ctl, end)


def all_motions(state: RobotState, params: VehicleParams) -> list[Motion]:
    """The six move actions plus Wait, in canonical order, unfiltered."""
    out = [make_motion(state, k, params) for k in MOTION_KINDS]
    out.append(make_motion(state, ActionKind.WAIT, params))
    return out


# body-frame displacements of the six move actions, keyed by the only state
# feature the dynamics depend on (the steering angle); search states keep
# steering on the exact {0, +-phi_max} lattice so this stays tiny
_DISPLACEMENTS: dict[tuple, tuple] = {}


def _displacements(phi: float, params: VehicleParams):
    key = (params, phi)
    hit = _DISPLACEMENTS.get(key)
    if hit is not None:
        return hit
    rows = []
    origin = RobotState(0.0, 0.0, 0.0, phi)
    for kind in MOTION_KINDS:
        m = make_motion(origin, kind, params)
        t = m.target
        rows.append((kind, m.control, t.x, t.y, t.theta, t.phi))
    rows = tuple(rows)
    if len(_DISPLACEMENTS) < 4096:
        _DISPLACEMENTS[key] = rows
    return rows


def successors(state: RobotState, prepared, params: VehicleParams) -> list[Motion]:
    """Obstacle-valid subset of the seven actions, canonical order.

    Wait is always valid: the current state is assumed collision-free.
    `prepared` is a geometry.PreparedObstacles for the workspace. Targets
    come from cached body-frame displacements rotated to the state's pose;
    the dynamics depend on the pose only through the steering angle, so the
    results match direct integration to rounding error.
    """
    from .geometry import rect_of_pose

    c = math.cos(state.theta)
    s = math.sin(state.theta)
    x0, y0, th0 = state.x, state.y, state.theta
    out = []
    for kind, ctl, dx, dy, dth, phi1 in _displacements(state.phi, params):
        t = RobotState(x0 + dx * c - dy * s, y0 + dx * s + dy * c,
                       th0 + dth, phi1)
        if not prepared.rect_collides(rect_of_pose(t.x, t.y, t.theta, params)):
            out.append(Motion(kind, ctl, t))
    out.append(make_motion(state, ActionKind.WAIT, params))
    return out


def recover_control(z0: RobotState, z1: RobotState, params: VehicleParams,
                    tol: float = 1e-6) -> ControlInput | None:
    """Find the admissible control that maps z0 to z1 under integrate.

    Returns None when no admissible control reproduces z1 within tol
    (positions/angles compared componentwise).
    """
    dt = params.dt
    n = params.n_substeps
    om = (z1.phi - z0.phi) / dt
    if abs(om) > params.omega_max + tol:
        return None
    d = dt / n
    # phi ramps linearly under a constant rate; heading change is linear in v
    s_tan = 0.0
    phi = z0.phi
    for _ in range(n):
        s_tan += math.tan(phi)
        phi += om * d
        phi = min(params.phi_max, max(-params.phi_max, phi))
    dth = ang_diff(z1.theta, z0.theta)
    if abs(s_tan) * d / params.l_b > 1e-9:
        v = dth * params.l_b / (s_tan * d)
    else:
        v = ((z1.x - z0.x) * math.cos(z0.theta)
             + (z1.y - z0.y) * math.sin(z0.theta)) / dt
    if abs(v) > params.v_max + tol:
        return None
    v = min(params.v_max, max(-params.v_max, v))
    om = min(params.omega_max, max(-params.omega_max, om))
    ctl = ControlInput(v, om)
    end = integrate(z0, ctl, params)
    if (abs(end.x - z1.x) <= tol and abs(end.y - z1.y) <= tol
            and abs(ang_diff(end.theta, z1.theta)) <= tol
            and abs(end.phi - z1.phi) <= tol):
        return ctl
    return None
