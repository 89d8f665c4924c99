"""Tests for core model types and helpers."""

import math

import pytest

from mvtp.model import (
    Instance,
    RobotState,
    Solution,
    VehicleParams,
    Workspace,
    arrival_steps_of,
    at_goal,
    states_close,
    wrap_angle,
)


def test_wrap_angle_range():
    for a in (-10.0, -math.pi, -1.0, 0.0, 1.0, math.pi, 10.0, 123.456):
        w = wrap_angle(a)
        assert -math.pi <= w < math.pi
        # same direction modulo full turns
        assert math.sin(w) == pytest.approx(math.sin(a), abs=1e-12)
        assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-12)


def test_wrap_angle_passthrough_exact():
    # values already in range come back bit for bit
    for a in (-math.pi, -1.2345678901234567, 0.0, 0.1, 3.14159):
        assert wrap_angle(a) == a


def test_vehicle_params_derived():
    p = VehicleParams()
    assert p.phi_max == pytest.approx(math.radians(40.1))
    assert p.omega_max == pytest.approx(2 * p.phi_max / p.dt)
    assert p.rear_overhang == pytest.approx((p.l - p.l_b) / 2)
    assert p.step_length == pytest.approx(p.v_max * p.dt)
    assert p.min_turn_radius == pytest.approx(p.l_b / math.tan(p.phi_max))


def test_vehicle_params_validation():
    with pytest.raises(ValueError):
        VehicleParams(l=0.0)
    with pytest.raises(ValueError):
        VehicleParams(l_b=5.0)  # wheelbase longer than body
    with pytest.raises(ValueError):
        VehicleParams(phi_max=2.0)  # at or beyond pi/2


def test_robot_state_wraps_theta():
    z = RobotState(0.0, 0.0, 3 * math.pi, 0.0)
    assert z.theta == pytest.approx(-math.pi)
    assert -math.pi <= z.theta < math.pi


def test_states_close_and_at_goal():
    a = RobotState(1.0, 2.0, 0.5, 0.1)
    b = RobotState(1.0 + 5e-4, 2.0, 0.5 + 5e-4, -0.3)
    # steering differs: not the same state, but close enough for a goal
    assert not states_close(a, b)
    assert at_goal(a, b)
    assert states_close(a, RobotState(1.0 + 5e-4, 2.0, 0.5, 0.1 + 5e-4))
    c = RobotState(1.01, 2.0, 0.5, 0.0)
    assert not states_close(a, c)
    assert not at_goal(a, c)


def test_arrival_steps_backward_scan():
    goal = RobotState(5.0, 5.0, 0.0, 0.0)
    away = RobotState(0.0, 0.0, 0.0, 0.0)
    # visits the goal at step 1, leaves, returns at step 3 and parks
    confs = [
        (away,), (goal,), (away,), (goal,), (goal,),
    ]
    assert arrival_steps_of(confs, (goal,)) == (3,)
    # never at goal
    assert arrival_steps_of([(away,), (away,)], (goal,)) == (None,)
    # parked the whole time
    assert arrival_steps_of([(goal,), (goal,)], (goal,)) == (0,)


def test_workspace_rejects_bad_dims():
    with pytest.raises(ValueError):
        Workspace(0.0, 10.0, ())


def test_instance_validation():
    ws = Workspace(20.0, 20.0, ())
    v = VehicleParams()
    s = (RobotState(5.0, 5.0, 0.0, 0.0),)
    g = (RobotState(15.0, 15.0, 0.0, 0.0), RobotState(5.0, 5.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        Instance(ws, v, s, g)  # mismatched robot counts


def test_solution_makespan():
    z = RobotState(0.0, 0.0, 0.0, 0.0)
    sol = Solution(
        configurations=((z, z), (z, z), (z, z)),
        arrival_steps=(2, 1),
        planner="pbcr",
        seed=0,
        runtime=0.0,
    )
    assert sol.makespan == 2
    assert len(sol.trajectory(0)) == 3
