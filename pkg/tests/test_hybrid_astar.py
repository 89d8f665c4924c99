"""Single-vehicle search: docking exactness, detours, timed constraints,
and agreement between the plain and focal time-indexed searches."""

import math
import time

import pytest

from mvtp.config import PlannerConfig
from mvtp.geometry import rect_of_state
from mvtp.hybrid_astar import (DynamicConstraints, GreedyPlanCache,
                               PlannerContext, SoftTrajectories, plan_focal,
                               plan_spatiotemporal, plan_static)
from mvtp.kinematics import recover_control
from mvtp.model import (Instance, RectObstacle, RobotState, Solution,
                        VehicleParams, Workspace, at_goal)
from mvtp.validate import validate_solution

PARAMS = VehicleParams()


def make_instance(starts, goals, obstacles=(), size=40.0):
    ws = Workspace(size, size, tuple(obstacles))
    return Instance(ws, PARAMS, list(starts), list(goals), "test")


def as_solution(inst, results):
    """Pack per-robot search results into a padded Solution."""
    trajs = [r.states for r in results]
    horizon = max(len(t) for t in trajs)
    configs = []
    for t in range(horizon):
        configs.append(tuple(traj[min(t, len(traj) - 1)] for traj in trajs))
    arrivals = tuple(len(t) - 1 for t in trajs)
    return Solution(configs, arrivals, planner="test")


def check_kinematic_chain(states):
    for a, b in zip(states, states[1:]):
        assert recover_control(a, b, PARAMS) is not None


class TestStaticPlanner:
    @pytest.mark.parametrize("d", [3, 7, 20, 30])
    def test_aligned_straight_runs_exactly_d_steps(self, d):
        inst = make_instance([RobotState(4.0, 20.0, 0.0, 0.0)],
                             [RobotState(4.0 + d, 20.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        res = plan_static(ctx, inst.starts[0], inst.goals[0])
        assert res is not None
        assert len(res.motions) == d
        assert res.cost == pytest.approx(d, abs=1e-9)
        for st in res.states:
            assert st.y == pytest.approx(20.0, abs=1e-9)
            assert st.theta == pytest.approx(0.0, abs=1e-9)
        assert at_goal(res.states[-1], inst.goals[0])

    def test_offset_pose_plan_is_valid(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(20.0, 28.0, math.pi / 2, 0.0)])
        ctx = PlannerContext(inst)
        res = plan_static(ctx, inst.starts[0], inst.goals[0])
        assert res is not None
        assert at_goal(res.states[-1], inst.goals[0])
        check_kinematic_chain(res.states)
        sol = as_solution(inst, [res])
        assert validate_solution(inst, sol).ok

    def test_goal_behind_start_uses_reversing(self):
        inst = make_instance([RobotState(20.0, 20.0, 0.0, 0.0)],
                             [RobotState(14.0, 20.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        res = plan_static(ctx, inst.starts[0], inst.goals[0])
        assert res is not None
        assert at_goal(res.states[-1], inst.goals[0])
        assert any(m.control.v < 0 for m in res.motions)
        # six backward steps plus the reversing surcharge
        assert res.cost == pytest.approx(6 + 6 * 0.5, abs=1e-9)

    def test_obstacle_detour_is_collision_free_and_longer(self):
        wall = RectObstacle(20.0, 20.0, 1.0, 8.0)
        inst = make_instance([RobotState(8.0, 20.0, 0.0, 0.0)],
                             [RobotState(32.0, 20.0, 0.0, 0.0)],
                             obstacles=[wall])
        ctx = PlannerContext(inst)
        res = plan_static(ctx, inst.starts[0], inst.goals[0])
        assert res is not None
        assert at_goal(res.states[-1], inst.goals[0])
        assert res.cost > 24.0 + 1e-6   # straight-line steps would be 24
        for st in res.states:
            assert not ctx.prepared.rect_collides(rect_of_state(st, PARAMS))

    def test_enclosed_goal_fails_fast(self):
        box = [RectObstacle(30.0, 26.0, 4.0, 0.5),
               RectObstacle(30.0, 14.0, 4.0, 0.5),
               RectObstacle(26.0, 20.0, 0.5, 6.5),
               RectObstacle(34.0, 20.0, 0.5, 6.5)]
        inst = make_instance([RobotState(8.0, 20.0, 0.0, 0.0)],
                             [RobotState(30.0, 20.0, 0.0, 0.0)],
                             obstacles=box)
        ctx = PlannerContext(inst)
        t0 = time.monotonic()
        res = plan_static(ctx, inst.starts[0], inst.goals[0])
        elapsed = time.monotonic() - t0
        assert res is None
        # the grid field proves unreachability without exhausting the budget
        assert elapsed < 5.0

    def test_colliding_endpoint_raises(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(20.0, 20.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        with pytest.raises(ValueError):
            plan_static(ctx, RobotState(0.3, 20.0, 0.0, 0.0), inst.goals[0])

    def test_weighted_cost_within_bound(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(20.0, 28.0, math.pi / 2, 0.0)])
        ctx = PlannerContext(inst)
        exact = plan_static(ctx, inst.starts[0], inst.goals[0])
        loose = plan_static(ctx, inst.starts[0], inst.goals[0], weight=1.5)
        assert exact is not None and loose is not None
        assert loose.cost <= 1.5 * exact.cost + 1e-9
        assert exact.cost <= loose.cost + 1e-9

    def test_heuristic_lower_bounds_found_cost(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(8.0, 22.0, math.pi, 0.0)])
        ctx = PlannerContext(inst)
        h = ctx.heuristic_to(inst.goals[0])
        res = plan_static(ctx, inst.starts[0], inst.goals[0])
        assert res is not None
        assert h(inst.starts[0]) <= res.cost + 1e-9


class TestDocking:
    def test_dock_is_deterministic_per_state(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(12.0, 24.0, 1.0, 0.0)])
        ctx = PlannerContext(inst)
        z = RobotState(6.5, 19.0, 0.3, 0.0)
        a = ctx.dock(z, inst.goals[0])
        b = ctx.dock(z, inst.goals[0])
        assert a is b   # memoized by exact state
        ctx2 = PlannerContext(inst)
        c = ctx2.dock(z, inst.goals[0])
        assert c is not None and a is not None
        assert c.cost == a.cost
        assert [m.control for m in c.motions] == [m.control for m in a.motions]

    def test_dock_endpoint_error_below_tolerance(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(12.0, 24.0, 1.0, 0.0)])
        ctx = PlannerContext(inst)
        goal = inst.goals[0]
        dres = ctx.dock(RobotState(6.5, 19.0, 0.3, 0.0), goal)
        assert dres is not None
        assert abs(dres.final.x - goal.x) <= 1e-9
        assert abs(dres.final.y - goal.y) <= 1e-9
        assert abs(dres.final.theta - goal.theta) <= 1e-9

    def test_dock_steps_replay_through_integrator(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(12.0, 24.0, 1.0, 0.0)])
        ctx = PlannerContext(inst)
        z = RobotState(6.5, 19.0, 0.3, 0.0)
        dres = ctx.dock(z, inst.goals[0])
        assert dres is not None
        chain = [z] + [m.target for m in dres.motions]
        check_kinematic_chain(chain)


class TestTimedPlanners:
    def test_matches_static_when_unconstrained(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(25.0, 20.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        st = plan_static(ctx, inst.starts[0], inst.goals[0])
        tm = plan_spatiotemporal(ctx, inst.starts[0], inst.goals[0])
        assert st is not None and tm is not None
        assert tm.cost == pytest.approx(st.cost, abs=1e-9)

    def test_timed_constraint_forces_wait_or_detour(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(25.0, 20.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        free = plan_spatiotemporal(ctx, inst.starts[0], inst.goals[0])
        assert free is not None
        cons = DynamicConstraints()
        # a blocker sits across the straight lane for the first 14 steps
        blocker = RobotState(15.0, 20.0, math.pi / 2, 0.0)
        cons.add_window(rect_of_state(blocker, PARAMS), 0, 14)
        res = plan_spatiotemporal(ctx, inst.starts[0], inst.goals[0],
                                  constraints=cons)
        assert res is not None
        assert res.cost > free.cost + 1e-9
        for t, st in enumerate(res.states):
            assert not cons.check(rect_of_state(st, PARAMS), t)

    def test_parked_constraint_blocks_goal_forever(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(25.0, 20.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        cons = DynamicConstraints()
        parked = RobotState(25.0, 20.0, 0.0, 0.0)
        cons.add_parked(rect_of_state(parked, PARAMS), 0)
        res = plan_spatiotemporal(ctx, inst.starts[0], inst.goals[0],
                                  constraints=cons, horizon=60)
        assert res is None

    def test_focal_unit_weight_matches_plain_search_cost(self):
        cases = []
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(22.0, 21.0, 0.0, 0.0)])
        cases.append((inst, None))
        cons = DynamicConstraints()
        cons.add_window(rect_of_state(RobotState(13.0, 20.4, 0.2, 0.0),
                                      PARAMS), 0, 9)
        cases.append((inst, cons))
        for inst_i, cons_i in cases:
            ctx = PlannerContext(inst_i)
            a = plan_spatiotemporal(ctx, inst_i.starts[0], inst_i.goals[0],
                                    constraints=cons_i)
            b = plan_focal(ctx, inst_i.starts[0], inst_i.goals[0],
                           constraints=cons_i, soft=None, w=1.0)
            assert a is not None and b is not None
            assert b.cost == pytest.approx(a.cost, abs=1e-6)

    def test_focal_obeys_suboptimality_bound(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(22.0, 21.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        a = plan_spatiotemporal(ctx, inst.starts[0], inst.goals[0])
        other = [RobotState(15.0, 20.0, 0.0, 0.0)] * 25
        soft = SoftTrajectories([other], PARAMS)
        b = plan_focal(ctx, inst.starts[0], inst.goals[0], constraints=None,
                       soft=soft, w=1.5)
        assert a is not None and b is not None
        assert b.cost <= 1.5 * a.cost + 1e-9

    def test_focal_avoids_soft_conflicts_when_cheap(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(25.0, 20.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        # another robot parked mid-lane: hard-free but soft-counted
        other = [RobotState(15.0, 20.0, math.pi / 2, 0.0)] * 40
        soft = SoftTrajectories([other], PARAMS)

        def conflicts(res):
            n = 0
            for t, st in enumerate(res.states):
                n += soft.count(rect_of_state(st, PARAMS), t)
            return n

        plain = plan_spatiotemporal(ctx, inst.starts[0], inst.goals[0])
        dodge = plan_focal(ctx, inst.starts[0], inst.goals[0],
                           constraints=None, soft=soft, w=1.5)
        assert plain is not None and dodge is not None
        assert conflicts(dodge) <= conflicts(plain)
        assert conflicts(dodge) == 0

    def test_horizon_limits_arrival(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(25.0, 20.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        res = plan_spatiotemporal(ctx, inst.starts[0], inst.goals[0],
                                  horizon=10)
        assert res is None   # 20 meters cannot fit in 10 steps


class TestGreedyPlanCache:
    def test_following_cache_reaches_goal(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(25.0, 24.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        cache = GreedyPlanCache(ctx, inst.goals[0], weight=1.5)
        z = inst.starts[0]
        for _ in range(60):
            if at_goal(z, inst.goals[0]):
                break
            m = cache.motion_from(z)
            assert m is not None
            z = m.target
        assert at_goal(z, inst.goals[0])

    def test_cache_hit_after_first_plan(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(25.0, 24.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        cache = GreedyPlanCache(ctx, inst.goals[0], weight=1.5)
        m1 = cache.motion_from(inst.starts[0])
        assert m1 is not None
        t0 = time.monotonic()
        m2 = cache.motion_from(m1.target)
        assert time.monotonic() - t0 < 0.05   # dict hit, no replan
        assert m2 is not None


class TestHolonomicField:
    def test_no_field_without_obstacles(self):
        inst = make_instance([RobotState(5.0, 20.0, 0.0, 0.0)],
                             [RobotState(25.0, 20.0, 0.0, 0.0)])
        ctx = PlannerContext(inst)
        assert ctx.field_for(inst.goals[0]) is None

    def test_field_distance_respects_walls(self):
        wall = RectObstacle(20.0, 22.0, 1.0, 18.0)
        inst = make_instance([RobotState(8.0, 20.0, 0.0, 0.0)],
                             [RobotState(32.0, 20.0, 0.0, 0.0)],
                             obstacles=[wall])
        ctx = PlannerContext(inst)
        field = ctx.field_for(inst.goals[0])
        assert field is not None
        direct = math.hypot(32.0 - 8.0, 0.0)
        assert field.meters(8.0, 20.0) > direct  # must route under the wall
