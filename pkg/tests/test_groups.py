"""Group formation: proximity links, components, splitting, gating."""

import math

from mvtp.config import GroupConfig
from mvtp.groups import RobotGroup, group_robots, pre_check, split_oversize
from mvtp.model import RobotState, VehicleParams

PARAMS = VehicleParams()


def far_goal(z, d=100.0):
    return RobotState(z.x + d, z.y, z.theta, 0.0)


class TestGroupRobots:
    def test_far_apart_robots_form_no_group(self):
        config = (RobotState(10.0, 20.0, 0.0, 0.0),
                  RobotState(40.0, 20.0, math.pi, 0.0))
        goals = (RobotState(45.0, 20.0, 0.0, 0.0),
                 RobotState(5.0, 20.0, math.pi, 0.0))
        assert group_robots(config, goals, PARAMS) == []

    def test_head_on_pair_within_range_groups(self):
        config = (RobotState(10.0, 20.0, 0.0, 0.0),
                  RobotState(15.0, 20.0, math.pi, 0.0))
        goals = (RobotState(45.0, 20.0, 0.0, 0.0),
                 RobotState(5.0, 20.0, math.pi, 0.0))
        groups = group_robots(config, goals, PARAMS)
        assert [g.members for g in groups] == [(0, 1)]

    def test_receding_robots_do_not_group(self):
        # back to back, both driving apart: distance grows, not near-touching
        config = (RobotState(20.0, 20.0, math.pi, 0.0),
                  RobotState(25.0, 20.0, 0.0, 0.0))
        goals = (RobotState(5.0, 20.0, math.pi, 0.0),
                 RobotState(45.0, 20.0, 0.0, 0.0))
        assert group_robots(config, goals, PARAMS) == []

    def test_touching_robots_group_even_if_receding(self):
        config = (RobotState(20.0, 20.0, math.pi, 0.0),
                  RobotState(21.8, 20.0, 0.0, 0.0))
        goals = (RobotState(5.0, 20.0, math.pi, 0.0),
                 RobotState(45.0, 20.0, 0.0, 0.0))
        groups = group_robots(config, goals, PARAMS)
        assert [g.members for g in groups] == [(0, 1)]

    def test_arrived_robot_never_groups(self):
        z0 = RobotState(10.0, 20.0, 0.0, 0.0)
        z1 = RobotState(14.0, 20.0, math.pi, 0.0)
        goals = (RobotState(45.0, 20.0, 0.0, 0.0), z1)
        assert group_robots((z0, z1), goals, PARAMS) == []

    def test_convoy_chain_becomes_one_component(self):
        # four robots nose to tail, same heading: each neighbor pair keeps
        # its distance (counts as approaching), non-neighbors are out of range
        config = tuple(RobotState(10.0 + 4.0 * k, 20.0, 0.0, 0.0)
                       for k in range(4))
        goals = tuple(far_goal(z) for z in config)
        groups = group_robots(config, goals, PARAMS)
        assert [g.members for g in groups] == [(0, 1, 2, 3)]

    def test_deterministic(self):
        config = (RobotState(10.0, 20.0, 0.0, 0.0),
                  RobotState(15.0, 20.0, math.pi, 0.0),
                  RobotState(10.0, 28.0, 0.0, 0.0),
                  RobotState(15.0, 28.0, math.pi, 0.0))
        goals = (RobotState(45.0, 20.0, 0.0, 0.0),
                 RobotState(5.0, 20.0, math.pi, 0.0),
                 RobotState(45.0, 28.0, 0.0, 0.0),
                 RobotState(5.0, 28.0, math.pi, 0.0))
        a = group_robots(config, goals, PARAMS)
        b = group_robots(config, goals, PARAMS)
        assert a == b
        assert [g.members for g in a] == [(0, 1), (2, 3)]


class TestSplitOversize:
    def test_small_group_unchanged(self):
        g = RobotGroup((1, 2, 3))
        config = {1: RobotState(10, 20, 0, 0), 2: RobotState(13, 20, math.pi, 0),
                  3: RobotState(16, 20, 0, 0)}
        config = tuple(config.get(i, RobotState(1 + i, 1, 0, 0))
                       for i in range(4))
        assert split_oversize(g, config, PARAMS) == [g]

    def test_oversize_chain_splits_under_cap(self):
        cfg = GroupConfig()
        m = 6
        config = tuple(RobotState(8.0 + 4.0 * k, 20.0,
                                  0.0 if k % 2 == 0 else math.pi, 0.0)
                       for k in range(m))
        group = RobotGroup(tuple(range(m)))
        parts = split_oversize(group, config, PARAMS, cfg)
        assert all(2 <= len(p) <= cfg.n_max for p in parts)
        seen = [i for p in parts for i in p.members]
        assert len(seen) == len(set(seen))   # partition, no overlap
        assert set(seen) <= set(range(m))


class TestPreCheck:
    def test_size_gate(self):
        cfg = GroupConfig()
        assert pre_check(RobotGroup((0, 1, 2)), cfg)
        assert not pre_check(RobotGroup(tuple(range(7))), cfg)

    def test_cooldown_gate(self):
        cfg = GroupConfig()
        g = RobotGroup((0, 1))
        cooldowns = {g.key: 10}
        assert not pre_check(g, cfg, cooldowns, now=12)
        assert pre_check(g, cfg, cooldowns, now=15)
