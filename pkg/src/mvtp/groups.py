"""Local robot grouping for collaborative planning.

Robots that are close, both still travelling, and getting closer (or already
nearly touching) are linked; groups are the connected components of that
graph. Components larger than the group-size cap can be split into capped
subgroups by keeping the strongest links first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import GroupConfig
from .geometry import rect_distance, rect_of_state
from .kinematics import VehicleParams
from .model import Configuration, RobotState, at_goal


@dataclass(frozen=True)
class RobotGroup:
    """A set of robots planned together, tagged with its creation step."""

    members: tuple[int, ...]
    created_step: int = 0

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(self.members)))

    @property
    def key(self) -> frozenset:
        return frozenset(self.members)

    def __len__(self) -> int:
        return len(self.members)


def _extrapolate(z: RobotState, dist: float) -> tuple[float, float]:
    return z.x + dist * math.cos(z.theta), z.y + dist * math.sin(z.theta)


def _link(zi: RobotState, zj: RobotState, params: VehicleParams,
          cfg: GroupConfig) -> tuple[bool, float, float]:
    """Whether i and j belong together, plus (approach rate, distance)."""
    dist = math.hypot(zj.x - zi.x, zj.y - zi.y)
    if dist >= cfg.d_group:
        return False, 0.0, dist
    step = params.step_length
    xi, yi = _extrapolate(zi, step)
    xj, yj = _extrapolate(zj, step)
    ahead = math.hypot(xj - xi, yj - yi)
    approach = dist - ahead
    if ahead <= dist:
        return True, approach, dist
    near = rect_distance(rect_of_state(zi, params),
                         rect_of_state(zj, params)) < cfg.d_near
    return near, approach, dist


def group_robots(config: Configuration, goals, params: VehicleParams,
                 cfg: GroupConfig | None = None, step: int = 0
                 ) -> list[RobotGroup]:
    """Connected components (size >= 2) of the proximity graph.

    Robots i and j are linked iff their centers are within d_group, neither
    has arrived, and they are approaching each other: one straight step
    ahead along each heading does not increase their distance, or their
    footprints are already within d_near of touching.
    """
    cfg = cfg or GroupConfig()
    m = len(config)
    active = [i for i in range(m) if not at_goal(config[i], goals[i])]
    parent = list(range(m))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for ii in range(len(active)):
        for jj in range(ii + 1, len(active)):
            i, j = active[ii], active[jj]
            linked, _, _ = _link(config[i], config[j], params, cfg)
            if linked:
                parent[find(i)] = find(j)

    comps: dict[int, list[int]] = {}
    for i in active:
        comps.setdefault(find(i), []).append(i)
    groups = [RobotGroup(tuple(sorted(members)), step)
              for members in comps.values() if len(members) >= 2]
    groups.sort(key=lambda g: g.members[0])
    return groups


def split_oversize(group: RobotGroup, config: Configuration,
                   params: VehicleParams, cfg: GroupConfig | None = None
                   ) -> list[RobotGroup]:
    """Split a too-large component into subgroups of at most n_max.

    Greedy: recompute the component's internal links, sort them strongest
    first (fastest approach, then closest, then index order), and merge
    clusters along that order whenever the merged size stays within the
    cap. Singletons that end up alone are dropped (they fall back to the
    step planner).
    """
    cfg = cfg or GroupConfig()
    members = list(group.members)
    if len(members) <= cfg.n_max:
        return [group]
    edges = []
    for a in range(len(members)):
        for b in range(a + 1, len(members)):
            i, j = members[a], members[b]
            linked, approach, dist = _link(config[i], config[j], params, cfg)
            if linked:
                edges.append((-approach, dist, i, j))
    edges.sort()
    parent = {i: i for i in members}
    size = {i: 1 for i in members}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for _, _, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj and size[ri] + size[rj] <= cfg.n_max:
            parent[rj] = ri
            size[ri] += size[rj]

    clusters: dict[int, list[int]] = {}
    for i in members:
        clusters.setdefault(find(i), []).append(i)
    out = [RobotGroup(tuple(sorted(ms)), group.created_step)
           for ms in clusters.values() if len(ms) >= 2]
    out.sort(key=lambda g: g.members[0])
    return out


def pre_check(group: RobotGroup, cfg: GroupConfig | None = None,
              cooldowns: dict[frozenset, int] | None = None,
              now: int = 0) -> bool:
    """Gate a group for collaborative planning.

    Size must be in [2, n_max] and the same membership must not have failed
    a collaborative solve within the last ``cooldown`` steps (``cooldowns``
    maps membership to the step of the last failure).
    """
    cfg = cfg or GroupConfig()
    if not 2 <= len(group) <= cfg.n_max:
        return False
    if cooldowns:
        failed_at = cooldowns.get(group.key)
        if failed_at is not None and now - failed_at < cfg.cooldown:
            return False
    return True
