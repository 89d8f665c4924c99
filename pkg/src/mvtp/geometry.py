"""Footprint geometry: oriented rectangles, SAT tests, spatial hashing.

Hot-path representation: a footprint rect is the plain tuple
    (cx, cy, c, s, hl, hw)
where (cx, cy) is the rectangle center, (c, s) = (cos yaw, sin yaw) its long
axis, and (hl, hw) the half length/width. Tuples keep the collision inner
loops cheap; constructors below are the only places that build them.
"""

from __future__ import annotations

import math
from collections import defaultdict

from .model import CircleObstacle, RectObstacle, RobotState, VehicleParams, Workspace

FootRect = tuple[float, float, float, float, float, float]


def rect_of_pose(x: float, y: float, theta: float, params: VehicleParams,
                 inflate: float = 0.0) -> FootRect:
    """Footprint of a vehicle pose; (x, y) is the rear axle midpoint."""
    c = math.cos(theta)
    s = math.sin(theta)
    off = 0.5 * params.l_b  # center sits half a wheelbase ahead of the axle
    return (x + off * c, y + off * s, c, s,
            0.5 * params.l + inflate, 0.5 * params.w + inflate)


def rect_of_state(state: RobotState, params: VehicleParams,
                  inflate: float = 0.0) -> FootRect:
    return rect_of_pose(state.x, state.y, state.theta, params, inflate)


def rect_of_obstacle(ob: RectObstacle, inflate: float = 0.0) -> FootRect:
    c = math.cos(ob.yaw)
    s = math.sin(ob.yaw)
    return (ob.cx, ob.cy, c, s, ob.half_x + inflate, ob.half_y + inflate)


def rect_corners(rect: FootRect) -> list[tuple[float, float]]:
    cx, cy, c, s, hl, hw = rect
    lx, ly = hl * c, hl * s
    wx, wy = -hw * s, hw * c
    return [(cx + lx + wx, cy + ly + wy), (cx + lx - wx, cy + ly - wy),
            (cx - lx - wx, cy - ly - wy), (cx - lx + wx, cy - ly + wy)]


def rect_bound_radius(rect: FootRect) -> float:
    return math.hypot(rect[4], rect[5])


def rects_overlap(a: FootRect, b: FootRect) -> bool:
    """Separating-axis test for two oriented rectangles (strict overlap)."""
    ax, ay, ac, as_, ahl, ahw = a
    bx, by, bc, bs, bhl, bhw = b
    dx = bx - ax
    dy = by - ay
    # quick bounding-circle reject
    ra = math.hypot(ahl, ahw)
    rb = math.hypot(bhl, bhw)
    if dx * dx + dy * dy >= (ra + rb) * (ra + rb):
        return False
    # the four face normals of the two rectangles
    for ux, uy, half in ((ac, as_, ahl), (-as_, ac, ahw)):
        proj = abs(dx * ux + dy * uy)
        rb_on = bhl * abs(bc * ux + bs * uy) + bhw * abs(-bs * ux + bc * uy)
        if proj >= half + rb_on:
            return False
    for ux, uy, half in ((bc, bs, bhl), (-bs, bc, bhw)):
        proj = abs(dx * ux + dy * uy)
        ra_on = ahl * abs(ac * ux + as_ * uy) + ahw * abs(-as_ * ux + ac * uy)
        if proj >= half + ra_on:
            return False
    return True


def rect_circle_overlap(rect: FootRect, cx: float, cy: float, r: float) -> bool:
    """Strict overlap between an oriented rectangle and a disc."""
    rx, ry, c, s, hl, hw = rect
    dx = cx - rx
    dy = cy - ry
    # circle center in the rectangle frame, clamped to the box
    u = dx * c + dy * s
    v = -dx * s + dy * c
    qu = min(hl, max(-hl, u))
    qv = min(hw, max(-hw, v))
    du = u - qu
    dv = v - qv
    return du * du + dv * dv < r * r


def rect_inside_bounds(rect: FootRect, width: float, height: float) -> bool:
    """True when the whole rectangle lies inside [0,W] x [0,H]."""
    cx, cy, c, s, hl, hw = rect
    ex = hl * abs(c) + hw * abs(s)
    ey = hl * abs(s) + hw * abs(c)
    return ex <= cx <= width - ex and ey <= cy <= height - ey


def _seg_seg_dist2(p1, p2, q1, q2) -> float:
    """Squared distance between two segments."""
    ux, uy = p2[0] - p1[0], p2[1] - p1[1]
    vx, vy = q2[0] - q1[0], q2[1] - q1[1]
    wx, wy = p1[0] - q1[0], p1[1] - q1[1]
    a = ux * ux + uy * uy
    b = ux * vx + uy * vy
    c = vx * vx + vy * vy
    d = ux * wx + uy * wy
    e = vx * wx + vy * wy
    den = a * c - b * b
    if den > 1e-12:
        sc = (b * e - c * d) / den
        sc = min(1.0, max(0.0, sc))
    else:
        sc = 0.0
    if c > 1e-12:
        tc = (b * sc + e) / c
        tc = min(1.0, max(0.0, tc))
    else:
        tc = 0.0
    if a > 1e-12:
        sc = min(1.0, max(0.0, (b * tc - d) / a))
    dx = wx + sc * ux - tc * vx
    dy = wy + sc * uy - tc * vy
    return dx * dx + dy * dy


def rect_distance(a: FootRect, b: FootRect) -> float:
    """Euclidean clearance between two rectangles (0 when they overlap)."""
    if rects_overlap(a, b):
        return 0.0
    ca = rect_corners(a)
    cb = rect_corners(b)
    best = math.inf
    for i in range(4):
        p1, p2 = ca[i], ca[(i + 1) % 4]
        for j in range(4):
            d2 = _seg_seg_dist2(p1, p2, cb[j], cb[(j + 1) % 4])
            if d2 < best:
                best = d2
    return math.sqrt(best)


class PreparedObstacles:
    """Workspace obstacles preprocessed for fast footprint queries."""

    def __init__(self, workspace: Workspace, inflate: float = 0.0):
        self.width = workspace.width
        self.height = workspace.height
        self.circles: list[tuple[float, float, float]] = []
        self.rects: list[FootRect] = []
        for ob in workspace.obstacles:
            if isinstance(ob, CircleObstacle):
                self.circles.append((ob.cx, ob.cy, ob.radius + inflate))
            else:
                self.rects.append(rect_of_obstacle(ob, inflate))
        self._rect_bounds = [(r[0], r[1], math.hypot(r[4], r[5]))
                             for r in self.rects]

    def add_rect(self, rect: FootRect) -> None:
        """Register one more blocked rectangle after construction."""
        self.rects.append(rect)
        self._rect_bounds.append((rect[0], rect[1],
                                  math.hypot(rect[4], rect[5])))

    def rect_collides(self, rect: FootRect) -> bool:
        """Footprint against boundary and every obstacle."""
        if not rect_inside_bounds(rect, self.width, self.height):
            return True
        rb = math.hypot(rect[4], rect[5])
        cx, cy = rect[0], rect[1]
        for (ox, oy, orad) in self.circles:
            dx = ox - cx
            dy = oy - cy
            if dx * dx + dy * dy < (rb + orad) * (rb + orad):
                if rect_circle_overlap(rect, ox, oy, orad):
                    return True
        for orect, (ox, oy, orad) in zip(self.rects, self._rect_bounds):
            dx = ox - cx
            dy = oy - cy
            if dx * dx + dy * dy < (rb + orad) * (rb + orad):
                if rects_overlap(rect, orect):
                    return True
        return False

    def point_clearance(self, x: float, y: float) -> float:
        """Distance from a point to the nearest obstacle or boundary."""
        best = min(x, y, self.width - x, self.height - y)
        for (ox, oy, orad) in self.circles:
            best = min(best, math.hypot(ox - x, oy - y) - orad)
        for r in self.rects:
            dx = x - r[0]
            dy = y - r[1]
            u = dx * r[2] + dy * r[3]
            v = -dx * r[3] + dy * r[2]
            du = max(abs(u) - r[4], 0.0)
            dv = max(abs(v) - r[5], 0.0)
            if du == 0.0 and dv == 0.0:
                best = min(best, -min(r[4] - abs(u), r[5] - abs(v)))
            else:
                best = min(best, math.hypot(du, dv))
        return best


def state_collides(state: RobotState, prepared: PreparedObstacles,
                   params: VehicleParams) -> bool:
    return prepared.rect_collides(rect_of_state(state, params))


class SpatialGrid:
    """Uniform-cell bucket index over planar payloads for neighbor queries."""

    def __init__(self, cell: float):
        self.cell = cell
        self._buckets: dict[tuple[int, int], list] = defaultdict(list)

    def clear(self):
        self._buckets.clear()

    def insert(self, x: float, y: float, payload):
        key = (int(x // self.cell), int(y // self.cell))
        self._buckets[key].append(payload)

    def near(self, x: float, y: float):
        """Yield payloads in the 3x3 cell block around (x, y)."""
        i = int(x // self.cell)
        j = int(y // self.cell)
        buckets = self._buckets
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                b = buckets.get((i + di, j + dj))
                if b:
                    yield from b

    def remove(self, x: float, y: float, payload):
        key = (int(x // self.cell), int(y // self.cell))
        b = self._buckets.get(key)
        if b is not None:
            b.remove(payload)
