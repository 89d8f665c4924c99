"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written against different primitives than the
package code (shapely polygons, numpy rotation matrices, a separate Euler
stepper) so agreement is meaningful.
"""

from __future__ import annotations

import math

import numpy as np
from shapely.geometry import Point, Polygon


def oracle_footprint_polygon(x, y, theta, l, w, l_b):
    """Footprint polygon via an explicit rotation matrix."""
    rear = 0.5 * (l - l_b)
    local = np.array([[-rear, -0.5 * w], [l - rear, -0.5 * w],
                      [l - rear, 0.5 * w], [-rear, 0.5 * w]])
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    pts = local @ rot.T + np.array([x, y])
    return Polygon(pts)


def oracle_rects_collide(pose_a, pose_b, l, w, l_b):
    pa = oracle_footprint_polygon(*pose_a, l, w, l_b)
    pb = oracle_footprint_polygon(*pose_b, l, w, l_b)
    inter = pa.intersection(pb)
    return inter.area > 1e-12


def oracle_rect_circle_collide(pose, l, w, l_b, cx, cy, r):
    pa = oracle_footprint_polygon(*pose, l, w, l_b)
    return pa.intersection(Point(cx, cy).buffer(r, quad_segs=256)).area > 1e-12


def oracle_generic_rect(cx, cy, hx, hy, yaw):
    local = np.array([[-hx, -hy], [hx, -hy], [hx, hy], [-hx, hy]])
    rot = np.array([[math.cos(yaw), -math.sin(yaw)],
                    [math.sin(yaw), math.cos(yaw)]])
    return Polygon(local @ rot.T + np.array([cx, cy]))


def sample_rect_points(cx, cy, hx, hy, yaw, n_side):
    """Dense grid of points covering a rectangle (for sampling-based checks)."""
    u = np.linspace(-hx, hx, n_side)
    v = np.linspace(-hy, hy, n_side)
    uu, vv = np.meshgrid(u, v)
    c, s = math.cos(yaw), math.sin(yaw)
    xs = cx + uu * c - vv * s
    ys = cy + uu * s + vv * c
    return np.column_stack([xs.ravel(), ys.ravel()])


def points_in_rect(pts, cx, cy, hx, hy, yaw):
    c, s = math.cos(yaw), math.sin(yaw)
    dx = pts[:, 0] - cx
    dy = pts[:, 1] - cy
    u = dx * c + dy * s
    v = -dx * s + dy * c
    return (np.abs(u) <= hx) & (np.abs(v) <= hy)


def oracle_integrate(x, y, th, phi, v, om, dt, n_sub, l_b, phi_max):
    """Independent substepped Euler evaluation of the bicycle model."""
    d = dt / n_sub
    for _ in range(n_sub):
        x = x + d * v * np.cos(th)
        y = y + d * v * np.sin(th)
        th = th + d * v * np.tan(phi) / l_b
        phi = phi + d * om
        phi = np.clip(phi, -phi_max, phi_max)
    wrapped = th if -math.pi <= th < math.pi else (th + math.pi) % (2 * math.pi) - math.pi
    return float(x), float(y), float(wrapped), float(phi)


def oracle_lsl_length(x0, y0, th0, x1, y1, th1, radius):
    """Length of an explicit forward LSL construction (upper-bounds RS)."""
    # left-turn circle centers
    c0 = (x0 - radius * math.sin(th0), y0 + radius * math.cos(th0))
    c1 = (x1 - radius * math.sin(th1), y1 + radius * math.cos(th1))
    dx, dy = c1[0] - c0[0], c1[1] - c0[1]
    d = math.hypot(dx, dy)
    if d < 1e-12:
        straight = 0.0
        ang = 0.0
    else:
        ang = math.atan2(dy, dx)
        straight = d
    t = (ang - th0) % (2 * math.pi)
    v = (th1 - ang) % (2 * math.pi)
    # arcs are left turns of angle t and v, tangent headings match by design
    return radius * t + straight + radius * v
