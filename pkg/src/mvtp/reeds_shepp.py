"""Reeds-Shepp shortest paths for a unit turning radius, rescaled on demand.

Classic word-family enumeration (CSC, CCC, CCCC, CCSC, CCSCC with timeflip /
reflect / backwards transforms). Segment lengths are signed: positive means
forward motion, negative means reversing. Types are 'L', 'S', 'R'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_PI = math.pi
_HALF_PI = 0.5 * math.pi
_TWO_PI = 2.0 * math.pi
_EPS = 1e-10


def _mod2pi(x: float) -> float:
    v = math.fmod(x, _TWO_PI)
    if v < -_PI:
        v += _TWO_PI
    elif v > _PI:
        v -= _TWO_PI
    return v


def _polar(x: float, y: float) -> tuple[float, float]:
    return math.hypot(x, y), math.atan2(y, x)


def _tau_omega(u, v, xi, eta, phi):
    delta = _mod2pi(u - v)
    a = math.sin(u) - math.sin(delta)
    b = math.cos(u) - math.cos(delta) - 1.0
    t1 = math.atan2(eta * a - xi * b, xi * a + eta * b)
    t2 = 2.0 * (math.cos(delta) - math.cos(v) - math.cos(u)) + 3.0
    tau = _mod2pi(t1 + _PI) if t2 < 0 else _mod2pi(t1)
    omega = _mod2pi(tau - u + v - phi)
    return tau, omega


# Each base word below returns (t, u, v) segment angles/length or None.

def _lp_sp_lp(x, y, phi):
    u, t = _polar(x - math.sin(phi), y - 1.0 + math.cos(phi))
    if t >= -_EPS:
        v = _mod2pi(phi - t)
        if v >= -_EPS:
            return t, u, v
    return None


def _lp_sp_rp(x, y, phi):
    u1, t1 = _polar(x + math.sin(phi), y - 1.0 - math.cos(phi))
    if u1 * u1 >= 4.0:
        u = math.sqrt(u1 * u1 - 4.0)
        theta = math.atan2(2.0, u)
        t = _mod2pi(t1 + theta)
        v = _mod2pi(t - phi)
        if t >= -_EPS and v >= -_EPS:
            return t, u, v
    return None


def _lp_rm_l(x, y, phi):
    xi = x - math.sin(phi)
    eta = y - 1.0 + math.cos(phi)
    u1, theta = _polar(xi, eta)
    if u1 <= 4.0:
        u = -2.0 * math.asin(0.25 * u1)
        t = _mod2pi(theta + 0.5 * u + _PI)
        v = _mod2pi(phi - t + u)
        if t >= -_EPS and u <= _EPS:
            return t, u, v
    return None


def _lp_rup_lum_rm(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho = 0.25 * (2.0 + math.hypot(xi, eta))
    if rho <= 1.0:
        u = math.acos(rho)
        t, v = _tau_omega(u, -u, xi, eta, phi)
        if t >= -_EPS and v <= _EPS:
            return t, u, v
    return None


def _lp_rum_lum_rp(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho = (20.0 - xi * xi - eta * eta) / 16.0
    if 0.0 <= rho <= 1.0:
        u = -math.acos(rho)
        if u >= -_HALF_PI:
            t, v = _tau_omega(u, u, xi, eta, phi)
            if t >= -_EPS and v >= -_EPS:
                return t, u, v
    return None


def _lp_rm_sm_lm(x, y, phi):
    xi = x - math.sin(phi)
    eta = y - 1.0 + math.cos(phi)
    rho, theta = _polar(xi, eta)
    if rho >= 2.0:
        r = math.sqrt(rho * rho - 4.0)
        u = 2.0 - r
        t = _mod2pi(theta + math.atan2(r, -2.0))
        v = _mod2pi(phi - _HALF_PI - t)
        if t >= -_EPS and u <= _EPS and v <= _EPS:
            return t, u, v
    return None


def _lp_rm_sm_rm(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho, theta = _polar(-eta, xi)
    if rho >= 2.0:
        t = theta
        u = 2.0 - rho
        v = _mod2pi(t + _HALF_PI - phi)
        if t >= -_EPS and u <= _EPS and v <= _EPS:
            return t, u, v
    return None


def _lp_rm_slm_rp(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho, _ = _polar(xi, eta)
    if rho >= 2.0:
        u = 4.0 - math.sqrt(rho * rho - 4.0)
        if u <= _EPS:
            t = _mod2pi(math.atan2((4.0 - u) * xi - 2.0 * eta,
                                   -2.0 * xi + (u - 4.0) * eta))
            v = _mod2pi(t - phi)
            if t >= -_EPS and v >= -_EPS:
                return t, u, v
    return None


_MIRROR = {"L": "R", "R": "L", "S": "S"}


class _Best:
    __slots__ = ("length", "lengths", "types")

    def __init__(self):
        self.length = math.inf
        self.lengths: tuple[float, ...] = ()
        self.types: tuple[str, ...] = ()

    def offer(self, lengths, types):
        total = sum(abs(s) for s in lengths)
        if total < self.length - 1e-14:
            self.length = total
            self.lengths = tuple(lengths)
            self.types = tuple(types)


def _variants(word, x, y, phi):
    """Base, timeflip, reflect, timeflip+reflect evaluations of a word."""
    out = []
    r = word(x, y, phi)
    if r:
        out.append((r, 1.0, False))
    r = word(-x, y, -phi)
    if r:
        out.append((r, -1.0, False))
    r = word(x, -y, -phi)
    if r:
        out.append((r, 1.0, True))
    r = word(-x, -y, phi)
    if r:
        out.append((r, -1.0, True))
    return out


def _apply(best, word, x, y, phi, pattern, shape):
    """Try a word's four variants; pattern maps (t,u,v) to segment lengths."""
    for (tuv, sign, mirror) in _variants(word, x, y, phi):
        lengths = [sign * s for s in pattern(*tuv)]
        types = tuple(_MIRROR[c] for c in shape) if mirror else shape
        best.offer(lengths, types)


def _csc(x, y, phi, best):
    _apply(best, _lp_sp_lp, x, y, phi, lambda t, u, v: (t, u, v), ("L", "S", "L"))
    _apply(best, _lp_sp_rp, x, y, phi, lambda t, u, v: (t, u, v), ("L", "S", "R"))


def _ccc(x, y, phi, best):
    _apply(best, _lp_rm_l, x, y, phi, lambda t, u, v: (t, u, v), ("L", "R", "L"))
    # backwards
    xb = x * math.cos(phi) + y * math.sin(phi)
    yb = x * math.sin(phi) - y * math.cos(phi)
    _apply(best, _lp_rm_l, xb, yb, phi, lambda t, u, v: (v, u, t), ("L", "R", "L"))


def _cccc(x, y, phi, best):
    _apply(best, _lp_rup_lum_rm, x, y, phi,
           lambda t, u, v: (t, u, -u, v), ("L", "R", "L", "R"))
    _apply(best, _lp_rum_lum_rp, x, y, phi,
           lambda t, u, v: (t, u, u, v), ("L", "R", "L", "R"))


def _ccsc(x, y, phi, best):
    _apply(best, _lp_rm_sm_lm, x, y, phi,
           lambda t, u, v: (t, -_HALF_PI, u, v), ("L", "R", "S", "L"))
    _apply(best, _lp_rm_sm_rm, x, y, phi,
           lambda t, u, v: (t, -_HALF_PI, u, v), ("L", "R", "S", "R"))
    # backwards
    xb = x * math.cos(phi) + y * math.sin(phi)
    yb = x * math.sin(phi) - y * math.cos(phi)
    _apply(best, _lp_rm_sm_lm, xb, yb, phi,
           lambda t, u, v: (v, u, -_HALF_PI, t), ("L", "S", "R", "L"))
    _apply(best, _lp_rm_sm_rm, xb, yb, phi,
           lambda t, u, v: (v, u, -_HALF_PI, t), ("R", "S", "R", "L"))


def _ccscc(x, y, phi, best):
    _apply(best, _lp_rm_slm_rp, x, y, phi,
           lambda t, u, v: (t, -_HALF_PI, u, -_HALF_PI, v),
           ("L", "R", "S", "L", "R"))


@dataclass(frozen=True)
class RSPath:
    """Segments are (type, signed length in meters)."""

    segments: tuple[tuple[str, float], ...]
    length: float


def solve_unit(x: float, y: float, phi: float) -> tuple[float, tuple, tuple]:
    """Best path in canonical units (radius 1); returns (length, lengths, types)."""
    best = _Best()
    _csc(x, y, phi, best)
    _ccc(x, y, phi, best)
    _cccc(x, y, phi, best)
    _ccsc(x, y, phi, best)
    _ccscc(x, y, phi, best)
    return best.length, best.lengths, best.types


def _canonical(x0, y0, th0, x1, y1, th1, radius):
    dx = x1 - x0
    dy = y1 - y0
    c = math.cos(th0)
    s = math.sin(th0)
    return ((c * dx + s * dy) / radius, (-s * dx + c * dy) / radius,
            _mod2pi(th1 - th0))


def shortest_length(x0, y0, th0, x1, y1, th1, radius: float) -> float:
    """Length in meters of the shortest path between two poses."""
    x, y, phi = _canonical(x0, y0, th0, x1, y1, th1, radius)
    length, _, _ = solve_unit(x, y, phi)
    return length * radius


def shortest_path(x0, y0, th0, x1, y1, th1, radius: float) -> RSPath | None:
    """Shortest path with materialized segments, lengths in meters."""
    x, y, phi = _canonical(x0, y0, th0, x1, y1, th1, radius)
    length, lengths, types = solve_unit(x, y, phi)
    if not math.isfinite(length):
        return None
    segs = tuple((ctype, slen * radius)
                 for ctype, slen in zip(types, lengths)
                 if abs(slen) > 1e-12)
    return RSPath(segs, length * radius)


def walk_segments(x: float, y: float, theta: float, radius: float,
                  segments) -> tuple[float, float, float]:
    """Exact endpoint of driving the segments from a pose (for testing)."""
    for ctype, slen in segments:
        if ctype == "S":
            x += slen * math.cos(theta)
            y += slen * math.sin(theta)
        elif ctype == "L":
            beta = slen / radius
            x += radius * (math.sin(theta + beta) - math.sin(theta))
            y += radius * (math.cos(theta) - math.cos(theta + beta))
            theta += beta
        else:
            beta = slen / radius
            x += radius * (math.sin(theta) - math.sin(theta - beta))
            y += radius * (math.cos(theta - beta) - math.cos(theta))
            theta -= beta
    return x, y, _mod2pi(theta)
