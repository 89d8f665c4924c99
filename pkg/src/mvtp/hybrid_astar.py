"""Kinodynamic best-first search for one vehicle.

Three searches over the step-action graph (six motion primitives plus Wait,
one constant control per step):

  plan_static          best-first over (x, y, theta, phi) bins, no time axis
  plan_spatiotemporal  the same graph with a time index and hard timed
                       footprint constraints
  plan_focal           bounded-suboptimal variant keeping a focal list of
                       f <= w * f_min nodes ordered by soft-conflict counts

Goals are reached through an analytic docking expansion: near the goal a
bounded-curvature path is computed, realized as re-steer and constant-arc
steps through the integrator, and corrected by damped least squares until the
endpoint error is below 1e-9. Docked completions are pushed as ordinary open
nodes with h = 0, so optimality claims survive the analytic extension.

The heuristic is a max of lower bounds on remaining steps: Euclidean
distance, minimum-turn-radius heading change, a bounded-curvature path length
near the goal, and a grid distance-to-go that routes around obstacles. Each
bound is shaved conservatively so it never exceeds true cost.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from . import reeds_shepp as rs
from .config import PlannerConfig
from .geometry import (FootRect, PreparedObstacles, rect_of_pose,
                       rect_of_state, rects_overlap)
from .kinematics import (ActionKind, Motion, integrate, steer_rate_to,
                         successors)
from .model import (ControlInput, Instance, RobotState, VehicleParams,
                    ang_diff, wrap_angle)

# worst-case stretch of an 8-neighbor grid path over the straight line
_OCTILE_COS = math.cos(math.pi / 8.0)
_DEADLINE_STRIDE = 128   # expansions between clock checks


@dataclass
class SearchResult:
    """A single-robot plan: per-step motions and the visited states."""

    motions: list[Motion]
    states: list[RobotState]   # len(motions) + 1, states[0] is the start
    cost: float
    expansions: int


@dataclass(frozen=True)
class DockResult:
    """Realized analytic goal approach from one exact state."""

    motions: tuple[Motion, ...]
    cost: float          # step costs internal to the dock
    first_dir: int       # sign of the first nonzero speed (0 if none)
    final: RobotState


class _HoloField:
    """Grid lower bound (meters) on driving distance to one goal.

    Cells whose center clearance is below a conservative threshold are
    blocked; the threshold leaves enough margin that any cell a feasible
    vehicle path could be routed through stays free, which keeps the
    resulting distances admissible. Distances are corrected for grid
    stretch before use.
    """

    def __init__(self, free: np.ndarray, cell: float, goal_ix: int,
                 goal_iy: int, nx: int, ny: int):
        self.cell = cell
        self.nx = nx
        self.ny = ny
        # loss of accuracy at both endpoints of the grid path
        self.sub = 1.5 * cell * math.sqrt(2.0)
        n_free = int(free.sum())
        idx = np.full((ny, nx), -1, dtype=np.int64)
        idx[free] = np.arange(n_free)
        start = idx[goal_iy, goal_ix]
        rows_parts = []
        cols_parts = []
        vals_parts = []
        diag = cell * math.sqrt(2.0)
        shifts = (
            ((slice(None), slice(0, -1)), (slice(None), slice(1, None)), cell),
            ((slice(0, -1), slice(None)), (slice(1, None), slice(None)), cell),
            ((slice(0, -1), slice(0, -1)), (slice(1, None), slice(1, None)), diag),
            ((slice(0, -1), slice(1, None)), (slice(1, None), slice(0, -1)), diag),
        )
        for sa, sb, w in shifts:
            both = free[sa] & free[sb]
            a = idx[sa][both]
            b = idx[sb][both]
            rows_parts.append(a)
            cols_parts.append(b)
            rows_parts.append(b)
            cols_parts.append(a)
            n = a.size
            vals_parts.append(np.full(2 * n, w))
        rows = np.concatenate(rows_parts) if rows_parts else np.empty(0, np.int64)
        cols = np.concatenate(cols_parts) if cols_parts else np.empty(0, np.int64)
        vals = np.concatenate(vals_parts) if vals_parts else np.empty(0)
        graph = csr_matrix((vals, (rows, cols)), shape=(n_free, n_free))
        dist = _sp_dijkstra(graph, directed=True, indices=start)
        D = np.full((ny, nx), np.inf)
        D[free] = dist
        self.D = D

    def meters(self, x: float, y: float) -> float:
        ix = int(x / self.cell)
        iy = int(y / self.cell)
        if 0 <= ix < self.nx and 0 <= iy < self.ny:
            return float(self.D[iy, ix])
        return math.inf


class DynamicConstraints:
    """Hard timed footprints a search must avoid.

    Entries are either active at a single step, over a step window, or
    "parked" (active from some step onward, forever). All checks are at
    whole steps, matching the per-step collision model.
    """

    def __init__(self):
        self._timed: dict[int, list[FootRect]] = {}
        self._parked: list[tuple[FootRect, int]] = []
        self.max_step = -1

    def add_rect(self, rect: FootRect, t: int) -> None:
        self._timed.setdefault(t, []).append(rect)
        if t > self.max_step:
            self.max_step = t

    def add_window(self, rect: FootRect, t_from: int, t_to: int) -> None:
        """Active at every step in [t_from, t_to)."""
        for t in range(t_from, t_to):
            self.add_rect(rect, t)

    def add_parked(self, rect: FootRect, t_from: int) -> None:
        self._parked.append((rect, t_from))

    def add_states(self, states, params: VehicleParams, t0: int = 0,
                   park_end: bool = True) -> None:
        """One robot's trajectory: a rect per step, parked at the tail."""
        for k, st in enumerate(states):
            self.add_rect(rect_of_state(st, params), t0 + k)
        if park_end and states:
            self.add_parked(rect_of_state(states[-1], params),
                            t0 + len(states) - 1)

    def check(self, rect: FootRect, t: int) -> bool:
        """True when rect collides with anything active at step t."""
        for other in self._timed.get(t, ()):
            if rects_overlap(rect, other):
                return True
        for other, t_from in self._parked:
            if t >= t_from and rects_overlap(rect, other):
                return True
        return False

    def check_parked(self, rect: FootRect, t_from: int) -> bool:
        """True when rect collides with anything at any step >= t_from."""
        for t, others in self._timed.items():
            if t >= t_from:
                for other in others:
                    if rects_overlap(rect, other):
                        return True
        for other, _ in self._parked:
            if rects_overlap(rect, other):
                return True
        return False


class SoftTrajectories:
    """Other robots' tentative trajectories, counted but not forbidden."""

    def __init__(self, trajs, params: VehicleParams, pad: float = 0.0):
        self._trajs = [list(t) for t in trajs]
        self._params = params
        self._pad = pad
        self._cache: dict[tuple[int, int], FootRect] = {}

    def count(self, rect: FootRect, t: int) -> int:
        n = 0
        cache = self._cache
        for i, traj in enumerate(self._trajs):
            if not traj:
                continue
            k = t if t < len(traj) else len(traj) - 1
            key = (i, k)
            other = cache.get(key)
            if other is None:
                other = rect_of_state(traj[k], self._params, self._pad)
                cache[key] = other
            if rects_overlap(rect, other):
                n += 1
        return n


class PlannerContext:
    """Per-instance preprocessing shared by all planners.

    Holds the prepared obstacle set, per-goal heuristic fields, and the memo
    of analytic docking attempts (keyed by exact state, so outcomes never
    depend on search order).
    """

    def __init__(self, instance: Instance, config: PlannerConfig | None = None):
        self.instance = instance
        self.params = instance.vehicle
        self.config = config or PlannerConfig()
        self.prepared = PreparedObstacles(instance.workspace)
        self._fields: dict[tuple, _HoloField | None] = {}
        self._dock_memo: dict[tuple, DockResult | None] = {}
        self._dock_paths: dict[tuple, object] = {}
        self._grid_free = None   # lazily built (free mask, cell, nx, ny)
        self.dock_lock = self.config.search.dock_steer_frac * self.params.phi_max
        self.dock_radius = self.params.l_b / math.tan(self.dock_lock)

    # -- heuristic machinery -------------------------------------------------

    def _free_mask(self):
        if self._grid_free is not None:
            return self._grid_free
        prepared = self.prepared
        params = self.params
        w, h = prepared.width, prepared.height
        cell = self.config.search.holo_cell
        if max(w, h) > 60.0:
            cell = max(cell, 0.5)   # keep big-map fields cheap
        nx = max(1, int(math.ceil(w / cell - 1e-9)))
        ny = max(1, int(math.ceil(h / cell - 1e-9)))
        xs = (np.arange(nx) + 0.5) * cell
        ys = (np.arange(ny) + 0.5) * cell
        X, Y = np.meshgrid(xs, ys)
        clear = np.minimum(np.minimum(X, w - X), np.minimum(Y, h - Y))
        for (ox, oy, r) in prepared.circles:
            clear = np.minimum(clear, np.hypot(X - ox, Y - oy) - r)
        for (cx, cy, c, s, hx, hy) in prepared.rects:
            dx = X - cx
            dy = Y - cy
            u = dx * c + dy * s
            v = -dx * s + dy * c
            du = np.abs(u) - hx
            dv = np.abs(v) - hy
            outside = np.hypot(np.maximum(du, 0.0), np.maximum(dv, 0.0))
            inside = np.maximum(du, dv)
            clear = np.minimum(clear, np.where((du < 0) & (dv < 0),
                                               inside, outside))
        # a disc of this radius around the rear axle fits inside the footprint
        r_free = min(0.5 * params.w, params.rear_overhang)
        # margin for the worst offset between a feasible path and the
        # centers of the grid cells its corrected grid path runs through
        margin = cell * math.sqrt(2.0) + 0.02
        free = clear >= (r_free - margin)
        self._grid_free = (free, cell, nx, ny)
        return self._grid_free

    def field_for(self, goal: RobotState) -> _HoloField | None:
        if not (self.prepared.circles or self.prepared.rects):
            return None   # no obstacles: the grid adds nothing over Euclid
        key = (goal.x, goal.y)
        if key in self._fields:
            return self._fields[key]
        free, cell, nx, ny = self._free_mask()
        gx = int(goal.x / cell)
        gy = int(goal.y / cell)
        field = None
        if 0 <= gx < nx and 0 <= gy < ny and free[gy, gx]:
            field = _HoloField(free, cell, gx, gy, nx, ny)
        self._fields[key] = field
        return field

    def heuristic_to(self, goal: RobotState):
        """Admissible remaining-steps estimate, as a closure over one goal."""
        params = self.params
        cfg = self.config.search
        field = self.field_for(goal)
        R = params.min_turn_radius
        inv_step = 1.0 / params.step_length
        gx, gy, gth = goal.x, goal.y, goal.theta
        rs_rad = cfg.rs_heuristic_radius

        def h(state: RobotState) -> float:
            dx = gx - state.x
            dy = gy - state.y
            euclid = math.hypot(dx, dy)
            best = euclid
            turn = R * abs(ang_diff(gth, state.theta))
            if turn > best:
                best = turn
            if field is not None:
                m = field.meters(state.x, state.y)
                if m == math.inf:
                    return math.inf
                g = (m - field.sub) * _OCTILE_COS
                if g > best:
                    best = g
            if euclid <= rs_rad:
                length = rs.shortest_length(state.x, state.y, state.theta,
                                            gx, gy, gth, R) * (1.0 - 1e-4)
                if length > best:
                    best = length
            return best * inv_step

        return h

    # -- analytic docking ----------------------------------------------------

    def dock(self, state: RobotState, goal: RobotState,
             max_cost: float = math.inf) -> DockResult | None:
        """Analytic approach from an exact state; memoized.

        max_cost is a pruning bound: when even the bounded-curvature path
        length (a lower bound on the realized step cost) reaches it, the
        expensive realization is skipped. Skips are not memoized, so a
        later call with a looser bound still attempts the dock.
        """
        key = (goal.x, goal.y, goal.theta, goal.phi,
               state.x, state.y, state.theta, state.phi)
        hit = self._dock_memo.get(key, _MISS)
        if hit is not _MISS:
            return hit
        path = self._dock_paths.get(key)
        if path is None:
            path = rs.shortest_path(state.x, state.y, state.theta,
                                    goal.x, goal.y, goal.theta,
                                    self.dock_radius)
            self._dock_paths[key] = path
        if path.length / self.params.step_length > max_cost:
            return None
        result = _dock_attempt(self, state, goal, path)
        self._dock_memo[key] = result
        self._dock_paths.pop(key, None)
        return result


_MISS = object()


# -- docking realization ------------------------------------------------------


def _rs_path_collides(prepared: PreparedObstacles, params: VehicleParams,
                      x: float, y: float, th: float, radius: float,
                      segments) -> bool:
    """Coarse footprint sweep along a bounded-curvature path."""
    for ctype, slen in segments:
        n = max(1, int(math.ceil(abs(slen) / 0.5)))
        for k in range(1, n + 1):
            s = slen * (k / n)
            if ctype == "S":
                px = x + s * math.cos(th)
                py = y + s * math.sin(th)
                pth = th
            else:
                beta = s / radius if ctype == "L" else -s / radius
                if ctype == "L":
                    px = x + radius * (math.sin(th + beta) - math.sin(th))
                    py = y + radius * (math.cos(th) - math.cos(th + beta))
                else:
                    px = x - radius * (math.sin(th - beta) - math.sin(th))
                    py = y - radius * (math.cos(th) - math.cos(th - beta))
                pth = th + beta
            if prepared.rect_collides(rect_of_pose(px, py, pth, params)):
                return True
        # advance to the exact segment end
        if ctype == "S":
            x += slen * math.cos(th)
            y += slen * math.sin(th)
        else:
            beta = slen / radius if ctype == "L" else -slen / radius
            if ctype == "L":
                x += radius * (math.sin(th + beta) - math.sin(th))
                y += radius * (math.cos(th) - math.cos(th + beta))
            else:
                x -= radius * (math.sin(th - beta) - math.sin(th))
                y -= radius * (math.cos(th) - math.cos(th - beta))
            th += beta
    return False


def _realize(params: VehicleParams, start: RobotState, types, lengths,
             lock: float, goal_phi: float, blends):
    """Turn signed segment lengths into integrator steps.

    blends = (entry, internal, exit): steering transitions at the flagged
    positions are blended into the neighboring drive step (costing no extra
    step); the rest become separate v = 0 re-steer steps, which track the
    reference path more faithfully. Returns (motions, end).
    """
    b_entry, b_internal, b_exit = blends
    dt = params.dt
    v_max = params.v_max
    motions: list[Motion] = []
    cur = start
    n_seg = len(types)
    for i in range(n_seg):
        ctype = types[i]
        slen = float(lengths[i])   # keep numpy scalars out of states
        phi_t = lock if ctype == "L" else (-lock if ctype == "R" else 0.0)
        blend_here = b_entry if i == 0 else b_internal
        if not blend_here and abs(cur.phi - phi_t) > 1e-12:
            ctl = ControlInput(0.0, steer_rate_to(cur.phi, phi_t, params))
            nxt = integrate(cur, ctl, params)
            motions.append(Motion(ActionKind.ANALYTIC, ctl, nxt))
            cur = nxt
        k = max(1, int(math.ceil(abs(slen) / (v_max * dt) - 1e-9)))
        v = slen / (k * dt)
        while abs(v) > v_max:
            k += 1
            v = slen / (k * dt)
        for j in range(k):
            om = 0.0
            if blend_here and j == 0 and abs(cur.phi - phi_t) > 1e-12:
                om = steer_rate_to(cur.phi, phi_t, params)
            elif (b_exit and i == n_seg - 1 and j == k - 1
                    and abs(cur.phi - goal_phi) > 1e-12):
                om = steer_rate_to(cur.phi, goal_phi, params)
            ctl = ControlInput(v, om)
            nxt = integrate(cur, ctl, params)
            motions.append(Motion(ActionKind.ANALYTIC, ctl, nxt))
            cur = nxt
    if abs(cur.phi - goal_phi) > 1e-12:
        ctl = ControlInput(0.0, steer_rate_to(cur.phi, goal_phi, params))
        nxt = integrate(cur, ctl, params)
        motions.append(Motion(ActionKind.ANALYTIC, ctl, nxt))
        cur = nxt
    return motions, cur


def _correct(params, state, types, lens, lock, goal, blends):
    """Adjust segment lengths until the realized endpoint hits the goal.

    Newton iteration on the three-dimensional endpoint error with a
    finite-difference Jacobian; the Jacobian is reused across iterations
    and rebuilt when a backtracking step fails to contract the error.
    """

    def error(e: RobotState):
        return np.array([e.x - goal.x, e.y - goal.y,
                         wrap_angle(e.theta - goal.theta)])

    motions, end = _realize(params, state, types, lens, lock, goal.phi,
                            blends)
    err = error(end)
    err_max = np.max(np.abs(err))
    jac = None
    fresh = False
    it = 0
    while err_max > 1e-9:
        it += 1
        if it > 14 or not len(lens):
            return None
        if jac is None:
            jac = np.empty((3, len(lens)))
            for i in range(len(lens)):
                bumped = lens.copy()
                bumped[i] += 1e-6
                _, e2 = _realize(params, state, types, bumped, lock,
                                 goal.phi, blends)
                jac[:, i] = (error(e2) - err) / 1e-6
            fresh = True
        lhs = jac.T @ jac + 1e-12 * np.eye(len(lens))
        try:
            delta = np.linalg.solve(lhs, jac.T @ err)
        except np.linalg.LinAlgError:
            return None
        if np.max(np.abs(delta)) > 10.0:
            return None
        prev_max = err_max
        scale = 1.0
        accepted = False
        for _ in range(4):
            cand = lens - scale * delta
            m2, e2 = _realize(params, state, types, cand, lock, goal.phi,
                              blends)
            v2 = error(e2)
            v2_max = np.max(np.abs(v2))
            if v2_max < 0.9 * prev_max:
                lens, motions, end, err, err_max = cand, m2, e2, v2, v2_max
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            if fresh:
                return None   # even a fresh linearization cannot contract
            jac = None
            continue
        if err_max > 0.5 * prev_max or scale < 1.0:
            jac = None   # slow contraction: rebuild the linearization
        fresh = False
    return motions, end


def _dock_attempt(ctx: PlannerContext, state: RobotState, goal: RobotState,
                  path) -> DockResult | None:
    params = ctx.params
    cfg = ctx.config.search
    lock = ctx.dock_lock
    radius = ctx.dock_radius
    segments = [(t, s) for t, s in path.segments if abs(s) > 1e-12]
    prepared = ctx.prepared
    if segments and (prepared.circles or prepared.rects):
        if _rs_path_collides(prepared, params, state.x, state.y, state.theta,
                             radius, segments):
            return None

    types = [t for t, _ in segments]
    lens = np.array([s for _, s in segments], dtype=float)
    # blending steering swings into drive steps saves a step apiece but
    # bends the realization away from the reference path; try the most
    # aggressive mix first and back off until the correction converges
    min_blend = 1.5 * params.step_length
    long_first = bool(types) and abs(lens[0]) >= min_blend
    long_last = bool(types) and abs(lens[-1]) >= min_blend
    ladder = [(True, True, True), (long_first, False, long_last),
              (False, False, False)]
    got = None
    tried = set()
    for blends in ladder:
        if blends in tried:
            continue
        tried.add(blends)
        got = _correct(params, state, types, lens, lock, goal, blends)
        if got is not None:
            break
    if got is None:
        return None
    motions, end = got

    if len(motions) > 150:
        return None
    for m in motions:
        if prepared.rect_collides(rect_of_state(m.target, params)):
            return None

    cost = 0.0
    prev_dir = 0
    first_dir = 0
    for m in motions:
        v = m.control.v
        cost += 1.0
        if v < -1e-12:
            cost += cfg.backward_penalty
        d = 0 if abs(v) <= 1e-12 else (1 if v > 0 else -1)
        if d != 0:
            if first_dir == 0:
                first_dir = d
            if prev_dir != 0 and d != prev_dir:
                cost += cfg.switch_penalty
            prev_dir = d
    return DockResult(tuple(motions), cost, first_dir, end)


# -- shared expansion pieces ---------------------------------------------------


def _bin_of(state: RobotState, xy_bin: float, th_bin: float,
            phi_max: float) -> tuple[int, int, int, int]:
    iphi = 0
    if state.phi > 0.5 * phi_max:
        iphi = 1
    elif state.phi < -0.5 * phi_max:
        iphi = -1
    return (int(state.x / xy_bin), int(state.y / xy_bin),
            int((state.theta + math.pi) / th_bin), iphi)


def _step_cost(motion: Motion, prev_dir: int, cfg) -> tuple[float, int]:
    """Cost of one primitive step and the updated movement direction."""
    v = motion.control.v
    cost = 1.0
    d = prev_dir
    if v > 1e-12:
        if prev_dir == -1:
            cost += cfg.switch_penalty
        d = 1
    elif v < -1e-12:
        cost += cfg.backward_penalty
        if prev_dir == 1:
            cost += cfg.switch_penalty
        d = -1
    if motion.kind in (ActionKind.FORWARD_LEFT, ActionKind.FORWARD_RIGHT,
                       ActionKind.BACKWARD_LEFT, ActionKind.BACKWARD_RIGHT):
        cost += cfg.turn_penalty
    return cost, d


def _junction_cost(dres: DockResult, prev_dir: int, cfg) -> float:
    if dres.first_dir != 0 and prev_dir != 0 and dres.first_dir != prev_dir:
        return dres.cost + cfg.switch_penalty
    return dres.cost


def _validate_endpoint(ctx: PlannerContext, start: RobotState,
                       goal: RobotState) -> None:
    if ctx.prepared.rect_collides(rect_of_state(start, ctx.params)):
        raise ValueError("start state collides or exits the workspace")
    if ctx.prepared.rect_collides(rect_of_state(goal, ctx.params)):
        raise ValueError("goal state collides or exits the workspace")


def _reconstruct(parents, moves, idx) -> tuple[list[Motion], int]:
    chain = []
    while idx != -1:
        chain.append(moves[idx])
        idx = parents[idx]
    chain.reverse()
    motions: list[Motion] = []
    for item in chain:
        if item is None:
            continue
        if isinstance(item, DockResult):
            motions.extend(item.motions)
        else:
            motions.append(item)
    return motions


def _states_of(start: RobotState, motions) -> list[RobotState]:
    states = [start]
    for m in motions:
        states.append(m.target)
    return states


# -- the three searches --------------------------------------------------------


def plan_static(ctx: PlannerContext, start: RobotState, goal: RobotState,
                deadline: float | None = None,
                weight: float = 1.0) -> SearchResult | None:
    """Time-free plan from start to the exact goal pose.

    weight > 1 greedifies the search (cost at most weight times optimal),
    which is how guidance plans are kept cheap. Returns None when the
    search exhausts its node budget, proves the goal unreachable, or hits
    the deadline (time.monotonic seconds).
    """
    _validate_endpoint(ctx, start, goal)
    params = ctx.params
    cfg = ctx.config.search
    prepared = ctx.prepared
    h = ctx.heuristic_to(goal)
    h0 = h(start)
    if h0 == math.inf:
        return None
    xy_bin, th_bin = cfg.xy_bin, cfg.theta_bin
    phi_max = params.phi_max

    states = [start]
    parents = [-1]
    moves: list = [None]
    dirs = [0]
    hs = [h0]
    is_goal = [False]
    best_g: dict[tuple, float] = {_bin_of(start, xy_bin, th_bin, phi_max): 0.0}
    open_heap = [(weight * h0, 0.0, 0, 0)]   # (f, -g, seq, idx)
    seq = 1
    expansions = 0
    incumbent = math.inf   # best docked completion pushed so far
    ana2 = cfg.analytic_radius * cfg.analytic_radius
    dock_bins: set[tuple] = set()   # weighted runs dock once per cell

    while open_heap:
        f, ng, _, idx = heapq.heappop(open_heap)
        g = -ng
        z = states[idx]
        if is_goal[idx]:
            motions = _reconstruct(parents, moves, idx)
            return SearchResult(motions, _states_of(start, motions), g,
                                expansions)
        b = _bin_of(z, xy_bin, th_bin, phi_max)
        if g > best_g.get(b, math.inf) + 1e-12:
            continue
        expansions += 1
        if expansions > cfg.node_budget:
            return None
        if deadline is not None and expansions % _DEADLINE_STRIDE == 0:
            if time.monotonic() > deadline:
                return None

        dx = goal.x - z.x
        dy = goal.y - z.y
        # g + h lower-bounds any completion through this node, so docks
        # that cannot beat the incumbent are skipped without attempting;
        # inflated runs promise only w-suboptimality, so they further limit
        # attempts to one node per position/heading cell
        if (dx * dx + dy * dy <= ana2 and g + hs[idx] < incumbent - 1e-9
                and (weight == 1.0 or b[:3] not in dock_bins)):
            if weight != 1.0:
                dock_bins.add(b[:3])
            dres = ctx.dock(z, goal, incumbent - g - 1e-9)
            if dres is not None:
                g2 = g + _junction_cost(dres, dirs[idx], cfg)
                if g2 < incumbent:
                    incumbent = g2
                states.append(dres.final)
                parents.append(idx)
                moves.append(dres)
                dirs.append(0)
                hs.append(0.0)
                is_goal.append(True)
                if weight != 1.0:
                    # an inflated run has already given up exactness, so
                    # the first realized approach is good enough; proving
                    # the w-bound can cost more than the whole search
                    motions = _reconstruct(parents, moves, len(states) - 1)
                    return SearchResult(motions, _states_of(start, motions),
                                        g2, expansions)
                heapq.heappush(open_heap, (g2, -g2, seq, len(states) - 1))
                seq += 1

        for m in successors(z, prepared, params):
            if m.kind == ActionKind.WAIT:
                continue   # waits never help without a time axis
            cost, d = _step_cost(m, dirs[idx], cfg)
            g2 = g + cost
            nb = _bin_of(m.target, xy_bin, th_bin, phi_max)
            if g2 >= best_g.get(nb, math.inf) - 1e-12:
                continue
            best_g[nb] = g2
            h2 = h(m.target)
            if h2 == math.inf:
                continue
            states.append(m.target)
            parents.append(idx)
            moves.append(m)
            dirs.append(d)
            hs.append(h2)
            is_goal.append(False)
            heapq.heappush(open_heap,
                           (g2 + weight * h2, -g2, seq, len(states) - 1))
            seq += 1
    return None


def _timed_dock_entry(ctx, constraints, goal, z, t, g, prev_dir, horizon, cfg,
                      max_cost=math.inf):
    """Dock from a popped timed node; None unless every step stays legal."""
    dres = ctx.dock(z, goal, max_cost)
    if dres is None:
        return None
    t_arr = t + len(dres.motions)
    if t_arr > horizon:
        return None
    params = ctx.params
    if constraints is not None:
        for k, m in enumerate(dres.motions):
            rect = rect_of_state(m.target, params)
            if constraints.check(rect, t + k + 1):
                return None
        final_rect = rect_of_state(dres.final, params)
        if constraints.check_parked(final_rect, t_arr + 1):
            return None
    return dres, t_arr, g + _junction_cost(dres, prev_dir, cfg)


def plan_spatiotemporal(ctx: PlannerContext, start: RobotState,
                        goal: RobotState,
                        constraints: DynamicConstraints | None = None,
                        horizon: int | None = None,
                        deadline: float | None = None,
                        weight: float = 1.0) -> SearchResult | None:
    """Time-indexed plan around hard timed constraints (plain best-first).

    With weight > 1 the expansion order is inflated (cost within weight of
    optimal); the docking gate keeps using the unweighted estimate.
    """
    _validate_endpoint(ctx, start, goal)
    params = ctx.params
    cfg = ctx.config.search
    prepared = ctx.prepared
    if horizon is None:
        horizon = cfg.horizon
    h = ctx.heuristic_to(goal)
    h0 = h(start)
    if h0 == math.inf:
        return None
    xy_bin, th_bin = cfg.xy_bin, cfg.theta_bin
    phi_max = params.phi_max

    states = [start]
    times = [0]
    parents = [-1]
    moves: list = [None]
    dirs = [0]
    is_goal = [False]
    hs = [h0]
    b0 = _bin_of(start, xy_bin, th_bin, phi_max) + (0,)
    best_g: dict[tuple, float] = {b0: 0.0}
    open_heap = [(weight * h0, 0.0, 0, 0)]
    seq = 1
    expansions = 0
    incumbent = math.inf
    ana2 = cfg.analytic_radius * cfg.analytic_radius
    dock_bins: set[tuple] = set()   # weighted runs dock once per cell-time

    while open_heap:
        f, ng, _, idx = heapq.heappop(open_heap)
        g = -ng
        z = states[idx]
        t = times[idx]
        if is_goal[idx]:
            motions = _reconstruct(parents, moves, idx)
            return SearchResult(motions, _states_of(start, motions), g,
                                expansions)
        b = _bin_of(z, xy_bin, th_bin, phi_max) + (t,)
        if g > best_g.get(b, math.inf) + 1e-12:
            continue
        expansions += 1
        if expansions > cfg.node_budget:
            return None
        if deadline is not None and expansions % _DEADLINE_STRIDE == 0:
            if time.monotonic() > deadline:
                return None

        dx = goal.x - z.x
        dy = goal.y - z.y
        if (dx * dx + dy * dy <= ana2 and g + hs[idx] < incumbent - 1e-9
                and (weight == 1.0
                     or (b[0], b[1], b[2], t) not in dock_bins)):
            if weight != 1.0:
                dock_bins.add((b[0], b[1], b[2], t))
            entry = _timed_dock_entry(ctx, constraints, goal, z, t, g,
                                      dirs[idx], horizon, cfg,
                                      incumbent - g - 1e-9)
            if entry is not None:
                dres, t_arr, g2 = entry
                if g2 < incumbent:
                    incumbent = g2
                states.append(dres.final)
                times.append(t_arr)
                parents.append(idx)
                moves.append(dres)
                dirs.append(0)
                is_goal.append(True)
                hs.append(0.0)
                if weight != 1.0:
                    # inflated runs take the first legal approach; see
                    # plan_static for the rationale
                    motions = _reconstruct(parents, moves, len(states) - 1)
                    return SearchResult(motions, _states_of(start, motions),
                                        g2, expansions)
                heapq.heappush(open_heap, (g2, -g2, seq, len(states) - 1))
                seq += 1

        if t + 1 > horizon:
            continue
        for m in successors(z, prepared, params):
            rect = rect_of_state(m.target, params)
            if constraints is not None and constraints.check(rect, t + 1):
                continue
            cost, d = _step_cost(m, dirs[idx], cfg)
            g2 = g + cost
            nb = _bin_of(m.target, xy_bin, th_bin, phi_max) + (t + 1,)
            if g2 >= best_g.get(nb, math.inf) - 1e-12:
                continue
            best_g[nb] = g2
            h2 = h(m.target)
            if h2 == math.inf:
                continue
            states.append(m.target)
            times.append(t + 1)
            parents.append(idx)
            moves.append(m)
            dirs.append(d)
            is_goal.append(False)
            hs.append(h2)
            heapq.heappush(open_heap,
                           (g2 + weight * h2, -g2, seq, len(states) - 1))
            seq += 1
    return None


def plan_focal(ctx: PlannerContext, start: RobotState, goal: RobotState,
               constraints: DynamicConstraints | None,
               soft: SoftTrajectories | None, w: float,
               horizon: int | None = None,
               deadline: float | None = None) -> SearchResult | None:
    """Bounded-suboptimal time-indexed plan.

    Keeps the classic two-queue arrangement: an open queue ordered by f and
    a focal queue of nodes with f <= w * f_min ordered by accumulated soft
    conflicts. The returned cost is within w of optimal.
    """
    _validate_endpoint(ctx, start, goal)
    params = ctx.params
    cfg = ctx.config.search
    prepared = ctx.prepared
    if horizon is None:
        horizon = cfg.horizon
    h = ctx.heuristic_to(goal)
    h0 = h(start)
    if h0 == math.inf:
        return None
    xy_bin, th_bin = cfg.xy_bin, cfg.theta_bin
    phi_max = params.phi_max

    states = [start]
    times = [0]
    parents = [-1]
    moves: list = [None]
    dirs = [0]
    confs = [0]
    gs = [0.0]
    is_goal = [False]
    expanded = [False]
    b0 = _bin_of(start, xy_bin, th_bin, phi_max) + (0,)
    best_g: dict[tuple, float] = {b0: 0.0}

    open_heap = [(h0, 0.0, 0, 0)]    # (f, -g, seq, idx): f_min tracking
    waiting = [(h0, 0.0, 0, 0)]      # nodes not yet promoted to focal
    focal = []                       # (conflicts, f, -g, seq, idx)
    seq = 1
    expansions = 0
    incumbent = math.inf
    ana2 = cfg.analytic_radius * cfg.analytic_radius
    dock_bins: set[tuple] = set()   # weighted runs dock once per cell-time

    def stale(idx, g):
        if expanded[idx]:
            return True
        if is_goal[idx]:
            return False   # goal entries never participate in bin dedup
        key = _bin_of(states[idx], xy_bin, th_bin, phi_max) + (times[idx],)
        return g > best_g.get(key, math.inf) + 1e-12

    def push(idx2, f2):
        nonlocal seq
        heapq.heappush(open_heap, (f2, -gs[idx2], seq, idx2))
        heapq.heappush(waiting, (f2, -gs[idx2], seq, idx2))
        seq += 1

    while True:
        # current f_min over live open nodes
        while open_heap and stale(open_heap[0][3], -open_heap[0][1]):
            heapq.heappop(open_heap)
        if not open_heap:
            return None
        f_min = open_heap[0][0]
        thr = w * f_min + 1e-9
        while waiting and waiting[0][0] <= thr:
            fv, ngv, sv, iv = heapq.heappop(waiting)
            if not stale(iv, -ngv):
                heapq.heappush(focal, (confs[iv], fv, ngv, sv, iv))
        # pop the most promising focal node still eligible
        idx = -1
        while focal:
            nc, fv, ngv, sv, iv = heapq.heappop(focal)
            if stale(iv, -ngv):
                continue
            if fv > thr:
                heapq.heappush(waiting, (fv, ngv, sv, iv))
                continue
            idx = iv
            break
        if idx < 0:
            # focal drained between threshold moves; retry from open
            if not open_heap:
                return None
            continue

        z = states[idx]
        t = times[idx]
        g = gs[idx]
        if is_goal[idx]:
            motions = _reconstruct(parents, moves, idx)
            return SearchResult(motions, _states_of(start, motions), g,
                                expansions)
        expanded[idx] = True
        expansions += 1
        if expansions > cfg.node_budget:
            return None
        if deadline is not None and expansions % _DEADLINE_STRIDE == 0:
            if time.monotonic() > deadline:
                return None

        dx = goal.x - z.x
        dy = goal.y - z.y
        if dx * dx + dy * dy <= ana2 and fv < incumbent - 1e-9:
            db = _bin_of(z, xy_bin, th_bin, phi_max)[:3] + (t,)
            if w != 1.0:
                if db in dock_bins:
                    entry = None
                else:
                    dock_bins.add(db)
                    entry = _timed_dock_entry(ctx, constraints, goal, z, t, g,
                                              dirs[idx], horizon, cfg,
                                              incumbent - g - 1e-9)
            else:
                entry = _timed_dock_entry(ctx, constraints, goal, z, t, g,
                                          dirs[idx], horizon, cfg,
                                          incumbent - g - 1e-9)
            if entry is not None:
                dres, t_arr, g2 = entry
                if g2 < incumbent:
                    incumbent = g2
                states.append(dres.final)
                times.append(t_arr)
                parents.append(idx)
                moves.append(dres)
                dirs.append(0)
                confs.append(confs[idx])
                gs.append(g2)
                is_goal.append(True)
                expanded.append(False)
                push(len(states) - 1, g2)

        if t + 1 > horizon:
            continue
        for m in successors(z, prepared, params):
            rect = rect_of_state(m.target, params)
            if constraints is not None and constraints.check(rect, t + 1):
                continue
            cost, d = _step_cost(m, dirs[idx], cfg)
            g2 = g + cost
            nb = _bin_of(m.target, xy_bin, th_bin, phi_max) + (t + 1,)
            if g2 >= best_g.get(nb, math.inf) - 1e-12:
                continue
            best_g[nb] = g2
            h2 = h(m.target)
            if h2 == math.inf:
                continue
            nc = confs[idx] + (soft.count(rect, t + 1) if soft is not None
                               else 0)
            states.append(m.target)
            times.append(t + 1)
            parents.append(idx)
            moves.append(m)
            dirs.append(d)
            confs.append(nc)
            gs.append(g2)
            is_goal.append(False)
            expanded.append(False)
            push(len(states) - 1, g2 + h2)


class GreedyPlanCache:
    """Cached static plan for one robot, replayed step by step.

    Looks up the next planned motion for an exact state; a miss replans from
    that state and refreshes the cache. States repeat exactly across steps
    because every stored target is integrator output.
    """

    def __init__(self, ctx: PlannerContext, goal: RobotState,
                 weight: float = 1.0):
        self._ctx = ctx
        self._goal = goal
        self._weight = weight
        self._next: dict[RobotState, Motion] = {}

    def motion_from(self, state: RobotState,
                    deadline: float | None = None) -> Motion | None:
        hit = self._next.get(state)
        if hit is not None:
            return hit
        goal = self._goal
        ctx = self._ctx
        # near the goal, following the analytic approach directly avoids a
        # search whose optimum the guidance does not need
        if (math.hypot(goal.x - state.x, goal.y - state.y)
                <= ctx.config.search.analytic_radius):
            dres = ctx.dock(state, goal)
            if dres is not None and dres.motions:
                prev = state
                for m in dres.motions:
                    self._next[prev] = m
                    prev = m.target
                return dres.motions[0]
        res = plan_static(ctx, state, goal, deadline, self._weight)
        if res is None or not res.motions:
            return None
        self._next.update(
            (res.states[k], m) for k, m in enumerate(res.motions))
        return res.motions[0]
