"""Instance files (YAML) and solution trace files (plain text).

Instance schema:

    map:
      dimensions: [W, H]
      obstacles:
      - {type: rectangle, center: [x, y], size: [sx, sy], yaw: 0.0}
      - {type: circle, center: [x, y], radius: r}
    agents:
    - {start: [x, y, theta], goal: [x, y, theta]}
    vehicle: {l, w, l_b, v_max, omega_max, phi_max, dt}

Angles in radians, lengths in meters. Trace files are text: `# key: value`
header lines, then one row per step with x y theta phi per robot, floats
printed with repr so reading a trace back is bit-exact.
"""

from __future__ import annotations

import os

import yaml

from .model import (CircleObstacle, Instance, RectObstacle, RobotState,
                    Solution, VehicleParams, Workspace)


def _parse_obstacle(data: dict):
    kind = data.get("type")
    if kind == "circle":
        (cx, cy) = data["center"]
        return CircleObstacle(float(cx), float(cy), float(data["radius"]))
    if kind == "rectangle":
        (cx, cy) = data["center"]
        (sx, sy) = data["size"]
        return RectObstacle(float(cx), float(cy), 0.5 * float(sx),
                            0.5 * float(sy), float(data.get("yaw", 0.0)))
    raise ValueError(f"unknown obstacle type: {kind!r}")


def _dump_obstacle(ob) -> dict:
    if isinstance(ob, CircleObstacle):
        return {"type": "circle", "center": [ob.cx, ob.cy], "radius": ob.radius}
    return {"type": "rectangle", "center": [ob.cx, ob.cy],
            "size": [2.0 * ob.half_x, 2.0 * ob.half_y], "yaw": ob.yaw}


def _parse_pose(vals) -> RobotState:
    # [x, y, theta] with an optional trailing steering angle
    if len(vals) == 3:
        x, y, th = vals
        return RobotState(float(x), float(y), float(th))
    if len(vals) == 4:
        x, y, th, phi = vals
        return RobotState(float(x), float(y), float(th), float(phi))
    raise ValueError(f"pose needs 3 or 4 numbers, got {vals!r}")


def _dump_pose(state: RobotState) -> list:
    if state.phi == 0.0:
        return [state.x, state.y, state.theta]
    return [state.x, state.y, state.theta, state.phi]


def load_instance(path: str) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict) or "map" not in data or "agents" not in data:
        raise ValueError(f"not an instance file: {path}")
    mp = data["map"]
    w, h = mp["dimensions"]
    obstacles = tuple(_parse_obstacle(ob) for ob in mp.get("obstacles") or ())
    workspace = Workspace(float(w), float(h), obstacles)
    vdata = data.get("vehicle") or {}
    vehicle = VehicleParams(**{k: float(v) if k != "n_substeps" else int(v)
                               for k, v in vdata.items()})
    starts, goals = [], []
    for agent in data["agents"]:
        starts.append(_parse_pose(agent["start"]))
        goals.append(_parse_pose(agent["goal"]))
    name = data.get("name") or os.path.splitext(os.path.basename(path))[0]
    return Instance(workspace, vehicle, starts, goals, name=name)


def save_instance(instance: Instance, path: str) -> None:
    v = instance.vehicle
    data = {
        "name": instance.name,
        "map": {
            "dimensions": [instance.workspace.width, instance.workspace.height],
            "obstacles": [_dump_obstacle(ob)
                          for ob in instance.workspace.obstacles],
        },
        "agents": [
            {"start": _dump_pose(s), "goal": _dump_pose(g)}
            for s, g in zip(instance.starts, instance.goals)
        ],
        "vehicle": {"l": v.l, "w": v.w, "l_b": v.l_b, "v_max": v.v_max,
                    "omega_max": v.omega_max, "phi_max": v.phi_max, "dt": v.dt},
    }
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(data, fh, sort_keys=False, default_flow_style=None)


def save_trace(solution: Solution, path: str, instance_name: str = "") -> None:
    """Write a deterministic text trace (no wall-clock fields)."""
    lines = ["# mvtp-trace v1"]
    if instance_name:
        lines.append(f"# instance: {instance_name}")
    lines.append(f"# planner: {solution.planner}")
    if solution.seed is not None:
        lines.append(f"# seed: {solution.seed}")
    lines.append(f"# robots: {solution.num_robots}")
    lines.append(f"# makespan: {solution.makespan}")
    lines.append("# arrivals: " + " ".join(str(t) for t in solution.arrival_steps))
    lines.append("# columns: step then [x y theta phi] per robot")
    for t, cfg in enumerate(solution.configurations):
        row = [str(t)]
        for st in cfg:
            row.extend((repr(st.x), repr(st.y), repr(st.theta), repr(st.phi)))
        lines.append(" ".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_trace(path: str) -> tuple[Solution, dict]:
    """Read a trace back into a Solution plus its header metadata."""
    meta: dict[str, str] = {}
    configurations = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, val = body.split(":", 1)
                    meta[key.strip()] = val.strip()
                continue
            parts = line.split()
            vals = [float(p) for p in parts[1:]]
            if len(vals) % 4 != 0:
                raise ValueError(f"malformed trace row in {path}")
            cfg = tuple(RobotState(*vals[k:k + 4]) for k in range(0, len(vals), 4))
            configurations.append(cfg)
    if not configurations:
        raise ValueError(f"empty trace: {path}")
    arrivals = [None if s == "None" else int(s)
                for s in meta.get("arrivals", "").split()]
    if len(arrivals) != len(configurations[0]):
        raise ValueError(f"trace missing or malformed arrivals header: {path}")
    seed = int(meta["seed"]) if "seed" in meta else None
    sol = Solution(configurations, arrivals, meta.get("planner", "unknown"),
                   seed=seed)
    return sol, meta
