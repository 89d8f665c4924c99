"""Planner parameter bundles and config-file loading."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields, replace

import yaml

CONFIG_ENV_VAR = "MVTP_CONFIG"


@dataclass
class SearchConfig:
    """Hybrid A* knobs shared by the static and time-indexed searches."""

    xy_bin: float = 0.5              # closed-set position bin [m]
    theta_bin: float = 2.0 * math.pi / 36.0
    backward_penalty: float = 0.5    # per reversing step
    switch_penalty: float = 0.5      # per direction change
    turn_penalty: float = 0.1        # per full-lock turning step
    analytic_radius: float = 10.0    # try goal docking within this distance [m]
    node_budget: int = 100_000
    horizon: int = 200               # time-indexed searches only
    holo_cell: float = 0.25          # holonomic heuristic grid cell [m]
    rs_heuristic_radius: float = 20.0  # compute RS heuristic inside this radius
    dock_steer_frac: float = 0.95    # docking arcs use this fraction of phi_max


@dataclass
class GroupConfig:
    """Local-group formation and collaborative solve knobs."""

    d_group: float = 8.0             # proximity graph edge threshold [m]
    d_near: float = 1.0              # footprint distance forcing an edge [m]
    n_max: int = 4                   # max robots solved collaboratively
    cooldown: int = 5                # steps to skip a group after a failed solve
    w: float = 1.5                   # low-level suboptimality factor
    cbs_expansions: int = 500        # high-level node budget per solve
    cbs_time_frac: float = 0.10      # fraction of remaining budget per solve
    h_freeze: int = 3                # steps outsiders are frozen as obstacles
    split_oversize: bool = True      # carve oversize components into subgroups
    cache_plans: bool = True


@dataclass
class StepConfig:
    """Step-planner (priority inheritance / backtracking) knobs."""

    step_cap_factor: float = 10.0    # step cap = factor * max(W,H) / (v_max*dt)
    wait_penalty: float = 0.5        # candidate-ranking penalty for waiting
    backward_penalty: float = 0.25   # candidate-ranking penalty for reversing
    ga_weight: float = 1.5           # heuristic inflation for guidance plans
    detour_budget: int = 6000        # expansion cap per detour search
    detour_cooldown: int = 5         # rounds before a failed detour retries


@dataclass
class ReplanConfig:
    """Duplicate-configuration detection and randomization knobs."""

    pos_eps: float = 0.01            # position quantum for duplicate keys [m]
    ang_eps: float = 0.01            # heading quantum [rad]
    rho: float = 0.34                # fraction of active robots perturbed
    max_retries: int = 8             # re-randomization attempts per duplicate


@dataclass
class PlannerConfig:
    """Top-level bundle handed to every solver."""

    search: SearchConfig = field(default_factory=SearchConfig)
    group: GroupConfig = field(default_factory=GroupConfig)
    step: StepConfig = field(default_factory=StepConfig)
    replan: ReplanConfig = field(default_factory=ReplanConfig)


def _apply_overrides(section, data: dict):
    known = {f.name for f in fields(section)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return replace(section, **data)


def load_config(path: str | None = None) -> PlannerConfig:
    """Build a PlannerConfig, optionally overridden from a YAML file.

    With no explicit path, the file named by $MVTP_CONFIG is used when set;
    otherwise defaults are returned. The YAML may contain any subset of the
    sections search/group/step/replan with scalar overrides.
    """
    cfg = PlannerConfig()
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR) or None
    if path is None:
        return cfg
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError(f"config root must be a mapping: {path}")
    sections = {"search", "group", "step", "replan"}
    unknown = set(data) - sections
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    for name in sections & set(data):
        cfg = replace(cfg, **{name: _apply_overrides(getattr(cfg, name), data[name])})
    return cfg
