"""Step-based multi-vehicle trajectory planning for car-like robots."""

from .model import (ControlInput, Instance, PlanningFailed, RobotState,
                    Solution, VehicleParams, Workspace)

__version__ = "0.1.0"

__all__ = [
    "ControlInput", "Instance", "PlanningFailed", "RobotState", "Solution",
    "VehicleParams", "Workspace", "__version__",
]
