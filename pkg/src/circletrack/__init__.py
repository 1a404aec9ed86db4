"""Three-camera circular line tracking with a sliding-mode controller."""

from .geometry import Circle, CollinearPoints, Point2D, Pose2D, circumcircle, wrap_angle
from .harness import (
    SimulationAborted,
    TraceRow,
    convergence_time,
    ratio_series,
    run_scenario,
    sweep,
)
from .plant import ControlCommand, RobotParams, WheelSpeeds
from .scenarios import BUILTINS, ScenarioConfig, builtin, load_config
from .smc import Gains, control

__all__ = [
    "BUILTINS",
    "Circle",
    "CollinearPoints",
    "ControlCommand",
    "Gains",
    "Point2D",
    "Pose2D",
    "RobotParams",
    "ScenarioConfig",
    "SimulationAborted",
    "TraceRow",
    "WheelSpeeds",
    "builtin",
    "circumcircle",
    "control",
    "convergence_time",
    "load_config",
    "ratio_series",
    "run_scenario",
    "sweep",
    "wrap_angle",
]
