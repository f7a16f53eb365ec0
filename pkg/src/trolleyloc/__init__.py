"""Deterministic simulator and evaluation harness for indoor luggage-trolley localisation.

Four methods are modelled: RFID antenna proximity, camera keypoints with
EPnP, a dual-tag UWB pair and a dual-reflector lidar pair.
"""

from .config import SensorSuiteConfig
from .errors import LocalizationError
from .evaluation import DOCKING, MICROLOCATION, SuccessCriterion, estimate, run_grid
from .geometry import Pose2D, Pose6D, Vec2, offset_point, pair_to_state
from .world import GridSpec, Scenario, TrolleyModel, generate_grid

__version__ = "0.1.0"

__all__ = [
    "DOCKING",
    "MICROLOCATION",
    "GridSpec",
    "LocalizationError",
    "Pose2D",
    "Pose6D",
    "Scenario",
    "SensorSuiteConfig",
    "SuccessCriterion",
    "TrolleyModel",
    "Vec2",
    "estimate",
    "generate_grid",
    "offset_point",
    "pair_to_state",
    "run_grid",
]
