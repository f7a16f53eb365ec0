"""JSON configuration files for scenarios, grids and runs.

Files use metres and degrees; everything in memory uses metres and radians
(sensor fields whose names end in ``_deg`` stay in degrees in both places).
Any key may be omitted and falls back to the built-in default.  Unknown keys
are rejected so that typos do not silently run the default experiment.

Schema (all top-level keys optional)::

    {
      "seed": 0,
      "robot_pose":   {"x": 0.0, "y": 0.0, "theta_deg": 0.0},
      "trolley_pose": {"x": 3.0, "y": 0.0, "theta_deg": 0.0},
      "trolley": {"keypoints": [[x, y, z] x6], "tag_offsets": [[x, y], [x, y]],
                  "reflector_offsets": [[x, y], [x, y]], "offset_d": 0.3,
                  "body_radius": 0.25},
      "sensors": {"camera": {...}, "uwb": {"anchors": [[x, y], ...], ...},
                  "lidar": {...}, "rfid": {"antennas": [{"id": 1, "position": [x, y],
                                                         "radius": 4.2}, ...]}},
      "grid": {"polar_angles_deg": [...], "distances": [...], "yaw_steps_deg": [...]},
      "criterion": {"pos_tol": 0.4, "yaw_tol_deg": 60.0, "require_detection": true},
      "methods": ["keypoints", "uwb", "reflectors"],
      "repeats": 1
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .config import Antenna, CameraConfig, LidarConfig, RfidConfig, SensorSuiteConfig, UwbConfig
from .errors import ConfigError
from .estimators.pipelines import METHODS
from .evaluation import DOCKING, SuccessCriterion
from .geometry import Pose2D, Vec2
from .world import MASK64, GridSpec, Scenario, TrolleyModel

DEFAULT_METHODS = ("keypoints", "uwb", "reflectors")

_TOP_KEYS = {"seed", "robot_pose", "trolley_pose", "trolley", "sensors", "grid", "criterion", "methods", "repeats"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs: the base scenario, grid axes and judging rule."""

    scenario: Scenario = field(default_factory=Scenario)
    grid: GridSpec = field(default_factory=GridSpec)
    criterion: SuccessCriterion = DOCKING
    methods: tuple[str, ...] = DEFAULT_METHODS
    repeats: int = 1


def _check_keys(d: dict, allowed, where: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object, got {type(d).__name__}")
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}")


def _num(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}: expected a finite number, got {v!r}")
    return float(v)


def _vec(v, where: str) -> Vec2:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(f"{where}: expected [x, y]")
    return Vec2(_num(v[0], where), _num(v[1], where))


def _pose(d, default: Pose2D, where: str) -> Pose2D:
    _check_keys(d, {"x", "y", "theta_deg"}, where)
    return Pose2D(
        _num(d.get("x", default.x), where + ".x"),
        _num(d.get("y", default.y), where + ".y"),
        math.radians(_num(d.get("theta_deg", math.degrees(default.theta)), where + ".theta_deg")),
    )


def _scalar_section(d, default, where: str):
    """Override the scalar fields of a flat config dataclass."""
    names = {f.name for f in fields(default)}
    _check_keys(d, names, where)
    updates = {}
    for key, value in d.items():
        current = getattr(default, key)
        if isinstance(current, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{where}.{key}: expected true/false")
            updates[key] = value
        elif isinstance(current, int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{where}.{key}: expected an integer")
            updates[key] = value
        elif value is None:
            updates[key] = None
        else:
            updates[key] = _num(value, f"{where}.{key}")
    return replace(default, **updates)


def _trolley(d, where="trolley") -> TrolleyModel:
    _check_keys(d, {"keypoints", "tag_offsets", "reflector_offsets", "offset_d", "body_radius"}, where)
    base = TrolleyModel()
    kw: dict[str, Any] = {}
    if "keypoints" in d:
        kps = d["keypoints"]
        if not isinstance(kps, list) or len(kps) != 6 or any(not isinstance(p, list) or len(p) != 3 for p in kps):
            raise ConfigError(f"{where}.keypoints: expected 6 [x, y, z] triples")
        kw["keypoints_local"] = [[_num(c, f"{where}.keypoints") for c in p] for p in kps]
    for key in ("tag_offsets", "reflector_offsets"):
        if key in d:
            pair = d[key]
            if not isinstance(pair, list) or len(pair) != 2:
                raise ConfigError(f"{where}.{key}: expected two [x, y] points")
            kw[key] = tuple(_vec(p, f"{where}.{key}") for p in pair)
    for key in ("offset_d", "body_radius"):
        if key in d:
            kw[key] = _num(d[key], f"{where}.{key}")
    try:
        return replace(base, **kw)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _sensors(d, where="sensors") -> SensorSuiteConfig:
    _check_keys(d, {"camera", "uwb", "lidar", "rfid"}, where)
    try:
        camera = _scalar_section(d.get("camera", {}), CameraConfig(), where + ".camera")
        lidar = _scalar_section(d.get("lidar", {}), LidarConfig(), where + ".lidar")

        uwb_d = dict(d.get("uwb", {}))
        _check_keys(uwb_d, {f.name for f in fields(UwbConfig)}, where + ".uwb")
        uwb = UwbConfig()
        if "anchors" in uwb_d:
            anchors = uwb_d.pop("anchors")
            if not isinstance(anchors, list):
                raise ConfigError(f"{where}.uwb.anchors: expected a list of [x, y]")
            uwb = replace(uwb, anchors=tuple(_vec(a, f"{where}.uwb.anchors") for a in anchors))
        uwb = _scalar_section(uwb_d, uwb, where + ".uwb")

        rfid_d = d.get("rfid", {})
        _check_keys(rfid_d, {"antennas"}, where + ".rfid")
        rfid = RfidConfig()
        if "antennas" in rfid_d:
            ants = []
            for k, a in enumerate(rfid_d["antennas"]):
                w = f"{where}.rfid.antennas[{k}]"
                _check_keys(a, {"id", "position", "radius"}, w)
                if "id" not in a or "position" not in a:
                    raise ConfigError(f"{w}: id and position are required")
                if isinstance(a["id"], bool) or not isinstance(a["id"], int):
                    raise ConfigError(f"{w}.id: expected an integer")
                ants.append(Antenna(a["id"], _vec(a["position"], w + ".position"),
                                    _num(a.get("radius", 4.2), w + ".radius")))
            if len({a.id for a in ants}) != len(ants):
                raise ConfigError(f"{where}.rfid.antennas: duplicate ids")
            rfid = RfidConfig(tuple(ants))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    return SensorSuiteConfig(camera, uwb, lidar, rfid)


def _number_list(v, where: str) -> tuple[float, ...]:
    if not isinstance(v, list):
        raise ConfigError(f"{where}: expected a list of numbers")
    return tuple(_num(x, where) for x in v)


def _grid(d, where="grid") -> GridSpec:
    _check_keys(d, {"polar_angles_deg", "distances", "yaw_steps_deg"}, where)
    base = GridSpec()
    return GridSpec(
        _number_list(d["polar_angles_deg"], where + ".polar_angles_deg") if "polar_angles_deg" in d else base.polar_angles,
        _number_list(d["distances"], where + ".distances") if "distances" in d else base.distances,
        _number_list(d["yaw_steps_deg"], where + ".yaw_steps_deg") if "yaw_steps_deg" in d else base.yaw_steps,
    )


def _criterion(d, where="criterion") -> SuccessCriterion:
    _check_keys(d, {"pos_tol", "yaw_tol_deg", "require_detection"}, where)
    req = d.get("require_detection", DOCKING.require_detection)
    if not isinstance(req, bool):
        raise ConfigError(f"{where}.require_detection: expected true/false")
    try:
        return SuccessCriterion(
            _num(d.get("pos_tol", DOCKING.pos_tol), where + ".pos_tol"),
            math.radians(_num(d.get("yaw_tol_deg", math.degrees(DOCKING.yaw_tol)), where + ".yaw_tol_deg")),
            req,
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_methods(methods) -> tuple[str, ...]:
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",") if m.strip()]
    if not isinstance(methods, (list, tuple)) or not methods:
        raise ConfigError("methods must be a non-empty list")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    if len(set(methods)) != len(methods):
        raise ConfigError("methods must not repeat")
    return tuple(methods)


def experiment_from_dict(d: dict) -> ExperimentConfig:
    _check_keys(d, _TOP_KEYS, "config")
    base = Scenario()
    seed = d.get("seed", base.seed)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MASK64:
        raise ConfigError("seed: expected an integer in [0, 2**64)")
    repeats = d.get("repeats", 1)
    if isinstance(repeats, bool) or not isinstance(repeats, int) or repeats < 1:
        raise ConfigError("repeats: expected an integer >= 1")
    scenario = Scenario(
        robot_pose=_pose(d.get("robot_pose", {}), base.robot_pose, "robot_pose"),
        trolley_pose=_pose(d.get("trolley_pose", {}), base.trolley_pose, "trolley_pose"),
        trolley=_trolley(d.get("trolley", {})),
        sensors=_sensors(d.get("sensors", {})),
        seed=seed,
    )
    return ExperimentConfig(
        scenario=scenario,
        grid=_grid(d.get("grid", {})),
        criterion=_criterion(d.get("criterion", {})),
        methods=parse_methods(d.get("methods", list(DEFAULT_METHODS))),
        repeats=repeats,
    )


def load_experiment(path) -> ExperimentConfig:
    """Read a JSON config file; any problem surfaces as :class:`ConfigError`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return experiment_from_dict(data)


def _pose_dict(p: Pose2D) -> dict:
    return {"x": p.x, "y": p.y, "theta_deg": math.degrees(p.theta)}


def _flat(obj, skip=()) -> dict:
    return {f.name: getattr(obj, f.name) for f in fields(obj) if f.name not in skip}


def experiment_to_dict(cfg: ExperimentConfig) -> dict:
    """Inverse of :func:`experiment_from_dict` (up to float round-off in angles)."""
    s = cfg.scenario
    t = s.trolley
    sensors = s.sensors
    return {
        "seed": s.seed,
        "robot_pose": _pose_dict(s.robot_pose),
        "trolley_pose": _pose_dict(s.trolley_pose),
        "trolley": {
            "keypoints": t.keypoints_local.tolist(),
            "tag_offsets": [[v.x, v.y] for v in t.tag_offsets],
            "reflector_offsets": [[v.x, v.y] for v in t.reflector_offsets],
            "offset_d": t.offset_d,
            "body_radius": t.body_radius,
        },
        "sensors": {
            "camera": _flat(sensors.camera),
            "uwb": {"anchors": [[a.x, a.y] for a in sensors.uwb.anchors], **_flat(sensors.uwb, ("anchors",))},
            "lidar": _flat(sensors.lidar),
            "rfid": {"antennas": [{"id": a.id, "position": [a.position.x, a.position.y], "radius": a.radius}
                                  for a in sensors.rfid.antennas]},
        },
        "grid": {
            "polar_angles_deg": list(cfg.grid.polar_angles),
            "distances": list(cfg.grid.distances),
            "yaw_steps_deg": list(cfg.grid.yaw_steps),
        },
        "criterion": {
            "pos_tol": cfg.criterion.pos_tol,
            "yaw_tol_deg": math.degrees(cfg.criterion.yaw_tol),
            "require_detection": cfg.criterion.require_detection,
        },
        "methods": list(cfg.methods),
        "repeats": cfg.repeats,
    }
