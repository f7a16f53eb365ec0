"""Accuracy metrics, success judgement and the polar-grid experiment driver."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGrid, EmptySamples
from .estimators.pipelines import (
    METHODS,
    EstimateResult,
    keypoints_pipeline,
    reflectors_pipeline,
    rfid_pipeline,
    uwb_pipeline,
)
from .geometry import Pose2D, normalize_angle
from .sensors import simulate_camera, simulate_lidar, simulate_rfid, simulate_uwb
from .world import Scenario, mix_seed


@dataclass(frozen=True)
class ErrorStats:
    mae: float
    rmse: float
    n: int


@dataclass(frozen=True)
class SuccessCriterion:
    pos_tol: float = 0.40
    yaw_tol: float = math.radians(60.0)
    require_detection: bool = True

    def __post_init__(self):
        if not (self.pos_tol > 0 and self.yaw_tol > 0):
            raise ValueError("tolerances must be positive")


# centimetre-level "microlocation"; used to show RFID can never qualify
MICROLOCATION = SuccessCriterion(pos_tol=0.10, yaw_tol=math.radians(10.0))
DOCKING = SuccessCriterion()


def _errors(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float).reshape(-1, 2, 2)
    if len(arr) == 0:
        raise EmptySamples("at least one (estimate, ground truth) pair is required")
    return arr[:, 0, :] - arr[:, 1, :]


def mae(samples) -> float:
    """Mean over samples of |dx| + |dy|; ``samples`` is n x (est xy, gt xy)."""
    e = _errors(samples)
    return float(np.mean(np.abs(e[:, 0]) + np.abs(e[:, 1])))


def rmse(samples) -> float:
    """sqrt of the mean over samples of dx^2 + dy^2."""
    e = _errors(samples)
    return float(np.sqrt(np.mean(e[:, 0] ** 2 + e[:, 1] ** 2)))


def error_stats(samples) -> ErrorStats:
    return ErrorStats(mae(samples), rmse(samples), len(_errors(samples)))


def position_error(est: EstimateResult, gt: Pose2D) -> float:
    if est.state is None:
        return math.nan
    return math.hypot(est.state.x - gt.x, est.state.y - gt.y)


def yaw_error(est: EstimateResult, gt: Pose2D) -> float:
    if est.state is None or not est.has_heading:
        return math.nan
    return abs(normalize_angle(est.state.theta - gt.theta))


def judge(est: EstimateResult, gt: Pose2D, c: SuccessCriterion = DOCKING) -> bool:
    if est.state is None:
        # a missing estimate only counts as success when detection is optional
        return not c.require_detection
    if position_error(est, gt) > c.pos_tol:
        return False
    if est.has_heading and yaw_error(est, gt) > c.yaw_tol:
        return False
    return True


def estimate(s: Scenario, method: str) -> EstimateResult:
    """Simulate the sensor behind ``method`` and run its pipeline."""
    cfg = s.sensors
    if method == "keypoints":
        cam = cfg.camera
        return keypoints_pipeline(simulate_camera(s), s.robot_pose, s.trolley, cam.intrinsics, cam.mount)
    if method == "uwb":
        return uwb_pipeline(simulate_uwb(s), cfg.uwb.anchors, s.trolley)
    if method == "reflectors":
        return reflectors_pipeline(simulate_lidar(s), s.robot_pose, cfg.lidar.intensity_threshold, s.trolley)
    if method == "rfid":
        return rfid_pipeline(simulate_rfid(s), cfg.rfid.antennas)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def trial_seed(seed: int, repeat: int) -> int:
    return seed if repeat == 0 else mix_seed(seed, repeat)


@dataclass(frozen=True)
class TrialRecord:
    scenario_index: int
    repeat: int
    angle_deg: float
    distance: float
    yaw_deg: float
    method: str
    estimate: EstimateResult
    truth: Pose2D
    pos_error: float
    yaw_error: float
    success: bool


@dataclass
class GridResult:
    methods: tuple[str, ...]
    criterion: SuccessCriterion
    repeats: int
    records: list[TrialRecord]
    # method -> (angle_deg, distance) -> success fraction
    success_map: dict[str, dict[tuple[float, float], float]] = field(default_factory=dict)
    error_stats: dict[str, ErrorStats | None] = field(default_factory=dict)


def _cell(s: Scenario, index: int) -> tuple[float, float, float]:
    gp = s.grid_point
    if gp is not None:
        return gp.angle_deg, gp.distance, gp.yaw_deg
    r, t = s.robot_pose, s.trolley_pose
    angle = math.degrees(normalize_angle(math.atan2(t.y - r.y, t.x - r.x) - r.theta))
    return angle, math.hypot(t.x - r.x, t.y - r.y), math.degrees(normalize_angle(t.theta - r.theta))


def _run_chunk(args) -> list[TrialRecord]:
    items, methods, criterion = args
    out = []
    for index, repeat, s in items:
        angle, dist, yaw = _cell(s, index)
        trial = s.with_seed(trial_seed(s.seed, repeat))
        for m in methods:
            est = estimate(trial, m)
            gt = s.trolley_pose
            out.append(TrialRecord(index, repeat, angle, dist, yaw, m, est, gt,
                                   position_error(est, gt), yaw_error(est, gt),
                                   judge(est, gt, criterion)))
    return out


def run_grid(
    scenarios: list[Scenario],
    methods=("keypoints", "uwb", "reflectors"),
    criterion: SuccessCriterion = DOCKING,
    repeats: int = 1,
    workers: int = 1,
) -> GridResult:
    """Simulate, estimate and judge every scenario x method x repeat.

    Error statistics follow the common-point rule: a trial contributes only if
    every compared (non-RFID) method produced a state.  Output depends only on
    the scenarios, never on ``workers``.
    """
    methods = tuple(methods)
    if not scenarios:
        raise EmptyGrid("no scenarios to run")
    if not methods:
        raise EmptyGrid("no methods selected")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")

    items = [(i, r, s) for i, s in enumerate(scenarios) for r in range(repeats)]
    if workers > 1 and len(items) > 1:
        n_chunks = workers * 4
        chunks = [items[k::n_chunks] for k in range(n_chunks)]
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_run_chunk, [(c, methods, criterion) for c in chunks if c])
        records = [rec for part in parts for rec in part]
        order = {m: k for k, m in enumerate(methods)}
        records.sort(key=lambda rec: (rec.scenario_index, rec.repeat, order[rec.method]))
    else:
        records = _run_chunk((items, methods, criterion))

    result = GridResult(methods, criterion, repeats, records)
    result.success_map = _success_map(records, methods)
    result.error_stats = _common_point_stats(records, methods)
    return result


def _success_map(records, methods):
    tally: dict[str, dict[tuple[float, float], list[int]]] = {m: {} for m in methods}
    for rec in records:
        cell = tally[rec.method].setdefault((rec.angle_deg, rec.distance), [0, 0])
        cell[0] += rec.success
        cell[1] += 1
    return {m: {k: v[0] / v[1] for k, v in cells.items()} for m, cells in tally.items()}


def _common_point_stats(records, methods):
    compared = [m for m in methods if m != "rfid"]
    grouped: dict[tuple[int, int], dict[str, TrialRecord]] = {}
    for rec in records:
        grouped.setdefault((rec.scenario_index, rec.repeat), {})[rec.method] = rec
    samples: dict[str, list] = {m: [] for m in compared}
    for trial in grouped.values():
        if all(trial[m].estimate.detected for m in compared):
            for m in compared:
                st, gt = trial[m].estimate.state, trial[m].truth
                samples[m].append(((st.x, st.y), (gt.x, gt.y)))
    stats: dict[str, ErrorStats | None] = {m: None for m in methods}
    for m in compared:
        if samples[m]:
            stats[m] = error_stats(samples[m])
    return stats
