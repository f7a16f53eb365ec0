"""Per-trial CSV and JSON summary output.

Both files are byte-stable for identical inputs: rows follow the record
order produced by :func:`~trolleyloc.evaluation.run_grid`, floats are written
with ``repr`` (shortest round-trip form), JSON keys are emitted in a fixed
order, and files are written to a temporary name and renamed into place so a
failed run never leaves a partial file behind.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

from .errors import IoFailure
from .evaluation import GridResult, TrialRecord

SCHEMA_VERSION = 1
CSV_NAME = "trials.csv"
SUMMARY_NAME = "summary.json"

CSV_COLUMNS = (
    "scenario_index",
    "repeat",
    "angle_deg",
    "distance_m",
    "yaw_deg",
    "method",
    "detected",
    "est_x",
    "est_y",
    "est_theta_deg",
    "gt_x",
    "gt_y",
    "gt_theta_deg",
    "pos_error_m",
    "yaw_error_deg",
    "success",
    "failure",
)

# Qualitative comparison of the four methods, carried through verbatim as data.
SCORECARD = {
    "metrics": ["localization_accuracy", "mobile_power_supplies", "coverage_area_m2", "cost", "scalability"],
    "methods": {
        "rfid": {"localization_accuracy": "1-4m", "mobile_power_supplies": "No",
                 "coverage_area_m2": 222, "cost": "High", "scalability": "Low"},
        "keypoints": {"localization_accuracy": "1-10cm", "mobile_power_supplies": "No",
                      "coverage_area_m2": 48, "cost": "Middle", "scalability": "High"},
        "uwb": {"localization_accuracy": "1-10cm", "mobile_power_supplies": "Yes",
                "coverage_area_m2": 1600, "cost": "High", "scalability": "Low"},
        "reflectors": {"localization_accuracy": "1-10cm", "mobile_power_supplies": "No",
                       "coverage_area_m2": 118, "cost": "Low", "scalability": "Middle"},
    },
}


def _f(v: float) -> str:
    return "" if v is None or not math.isfinite(v) else repr(float(v))


def _row(rec: TrialRecord) -> list[str]:
    st = rec.estimate.state
    theta = "" if st is None or not rec.estimate.has_heading else _f(math.degrees(st.theta))
    return [
        str(rec.scenario_index),
        str(rec.repeat),
        _f(rec.angle_deg),
        _f(rec.distance),
        _f(rec.yaw_deg),
        rec.method,
        "1" if st is not None else "0",
        _f(st.x) if st is not None else "",
        _f(st.y) if st is not None else "",
        theta,
        _f(rec.truth.x),
        _f(rec.truth.y),
        _f(math.degrees(rec.truth.theta)),
        _f(rec.pos_error),
        _f(math.degrees(rec.yaw_error)) if math.isfinite(rec.yaw_error) else "",
        "1" if rec.success else "0",
        rec.estimate.failure or "",
    ]


def trials_csv(result: GridResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in result.records:
        w.writerow(_row(rec))
    return buf.getvalue()


def _finite_or_none(v: float):
    return v if math.isfinite(v) else None


def summary_dict(result: GridResult, extra: dict | None = None) -> dict:
    c = result.criterion
    success = []
    for m in result.methods:
        for (angle, dist), frac in sorted(result.success_map[m].items()):
            success.append({"method": m, "angle_deg": angle, "distance_m": dist, "success_rate": frac})
    stats = {}
    for m in result.methods:
        s = result.error_stats.get(m)
        stats[m] = None if s is None else {"mae": _finite_or_none(s.mae), "rmse": _finite_or_none(s.rmse), "n": s.n}
    out = {
        "schema_version": SCHEMA_VERSION,
        "methods": list(result.methods),
        "repeats": result.repeats,
        "n_trials": len(result.records),
        "criterion": {
            "pos_tol_m": c.pos_tol,
            "yaw_tol_deg": math.degrees(c.yaw_tol),
            "require_detection": c.require_detection,
        },
        "success_map": success,
        "error_stats": stats,
        "scorecard": SCORECARD,
    }
    if extra:
        out["run"] = extra
    return out


def summary_json(result: GridResult, extra: dict | None = None) -> str:
    return json.dumps(summary_dict(result, extra), indent=2, allow_nan=False) + "\n"


def atomic_write(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` via a sibling temp file and rename."""
    path = Path(path)
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
        tmp = None
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc.strerror or exc}") from exc
    finally:
        if tmp is not None:
            try:
                os.unlink(tmp)
            except OSError:
                pass


def emit_report(result: GridResult, out_dir, extra: dict | None = None) -> tuple[Path, Path]:
    """Write ``trials.csv`` and ``summary.json`` into ``out_dir``.

    Both documents are rendered in memory first, so nothing touches disk
    unless rendering succeeded.
    """
    out = Path(out_dir)
    csv_text = trials_csv(result)
    json_text = summary_json(result, extra)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    csv_path, json_path = out / CSV_NAME, out / SUMMARY_NAME
    atomic_write(csv_path, csv_text)
    atomic_write(json_path, json_text)
    return csv_path, json_path
