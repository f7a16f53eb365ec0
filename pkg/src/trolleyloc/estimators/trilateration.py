"""Planar position from ranges to known anchors.

A linearised least-squares fix (differences of squared range equations)
seeds a Gauss-Newton minimisation of sum_i (|p - a_i| - r_i)^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CollinearAnchors, NoConvergence, TooFewAnchors
from ..geometry import Vec2

MAX_ITERATIONS = 50
STEP_TOL = 1e-10  # metres


@dataclass(frozen=True)
class TrilaterationResult:
    position: Vec2
    residual: float  # RMS range residual, metres
    iterations: int


def _residuals(p, anchors, ranges):
    diff = p - anchors
    dist = np.hypot(diff[:, 0], diff[:, 1])
    safe = np.where(dist > 1e-15, dist, 1.0)
    J = np.where(dist[:, None] > 1e-15, diff / safe[:, None], 0.0)
    return dist - ranges, J


def objective_gradient(p, anchors, ranges) -> np.ndarray:
    """Gradient of 0.5 * sum (|p - a_i| - r_i)^2."""
    f, J = _residuals(np.asarray(p, float), np.asarray(anchors, float), np.asarray(ranges, float))
    return J.T @ f


def linear_seed(anchors: np.ndarray, ranges: np.ndarray) -> np.ndarray:
    A = 2.0 * (anchors[1:] - anchors[0])
    b = (np.sum(anchors[1:] ** 2, axis=1) - np.sum(anchors[0] ** 2)
         - ranges[1:] ** 2 + ranges[0] ** 2)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    return sol


def trilaterate(ranges, anchors) -> TrilaterationResult:
    r = np.asarray(ranges, dtype=float).reshape(-1)
    a = np.asarray([x.to_array() if isinstance(x, Vec2) else x for x in anchors], dtype=float).reshape(-1, 2)
    if len(a) != len(r):
        raise ValueError("one range per anchor is required")
    if len(a) < 3:
        raise TooFewAnchors(f"trilateration needs at least 3 anchors, got {len(a)}")
    sv = np.linalg.svd(a - a.mean(axis=0), compute_uv=False)
    if sv[1] <= 1e-9 * max(sv[0], 1e-300):
        raise CollinearAnchors("anchors are collinear")

    p = linear_seed(a, r)
    f, J = _residuals(p, a, r)
    cost = f @ f
    for it in range(1, MAX_ITERATIONS + 1):
        try:
            step = np.linalg.solve(J.T @ J, -(J.T @ f))
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(J, -f, rcond=None)
        if np.linalg.norm(step) <= STEP_TOL:
            p = p + step
            f, J = _residuals(p, a, r)
            return TrilaterationResult(Vec2.from_array(p), float(np.sqrt(f @ f / len(r))), it)
        # halve the step until the cost does not increase (beyond roundoff)
        for _ in range(40):
            f_new, J_new = _residuals(p + step, a, r)
            if f_new @ f_new <= cost * (1.0 + 1e-12) + 1e-300:
                break
            step = step / 2.0
        else:
            raise NoConvergence("no descent direction from the current estimate")
        p, f, J, cost = p + step, f_new, J_new, f_new @ f_new
    raise NoConvergence(f"Gauss-Newton did not converge in {MAX_ITERATIONS} iterations")
