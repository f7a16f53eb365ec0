"""Deterministic two-cluster K-Means for reflector point clouds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateCluster

MAX_ITERATIONS = 100


@dataclass(frozen=True, eq=False)
class KMeansResult:
    centroids: np.ndarray  # (2, 2), sorted by x then y
    labels: np.ndarray  # (n,) in {0, 1}
    iterations: int

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=2)

    def sse(self, points: np.ndarray) -> float:
        return float(np.sum((np.asarray(points) - self.centroids[self.labels]) ** 2))


def farthest_pair(points: np.ndarray) -> tuple[int, int]:
    d2 = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1)
    # argmax takes the first maximum in row-major order, i.e. lowest (i, j)
    i, j = np.unravel_index(np.argmax(d2), d2.shape)
    return (int(i), int(j)) if i < j else (int(j), int(i))


def best_linear_split(points: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact minimum-SSE 2-partition among all partitions separable by a line.

    The optimal 2-means partition is always of this kind.  Projection orders
    only change at directions normal to some point difference, so one probe
    direction inside each arc between consecutive critical angles, combined
    with every prefix split of the sorted projections, covers all of them.
    """
    points = points - points.mean(axis=0)
    n = len(points)
    diff = points[None, :, :] - points[:, None, :]
    iu = np.triu_indices(n, 1)
    d = diff[iu]
    d = d[np.hypot(d[:, 0], d[:, 1]) > 0]
    crit = np.sort(np.mod(np.arctan2(d[:, 1], d[:, 0]) + np.pi / 2, np.pi))
    if len(crit) == 0:
        crit = np.array([0.0])
    nxt = np.append(crit[1:], crit[0] + np.pi)
    probes = (crit + nxt) / 2.0
    dirs = np.column_stack((np.cos(probes), np.sin(probes)))
    order = np.argsort(points @ dirs.T, axis=0, kind="stable").T  # (n_dirs, n)
    sorted_pts = points[order]  # (n_dirs, n, 2)
    csum = np.cumsum(sorted_pts, axis=1)
    csq = np.cumsum(np.sum(sorted_pts**2, axis=2), axis=1)
    k = np.arange(1, n)
    left = csq[:, :-1] - np.sum(csum[:, :-1] ** 2, axis=2) / k
    rs = csum[:, -1:, :] - csum[:, :-1, :]
    right = (csq[:, -1:] - csq[:, :-1]) - np.sum(rs**2, axis=2) / (n - k)
    total = left + right
    di, split = np.unravel_index(np.argmin(total), total.shape)
    labels = np.zeros(n, dtype=int)
    labels[order[di, split + 1:]] = 1
    return float(total[di, split]), labels


def kmeans2(points) -> KMeansResult:
    """Lloyd iterations with k=2 seeded from the farthest pair of points.

    The converged partition is checked against the exact best linear split; if
    Lloyd stalled in a worse local minimum it is re-seeded from that split
    (a fixed point, so it terminates immediately).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 2 or np.all(pts == pts[0]):
        raise DegenerateCluster("need at least two distinct points")

    i, j = farthest_pair(pts)
    centroids, labels, iterations = _lloyd(pts, pts[[i, j]].copy())
    sse = float(np.sum((pts - centroids[labels]) ** 2))
    best_sse, best_labels = best_linear_split(pts)
    if best_sse < sse - 1e-12 * max(1.0, sse):
        seed = np.array([pts[best_labels == k].mean(axis=0) for k in (0, 1)])
        centroids, labels, extra = _lloyd(pts, seed)
        iterations += extra

    order = np.lexsort((centroids[:, 1], centroids[:, 0]))
    if order[0] == 1:
        centroids = centroids[::-1].copy()
        labels = 1 - labels
    return KMeansResult(centroids, labels, iterations)


def _lloyd(pts: np.ndarray, centroids: np.ndarray):
    labels = None
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        d0 = np.sum((pts - centroids[0]) ** 2, axis=1)
        d1 = np.sum((pts - centroids[1]) ** 2, axis=1)
        new_labels = (d1 < d0).astype(int)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for k in (0, 1):
            members = pts[labels == k]
            if len(members):
                centroids[k] = members.mean(axis=0)
    return centroids, labels, iterations
