"""EPnP: pose from n >= 4 point correspondences via virtual control points.

Each world point is written as a barycentric combination of 4 control points
(3 when the points are coplanar).  The camera-frame control points lie in the
null space of a 2n x 3m linear system; the null-space coefficients ("betas")
are recovered from the preserved inter-control-point distances, first by
linearised approximations using 1, 2 and 3 kernel vectors (plus a
relinearisation for the full 4-vector kernel) and then by a short Gauss-Newton
refinement.  The candidate with the lowest reprojection error wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..config import CameraIntrinsics
from ..errors import BehindCamera, DegenerateConfiguration, TooFewPoints
from ..geometry import Pose6D

COLLINEAR_TOL = 1e-10
PLANAR_TOL = 1e-8
GN_ITERATIONS = 10


@dataclass(frozen=True, eq=False)
class PnPSolution:
    pose: Pose6D  # trolley/world frame -> camera frame
    reprojection_error: float  # mean pixel distance
    n_points: int
    planar: bool


def project(points: np.ndarray, pose: Pose6D, K: CameraIntrinsics) -> np.ndarray:
    pc = pose.apply(points)
    return np.column_stack((K.fx * pc[:, 0] / pc[:, 2] + K.cx, K.fy * pc[:, 1] / pc[:, 2] + K.cy))


def reprojection_error(points: np.ndarray, pixels: np.ndarray, pose: Pose6D, K: CameraIntrinsics) -> float:
    d = project(points, pose, K) - pixels
    return float(np.mean(np.hypot(d[:, 0], d[:, 1])))


def _control_points(X: np.ndarray) -> tuple[np.ndarray, bool]:
    centroid = X.mean(axis=0)
    Xc = X - centroid
    evals, evecs = np.linalg.eigh(Xc.T @ Xc / len(X))
    evals = np.clip(evals, 0.0, None)
    if evals[2] <= 0 or evals[1] <= COLLINEAR_TOL * evals[2]:
        raise DegenerateConfiguration("world points are collinear or coincident")
    planar = evals[0] <= PLANAR_TOL * evals[2]
    dims = [2, 1] if planar else [2, 1, 0]
    ctrl = [centroid] + [centroid + np.sqrt(evals[i]) * evecs[:, i] for i in dims]
    return np.array(ctrl), planar


def _barycentric(X: np.ndarray, ctrl: np.ndarray) -> np.ndarray:
    basis = (ctrl[1:] - ctrl[0]).T  # 3 x (m-1)
    coeffs, *_ = np.linalg.lstsq(basis, (X - ctrl[0]).T, rcond=None)
    coeffs = coeffs.T
    return np.column_stack((1.0 - coeffs.sum(axis=1), coeffs))


def _build_m(alphas: np.ndarray, xn: np.ndarray) -> np.ndarray:
    n, m = alphas.shape
    M = np.zeros((2 * n, 3 * m))
    for j in range(m):
        a = alphas[:, j]
        M[0::2, 3 * j] = a
        M[0::2, 3 * j + 2] = -a * xn[:, 0]
        M[1::2, 3 * j + 1] = a
        M[1::2, 3 * j + 2] = -a * xn[:, 1]
    return M


def _kabsch(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """R, t minimising sum |R src_i + t - dst_i|^2."""
    sc, dc = src.mean(axis=0), dst.mean(axis=0)
    H = (src - sc).T @ (dst - dc)
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T)) or 1.0
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    return R, dc - R @ sc


class _BetaProblem:
    """Distance constraints |sum_a beta_a (v_a[i] - v_a[j])|^2 = rho_ij."""

    def __init__(self, kernel: np.ndarray, ctrl: np.ndarray):
        m = len(ctrl)
        self.pairs = list(combinations(range(m), 2))
        k = kernel.reshape(len(kernel), m, 3)
        # diffs[p, a] = v_a[i] - v_a[j] for pair p
        self.diffs = np.array([[k[a, i] - k[a, j] for a in range(len(kernel))] for i, j in self.pairs])
        self.rho = np.array([np.sum((ctrl[i] - ctrl[j]) ** 2) for i, j in self.pairs])

    def approximate(self, n_kernel: int) -> np.ndarray | None:
        prods = [(a, b) for a in range(n_kernel) for b in range(a, n_kernel)]
        if len(prods) > len(self.pairs):
            return None
        B, *_ = np.linalg.lstsq(self._product_matrix(prods), self.rho, rcond=None)
        prod = dict(zip(prods, B))
        betas = np.zeros(self.diffs.shape[1])
        b00 = prod[(0, 0)]
        sign = 1.0 if b00 >= 0 else -1.0
        betas[0] = np.sqrt(abs(b00))
        for a in range(1, n_kernel):
            betas[a] = np.sqrt(abs(prod[(a, a)])) * (1.0 if sign * prod[(0, a)] >= 0 else -1.0)
        return betas

    def _product_matrix(self, prods) -> np.ndarray:
        L = np.empty((len(self.pairs), len(prods)))
        for col, (a, b) in enumerate(prods):
            dot = np.einsum("pi,pi->p", self.diffs[:, a], self.diffs[:, b])
            L[:, col] = dot if a == b else 2.0 * dot
        return L

    def relinearize(self) -> np.ndarray | None:
        """Betas for the full 4-vector kernel (minimal non-planar case).

        The 6 distance equations leave the 10 products B_ab = beta_a beta_b
        underdetermined, B = B_p + sum_k lambda_k n_k.  Requiring the
        products to be mutually consistent (B_ab B_cd = B_ac B_bd) gives
        equations that are linear in lambda_k and lambda_k lambda_l, which
        are solved jointly by least squares.
        """
        n_kernel = self.diffs.shape[1]
        if n_kernel != 4:
            return None
        prods = [(a, b) for a in range(4) for b in range(a, 4)]
        col = {p: i for i, p in enumerate(prods)}
        idx = lambda a, b: col[(a, b) if a <= b else (b, a)]  # noqa: E731
        L = self._product_matrix(prods)
        Bp, *_ = np.linalg.lstsq(L, self.rho, rcond=None)
        _, s, Vt = np.linalg.svd(L)
        null = Vt[len(s):]  # (10 - rank, 10)
        nk = len(null)
        if nk == 0:
            return self._betas_from_products(Bp, prods)
        quad = [(k, l) for k in range(nk) for l in range(k, nk)]
        rows, rhs = [], []
        for a, b, c, d in ((a, b, c, d) for a in range(4) for b in range(a, 4)
                           for c in range(4) for d in range(c, 4)):
            i1, i2, i3, i4 = idx(a, b), idx(c, d), idx(a, c), idx(b, d)
            if {i1, i2} == {i3, i4}:
                continue
            lin = Bp[i1] * null[:, i2] + Bp[i2] * null[:, i1] - Bp[i3] * null[:, i4] - Bp[i4] * null[:, i3]
            q = np.outer(null[:, i1], null[:, i2]) - np.outer(null[:, i3], null[:, i4])
            q = q + q.T - np.diag(np.diag(q))  # fold (k, l) and (l, k) together
            rows.append(np.concatenate(([q[k, l] for k, l in quad], lin)))
            rhs.append(-(Bp[i1] * Bp[i2] - Bp[i3] * Bp[i4]))
        z, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
        lam = z[len(quad):]
        return self._betas_from_products(Bp + lam @ null, prods)

    @staticmethod
    def _betas_from_products(B: np.ndarray, prods) -> np.ndarray:
        prod = dict(zip(prods, B))
        n_kernel = max(a for a, _ in prods) + 1
        betas = np.zeros(n_kernel)
        betas[0] = np.sqrt(abs(prod[(0, 0)]))
        if betas[0] == 0.0:
            return betas
        for a in range(1, n_kernel):
            betas[a] = prod[(0, a)] / betas[0]
        return betas

    def refine(self, betas: np.ndarray, iterations: int = GN_ITERATIONS) -> np.ndarray:
        betas = betas.copy()
        for _ in range(iterations):
            vec = np.einsum("a,pai->pi", betas, self.diffs)
            r = np.einsum("pi,pi->p", vec, vec) - self.rho
            J = 2.0 * np.einsum("pi,pai->pa", vec, self.diffs)
            try:
                step = np.linalg.solve(J.T @ J, -(J.T @ r))
            except np.linalg.LinAlgError:
                step, *_ = np.linalg.lstsq(J, -r, rcond=None)
            betas += step
            if np.linalg.norm(step) <= 1e-10 * (1.0 + np.linalg.norm(betas)):
                break
        return betas


def epnp(world_points, image_points, K: CameraIntrinsics) -> PnPSolution:
    X = np.asarray(world_points, dtype=float).reshape(-1, 3)
    uv = np.asarray(image_points, dtype=float).reshape(-1, 2)
    if len(X) != len(uv):
        raise ValueError("world and image point counts differ")
    if len(X) < 4:
        raise TooFewPoints(f"EPnP needs at least 4 correspondences, got {len(X)}")

    ctrl, planar = _control_points(X)
    m = len(ctrl)
    alphas = _barycentric(X, ctrl)
    xn = np.column_stack(((uv[:, 0] - K.cx) / K.fx, (uv[:, 1] - K.cy) / K.fy))
    M = _build_m(alphas, xn)
    _, _, Vt = np.linalg.svd(M, full_matrices=True)
    n_kernel = 4 if m == 4 else 3
    kernel = Vt[::-1][:n_kernel]  # smallest singular value first
    problem = _BetaProblem(kernel, ctrl)

    best = None
    for n in (1, 2, 3, 4):
        betas = problem.approximate(n) if n < 4 else problem.relinearize()
        if betas is None:
            continue
        betas = problem.refine(betas)
        ccs = (betas @ kernel).reshape(m, 3)
        pcs = alphas @ ccs
        if pcs[:, 2].mean() < 0:
            pcs = -pcs
        if np.all(pcs[:, 2] <= 0):
            continue
        R, t = _kabsch(X, pcs)
        try:
            pose = Pose6D(R, t)
        except ValueError:
            continue
        err = reprojection_error(X, uv, pose, K)
        if not np.isfinite(err):
            continue
        if best is None or err < best[1]:
            best = (pose, err)

    if best is None:
        raise BehindCamera("no candidate pose places the points in front of the camera")
    return PnPSolution(best[0], best[1], len(X), planar)
