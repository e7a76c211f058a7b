"""Pose from 2D-3D correspondences: direct least-squares + RANSAC.

Two closed-form initializations cover the geometry we see:
  * DLT on the 3x4 projection matrix for >= 6 points with real depth relief
    (the head model), followed by projection onto SO(3);
  * homography decomposition for coplanar points (the fiducial board), which
    also serves as an approximate start for small non-planar subsets.
Either start is polished by a Levenberg-Marquardt pass on pixel reprojection
error (capped at 50 iterations, step tolerance 1e-10).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .camera import CameraIntrinsics
from .geometry import RigidTransform, Rotation
from .headmodel import LandmarkSet

LM_MAX_ITER = 50
LM_STEP_TOL = 1e-10
PLANARITY_RATIO = 1e-6


class Degenerate(ValueError):
    """Too few or ill-conditioned correspondences."""


class NoConvergence(RuntimeError):
    """Refinement failed to produce a finite pose."""


class ConsensusFailure(RuntimeError):
    """RANSAC ended below the required inlier count."""


@dataclass(frozen=True)
class Correspondence:
    object_point: np.ndarray  # (3,) metres, object frame
    image_point: np.ndarray   # (2,) pixels


@dataclass(frozen=True)
class PoseEstimate:
    pose: RigidTransform
    inliers: np.ndarray  # sorted indices into the observation array
    mean_reprojection_error: float


@dataclass(frozen=True)
class RansacParams:
    iterations: int = 100
    sample_size: int = 6
    reproj_threshold_px: float = 3.0
    min_inliers: int = 34


def _rodrigues(w: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(w)
    K = np.array([[0.0, -w[2], w[1]],
                  [w[2], 0.0, -w[0]],
                  [-w[1], w[0], 0.0]])
    if theta < 1e-12:
        return np.eye(3) + K + 0.5 * (K @ K)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * K + b * (K @ K)


def _project_px(R, t, obj, k: CameraIntrinsics):
    cam = obj @ R.T + t
    z = cam[:, 2]
    u = k.fx * cam[:, 0] / z + k.cx
    v = k.fy * cam[:, 1] / z + k.cy
    return np.column_stack([u, v]), z


def _reproj_errors(R, t, obj, px, k: CameraIntrinsics) -> np.ndarray:
    proj, z = _project_px(R, t, obj, k)
    err = np.linalg.norm(proj - px, axis=1)
    err[z <= 0.0] = np.inf
    return err


def _bearings(px: np.ndarray, k: CameraIntrinsics) -> np.ndarray:
    return np.column_stack([(px[:, 0] - k.cx) / k.fx,
                            (px[:, 1] - k.cy) / k.fy,
                            np.ones(len(px))])


def _dlt(obj: np.ndarray, bearings: np.ndarray):
    """Projection-matrix DLT; needs >= 6 points with depth relief."""
    n = len(obj)
    xh = np.hstack([obj, np.ones((n, 1))])
    zeros = np.zeros((n, 4))
    u, v = bearings[:, 0], bearings[:, 1]
    rows_u = np.hstack([xh, zeros, -u[:, None] * xh])
    rows_v = np.hstack([zeros, xh, -v[:, None] * xh])
    a = np.vstack([rows_u, rows_v])
    _, _, vt = np.linalg.svd(a)
    p = vt[-1].reshape(3, 4)
    if np.linalg.det(p[:, :3]) < 0:
        p = -p
    m = p[:, :3]
    um, sm, vmt = np.linalg.svd(m)
    r = um @ vmt
    if np.linalg.det(r) < 0:
        r = um @ np.diag([1.0, 1.0, -1.0]) @ vmt
    s = np.trace(r.T @ m) / 3.0
    if abs(s) < 1e-12:
        raise Degenerate("projection matrix has near-zero scale")
    return r, p[:, 3] / s


def _plane_basis(obj: np.ndarray):
    center = obj.mean(axis=0)
    centered = obj - center
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    basis = vt.T  # columns e1, e2, e3
    if np.linalg.det(basis) < 0:
        basis[:, 2] *= -1.0
    return center, basis, svals


def _homography(obj: np.ndarray, bearings: np.ndarray):
    """Plane-induced homography decomposition; obj must be (near) coplanar."""
    center, basis, _ = _plane_basis(obj)
    w = (obj - center) @ basis[:, :2]  # in-plane 2D coordinates
    n = len(obj)
    wh = np.hstack([w, np.ones((n, 1))])
    zeros = np.zeros((n, 3))
    u, v = bearings[:, 0], bearings[:, 1]
    a = np.vstack([np.hstack([wh, zeros, -u[:, None] * wh]),
                   np.hstack([zeros, wh, -v[:, None] * wh])])
    _, svals, vt = np.linalg.svd(a)
    h = vt[-1].reshape(3, 3)
    n1, n2 = np.linalg.norm(h[:, 0]), np.linalg.norm(h[:, 1])
    if n1 < 1e-12 or n2 < 1e-12:
        raise Degenerate("homography collapse")
    scale = 2.0 / (n1 + n2)
    r1, r2 = scale * h[:, 0], scale * h[:, 1]
    r3 = np.cross(r1, r2)
    rm = np.column_stack([r1, r2, r3])
    ur, _, vrt = np.linalg.svd(rm)
    r_plane = ur @ np.diag([1.0, 1.0, np.linalg.det(ur @ vrt)]) @ vrt
    t_plane = scale * h[:, 2]
    r = r_plane @ basis.T
    t = t_plane - r @ center
    # DLT sign is arbitrary: pick the solution that puts the points in front
    if np.mean(obj @ r.T + t, axis=0)[2] < 0:
        r3 = np.cross(-r1, -r2)
        rm = np.column_stack([-r1, -r2, r3])
        ur, _, vrt = np.linalg.svd(rm)
        r_plane = ur @ np.diag([1.0, 1.0, np.linalg.det(ur @ vrt)]) @ vrt
        r = r_plane @ basis.T
        t = -t_plane - r @ center
    return r, t


def _refine_lm(r, t, obj, px, k: CameraIntrinsics):
    """Damped Gauss-Newton on pixel residuals, left-multiplied rotation update."""
    r = r.copy()
    t = t.copy()
    err = _reproj_errors(r, t, obj, px, k)
    cost = float(np.sum(err * err)) if np.all(np.isfinite(err)) else np.inf
    lam = 1e-3
    for _ in range(LM_MAX_ITER):
        cam = obj @ r.T + t
        z = cam[:, 2]
        if np.any(z <= 1e-9):
            break
        proj = np.column_stack([k.fx * cam[:, 0] / z + k.cx,
                                k.fy * cam[:, 1] / z + k.cy])
        inv_z = 1.0 / z
        # d(pixel)/d(camera point)
        du = np.column_stack([k.fx * inv_z, np.zeros_like(z), -k.fx * cam[:, 0] * inv_z ** 2])
        dv = np.column_stack([np.zeros_like(z), k.fy * inv_z, -k.fy * cam[:, 1] * inv_z ** 2])
        # d(camera point)/d(omega) = -[R p]x, d/dt = I
        rp = cam - t
        zeros = np.zeros(len(obj))
        skew = np.stack([
            np.column_stack([zeros, rp[:, 2], -rp[:, 1]]),
            np.column_stack([-rp[:, 2], zeros, rp[:, 0]]),
            np.column_stack([rp[:, 1], -rp[:, 0], zeros]),
        ], axis=1)
        jac = np.empty((2 * len(obj), 6))
        jac[0::2, :3] = np.einsum("ij,ijk->ik", du, skew)
        jac[1::2, :3] = np.einsum("ij,ijk->ik", dv, skew)
        jac[0::2, 3:] = du
        jac[1::2, 3:] = dv
        res_i = (proj - px).reshape(-1)  # interleaved u0, v0, u1, v1, ...
        jtj = jac.T @ jac
        jtr = jac.T @ res_i
        stepped = False
        for _ in range(8):
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(np.diag(jtj) + 1e-12), -jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            r_new = _rodrigues(delta[:3]) @ r
            t_new = t + delta[3:]
            err_new = _reproj_errors(r_new, t_new, obj, px, k)
            cost_new = float(np.sum(err_new * err_new)) if np.all(np.isfinite(err_new)) else np.inf
            if cost_new < cost:
                r, t, cost = r_new, t_new, cost_new
                lam = max(lam / 3.0, 1e-12)
                stepped = True
                break
            lam *= 10.0
        if not stepped or np.linalg.norm(delta) < LM_STEP_TOL:
            break
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
        raise NoConvergence("refinement produced non-finite pose")
    return r, t


def _initial_pose(obj: np.ndarray, px: np.ndarray, k: CameraIntrinsics):
    n = len(obj)
    if n < 4:
        raise Degenerate(f"need at least 4 correspondences, got {n}")
    _, _, svals = _plane_basis(obj)
    if svals[1] < PLANARITY_RATIO * max(svals[0], 1e-300):
        raise Degenerate("correspondences are collinear")
    bearings = _bearings(px, k)
    planar = svals[2] < 1e-4 * svals[0]
    if planar or n < 6:
        # best-fit-plane homography; exact for planar sets, a usable start otherwise
        return _homography(obj, bearings)
    return _dlt(obj, bearings)


def _solve_subset(obj, px, k) -> tuple[np.ndarray, np.ndarray]:
    r0, t0 = _initial_pose(obj, px, k)
    return _refine_lm(r0, t0, obj, px, k)


def _pose_estimate(r, t, inliers, err, parent, child) -> PoseEstimate:
    pose = RigidTransform(Rotation.from_matrix(r), t, parent=parent, child=child)
    return PoseEstimate(pose=pose, inliers=np.sort(np.asarray(inliers, dtype=np.int64)),
                        mean_reprojection_error=float(err))


def _landmark_array(obs) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(obs, LandmarkSet):
        return obs.points, obs.in_frame
    px = np.asarray(obs, dtype=np.float64)
    return px, np.ones(len(px), dtype=bool)


def solve_pnp_dls(model_points, obs, k: CameraIntrinsics, subset=None,
                  parent: str = "head_camera", child: str = "head") -> PoseEstimate:
    """Least-squares pose of the model given observed pixels over `subset`."""
    obj_all = np.asarray(model_points, dtype=np.float64)
    px_all, _ = _landmark_array(obs)
    if subset is None:
        subset = np.arange(len(obj_all))
    subset = np.asarray(subset, dtype=np.int64)
    obj, px = obj_all[subset], px_all[subset]
    r, t = _solve_subset(obj, px, k)
    err = _reproj_errors(r, t, obj, px, k)
    return _pose_estimate(r, t, subset, np.mean(err), parent, child)


def solve_pnp_ransac(model_points, obs, k: CameraIntrinsics,
                     params: RansacParams = RansacParams(), seed: int = 0,
                     parent: str = "head_camera", child: str = "head") -> PoseEstimate:
    """Consensus pose over the in-frame landmarks; deterministic per seed.

    All minimal-sample solves run as one batched DLT (stacked SVDs), then the
    best consensus set is polished with the damped Gauss-Newton refiner and
    the inlier set recomputed once against the refined pose.
    """
    obj_all = np.asarray(model_points, dtype=np.float64)
    px_all, in_frame = _landmark_array(obs)
    active = np.flatnonzero(in_frame)
    if len(active) < max(params.sample_size, 4):
        raise Degenerate(f"only {len(active)} usable landmarks")
    obj, px = obj_all[active], px_all[active]
    n = len(active)
    rng = np.random.default_rng(seed)
    samples = np.stack([rng.choice(n, size=params.sample_size, replace=False)
                        for _ in range(params.iterations)])

    bearings = _bearings(px, k)
    xh = np.hstack([obj, np.ones((n, 1))])
    sample_xh = xh[samples]                      # (it, m, 4)
    su = bearings[samples][:, :, 0]
    sv = bearings[samples][:, :, 1]
    m = params.sample_size
    zeros = np.zeros_like(sample_xh)
    a = np.concatenate([
        np.concatenate([sample_xh, zeros, -su[:, :, None] * sample_xh], axis=2),
        np.concatenate([zeros, sample_xh, -sv[:, :, None] * sample_xh], axis=2),
    ], axis=1)                                   # (it, 2m, 12)
    try:
        _, _, vt = np.linalg.svd(a)
        p = vt[:, -1, :].reshape(-1, 3, 4)
        det = np.linalg.det(p[:, :, :3])
        p = np.where(det[:, None, None] < 0, -p, p)
        mm = p[:, :, :3]
        um, sm, vmt = np.linalg.svd(mm)
        det_uv = np.linalg.det(um @ vmt)
        fix = np.tile(np.eye(3), (len(um), 1, 1))
        fix[:, 2, 2] = det_uv
        rs = um @ fix @ vmt
        scale = np.einsum("bij,bij->b", rs, mm) / 3.0
        scale = np.where(np.abs(scale) < 1e-12, np.nan, scale)
        ts = p[:, :, 3] / scale[:, None]
    except np.linalg.LinAlgError:
        # very rare batched-SVD failure: score iterations one by one instead
        rs = np.full((params.iterations, 3, 3), np.nan)
        ts = np.full((params.iterations, 3), np.nan)
        for i, idx in enumerate(samples):
            try:
                rs[i], ts[i] = _dlt(obj[idx], bearings[idx])
            except (Degenerate, np.linalg.LinAlgError):
                continue

    cam = np.einsum("bij,nj->bni", rs, obj) + ts[:, None, :]
    z = cam[:, :, 2]
    with np.errstate(invalid="ignore", divide="ignore"):
        pu = k.fx * cam[:, :, 0] / z + k.cx
        pv = k.fy * cam[:, :, 1] / z + k.cy
        err = np.hypot(pu - px[:, 0], pv - px[:, 1])
    err = np.where(np.isfinite(err) & (z > 0), err, np.inf)
    inlier_mask = err < params.reproj_threshold_px
    counts = inlier_mask.sum(axis=1)
    best = int(np.argmax(counts))  # ties resolve to the earliest iteration
    if counts[best] < max(params.sample_size, 4):
        raise ConsensusFailure(f"best consensus has {counts[best]} inliers")

    r_best, t_best = rs[best], ts[best]
    inl = np.flatnonzero(inlier_mask[best])
    for _ in range(2):  # refine, re-gate against the refined pose, refine again
        r_best, t_best = _refine_lm(r_best, t_best, obj[inl], px[inl], k)
        err_all = _reproj_errors(r_best, t_best, obj, px, k)
        new_inl = np.flatnonzero(err_all < params.reproj_threshold_px)
        if len(new_inl) < max(params.sample_size, 4):
            break
        if np.array_equal(new_inl, inl):
            break
        inl = new_inl
    err_all = _reproj_errors(r_best, t_best, obj, px, k)
    inl = np.flatnonzero(err_all < params.reproj_threshold_px)
    if len(inl) < params.min_inliers:
        raise ConsensusFailure(f"{len(inl)} inliers < min_inliers={params.min_inliers}")
    return _pose_estimate(r_best, t_best, active[inl], np.mean(err_all[inl]), parent, child)


def estimate_board_pose(correspondences, k: CameraIntrinsics,
                        parent: str = "scene_camera", child: str = "board") -> PoseEstimate:
    """Board pose from corner correspondences; coplanar points are the norm."""
    if len(correspondences) < 4:
        raise Degenerate(f"need >= 4 correspondences, got {len(correspondences)}")
    obj = np.array([np.asarray(c.object_point, dtype=np.float64) for c in correspondences])
    px = np.array([np.asarray(c.image_point, dtype=np.float64) for c in correspondences])
    r, t = _solve_subset(obj, px, k)
    err = _reproj_errors(r, t, obj, px, k)
    return _pose_estimate(r, t, np.arange(len(obj)), np.mean(err), parent, child)
