"""Pinhole camera model (no distortion; intrinsics assumed pre-rectified)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import normalize


class BehindCamera(ValueError):
    """Point at or behind the image plane (z <= 0)."""


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point outside the image")

    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])

    def contains(self, px) -> bool:
        u, v = float(px[0]), float(px[1])
        return 0.0 <= u < self.width and 0.0 <= v < self.height


# Artifact defaults; resolutions match the target rig, focal lengths are ours.
HEAD_CAMERA_DEFAULT = CameraIntrinsics(fx=900.0, fy=900.0, cx=512.0, cy=384.0,
                                       width=1024, height=768)
SCENE_CAMERA_DEFAULT = CameraIntrinsics(fx=1400.0, fy=1400.0, cx=960.0, cy=540.0,
                                        width=1920, height=1080)


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray     # (3,) metres
    direction: np.ndarray  # (3,) unit
    frame: str

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=np.float64)
        d = np.asarray(self.direction, dtype=np.float64)
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", normalize(d))


def project(k: CameraIntrinsics, p) -> np.ndarray:
    """Project a camera-frame point to pixels. (N, 3) input gives (N, 2)."""
    p = np.asarray(p, dtype=np.float64)
    z = p[..., 2]
    if np.any(z <= 0.0):
        raise BehindCamera(f"z must be positive, got min z={np.min(z)}")
    u = k.fx * p[..., 0] / z + k.cx
    v = k.fy * p[..., 1] / z + k.cy
    return np.stack([u, v], axis=-1)


def backproject(k: CameraIntrinsics, px, frame: str = "camera") -> Ray:
    """Ray from the optical center through a pixel."""
    px = np.asarray(px, dtype=np.float64)
    d = np.array([(px[0] - k.cx) / k.fx, (px[1] - k.cy) / k.fy, 1.0])
    return Ray(np.zeros(3), d, frame)
