"""Rigid-body math shared by the whole engine.

Conventions (fixed here, documented once):
  * right-handed frames, camera +Z forward, +X right, +Y down
  * quaternions stored (w, x, y, z), unit norm, canonicalized to w >= 0
  * internal angle math in radians, every public angle in degrees
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-9


class FrameMismatch(ValueError):
    """Composed transforms whose frames do not chain."""


def vec3(x, y, z) -> np.ndarray:
    return np.array([x, y, z], dtype=np.float64)


def normalize(v) -> np.ndarray:
    """Scale v to unit length. Raises on zero vectors."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n == 0.0 or not np.isfinite(n):
        raise ValueError(f"cannot normalize vector {v!r}")
    return v / n


def is_unit(v, tol=UNIT_TOL) -> bool:
    return abs(np.linalg.norm(v) - 1.0) <= tol


def angle_between(u, v) -> float:
    """Angle between two unit vectors, in degrees, in [0, 180].

    The dot product is clamped to [-1, 1] so roundoff near parallel
    vectors cannot push acos out of domain.
    """
    d = float(np.dot(u, v))
    return float(np.degrees(np.arccos(min(1.0, max(-1.0, d)))))


@dataclass(frozen=True)
class Rotation:
    """Unit quaternion, canonicalized so w >= 0 (double cover removed)."""

    q: np.ndarray  # (4,) w, x, y, z

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.float64)
        n = np.linalg.norm(q)
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"quaternion norm {n} too far from 1")
        q = q / n
        if q[0] < 0.0:
            q = -q
        object.__setattr__(self, "q", q)

    @staticmethod
    def identity() -> "Rotation":
        return Rotation(np.array([1.0, 0.0, 0.0, 0.0]))

    @staticmethod
    def from_axis_angle(axis, angle_rad: float) -> "Rotation":
        axis = normalize(axis)
        half = 0.5 * angle_rad
        return Rotation(np.concatenate(([np.cos(half)], np.sin(half) * axis)))

    @staticmethod
    def from_matrix(m: np.ndarray) -> "Rotation":
        """Shepperd's method: pick the largest diagonal pivot for stability."""
        m = np.asarray(m, dtype=np.float64)
        t = np.trace(m)
        if t > 0.0:
            s = np.sqrt(t + 1.0) * 2.0
            q = np.array([0.25 * s,
                          (m[2, 1] - m[1, 2]) / s,
                          (m[0, 2] - m[2, 0]) / s,
                          (m[1, 0] - m[0, 1]) / s])
        elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
            s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
            q = np.array([(m[2, 1] - m[1, 2]) / s,
                          0.25 * s,
                          (m[0, 1] + m[1, 0]) / s,
                          (m[0, 2] + m[2, 0]) / s])
        elif m[1, 1] >= m[2, 2]:
            s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
            q = np.array([(m[0, 2] - m[2, 0]) / s,
                          (m[0, 1] + m[1, 0]) / s,
                          0.25 * s,
                          (m[1, 2] + m[2, 1]) / s])
        else:
            s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
            q = np.array([(m[1, 0] - m[0, 1]) / s,
                          (m[0, 2] + m[2, 0]) / s,
                          (m[1, 2] + m[2, 1]) / s,
                          0.25 * s])
        return Rotation(q)

    def as_matrix(self) -> np.ndarray:
        w, x, y, z = self.q
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    def apply(self, v) -> np.ndarray:
        """Rotate a 3-vector (or (N, 3) stack of vectors)."""
        v = np.asarray(v, dtype=np.float64)
        return v @ self.as_matrix().T

    def __mul__(self, other: "Rotation") -> "Rotation":
        w1, x1, y1, z1 = self.q
        w2, x2, y2, z2 = other.q
        return Rotation(np.array([
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]))

    def inverse(self) -> "Rotation":
        w, x, y, z = self.q
        return Rotation(np.array([w, -x, -y, -z]))

    def angle_to(self, other: "Rotation") -> float:
        """Geodesic distance to another rotation, degrees."""
        d = abs(float(np.dot(self.q, other.q)))
        return float(np.degrees(2.0 * np.arccos(min(1.0, d))))


def slerp(a: Rotation, b: Rotation, alpha: float) -> Rotation:
    """Spherical interpolation; alpha in [0, 1], exact at the endpoints."""
    if alpha <= 0.0:
        return a
    if alpha >= 1.0:
        return b
    qa, qb = a.q, b.q
    dot = float(np.dot(qa, qb))
    if dot < 0.0:  # shorter arc
        qb = -qb
        dot = -dot
    if dot > 1.0 - 1e-12:  # nearly identical: lerp avoids 0/0
        return Rotation(qa + alpha * (qb - qa))
    theta = np.arccos(min(1.0, dot))
    s = np.sin(theta)
    return Rotation((np.sin((1 - alpha) * theta) * qa + np.sin(alpha * theta) * qb) / s)


@dataclass(frozen=True)
class RigidTransform:
    """Maps child-frame coordinates into the parent frame."""

    rotation: Rotation
    translation: np.ndarray  # (3,) metres
    parent: str
    child: str

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=np.float64)
        if t.shape != (3,) or not np.all(np.isfinite(t)):
            raise ValueError(f"bad translation {self.translation!r}")
        if self.parent == self.child:
            raise ValueError(f"parent and child are both {self.parent!r}")
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity(parent: str, child: str) -> "RigidTransform":
        return RigidTransform(Rotation.identity(), np.zeros(3), parent, child)

    def apply_point(self, p) -> np.ndarray:
        return self.rotation.apply(p) + self.translation

    def apply_direction(self, v) -> np.ndarray:
        """Rotate a direction; translation intentionally ignored."""
        return self.rotation.apply(v)

    def invert(self) -> "RigidTransform":
        rinv = self.rotation.inverse()
        return RigidTransform(rinv, -rinv.apply(self.translation),
                              parent=self.child, child=self.parent)

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation.as_matrix()
        m[:3, 3] = self.translation
        return m


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """a then b: maps b.child coordinates into a.parent coordinates."""
    if a.child != b.parent:
        raise FrameMismatch(f"cannot compose {a.parent}<-{a.child} with {b.parent}<-{b.child}")
    return RigidTransform(
        a.rotation * b.rotation,
        a.rotation.apply(b.translation) + a.translation,
        parent=a.parent,
        child=b.child,
    )


def transform_direction(t: RigidTransform, v) -> np.ndarray:
    """Transport a unit direction through t; result stays unit."""
    return t.apply_direction(v)


def look_at(eye, target, frame_parent: str, frame_child: str, up=(0.0, 1.0, 0.0)) -> RigidTransform:
    """Pose of a camera-like frame at `eye` with +Z toward `target`.

    `up` is a hint for the +Y direction (+Y down by our convention, so the
    default keeps rotations roll-free for typical layouts). Returns the
    child->parent transform (child axes expressed in the parent frame).
    """
    eye = np.asarray(eye, dtype=np.float64)
    z = normalize(np.asarray(target, dtype=np.float64) - eye)
    up = np.asarray(up, dtype=np.float64)
    x = np.cross(up, z)
    if np.linalg.norm(x) < 1e-12:
        raise ValueError("up direction parallel to view direction")
    x = normalize(x)
    y = np.cross(z, x)
    m = np.column_stack([x, y, z])
    return RigidTransform(Rotation.from_matrix(m), eye, parent=frame_parent, child=frame_child)
