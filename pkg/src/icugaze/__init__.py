"""Dual-camera gaze tracking geometry engine for ICU bed spaces.

Head pose from 2D facial landmarks (PnP + RANSAC), gaze transport through
a timestamped transform tree, and ray-octree resolution against the scene
point cloud, with an evaluation harness for angular accuracy/precision and
a synthetic ground-truth oracle standing in for the neural front ends.
"""

__version__ = "0.1.0"

from .geometry import RigidTransform, Rotation, angle_between, compose, transform_direction
from .frames import TransformTree

__all__ = [
    "RigidTransform",
    "Rotation",
    "TransformTree",
    "angle_between",
    "compose",
    "transform_direction",
    "__version__",
]
