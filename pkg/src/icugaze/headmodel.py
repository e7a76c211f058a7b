"""Generic 68-landmark head model, scaled by inter-pupillary distance.

The canonical table ships with the package (data/canonical_head_68.txt,
regenerable via tools/make_head_model.py). Pupil anchors are the
midpoints of the eye-corner pairs (36, 39) and (42, 45); the canonical
table puts them exactly 0.06 m apart, so scaling to a given IPD is a
single uniform factor.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources

import numpy as np

CANONICAL_IPD = 0.06
IPD_MIN = 0.04
IPD_MAX = 0.08

RIGHT_EYE_CORNERS = (36, 39)
LEFT_EYE_CORNERS = (42, 45)
MODEL_VERSION = 1


class OutOfRange(ValueError):
    """IPD outside the supported adult range."""


@dataclass(frozen=True)
class HeadModel:
    points: np.ndarray  # (68, 3) metres, head frame
    ipd: float

    def pupil_anchors(self) -> tuple[np.ndarray, np.ndarray]:
        right = 0.5 * (self.points[RIGHT_EYE_CORNERS[0]] + self.points[RIGHT_EYE_CORNERS[1]])
        left = 0.5 * (self.points[LEFT_EYE_CORNERS[0]] + self.points[LEFT_EYE_CORNERS[1]])
        return right, left


@dataclass(frozen=True)
class LandmarkSet:
    """68 observed 2D landmarks; out-of-frame points stay in the array but flagged."""

    points: np.ndarray    # (68, 2) pixels
    in_frame: np.ndarray  # (68,) bool
    timestamp_ns: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        flags = np.asarray(self.in_frame, dtype=bool)
        if pts.shape != (68, 2):
            raise ValueError(f"expected 68 landmarks, got shape {pts.shape}")
        if flags.shape != (68,):
            raise ValueError("in_frame mask must have 68 entries")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "in_frame", flags)


@functools.cache
def canonical_points() -> np.ndarray:
    text = resources.files("icugaze").joinpath("data/canonical_head_68.txt").read_text()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        idx, x, y, z = line.split()
        rows.append((int(idx), float(x), float(y), float(z)))
    if len(rows) != 68 or [r[0] for r in rows] != list(range(68)):
        raise ValueError("canonical head table is corrupt")
    pts = np.array([r[1:] for r in rows], dtype=np.float64)
    pts.setflags(write=False)
    return pts


def build_head_model(ipd: float = CANONICAL_IPD) -> HeadModel:
    """Canonical model scaled uniformly so the pupil anchors sit `ipd` apart."""
    if not (IPD_MIN <= ipd <= IPD_MAX):
        raise OutOfRange(f"ipd {ipd} outside [{IPD_MIN}, {IPD_MAX}] m")
    return HeadModel(points=canonical_points() * (ipd / CANONICAL_IPD), ipd=float(ipd))
