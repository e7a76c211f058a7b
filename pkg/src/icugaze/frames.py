"""Timestamped transform tree linking the named frames of the rig.

The tree holds static edges (the once-only board-to-head-camera
calibration) and dynamic edges (board pose per scene frame, head pose per
head frame) as time-ordered buffers. Lookups compose the unique path
between two frames, interpolating dynamic edges (slerp for rotation, lerp
for translation) between the bracketing stamps.

One writer may insert stamped edges while readers look up concurrently;
a lock keeps each read a consistent snapshot.
"""

from __future__ import annotations

import threading
from bisect import bisect_left
from collections import deque

from .geometry import RigidTransform, compose, slerp

SCENE_CAMERA = "scene_camera"
BOARD = "board"
HEAD_CAMERA = "head_camera"
HEAD = "head"
SCREEN = "screen"
WORLD = "world"

FRAMES = frozenset({SCENE_CAMERA, BOARD, HEAD_CAMERA, HEAD, SCREEN, WORLD})

DEFAULT_BUFFER_LEN = 512
DEFAULT_EXTRAPOLATION_TOL_NS = 50_000_000  # one scene-camera period plus jitter


class NoPath(KeyError):
    """No chain of edges connects the two frames."""


class Extrapolation(ValueError):
    """Requested time outside a dynamic edge's buffer span (beyond tolerance)."""


class TransformTree:
    def __init__(self, buffer_len: int = DEFAULT_BUFFER_LEN,
                 extrapolation_tol_ns: int = DEFAULT_EXTRAPOLATION_TOL_NS):
        self._static: dict[tuple[str, str], RigidTransform] = {}
        self._dynamic: dict[tuple[str, str], deque] = {}  # (parent, child) -> deque[(t, tf)]
        self._adjacency: dict[str, set[str]] = {}
        self._buffer_len = buffer_len
        self._tol = extrapolation_tol_ns
        self._lock = threading.Lock()

    def _check_frames(self, tf: RigidTransform):
        for f in (tf.parent, tf.child):
            if f not in FRAMES:
                raise ValueError(f"unknown frame {f!r}")

    def _connect(self, parent: str, child: str):
        self._adjacency.setdefault(parent, set()).add(child)
        self._adjacency.setdefault(child, set()).add(parent)

    def set_static(self, tf: RigidTransform):
        self._check_frames(tf)
        key = (tf.parent, tf.child)
        with self._lock:
            if key[::-1] in self._static or key[::-1] in self._dynamic or key in self._dynamic:
                raise ValueError(f"edge {key} already present in the other direction or dynamic")
            self._static[key] = tf
            self._connect(*key)

    def insert(self, stamp_ns: int, tf: RigidTransform):
        """Append one stamped transform to the edge's ring buffer."""
        self._check_frames(tf)
        key = (tf.parent, tf.child)
        with self._lock:
            if key in self._static or key[::-1] in self._static or key[::-1] in self._dynamic:
                raise ValueError(f"edge {key} conflicts with an existing edge")
            buf = self._dynamic.get(key)
            if buf is None:
                buf = deque(maxlen=self._buffer_len)
                self._dynamic[key] = buf
                self._connect(*key)
            if buf and stamp_ns <= buf[-1][0]:
                raise ValueError(f"stamps on edge {key} must strictly increase "
                                 f"({stamp_ns} after {buf[-1][0]})")
            buf.append((int(stamp_ns), tf))

    def _path(self, src: str, dst: str) -> list[str]:
        # BFS; the edge set is a tree so the path found is the only one.
        if src == dst:
            raise NoPath(f"lookup from {src!r} to itself")
        for f in (src, dst):
            if f not in self._adjacency:
                raise NoPath(f"frame {f!r} has no edges")
        prev = {src: None}
        queue = deque([src])
        while queue:
            node = queue.popleft()
            if node == dst:
                break
            for nxt in self._adjacency[node]:
                if nxt not in prev:
                    prev[nxt] = node
                    queue.append(nxt)
        if dst not in prev:
            raise NoPath(f"no path between {src!r} and {dst!r}")
        path = [dst]
        while path[-1] != src:
            path.append(prev[path[-1]])
        return path[::-1]

    def _edge_at(self, parent: str, child: str, t_ns: int) -> RigidTransform:
        """Transform for one directed edge at time t; inverts stored direction if needed."""
        key = (parent, child)
        tf = self._static.get(key)
        if tf is not None:
            return tf
        tf = self._static.get(key[::-1])
        if tf is not None:
            return tf.invert()
        buf = self._dynamic.get(key)
        invert = False
        if buf is None:
            buf = self._dynamic.get(key[::-1])
            invert = True
        if buf is None or not buf:
            raise NoPath(f"edge {key} has no data")
        tf = self._interpolate(buf, t_ns, key)
        return tf.invert() if invert else tf

    def _interpolate(self, buf, t_ns: int, key) -> RigidTransform:
        stamps = [s for s, _ in buf]
        if t_ns < stamps[0] - self._tol or t_ns > stamps[-1] + self._tol:
            raise Extrapolation(
                f"t={t_ns} outside buffer [{stamps[0]}, {stamps[-1]}] +/- {self._tol} on edge {key}")
        if t_ns <= stamps[0]:
            return buf[0][1]
        if t_ns >= stamps[-1]:
            return buf[-1][1]
        i = bisect_left(stamps, t_ns)
        if stamps[i] == t_ns:
            return buf[i][1]
        (t0, tf0), (t1, tf1) = buf[i - 1], buf[i]
        alpha = (t_ns - t0) / (t1 - t0)
        return RigidTransform(
            slerp(tf0.rotation, tf1.rotation, alpha),
            (1.0 - alpha) * tf0.translation + alpha * tf1.translation,
            parent=tf0.parent,
            child=tf0.child,
        )

    def lookup(self, from_frame: str, to_frame: str, t_ns: int) -> RigidTransform:
        """Transform mapping `from_frame` coordinates into `to_frame` at time t."""
        with self._lock:
            path = self._path(to_frame, from_frame)  # parent chain runs to_frame -> from_frame
            result = None
            for parent, child in zip(path, path[1:]):
                edge = self._edge_at(parent, child, t_ns)
                result = edge if result is None else compose(result, edge)
            return result
