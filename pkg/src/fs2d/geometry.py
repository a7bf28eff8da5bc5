"""Planar rigid motions, poses, and trajectories.

A :class:`RigidMotion2D` ``(dx, dy, theta)`` is the pose of a second frame
expressed in a first one: a point ``q`` in the second frame has coordinates
``R(theta) q + (dx, dy)`` in the first. Composition therefore chains
left-to-right, ``compose(pose_i, motion) == pose_{i+1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def normalize_angle(a: float) -> float:
    """Wrap to ``(-pi, pi]``; angles already in range come back unchanged."""
    if -math.pi < a <= math.pi:
        return a
    w = math.pi - math.fmod(math.pi - a, 2 * math.pi)
    if w > math.pi:
        w -= 2 * math.pi
    elif w <= -math.pi:
        w += 2 * math.pi
    return w


@dataclass(frozen=True)
class RigidMotion2D:
    dx: float = 0.0
    dy: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.dx, self.dy, self.theta)):
            raise ValueError("rigid motion must be finite")
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "dy", float(self.dy))
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s, self.dx], [s, c, self.dy], [0.0, 0.0, 1.0]])

    def then(self, other: "RigidMotion2D") -> "RigidMotion2D":
        """``self`` followed by ``other`` (``other`` expressed in the frame ``self`` ends in)."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return RigidMotion2D(self.dx + c * other.dx - s * other.dy,
                             self.dy + s * other.dx + c * other.dy,
                             self.theta + other.theta)


IDENTITY = RigidMotion2D()


def invert(m: RigidMotion2D) -> RigidMotion2D:
    c, s = math.cos(m.theta), math.sin(m.theta)
    return RigidMotion2D(-(c * m.dx + s * m.dy), s * m.dx - c * m.dy, -m.theta)


@dataclass(frozen=True)
class Pose2D:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    timestamp: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.heading, self.timestamp)):
            raise ValueError("pose must be finite")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "heading", normalize_angle(float(self.heading)))
        object.__setattr__(self, "timestamp", float(self.timestamp))

    def as_motion(self) -> RigidMotion2D:
        return RigidMotion2D(self.x, self.y, self.heading)


def compose(p: Pose2D, m: RigidMotion2D, timestamp: float | None = None) -> Pose2D:
    """Apply body-frame motion ``m`` to pose ``p``."""
    q = p.as_motion().then(m)
    return Pose2D(q.dx, q.dy, q.theta, p.timestamp if timestamp is None else timestamp)


def relative_motion(a: Pose2D, b: Pose2D) -> RigidMotion2D:
    """Motion taking pose ``a`` to pose ``b``, expressed in ``a``'s frame."""
    return invert(a.as_motion()).then(b.as_motion())


def transform_points(m: RigidMotion2D, pts: np.ndarray) -> np.ndarray:
    """Map ``(n, 2)`` points from the moved frame into the base frame."""
    c, s = math.cos(m.theta), math.sin(m.theta)
    rot = np.array([[c, -s], [s, c]])
    return pts @ rot.T + np.array([m.dx, m.dy])


@dataclass
class Trajectory:
    poses: list = field(default_factory=list)
    outliers: list = field(default_factory=list)

    def __post_init__(self):
        if not self.outliers:
            self.outliers = [False] * len(self.poses)
        if len(self.outliers) != len(self.poses):
            raise ValueError("one outlier flag per pose required")
        ts = [p.timestamp for p in self.poses]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("trajectory timestamps must be strictly increasing")

    def __len__(self):
        return len(self.poses)

    def append(self, pose: Pose2D, outlier: bool = False):
        if self.poses and pose.timestamp <= self.poses[-1].timestamp:
            raise ValueError("trajectory timestamps must be strictly increasing")
        self.poses.append(pose)
        self.outliers.append(bool(outlier))

    def motions(self) -> list:
        return [relative_motion(a, b) for a, b in zip(self.poses, self.poses[1:])]

    def positions(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.poses]).reshape(-1, 2)
