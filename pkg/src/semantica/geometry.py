"""2D pose algebra and oriented-rectangle footprints.

Poses are planar rigid transforms (x, y, theta) with theta kept in
(-pi, pi]. Footprints model the ground-plane rectangle of a tagged
object: `length` extends along the heading axis, `width` across it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    t = math.fmod(theta + math.pi, TWO_PI)
    if t <= 0.0:
        t += TWO_PI
    return t - math.pi


@dataclass(frozen=True)
class Pose2D:
    """A planar pose: position in meters, bearing in radians."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)

    def as_vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta], dtype=float)

    @staticmethod
    def from_vector(v) -> "Pose2D":
        return Pose2D(float(v[0]), float(v[1]), float(v[2]))

    def compose(self, other: "Pose2D") -> "Pose2D":
        """Return self * other (apply `other` in this pose's frame)."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2D(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )

    def inverse(self) -> "Pose2D":
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2D(-(c * self.x + s * self.y), -(-s * self.x + c * self.y), -self.theta)

    def relative_to(self, other: "Pose2D") -> "Pose2D":
        """Return other^-1 * self: this pose expressed in `other`'s frame."""
        return other.inverse().compose(self)

    def transform_point(self, px: float, py: float) -> tuple[float, float]:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return self.x + c * px - s * py, self.y + s * px + c * py


def rot2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Footprint:
    """Oriented ground rectangle of an object.

    `length` runs along the heading (local x), `width` across it
    (local y); `center` is the object pose.
    """

    center: Pose2D
    width: float
    length: float

    def contains(self, x, y, margin: float = 0.0):
        """Vectorized point-in-rectangle test with an optional margin."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        c, s = math.cos(self.center.theta), math.sin(self.center.theta)
        dx = x - self.center.x
        dy = y - self.center.y
        u = c * dx + s * dy
        v = -s * dx + c * dy
        return (np.abs(u) <= self.length / 2.0 + margin) & (np.abs(v) <= self.width / 2.0 + margin)

    def corners(self) -> np.ndarray:
        """4x2 array of corner coordinates, counterclockwise."""
        hl, hw = self.length / 2.0, self.width / 2.0
        local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
        r = rot2(self.center.theta)
        return local @ r.T + np.array([self.center.x, self.center.y])

    def distance(self, x: float, y: float) -> float:
        """Euclidean distance from a point to the rectangle (0 inside)."""
        c, s = math.cos(self.center.theta), math.sin(self.center.theta)
        dx, dy = x - self.center.x, y - self.center.y
        u = abs(c * dx + s * dy) - self.length / 2.0
        v = abs(-s * dx + c * dy) - self.width / 2.0
        return math.hypot(max(u, 0.0), max(v, 0.0))

    @property
    def area(self) -> float:
        return self.width * self.length


def footprint_of(position: Pose2D, dims) -> Footprint:
    """Footprint from a (height, width, length) dimension triple."""
    _, width, length = dims
    return Footprint(center=position, width=float(width), length=float(length))
