"""Planar frame algebra and three-point circle geometry.

Every rotation in the package uses the counter-clockwise convention
``Rot(theta) = [[cos, -sin], [sin, cos]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi
COLLINEAR_EPS = 1e-9


class CollinearPoints(ValueError):
    """Three points do not define a circle (straight or nearly straight line)."""


@dataclass(frozen=True, slots=True)
class Point2D:
    x: float
    y: float

    def __add__(self, other: Point2D) -> Point2D:
        return Point2D(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Point2D) -> Point2D:
        return Point2D(self.x - other.x, self.y - other.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True, slots=True)
class Pose2D:
    x: float
    y: float
    theta: float

    @property
    def position(self) -> Point2D:
        return Point2D(self.x, self.y)


@dataclass(frozen=True, slots=True)
class Circle:
    center: Point2D
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")


def wrap_angle(a: float) -> float:
    """Map ``a`` onto the half-open interval (-pi, pi]."""
    if -math.pi < a <= math.pi:
        return a
    return math.pi - ((math.pi - a) % TWO_PI)


def rotate(p: Point2D, theta: float) -> Point2D:
    c, s = math.cos(theta), math.sin(theta)
    return Point2D(c * p.x - s * p.y, s * p.x + c * p.y)


def rigid_transform(p: Point2D, frame_pose: Pose2D) -> Point2D:
    """Express a point given in a child frame in the parent frame.

    Parameters
    ----------
    p : Point2D
        Coordinates in the child frame.
    frame_pose : Pose2D
        Pose of the child frame in the parent frame.
    """
    c, s = math.cos(frame_pose.theta), math.sin(frame_pose.theta)
    return Point2D(c * p.x - s * p.y + frame_pose.x, s * p.x + c * p.y + frame_pose.y)


def inverse_transform(p: Point2D, frame_pose: Pose2D) -> Point2D:
    """Inverse of :func:`rigid_transform`: parent-frame point into the child frame."""
    c, s = math.cos(frame_pose.theta), math.sin(frame_pose.theta)
    dx, dy = p.x - frame_pose.x, p.y - frame_pose.y
    return Point2D(c * dx + s * dy, -s * dx + c * dy)


def circumcircle(p1: Point2D, p2: Point2D, p3: Point2D) -> Circle:
    """Circle through three points.

    Solves the 2x2 system

        [2(x2-x1)  2(y2-y1)] [cx]   [x2^2 - x1^2 + y2^2 - y1^2]
        [2(x3-x1)  2(y3-y1)] [cy] = [x3^2 - x1^2 + y3^2 - y1^2]

    by Cramer's rule. The system is written relative to ``p1`` so the
    right-hand side stays small when the points are far from the origin;
    the solution is unchanged by that shift.

    Raises
    ------
    CollinearPoints
        If ``|det| < 1e-9 * S`` with ``S`` the largest pairwise squared
        distance, which also covers coincident points.
    """
    ax, ay = p2.x - p1.x, p2.y - p1.y
    bx, by = p3.x - p1.x, p3.y - p1.y
    a11, a12 = 2.0 * ax, 2.0 * ay
    a21, a22 = 2.0 * bx, 2.0 * by
    rhs1 = ax * ax + ay * ay
    rhs2 = bx * bx + by * by
    det = a11 * a22 - a12 * a21
    scale = max(rhs1, rhs2, (p3.x - p2.x) ** 2 + (p3.y - p2.y) ** 2)
    if scale == 0.0 or abs(det) < COLLINEAR_EPS * scale:
        raise CollinearPoints(f"points {p1}, {p2}, {p3} are collinear (det={det:.3e})")
    ux = (rhs1 * a22 - a12 * rhs2) / det
    uy = (a11 * rhs2 - rhs1 * a21) / det
    center = Point2D(p1.x + ux, p1.y + uy)
    radius = (
        math.hypot(ux, uy)
        + math.hypot(center.x - p2.x, center.y - p2.y)
        + math.hypot(center.x - p3.x, center.y - p3.y)
    ) / 3.0
    return Circle(center, radius)
