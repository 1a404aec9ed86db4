"""From three camera detections to robot-frame tracking errors.

The reference is a fixed circle center ``(x_ref, y_ref)`` in the global
frame together with a reference heading that turns at ``w_ref``. The
tracking point O_cam sits at ``(0, R)`` in the robot frame; the errors
vanish when O_cam is on the circle center and the heading matches the
reference heading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .geometry import Circle, Point2D, Pose2D, circumcircle, rotate, wrap_angle
from .virtual_pixy import LineDetection, SensorMount, sensor_to_robot

SEGMENT_EPS = 1e-12


class MissingDetection(RuntimeError):
    """A camera did not see the line this step."""

    def __init__(self, index: int):
        super().__init__(f"sensor {index} has no valid line detection")
        self.index = index


class DegenerateSegment(ValueError):
    """Sensor-2 segment is perpendicular to the direction of travel."""


@dataclass(frozen=True)
class CircleEstimate:
    center_robot: Point2D
    radius: float


@dataclass(frozen=True)
class ReferenceState:
    center_global: Point2D
    w_ref: float
    theta_ref: float

    def advance(self, dt: float) -> ReferenceState:
        return replace(self, theta_ref=wrap_angle(self.theta_ref + self.w_ref * dt))


@dataclass(frozen=True)
class ErrorState:
    e1: float
    e2: float
    e3: float

    def max_abs(self) -> float:
        return max(abs(self.e1), abs(self.e2), abs(self.e3))


@dataclass(frozen=True)
class EstimatorState:
    theta_hat: float
    o_cam_global: Point2D
    circle: CircleEstimate
    e_cam: float
    # consecutive steps with at least one missing detection
    missed: int = 0


def midpoints_in_robot(
    detections: Sequence[LineDetection], mounts: Sequence[SensorMount]
) -> tuple[Point2D, Point2D, Point2D]:
    """Map each camera's reported segment center into the robot frame."""
    out = []
    for det, mount in zip(detections, mounts):
        if not det.valid:
            raise MissingDetection(mount.index)
        out.append(sensor_to_robot(det.midpoint_c, mount))
    return tuple(out)


def estimate_circle(m1: Point2D, m2: Point2D, m3: Point2D) -> CircleEstimate:
    c = circumcircle(m1, m2, m3)
    return CircleEstimate(c.center, c.radius)


def init_global_center(initial_pose: Pose2D, circle0: CircleEstimate) -> Point2D:
    """Global path center from the first estimate and the known start pose."""
    return rotate(circle0.center_robot, initial_pose.theta) + initial_pose.position


def e_cam_from_detection(d2: LineDetection) -> float:
    """Angle of the sensor-2 segment against the image y axis, ``atan(dx/dy)``.

    Because the image y axis runs opposite to the robot's heading this is
    also the angle of the line relative to the heading, folded into
    (-pi/2, pi/2).
    """
    dx = d2.endpoint_b.x - d2.endpoint_a.x
    dy = d2.endpoint_b.y - d2.endpoint_a.y
    if abs(dy) < SEGMENT_EPS:
        raise DegenerateSegment(f"segment has no extent along the image y axis (dy={dy:.3e})")
    return math.atan(dx / dy)


def heading_estimate(theta_ref: float, e_cam: float) -> float:
    return wrap_angle(theta_ref - e_cam)


def locate_tracking_point(center_global: Point2D, theta: float, circle: CircleEstimate, R: float) -> Point2D:
    """Global position of O_cam.

    ``(x_ref - R sin(theta), y_ref + R cos(theta)) - Rot(theta) @ center_robot``
    """
    c, s = math.cos(theta), math.sin(theta)
    cx, cy = circle.center_robot.x, circle.center_robot.y
    return Point2D(
        center_global.x - R * s - (c * cx - s * cy),
        center_global.y + R * c - (s * cx + c * cy),
    )


def compute_errors(ref: ReferenceState, o_cam: Point2D, theta: float) -> ErrorState:
    ex = ref.center_global.x - o_cam.x
    ey = ref.center_global.y - o_cam.y
    c, s = math.cos(theta), math.sin(theta)
    return ErrorState(c * ex + s * ey, -s * ex + c * ey, wrap_angle(ref.theta_ref - theta))


def initial_state(
    initial_pose: Pose2D,
    detections: Sequence[LineDetection],
    mounts: Sequence[SensorMount],
    R: float,
    w_ref: float,
) -> tuple[EstimatorState, ReferenceState]:
    """Bootstrap the estimator at t = 0 from a known pose and three detections.

    The reference heading starts at ``theta_0 + e_cam(0)`` so that the
    heading estimate equals the known start heading.

    Raises
    ------
    MissingDetection
        If any camera fails to see the line.
    CollinearPoints
        If the three segment centers are collinear.
    """
    circle0 = estimate_circle(*midpoints_in_robot(detections, mounts))
    center = init_global_center(initial_pose, circle0)
    e_cam = e_cam_from_detection(detections[1])
    theta0 = wrap_angle(initial_pose.theta)
    ref = ReferenceState(center, w_ref, wrap_angle(theta0 + e_cam))
    o_cam = locate_tracking_point(center, theta0, circle0, R)
    return EstimatorState(theta0, o_cam, circle0, e_cam), ref


def step_estimator(
    state: EstimatorState,
    detections: Sequence[LineDetection],
    commanded_w: float,
    dt: float,
    ref: ReferenceState,
    mounts: Sequence[SensorMount],
    R: float,
) -> tuple[EstimatorState, ReferenceState]:
    """Advance the estimator by one control period.

    The heading is dead-reckoned from the commanded turn rate; circle,
    e_cam and O_cam are refreshed from ``detections``. When a camera
    misses the line the geometric estimates are held and ``missed``
    counts up. A degenerate sensor-2 segment only holds ``e_cam``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    theta_hat = wrap_angle(state.theta_hat + commanded_w * dt)
    ref = ref.advance(dt)
    try:
        circle = estimate_circle(*midpoints_in_robot(detections, mounts))
    except MissingDetection:
        return replace(state, theta_hat=theta_hat, missed=state.missed + 1), ref
    try:
        e_cam = e_cam_from_detection(detections[1])
    except DegenerateSegment:
        e_cam = state.e_cam
    o_cam = locate_tracking_point(ref.center_global, theta_hat, circle, R)
    return EstimatorState(theta_hat, o_cam, circle, e_cam, 0), ref
