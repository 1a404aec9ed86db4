"""Virtual line-tracking cameras.

Each camera sees a rectangular patch of floor. The image frame has its
origin at one corner of the patch, ``0 <= x <= w`` and ``0 <= y <= l``.
A camera point ``c`` lands in the robot frame at

    Rot(-pi/2) @ diag(1, -1) @ c + (+-d_x, d_y)

that is ``(-c_y + d_x, -c_x + d_y)``, where sensor 3 uses ``-d_x``.

The path is a circle, so what a camera reports is the arc of that circle
cut by its patch: the two boundary crossings A and B, plus the arc's
angular midpoint C. C lies on the path itself, which keeps the
three-camera circle fit exact in noise-free runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Circle, Point2D, Pose2D, TWO_PI, inverse_transform, rigid_transform

TANGENT_EPS = 1e-9
# Column x row grid of the device's line-tracking mode.
DEVICE_GRID = (78, 51)


@dataclass(frozen=True)
class SensorFrameSpec:
    """Ground footprint of one camera, in meters."""

    width_w: float = 0.050
    length_l: float = 0.040
    quantize: tuple[int, int] | None = None
    noise_std: float = 0.0

    def __post_init__(self):
        if not (self.width_w > 0 and self.length_l > 0):
            raise ValueError("footprint extents must be positive")
        if self.quantize is not None:
            cols, rows = self.quantize
            if cols < 2 or rows < 2:
                raise ValueError("pixel grid needs at least 2 columns and 2 rows")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")


@dataclass(frozen=True)
class SensorMount:
    """Offset of a camera's image origin from the robot center.

    ``d_x`` is entered as printed for each sensor; sensor 3 is placed at
    ``-d_x`` along the robot x axis.
    """

    index: int
    d_x: float
    d_y: float

    def __post_init__(self):
        if self.index not in (1, 2, 3):
            raise ValueError(f"sensor index must be 1, 2 or 3, got {self.index}")
        if not (math.isfinite(self.d_x) and math.isfinite(self.d_y)):
            raise ValueError("mount offsets must be finite")


@dataclass(frozen=True)
class LineDetection:
    midpoint_c: Point2D
    endpoint_a: Point2D
    endpoint_b: Point2D
    valid: bool = True


NO_DETECTION = LineDetection(Point2D(0.0, 0.0), Point2D(0.0, 0.0), Point2D(0.0, 0.0), valid=False)


def sensor_pose_in_robot(mount: SensorMount) -> Pose2D:
    """Pose of the (mirrored) image frame in the robot frame.

    The image y axis is mirrored before this pose is applied; see
    :func:`sensor_to_robot`.
    """
    ox = -mount.d_x if mount.index == 3 else mount.d_x
    return Pose2D(ox, mount.d_y, -math.pi / 2)


def sensor_to_robot(c: Point2D, mount: SensorMount) -> Point2D:
    return rigid_transform(Point2D(c.x, -c.y), sensor_pose_in_robot(mount))


def robot_to_sensor(p: Point2D, mount: SensorMount) -> Point2D:
    q = inverse_transform(p, sensor_pose_in_robot(mount))
    return Point2D(q.x, -q.y)


def default_mounts(spec: SensorFrameSpec, R: float, lens_dx: float = 0.15) -> tuple[SensorMount, ...]:
    """Mounts whose lens centers lie on a radius-``R`` arc through the robot center.

    Lens centers are at ``(lens_dx, h)``, ``(0, 0)`` and ``(-lens_dx, h)``
    with ``h = R - sqrt(R^2 - lens_dx^2)``; each footprint is centered on
    its lens.
    """
    if not 0 < lens_dx < R:
        raise ValueError("lens_dx must lie in (0, R)")
    h = R - math.sqrt(R * R - lens_dx * lens_dx)
    half_l, half_w = spec.length_l / 2, spec.width_w / 2
    return (
        SensorMount(1, lens_dx + half_l, h + half_w),
        SensorMount(2, half_l, half_w),
        SensorMount(3, lens_dx - half_l, h + half_w),
    )


def lens_center_in_robot(mount: SensorMount, spec: SensorFrameSpec) -> Point2D:
    return sensor_to_robot(Point2D(spec.width_w / 2, spec.length_l / 2), mount)


def _edge_crossings(cx: float, cy: float, R: float, w: float, l: float) -> list[float]:
    """Angles in [0, 2pi) where the circle meets the rectangle boundary."""
    angles = []
    slack = 1e-12 * max(w, l, R)
    for edge in (0.0, w):
        u = (edge - cx) / R
        if abs(u) <= 1.0:
            a = math.acos(u)
            for phi in (a, -a):
                y = cy + R * math.sin(phi)
                if -slack <= y <= l + slack:
                    angles.append(phi % TWO_PI)
    for edge in (0.0, l):
        u = (edge - cy) / R
        if abs(u) <= 1.0:
            a = math.asin(u)
            for phi in (a, math.pi - a):
                x = cx + R * math.cos(phi)
                if -slack <= x <= w + slack:
                    angles.append(phi % TWO_PI)
    angles.sort()
    merged: list[float] = []
    for a in angles:
        if not merged or a - merged[-1] > 1e-13:
            merged.append(a)
    if len(merged) > 1 and merged[0] + TWO_PI - merged[-1] <= 1e-13:
        merged.pop()
    return merged


def _clip(p: Point2D, w: float, l: float) -> Point2D:
    return Point2D(min(max(p.x, 0.0), w), min(max(p.y, 0.0), l))


def visible_arc(circle: Circle, spec: SensorFrameSpec) -> tuple[float, float] | None:
    """Start and end angle of the reported arc, circle given in image coordinates.

    Returns ``None`` when the circle misses the footprint, only grazes it,
    or lies entirely inside it (no boundary crossings, hence no chord).
    Among several inside arcs the one whose midpoint is nearest the
    footprint center wins.
    """
    w, l = spec.width_w, spec.length_l
    cx, cy, R = circle.center.x, circle.center.y, circle.radius
    angles = _edge_crossings(cx, cy, R, w, l)
    if len(angles) < 2:
        return None
    best = None
    best_dist = math.inf
    fx, fy = w / 2, l / 2
    tol = 1e-12 * max(w, l)
    n = len(angles)
    for i in range(n):
        start = angles[i]
        end = angles[i + 1] if i + 1 < n else angles[0] + TWO_PI
        mid = 0.5 * (start + end)
        mx, my = cx + R * math.cos(mid), cy + R * math.sin(mid)
        if not (-tol <= mx <= w + tol and -tol <= my <= l + tol):
            continue
        if 2.0 * R * math.sin(0.5 * (end - start)) <= TANGENT_EPS:
            continue
        dist = math.hypot(mx - fx, my - fy)
        if dist < best_dist:
            best, best_dist = (start, end), dist
    return best


def _quantize(p: Point2D, spec: SensorFrameSpec) -> Point2D:
    cols, rows = spec.quantize
    px_w, px_l = spec.width_w / cols, spec.length_l / rows
    i = min(int(p.x / px_w), cols - 1)
    j = min(int(p.y / px_l), rows - 1)
    return Point2D((i + 0.5) * px_w, (j + 0.5) * px_l)


def detect_line(
    path: Circle,
    robot: Pose2D,
    mount: SensorMount,
    spec: SensorFrameSpec,
    rng_seed: int | None = None,
) -> LineDetection:
    """What one camera reports for a circular path.

    Parameters
    ----------
    path : Circle
        Path circle in the global frame.
    robot : Pose2D
        True robot pose in the global frame.
    mount, spec : SensorMount, SensorFrameSpec
        Camera placement and footprint.
    rng_seed : int, optional
        Seed for the additive noise; only used when ``spec.noise_std > 0``.

    Returns
    -------
    LineDetection
        Endpoints ordered so that A has the smaller image y (ties: smaller
        x). ``valid`` is False when no chord crosses the footprint.
    """
    center_robot = inverse_transform(path.center, robot)
    center_img = robot_to_sensor(center_robot, mount)
    arc = visible_arc(Circle(center_img, path.radius), spec)
    if arc is None:
        return NO_DETECTION
    w, l = spec.width_w, spec.length_l
    R = path.radius
    start, end = arc
    mid = 0.5 * (start + end)

    def on_circle(phi: float) -> Point2D:
        return _clip(Point2D(center_img.x + R * math.cos(phi), center_img.y + R * math.sin(phi)), w, l)

    a, b, c = on_circle(start), on_circle(end), on_circle(mid)
    if (b.y, b.x) < (a.y, a.x):
        a, b = b, a
    if spec.quantize is not None:
        a, b, c = (_quantize(p, spec) for p in (a, b, c))
    if spec.noise_std > 0:
        noise = np.random.default_rng(rng_seed).normal(0.0, spec.noise_std, size=6)
        a = _clip(Point2D(a.x + noise[0], a.y + noise[1]), w, l)
        b = _clip(Point2D(b.x + noise[2], b.y + noise[3]), w, l)
        c = _clip(Point2D(c.x + noise[4], c.y + noise[5]), w, l)
    return LineDetection(c, a, b, valid=True)
