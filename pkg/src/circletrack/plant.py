"""Differential-drive kinematics: unicycle center, tracking point, wheels."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Point2D, Pose2D, wrap_angle


@dataclass(frozen=True)
class RobotParams:
    """Half axle track ``b``, wheel radius ``r`` and offset/path radius ``R`` (m)."""

    b: float = 0.365
    r: float = 0.047
    R: float = 1.0

    def __post_init__(self):
        if not (self.b > 0 and self.r > 0 and self.R > 0):
            raise ValueError("b, r and R must all be positive")


@dataclass(frozen=True)
class ControlCommand:
    v: float
    w: float


@dataclass(frozen=True)
class WheelSpeeds:
    w_rw: float
    w_lw: float


def robot_center_derivative(theta: float, cmd: ControlCommand) -> tuple[float, float, float]:
    return cmd.v * math.cos(theta), cmd.v * math.sin(theta), cmd.w


def tracking_point_derivative(theta: float, cmd: ControlCommand, R: float) -> tuple[float, float, float]:
    """Velocity of the point ``(0, R)`` carried by the robot."""
    along = cmd.v - R * cmd.w
    return along * math.cos(theta), along * math.sin(theta), cmd.w


def tracking_point(pose: Pose2D, R: float) -> Point2D:
    return Point2D(pose.x - R * math.sin(pose.theta), pose.y + R * math.cos(pose.theta))


def wheels_from_body(cmd: ControlCommand, params: RobotParams) -> WheelSpeeds:
    return WheelSpeeds(
        (cmd.v + params.b * cmd.w) / params.r,
        (cmd.v - params.b * cmd.w) / params.r,
    )


def body_from_wheels(ws: WheelSpeeds, params: RobotParams) -> ControlCommand:
    return ControlCommand(
        params.r * (ws.w_rw + ws.w_lw) / 2,
        params.r * (ws.w_rw - ws.w_lw) / (2 * params.b),
    )


def clamp_wheels(ws: WheelSpeeds, limit: float) -> WheelSpeeds:
    """Symmetric wheel-speed saturation; scales both wheels to keep the turn radius."""
    peak = max(abs(ws.w_rw), abs(ws.w_lw))
    if peak <= limit:
        return ws
    k = limit / peak
    return WheelSpeeds(ws.w_rw * k, ws.w_lw * k)


def integrate_step(state: Pose2D, cmd: ControlCommand, dt: float) -> Pose2D:
    """One classical RK4 step of the unicycle with the command held over ``dt``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    v, w = cmd.v, cmd.w
    x, y, th = state.x, state.y, state.theta
    th2 = th + 0.5 * dt * w
    th4 = th + dt * w
    c1, s1 = math.cos(th), math.sin(th)
    c2, s2 = math.cos(th2), math.sin(th2)
    c4, s4 = math.cos(th4), math.sin(th4)
    # heading derivative is constant, so stages 2 and 3 share an angle
    x += dt * v * (c1 + 4.0 * c2 + c4) / 6.0
    y += dt * v * (s1 + 4.0 * s2 + s4) / 6.0
    return Pose2D(x, y, wrap_angle(th4))
