"""Sliding-mode tracking controller with a boundary layer.

The error dynamics have two inputs (v, w) but three sliding surfaces, so
the input gain ``g(e)`` is 3x2. The control law replaces its inverse by a
least-squares solve:

    u = argmin || g(e) u + f + K sat(s / phi) ||_2

which is exact at ``e = 0`` where the residual vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimation import ErrorState
from .plant import ControlCommand, RobotParams

SINGULAR_EPS = 1e-9


class RankDeficient(ArithmeticError):
    """``g(e)`` lost column rank; the least-squares control is ill-defined."""


@dataclass(frozen=True)
class Gains:
    k1: float
    k2: float
    k3: float
    phi: float = 0.05

    def __post_init__(self):
        if min(self.k1, self.k2, self.k3) <= 0:
            raise ValueError("switching gains must be positive")
        if self.phi <= 0:
            raise ValueError("boundary layer width phi must be positive")

    @property
    def K(self) -> np.ndarray:
        return np.diag([self.k1, self.k2, self.k3])


@dataclass(frozen=True)
class SlidingSurface:
    s1: float
    s2: float
    s3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.s1, self.s2, self.s3])

    def max_abs(self) -> float:
        return max(abs(self.s1), abs(self.s2), abs(self.s3))


def sliding_surface(e: ErrorState) -> SlidingSurface:
    return SlidingSurface(e.e1 + e.e2, e.e1 - e.e2, -e.e1 + e.e2 + e.e3)


def surface_dynamics(e: ErrorState, R: float, w_ref: float) -> tuple[np.ndarray, np.ndarray]:
    """Drift ``f`` and input gain ``g`` of ``ds/dt = f + g @ (v, w)``."""
    e1, e2 = e.e1, e.e2
    f = np.array([0.0, 0.0, w_ref])
    g = np.array(
        [
            [-1.0, e2 + R - e1],
            [-1.0, e2 + R + e1],
            [1.0, -(e2 + R + e1 + 1.0)],
        ]
    )
    return f, g


def error_dynamics(e: ErrorState, cmd: ControlCommand, R: float, w_ref: float) -> tuple[float, float, float]:
    """Time derivative of (e1, e2, e3) under command ``cmd``."""
    return (
        -cmd.v + (e.e2 + R) * cmd.w,
        -e.e1 * cmd.w,
        w_ref - cmd.w,
    )


def sat(x: float, phi: float = 1.0) -> float:
    y = x / phi
    if abs(y) <= 1.0:
        return y
    return math.copysign(1.0, x)


def _switching(s: SlidingSurface, phi: float, mode: str) -> np.ndarray:
    if mode == "sat":
        return np.array([sat(s.s1, phi), sat(s.s2, phi), sat(s.s3, phi)])
    if mode == "sign":
        return np.sign(s.as_array())
    raise ValueError(f"unknown switching mode {mode!r}")


def control(
    e: ErrorState,
    params: RobotParams,
    w_ref: float,
    gains: Gains,
    switching: str = "sat",
) -> ControlCommand:
    """Least-squares sliding-mode command ``(v, w)``.

    Parameters
    ----------
    switching : {"sat", "sign"}
        Boundary-layer saturation (default) or the discontinuous sign law.

    Raises
    ------
    RankDeficient
        If the smaller singular value of ``g(e)`` is below 1e-9.
    """
    f, g = surface_dynamics(e, params.R, w_ref)
    rhs = f + gains.K @ _switching(sliding_surface(e), gains.phi, switching)
    u, _, _, sv = np.linalg.lstsq(g, -rhs, rcond=None)
    if sv[-1] < SINGULAR_EPS:
        raise RankDeficient(f"g(e) is rank deficient at {e} (sigma_min={sv[-1]:.3e})")
    return ControlCommand(float(u[0]), float(u[1]))


def lyapunov(s: SlidingSurface) -> float:
    return 0.5 * (s.s1 * s.s1 + s.s2 * s.s2 + s.s3 * s.s3)
