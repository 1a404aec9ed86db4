"""Scenario configuration, built-in scenarios and the TOML config format.

A config file is a TOML document whose keys mirror :class:`ScenarioConfig`::

    base = "paper-a"          # optional, start from a built-in
    w_ref = 1.0
    dt = 0.001
    t_end = 15.0
    estimator_mode = "sensor"  # or "oracle"
    seed = 0

    [params]
    b = 0.365
    r = 0.047
    R = 1.0

    [path]
    center = [2.0, 2.0]
    radius = 1.0

    [initial_pose]
    x = 1.8
    y = 0.8
    theta = 0.0174532925199   # radians; theta_deg is accepted instead

    [gains]
    k1 = 0.01
    k2 = 0.5
    k3 = 1.0
    phi = 0.05

    [sensor_spec]
    width_w = 1.4
    length_l = 1.4
    quantize = [78, 51]        # omit to disable
    noise_std = 0.0

    [[mounts]]                 # omit all three to use the default layout
    index = 1
    d_x = 0.85
    d_y = 0.711

Unset keys keep the defaults of :class:`ScenarioConfig` (the physical
robot: b = 0.365 m, r = 0.047 m, R = 1 m).
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .geometry import Circle, Point2D, Pose2D
from .plant import RobotParams
from .smc import Gains
from .virtual_pixy import SensorFrameSpec, SensorMount, default_mounts

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Scenario configuration is malformed or violates an invariant."""


# Wide enough that all three cameras see the circle from every start pose
# used below (worst case: lens 0.63 m from the line in ``paper-far``).
PAPER_FOOTPRINT = SensorFrameSpec(width_w=1.4, length_l=1.4)

START_OUTSIDE = Pose2D(1.8, 0.8, math.radians(1.0))


@dataclass(frozen=True)
class ScenarioConfig:
    params: RobotParams = field(default_factory=RobotParams)
    path: Circle = field(default_factory=lambda: Circle(Point2D(2.0, 2.0), 1.0))
    initial_pose: Pose2D = START_OUTSIDE
    gains: Gains = field(default_factory=lambda: Gains(0.01, 0.5, 1.0))
    w_ref: float = 1.0
    dt: float = 0.001
    t_end: float = 15.0
    estimator_mode: str = "sensor"
    sensor_spec: SensorFrameSpec = PAPER_FOOTPRINT
    mounts: tuple[SensorMount, SensorMount, SensorMount] | None = None
    seed: int = 0
    # rad/s; None disables the clamp
    wheel_limit: float | None = None
    name: str = "custom"

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if self.estimator_mode not in ("sensor", "oracle"):
            raise ConfigError(f"estimator_mode must be 'sensor' or 'oracle', got {self.estimator_mode!r}")
        if abs(self.path.radius - self.params.R) > 1e-12 * self.params.R:
            raise ConfigError(f"path radius {self.path.radius} must equal robot R {self.params.R}")
        if self.mounts is not None and [m.index for m in self.mounts] != [1, 2, 3]:
            raise ConfigError("mounts must list sensors 1, 2 and 3 in order")
        if self.wheel_limit is not None and not self.wheel_limit > 0:
            raise ConfigError("wheel_limit must be positive")

    @property
    def sensor_mounts(self) -> tuple[SensorMount, SensorMount, SensorMount]:
        if self.mounts is not None:
            return self.mounts
        return default_mounts(self.sensor_spec, self.params.R)


def _builtin_cfg(name: str, start: Pose2D, k: tuple[float, float, float]) -> ScenarioConfig:
    return ScenarioConfig(initial_pose=start, gains=Gains(*k), name=name)


BUILTINS: dict[str, tuple[ScenarioConfig, str]] = {
    "paper-a": (
        _builtin_cfg("paper-a", START_OUTSIDE, (0.01, 0.5, 1.0)),
        "start (1.8, 0.8, 1 deg), gains 0.01/0.5/1; target ~6 s",
    ),
    "paper-b1": (
        _builtin_cfg("paper-b1", START_OUTSIDE, (0.05, 0.2, 1.0)),
        "gain study, gains 0.05/0.2/1; target ~3 s",
    ),
    "paper-b2": (
        _builtin_cfg("paper-b2", START_OUTSIDE, (0.01, 0.2, 1.0)),
        "gain study, gains 0.01/0.2/1; target ~8 s",
    ),
    "paper-b3": (
        _builtin_cfg("paper-b3", START_OUTSIDE, (0.1, 0.2, 1.0)),
        "gain study, gains 0.1/0.2/1; target ~6 s",
    ),
    "paper-inside": (
        _builtin_cfg("paper-inside", Pose2D(1.8, 1.2, math.radians(1.0)), (0.3, 1.0, 1.0)),
        "start inside the circle (1.8, 1.2), gains 0.3/1/1; convergence only",
    ),
    "paper-far": (
        _builtin_cfg("paper-far", Pose2D(1.5, 0.5, math.radians(1.0)), (0.21, 0.5, 1.0)),
        "start far outside (1.5, 0.5), gains 0.21/0.5/1; convergence only",
    ),
}


def builtin(name: str) -> ScenarioConfig:
    try:
        return BUILTINS[name][0]
    except KeyError:
        raise ConfigError(f"unknown built-in scenario {name!r}; choose from {sorted(BUILTINS)}") from None


def _build(cls, table: Any, section: str, base=None, renames: dict[str, str] | None = None):
    if not isinstance(table, dict):
        raise ConfigError(f"[{section}] must be a table")
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in table.items():
        key = (renames or {}).get(key, key)
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in [{section}]")
        kwargs[key] = value
    try:
        return replace(base, **kwargs) if base is not None else cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def config_from_dict(doc: dict[str, Any], name: str = "custom") -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from a parsed config document."""
    doc = dict(doc)
    cfg = builtin(doc.pop("base")) if "base" in doc else ScenarioConfig()
    updates: dict[str, Any] = {"name": doc.pop("name", name)}

    if "params" in doc:
        updates["params"] = _build(RobotParams, doc.pop("params"), "params", cfg.params)
    if "path" in doc:
        table = dict(doc.pop("path"))
        center = table.pop("center", (cfg.path.center.x, cfg.path.center.y))
        radius = table.pop("radius", cfg.path.radius)
        if table:
            raise ConfigError(f"unknown keys {sorted(table)} in [path]")
        try:
            updates["path"] = Circle(Point2D(float(center[0]), float(center[1])), float(radius))
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"[path]: {exc}") from exc
    if "initial_pose" in doc:
        table = dict(doc.pop("initial_pose"))
        if "theta_deg" in table:
            table["theta"] = math.radians(table.pop("theta_deg"))
        updates["initial_pose"] = _build(Pose2D, table, "initial_pose", cfg.initial_pose)
    if "gains" in doc:
        updates["gains"] = _build(Gains, doc.pop("gains"), "gains", cfg.gains)
    if "sensor_spec" in doc:
        table = dict(doc.pop("sensor_spec"))
        if "quantize" in table:
            q = table["quantize"]
            table["quantize"] = None if q in (None, False, []) else tuple(int(v) for v in q)
        updates["sensor_spec"] = _build(SensorFrameSpec, table, "sensor_spec", cfg.sensor_spec)
    if "mounts" in doc:
        mounts = doc.pop("mounts")
        if not isinstance(mounts, list) or len(mounts) != 3:
            raise ConfigError("[[mounts]] needs exactly three entries")
        updates["mounts"] = tuple(_build(SensorMount, m, "mounts") for m in mounts)

    scalars = {"w_ref": float, "dt": float, "t_end": float, "estimator_mode": str, "seed": int, "wheel_limit": float}
    for key in list(doc):
        if key not in scalars:
            raise ConfigError(f"unknown top-level key {key!r}")
        try:
            updates[key] = scalars[key](doc.pop(key))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    try:
        return replace(cfg, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(source: str | Path) -> ScenarioConfig:
    """Resolve a built-in scenario name or read a TOML config file."""
    if isinstance(source, str) and source in BUILTINS:
        return builtin(source)
    path = Path(source)
    try:
        with path.open("rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"no built-in scenario or config file named {str(source)!r}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(doc, name=path.stem)


def load_grid(source: str | Path) -> list[Gains]:
    """Read a gain grid file.

    ::

        phi = 0.05                 # optional, shared by all cells
        gains = [[0.05, 0.2, 1.0], [0.01, 0.2, 1.0]]
    """
    try:
        with Path(source).open("rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"grid file {str(source)!r} not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    unknown = set(doc) - {"phi", "gains"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in grid file")
    cells = doc.get("gains")
    if not cells:
        raise ConfigError("grid file must define a nonempty 'gains' list")
    phi = doc.get("phi")
    grid = []
    try:
        for cell in cells:
            k1, k2, k3 = (float(v) for v in cell)
            grid.append(Gains(k1, k2, k3) if phi is None else Gains(k1, k2, k3, float(phi)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid cell: {exc}") from exc
    return grid
