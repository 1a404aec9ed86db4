"""Closed-loop simulation driver, metrics, gain sweeps and trace I/O."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .estimation import (
    DegenerateSegment,
    ErrorState,
    MissingDetection,
    ReferenceState,
    compute_errors,
    e_cam_from_detection,
    initial_state,
    step_estimator,
)
from .geometry import CollinearPoints, Point2D, Pose2D, wrap_angle
from .plant import (
    ControlCommand,
    WheelSpeeds,
    body_from_wheels,
    clamp_wheels,
    integrate_step,
    tracking_point,
    wheels_from_body,
)
from .scenarios import ScenarioConfig
from .smc import Gains, RankDeficient, SlidingSurface, control, lyapunov, sliding_surface
from .virtual_pixy import LineDetection, detect_line

log = logging.getLogger(__name__)

# steps a missing detection may be bridged before the run is halted
N_HOLD = 50
CONVERGENCE_EPS = 0.01
CONVERGENCE_HOLD = 1.0
TRACE_EVERY = 0.01


class SimulationAborted(RuntimeError):
    """Run stopped with a structured diagnostic."""

    def __init__(self, reason: str, t: float, detail: str):
        super().__init__(f"{reason} at t={t:.3f}s: {detail}")
        self.reason = reason
        self.t = t
        self.detail = detail


class InitialVisibility(SimulationAborted):
    def __init__(self, detail: str):
        super().__init__("InitialVisibility", 0.0, detail)


class StraightLineDetected(SimulationAborted):
    def __init__(self, t: float, detail: str):
        super().__init__("StraightLineDetected", t, detail)


class LineLost(SimulationAborted):
    def __init__(self, t: float, detail: str):
        super().__init__("LineLost", t, detail)


@dataclass(frozen=True)
class TraceRow:
    t: float
    true_pose: Pose2D
    o_cam: Point2D
    e: ErrorState
    s: SlidingSurface
    cmd: ControlCommand
    wheels: WheelSpeeds
    V: float
    # logged next to e3 so the two can be compared
    e_cam: float


TRACE_COLUMNS = (
    "t",
    "x", "y", "theta",
    "o_cam_x", "o_cam_y",
    "e1", "e2", "e3",
    "s1", "s2", "s3",
    "v", "w",
    "w_rw", "w_lw",
    "V",
    "e_cam",
)  # fmt: skip


def _flatten(row: TraceRow) -> tuple[float, ...]:
    p, o, e, s, c, wh = row.true_pose, row.o_cam, row.e, row.s, row.cmd, row.wheels
    return (
        row.t, p.x, p.y, p.theta, o.x, o.y, e.e1, e.e2, e.e3,
        s.s1, s.s2, s.s3, c.v, c.w, wh.w_rw, wh.w_lw, row.V, row.e_cam,
    )  # fmt: skip


def _unflatten(vals: Sequence[float]) -> TraceRow:
    t, x, y, th, ox, oy, e1, e2, e3, s1, s2, s3, v, w, wr, wl, V, ec = vals
    return TraceRow(
        t, Pose2D(x, y, th), Point2D(ox, oy), ErrorState(e1, e2, e3), SlidingSurface(s1, s2, s3),
        ControlCommand(v, w), WheelSpeeds(wr, wl), V, ec,
    )  # fmt: skip


def _sense(cfg: ScenarioConfig, pose: Pose2D, step: int) -> tuple[LineDetection, ...]:
    seeds = np.random.SeedSequence([cfg.seed, step]).generate_state(3)
    return tuple(
        detect_line(cfg.path, pose, mount, cfg.sensor_spec, int(seed))
        for mount, seed in zip(cfg.sensor_mounts, seeds)
    )


def _oracle_errors(cfg: ScenarioConfig, pose: Pose2D, ref: ReferenceState) -> tuple[Point2D, ErrorState]:
    o_cam = tracking_point(pose, cfg.params.R)
    return o_cam, compute_errors(ref, o_cam, pose.theta)


def run_scenario(cfg: ScenarioConfig) -> list[TraceRow]:
    """Simulate the closed loop and return one row per control step.

    Each step senses (or reads the true pose in oracle mode), estimates,
    forms the tracking errors, computes the sliding-mode command, maps it
    to wheel speeds and integrates the plant over ``dt``.

    Raises
    ------
    InitialVisibility
        A camera does not see the line at t = 0 (sensor mode).
    StraightLineDetected
        The three segment centers are collinear.
    LineLost
        Detections were missing for more than ``N_HOLD`` steps.
    """
    R, w_ref, dt = cfg.params.R, cfg.w_ref, cfg.dt
    mounts = cfg.sensor_mounts
    pose = Pose2D(cfg.initial_pose.x, cfg.initial_pose.y, wrap_angle(cfg.initial_pose.theta))
    detections = _sense(cfg, pose, 0)
    oracle = cfg.estimator_mode == "oracle"

    try:
        est, ref = initial_state(pose, detections, mounts, R, w_ref)
    except MissingDetection as exc:
        if not oracle:
            raise InitialVisibility(str(exc)) from exc
        # oracle mode never needs the cameras; start on the true heading
        est = None
        ref = ReferenceState(cfg.path.center, w_ref, pose.theta)
    except CollinearPoints as exc:
        raise StraightLineDetected(0.0, str(exc)) from exc
    except DegenerateSegment as exc:
        raise InitialVisibility(f"sensor 2 segment unusable: {exc}") from exc
    if oracle:
        ref = replace(ref, center_global=cfg.path.center)
    e_cam = est.e_cam if est is not None else 0.0

    n_steps = int(round(cfg.t_end / dt))
    rows: list[TraceRow] = []
    cmd = ControlCommand(0.0, 0.0)
    for k in range(n_steps + 1):
        t = k * dt
        if oracle:
            o_cam, e = _oracle_errors(cfg, pose, ref)
        else:
            o_cam = est.o_cam_global
            e = compute_errors(ref, o_cam, est.theta_hat)
        s = sliding_surface(e)
        # while the line is out of view the previous command is held
        if oracle or est.missed == 0:
            try:
                cmd = control(e, cfg.params, w_ref, cfg.gains)
            except RankDeficient as exc:
                log.warning("t=%.3f: %s; holding previous command", t, exc)
        wheels = wheels_from_body(cmd, cfg.params)
        if cfg.wheel_limit is not None:
            wheels = clamp_wheels(wheels, cfg.wheel_limit)
            cmd = body_from_wheels(wheels, cfg.params)
        rows.append(TraceRow(t, pose, o_cam, e, s, cmd, wheels, lyapunov(s), e_cam))
        if k == n_steps:
            break

        pose = integrate_step(pose, cmd, dt)
        detections = _sense(cfg, pose, k + 1)
        if oracle:
            ref = ref.advance(dt)
            if detections[1].valid:
                try:
                    e_cam = e_cam_from_detection(detections[1])
                except DegenerateSegment:
                    pass
            continue
        try:
            est, ref = step_estimator(est, detections, cmd.w, dt, ref, mounts, R)
        except CollinearPoints as exc:
            raise StraightLineDetected(t + dt, str(exc)) from exc
        if est.missed > N_HOLD:
            raise LineLost(t + dt, f"no complete detection for {est.missed} steps")
        e_cam = est.e_cam
    return rows


def convergence_time(
    trace: Sequence[TraceRow], eps: float = CONVERGENCE_EPS, hold: float = CONVERGENCE_HOLD
) -> float | None:
    """Earliest time after which ``max |e_i| < eps`` for the rest of the trace.

    The remaining span must be at least ``hold`` seconds. Returns ``None``
    when the errors never settle (not converged).
    """
    if eps <= 0 or hold < 0:
        raise ValueError("eps must be positive and hold non-negative")
    if not trace:
        return None
    last_bad = -1
    for i, row in enumerate(trace):
        if row.e.max_abs() >= eps:
            last_bad = i
    first_good = last_bad + 1
    if first_good >= len(trace):
        return None
    t_conv = trace[first_good].t
    if trace[-1].t - t_conv < hold - 1e-9:
        return None
    return t_conv


def ratio_series(trace: Iterable[TraceRow]) -> list[tuple[float, float | None]]:
    """``(t, v/w)`` per row; ``None`` marks rows with ``|w| < 1e-9``."""
    return [(row.t, row.cmd.v / row.cmd.w if abs(row.cmd.w) >= 1e-9 else None) for row in trace]


def chattering_index(trace: Sequence[TraceRow]) -> float:
    """Mean absolute per-step change of the commanded turn rate."""
    if len(trace) < 2:
        return 0.0
    w = np.array([row.cmd.w for row in trace])
    return float(np.mean(np.abs(np.diff(w))))


@dataclass(frozen=True)
class SweepResult:
    gains: Gains
    convergence_time: float | None
    max_abs_s: float | None
    chattering_index: float | None
    error: str | None = None


def _sweep_cell(cfg: ScenarioConfig) -> SweepResult:
    try:
        trace = run_scenario(cfg)
    except SimulationAborted as exc:
        return SweepResult(cfg.gains, None, None, None, str(exc))
    return SweepResult(
        cfg.gains,
        convergence_time(trace),
        max(row.s.max_abs() for row in trace),
        chattering_index(trace),
    )


def sweep(base_cfg: ScenarioConfig, gain_grid: Sequence[Gains], workers: int = 1) -> list[SweepResult]:
    """Run ``base_cfg`` once per gain cell; results follow grid order.

    Aborted cells are recorded with their diagnostic and the sweep goes on.
    """
    if not gain_grid:
        raise ValueError("gain grid is empty")
    cfgs = [replace(base_cfg, gains=g) for g in gain_grid]
    if workers <= 1:
        return [_sweep_cell(c) for c in cfgs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_cell, cfgs))


def _fmt(x: float | None) -> str:
    return "" if x is None else format(x, ".17g")


def trace_to_csv(trace: Sequence[TraceRow], every: float | None = TRACE_EVERY, dt: float | None = None) -> str:
    """Serialize a trace, keeping one row per ``every`` seconds.

    ``dt`` defaults to the spacing of the first two rows.
    """
    stride = 1
    if every is not None and len(trace) > 1:
        step = dt if dt is not None else trace[1].t - trace[0].t
        stride = max(1, int(round(every / step)))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for row in trace[::stride]:
        writer.writerow([_fmt(v) for v in _flatten(row)])
    return buf.getvalue()


def write_trace_csv(path: str | Path, trace: Sequence[TraceRow], every: float | None = TRACE_EVERY) -> None:
    Path(path).write_text(trace_to_csv(trace, every), encoding="utf-8")


def read_trace_csv(path: str | Path) -> list[TraceRow]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"{path} is not a trace file (header {header})")
        return [_unflatten([float(v) for v in rec]) for rec in reader if rec]


def sweep_to_csv(results: Sequence[SweepResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k1", "k2", "k3", "phi", "convergence_time", "max_abs_s", "chattering_index", "error"])
    for r in results:
        g = r.gains
        writer.writerow(
            [_fmt(g.k1), _fmt(g.k2), _fmt(g.k3), _fmt(g.phi),
             _fmt(r.convergence_time), _fmt(r.max_abs_s), _fmt(r.chattering_index), r.error or ""]
        )  # fmt: skip
    return buf.getvalue()


FIGURE_COLUMNS = {
    5: ("t", "x", "y", "o_cam_x", "o_cam_y"),
    6: ("t", "e1", "e2", "e3"),
    7: ("t", "w_rw", "w_lw"),
    12: ("t", "ratio"),
}


def plot_data(trace: Sequence[TraceRow], fig: int) -> str:
    """CSV of the series behind one of the standard plots.

    5: trajectories of the robot center and O_cam; 6: tracking errors;
    7: wheel speeds; 12: the v/w ratio (blank where w is ~0).
    """
    if fig not in FIGURE_COLUMNS:
        raise ValueError(f"figure must be one of {sorted(FIGURE_COLUMNS)}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIGURE_COLUMNS[fig])
    if fig == 12:
        for t, ratio in ratio_series(trace):
            writer.writerow([_fmt(t), _fmt(ratio)])
        return buf.getvalue()
    for row in trace:
        if fig == 5:
            vals = (row.t, row.true_pose.x, row.true_pose.y, row.o_cam.x, row.o_cam.y)
        elif fig == 6:
            vals = (row.t, row.e.e1, row.e.e2, row.e.e3)
        else:
            vals = (row.t, row.wheels.w_rw, row.wheels.w_lw)
        writer.writerow([_fmt(v) for v in vals])
    return buf.getvalue()


def distance_to_center(trace: Iterable[TraceRow], center: Point2D) -> np.ndarray:
    return np.array([math.hypot(r.true_pose.x - center.x, r.true_pose.y - center.y) for r in trace])
