import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circletrack.geometry import Circle, Point2D, Pose2D, rigid_transform
from circletrack.scenarios import PAPER_FOOTPRINT
from circletrack.virtual_pixy import (
    DEVICE_GRID,
    SensorFrameSpec,
    SensorMount,
    default_mounts,
    detect_line,
    lens_center_in_robot,
    robot_to_sensor,
    sensor_pose_in_robot,
    sensor_to_robot,
)

PATH = Circle(Point2D(2.0, 2.0), 1.0)
SMALL = SensorFrameSpec()


def test_sensor_origin_lands_on_mount_offset():
    p = sensor_to_robot(Point2D(0, 0), SensorMount(1, 0.1, 0.2))
    assert (p.x, p.y) == pytest.approx((0.1, 0.2), abs=1e-15)
    p = sensor_to_robot(Point2D(0, 0), SensorMount(3, 0.1, 0.2))
    assert (p.x, p.y) == pytest.approx((-0.1, 0.2), abs=1e-15)


def test_sensor_point_follows_printed_matrices():
    # (-c_y + d_x, -c_x + d_y)
    p = sensor_to_robot(Point2D(0.025, 0.020), SensorMount(1, 0.1, 0.2))
    assert (p.x, p.y) == pytest.approx((0.08, 0.175), abs=1e-15)


def test_sensor_pose_is_rotation_by_minus_quarter_turn():
    pose = sensor_pose_in_robot(SensorMount(2, 0.3, -0.1))
    assert (pose.x, pose.y, pose.theta) == (0.3, -0.1, -math.pi / 2)


@given(st.floats(-1, 1), st.floats(-1, 1), st.sampled_from([1, 2, 3]))
def test_robot_to_sensor_inverts(x, y, idx):
    m = SensorMount(idx, 0.12, 0.05)
    q = sensor_to_robot(robot_to_sensor(Point2D(x, y), m), m)
    assert (q.x, q.y) == pytest.approx((x, y), abs=1e-14)


def test_default_mount_lens_centers_lie_on_radius_R_arc():
    for spec in (SMALL, PAPER_FOOTPRINT):
        lenses = [lens_center_in_robot(m, spec) for m in default_mounts(spec, 1.0)]
        assert (lenses[1].x, lenses[1].y) == pytest.approx((0, 0), abs=1e-15)
        assert lenses[0].x == pytest.approx(0.15) and lenses[2].x == pytest.approx(-0.15)
        for p in lenses:
            assert math.hypot(p.x, p.y - 1.0) == pytest.approx(1.0, abs=1e-12)


def test_on_circle_tangent_pose_gives_symmetric_chord():
    robot = Pose2D(2.0, 1.0, 0.0)
    d = detect_line(PATH, robot, default_mounts(SMALL, 1.0)[1], SMALL)
    assert d.valid
    assert {d.endpoint_a.y, d.endpoint_b.y} == {0.0, SMALL.length_l}
    assert d.endpoint_b.x - d.endpoint_a.x == pytest.approx(0.0, abs=1e-15)


def test_circle_far_from_footprint_is_invalid():
    robot = Pose2D(2.0, -0.0, 0.0)  # 1 m from the circle
    for m in default_mounts(SMALL, 1.0):
        assert not detect_line(PATH, robot, m, SMALL).valid


def raster_oracle(path, robot, mount, spec, step=1e-5):
    """Sample the circle every ``step`` meters and keep the in-footprint run
    whose middle sample is nearest the footprint center."""
    n = int(math.ceil(2 * math.pi * path.radius / step))
    phi = np.arange(n) * (2 * math.pi / n)
    gx = path.center.x + path.radius * np.cos(phi)
    gy = path.center.y + path.radius * np.sin(phi)
    c, s = math.cos(robot.theta), math.sin(robot.theta)
    rx = c * (gx - robot.x) + s * (gy - robot.y)
    ry = -s * (gx - robot.x) + c * (gy - robot.y)
    ox = -mount.d_x if mount.index == 3 else mount.d_x
    # invert (x, y) = (-c_y + ox, -c_x + d_y)
    cx, cy = mount.d_y - ry, ox - rx
    inside = (cx >= 0) & (cx <= spec.width_w) & (cy >= 0) & (cy <= spec.length_l)
    if not inside.any() or inside.all():
        return None
    start = int(np.argmin(inside))  # an outside sample, so runs do not wrap
    idx = np.roll(np.arange(n), -start)
    flags = inside[idx]
    runs, i = [], 0
    while i < n:
        if flags[i]:
            j = i
            while j + 1 < n and flags[j + 1]:
                j += 1
            runs.append((idx[i], idx[j], idx[(i + j) // 2]))
            i = j + 1
        else:
            i += 1
    fx, fy = spec.width_w / 2, spec.length_l / 2
    a, b, _ = min(runs, key=lambda r: math.hypot(cx[r[2]] - fx, cy[r[2]] - fy))
    return (cx[a], cy[a]), (cx[b], cy[b])


@pytest.mark.parametrize("spec", [SMALL, PAPER_FOOTPRINT, SensorFrameSpec(0.6, 0.4)])
def test_detection_matches_raster_oracle_at_paper_start(spec):
    robot = Pose2D(1.8, 0.8, math.radians(1.0))
    for m in default_mounts(spec, 1.0):
        d = detect_line(PATH, robot, m, spec)
        oracle = raster_oracle(PATH, robot, m, spec)
        assert d.valid == (oracle is not None)
        if oracle is None:
            continue
        got = sorted([(d.endpoint_a.x, d.endpoint_a.y), (d.endpoint_b.x, d.endpoint_b.y)])
        for (gx, gy), (ox, oy) in zip(got, sorted(oracle)):
            assert math.hypot(gx - ox, gy - oy) < 1e-4


@pytest.mark.parametrize("seed", range(6))
def test_detection_matches_raster_oracle_random_poses(seed):
    rng = np.random.default_rng(seed)
    spec = SensorFrameSpec(0.3, 0.2)
    ang = rng.uniform(0, 2 * math.pi)
    rad = 1.0 + rng.uniform(-0.15, 0.15)
    robot = Pose2D(2 + rad * math.cos(ang), 2 + rad * math.sin(ang), rng.uniform(-math.pi, math.pi))
    for m in default_mounts(spec, 1.0):
        d = detect_line(PATH, robot, m, spec)
        oracle = raster_oracle(PATH, robot, m, spec)
        assert d.valid == (oracle is not None)
        if oracle is not None:
            got = sorted([(d.endpoint_a.x, d.endpoint_a.y), (d.endpoint_b.x, d.endpoint_b.y)])
            for (gx, gy), (ox, oy) in zip(got, sorted(oracle)):
                assert math.hypot(gx - ox, gy - oy) < 1e-4


near_circle_poses = st.builds(
    lambda a, dr, th: Pose2D(2 + (1 + dr) * math.cos(a), 2 + (1 + dr) * math.sin(a), th),
    st.floats(0, 2 * math.pi),
    st.floats(-0.3, 0.3),
    st.floats(-math.pi, math.pi),
)


@settings(max_examples=300)
@given(near_circle_poses, st.sampled_from([SMALL, SensorFrameSpec(0.3, 0.2), PAPER_FOOTPRINT]))
def test_detection_geometry_invariants(robot, spec):
    for m in default_mounts(spec, 1.0):
        d = detect_line(PATH, robot, m, spec)
        if not d.valid:
            continue
        w, l = spec.width_w, spec.length_l
        for p in (d.endpoint_a, d.endpoint_b, d.midpoint_c):
            assert 0 <= p.x <= w and 0 <= p.y <= l
            # image -> robot -> global lands back on the path
            g = rigid_transform(sensor_to_robot(p, m), robot)
            assert math.hypot(g.x - 2, g.y - 2) == pytest.approx(1.0, abs=1e-9)
        # A is the endpoint with the smaller image y
        assert (d.endpoint_a.y, d.endpoint_a.x) <= (d.endpoint_b.y, d.endpoint_b.x)
        # C is the arc midpoint: equidistant from A and B
        ca = math.dist((d.midpoint_c.x, d.midpoint_c.y), (d.endpoint_a.x, d.endpoint_a.y))
        cb = math.dist((d.midpoint_c.x, d.midpoint_c.y), (d.endpoint_b.x, d.endpoint_b.y))
        assert ca == pytest.approx(cb, abs=1e-9)
        # chord length against the distance from the center to the chord line
        center = robot_to_sensor(
            Point2D(
                math.cos(robot.theta) * (2 - robot.x) + math.sin(robot.theta) * (2 - robot.y),
                -math.sin(robot.theta) * (2 - robot.x) + math.cos(robot.theta) * (2 - robot.y),
            ),
            m,
        )
        ax, ay = d.endpoint_a.x, d.endpoint_a.y
        bx, by = d.endpoint_b.x, d.endpoint_b.y
        ab = math.hypot(bx - ax, by - ay)
        dist = abs((bx - ax) * (ay - center.y) - (ax - center.x) * (by - ay)) / ab
        assert ab == pytest.approx(2 * math.sqrt(max(0.0, 1.0 - dist * dist)), abs=1e-6)


def test_tangent_touch_is_invalid():
    # circle touching the footprint edge y = 0 of sensor 2 from outside
    spec = SMALL
    m = SensorMount(2, 0.0, 0.0)
    # footprint covers robot x in [-l, 0]; the circle touches x = 0 from x > 0
    robot = Pose2D(0.0, 0.0, 0.0)
    path = Circle(Point2D(1.0, -0.02), 1.0)
    assert not detect_line(path, robot, m, spec).valid


def test_detection_is_deterministic_for_seed():
    spec = SensorFrameSpec(0.3, 0.2, noise_std=0.002)
    robot = Pose2D(2.0, 1.02, 0.1)
    m = default_mounts(spec, 1.0)[1]
    d1 = detect_line(PATH, robot, m, spec, rng_seed=7)
    d2 = detect_line(PATH, robot, m, spec, rng_seed=7)
    d3 = detect_line(PATH, robot, m, spec, rng_seed=8)
    assert d1 == d2
    assert d1 != d3
    for p in (d1.endpoint_a, d1.endpoint_b, d1.midpoint_c):
        assert 0 <= p.x <= spec.width_w and 0 <= p.y <= spec.length_l


def test_quantization_reports_pixel_centers():
    spec = SensorFrameSpec(0.3, 0.2, quantize=DEVICE_GRID)
    d = detect_line(PATH, Pose2D(2.0, 1.02, 0.1), default_mounts(spec, 1.0)[1], spec)
    cols, rows = DEVICE_GRID
    for p in (d.endpoint_a, d.endpoint_b, d.midpoint_c):
        i = p.x / (spec.width_w / cols) - 0.5
        j = p.y / (spec.length_l / rows) - 0.5
        assert i == pytest.approx(round(i), abs=1e-9) and 0 <= round(i) < cols
        assert j == pytest.approx(round(j), abs=1e-9) and 0 <= round(j) < rows


@pytest.mark.parametrize(
    "kwargs",
    [dict(width_w=0.0), dict(length_l=-1.0), dict(quantize=(1, 51)), dict(noise_std=-0.1)],
)
def test_sensor_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SensorFrameSpec(**kwargs)


def test_mount_index_validation():
    with pytest.raises(ValueError):
        SensorMount(4, 0.0, 0.0)
