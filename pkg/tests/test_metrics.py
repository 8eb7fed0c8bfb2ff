import csv
import math

import numpy as np
import pytest

from render import Camera, FrameBundle, PreviousFrame, render
from scene import IDENTITY, Entity, GroundPlane, Pose, Role, Scene
from utils.metrics import (METRICS_COLUMNS, FlowField, RegionRollup, angular_speed, estimate_flow, region_stats,
                           write_region_csv)
from utils.tools import AverageMeter, config_hash, fnv1a_64


def _sinusoid(width=80, height=80):
    j, i = np.mgrid[0:height, 0:width]
    gray = 127.5 + 60.0 * np.sin(2.0 * math.pi * i / 16.0) + 60.0 * np.sin(2.0 * math.pi * j / 20.0)
    gray = np.floor(gray + 0.5).astype(np.uint8)
    return np.repeat(gray[..., None], 3, axis=2)


def test_identical_frames_have_zero_flow():
    frame = _sinusoid()
    flow = estimate_flow(frame, frame)
    assert flow.valid.any()
    assert not flow.flow.any()


def test_one_pixel_shift():
    prev = _sinusoid()
    curr = np.roll(prev, 1, axis=1)
    flow = estimate_flow(prev, curr, tau=1e-3, window=5)
    assert flow.valid.sum() > 500
    u = np.median(flow.flow[flow.valid][:, 0])
    v = np.median(flow.flow[flow.valid][:, 1])
    assert u == pytest.approx(1.0, abs=0.1)
    assert v == pytest.approx(0.0, abs=0.1)


def test_flow_rejects_bad_window():
    frame = _sinusoid()
    with pytest.raises(ValueError, match='odd'):
        estimate_flow(frame, frame, window=4)


def test_rotation_matches_analytic_motion():
    scene = Scene([Entity(1, GroundPlane(0.0), (0.1, 0.1, 0.1), Role.GROUND,
                          checker=0.5, albedo_alt=(0.9, 0.9, 0.9))])
    pitch = math.radians(-50.0)
    cam0 = Camera.fromFov(Pose((0.0, 0.0, 2.0), yaw=0.0, pitch=pitch), math.radians(90.0), 160, 120)
    cam1 = cam0.withPose(Pose((0.0, 0.0, 2.0), yaw=math.radians(0.2), pitch=pitch))
    b0 = render(scene, cam0)
    b1 = render(scene, cam1, PreviousFrame(cam0, scene.entityPoses()))
    flow = estimate_flow(b0, b1)

    sel = flow.valid & (b1.entity_id == 1)
    assert sel.sum() > 1000
    err = np.hypot(flow.flow[..., 0] - b1.motion[..., 0], flow.flow[..., 1] - b1.motion[..., 1])
    assert np.median(err[sel]) <= 0.25
    # the analytic field is not trivially small
    assert np.median(np.hypot(b1.motion[..., 0], b1.motion[..., 1])[sel]) > 0.05


def test_translation_matches_analytic_motion():
    scene = Scene([Entity(1, GroundPlane(0.0), (0.1, 0.1, 0.1), Role.GROUND,
                          checker=0.5, albedo_alt=(0.9, 0.9, 0.9))])
    pitch = math.radians(-50.0)
    cam0 = Camera.fromFov(Pose((0.0, 0.0, 2.0), pitch=pitch), math.radians(90.0), 160, 120)
    cam1 = cam0.withPose(Pose((0.02, 0.0, 2.0), pitch=pitch))
    b0 = render(scene, cam0)
    b1 = render(scene, cam1, PreviousFrame(cam0, scene.entityPoses()))
    flow = estimate_flow(b0, b1)

    sel = flow.valid & (b1.entity_id == 1)
    assert sel.sum() > 1000
    err = np.hypot(flow.flow[..., 0] - b1.motion[..., 0], flow.flow[..., 1] - b1.motion[..., 1])
    assert np.median(err[sel]) <= 0.5
    # ground depth varies across the frame, and so does the motion
    speed = np.hypot(b1.motion[..., 0], b1.motion[..., 1])[sel]
    assert np.percentile(speed, 90) > 2.0 * np.percentile(speed, 10)


def _bundle(depth):
    h, w = depth.shape
    return FrameBundle(np.zeros((h, w, 3), dtype=np.uint8), depth.astype(np.float32),
                       np.ones((h, w), dtype=np.int32), np.zeros((h, w, 2), dtype=np.float32))


def test_region_stats():
    depth = np.ones((10, 10))
    depth[:, 5:] = np.linspace(2.0, 5.0, 5)[None, :]
    mask = np.zeros((10, 10), dtype=bool)
    mask[:, :5] = True
    flow = FlowField(np.zeros((10, 10, 2)), np.ones((10, 10), dtype=bool), np.ones((10, 10)))
    camera = Camera(IDENTITY, 10, 10, 5.0)
    inside, outside, full = region_stats(_bundle(depth), flow, mask, camera, 1.0 / 30.0)
    assert (inside.region, outside.region, full.region) == ('inside', 'outside', 'full')
    assert inside.depth_range_m == 0.0
    assert outside.depth_range_m == pytest.approx(3.0)
    assert full.depth_range_m == pytest.approx(4.0)
    assert inside.mean_flow_deg_s == 0.0
    assert inside.fraction == 0.5 and full.pixels == 100


def test_region_without_valid_flow_is_flagged():
    depth = np.full((8, 8), np.inf)
    flow = FlowField(np.zeros((8, 8, 2)), np.zeros((8, 8), dtype=bool), np.zeros((8, 8)))
    stats = region_stats(_bundle(depth), flow, np.ones((8, 8), dtype=bool), Camera(IDENTITY, 8, 8, 4.0), 0.1)
    assert stats[0].flagged
    assert stats[0].depth_range_m is None


def test_angular_speed_matches_ray_angle():
    camera = Camera(IDENTITY, 12, 8, 4.0)
    flow = np.zeros((8, 12, 2))
    flow[..., 0] = 1.0
    speed = angular_speed(flow, camera, 0.5)

    j, i = np.mgrid[0:8, 0:12]
    d1 = np.stack(camera.directions(i + 0.5, j + 0.5), axis=-1)
    d0 = np.stack(camera.directions(i - 0.5, j + 0.5), axis=-1)
    expected = np.degrees(np.arccos(np.clip((d0 * d1).sum(axis=-1), -1.0, 1.0))) / 0.5
    np.testing.assert_allclose(speed, expected, rtol=1e-6)


def test_region_csv(tmp_path):
    depth = np.ones((8, 8))
    flow = FlowField(np.zeros((8, 8, 2)), np.ones((8, 8), dtype=bool), np.ones((8, 8)))
    mask = np.zeros((8, 8), dtype=bool)
    mask[2:6, 2:6] = True
    stats = region_stats(_bundle(depth), flow, mask, Camera(IDENTITY, 8, 8, 4.0), 0.1)
    path = str(tmp_path / 'metrics.csv')
    write_region_csv(path, {'config_hash': 'abc', 'condition': 'cp'}, [(3, s) for s in stats], ('inside', 'full'))
    with open(path) as f:
        lines = f.read().splitlines()
    assert lines[:2] == ['# config_hash: abc', '# condition: cp']
    rows = list(csv.reader(lines[2:]))
    assert tuple(rows[0]) == METRICS_COLUMNS
    assert [r[1] for r in rows[1:]] == ['inside', 'full']
    assert rows[1][4] == '16'


def test_rollup_skips_absent_flow():
    depth = np.full((8, 8), np.inf)
    flow = FlowField(np.zeros((8, 8, 2)), np.zeros((8, 8), dtype=bool), np.zeros((8, 8)))
    stats = region_stats(_bundle(depth), flow, np.ones((8, 8), dtype=bool), Camera(IDENTITY, 8, 8, 4.0), 0.1)
    rollup = RegionRollup()
    rollup.update(stats)
    summary = rollup.toDict()
    assert summary['frames'] == 1
    assert summary['regions']['inside']['mean_flow_deg_s'] is None
    assert summary['regions']['inside']['flow_frames_absent'] == 1


def test_average_meter():
    meter = AverageMeter()
    for v in (1.0, None, 3.0):
        meter.update(v)
    assert meter.avg == 2.0 and meter.min == 1.0 and meter.max == 3.0 and meter.skipped == 1


def test_fnv1a_known_values():
    assert fnv1a_64(b'') == 0xcbf29ce484222325
    assert fnv1a_64(b'a') == 0xaf63dc4c8601ec8c


def test_config_hash_ignores_excluded_keys():
    a = config_hash({'seed': 1, 'condition': 'cp'}, exclude=('condition',))
    b = config_hash({'condition': 'normal', 'seed': 1}, exclude=('condition',))
    c = config_hash({'seed': 2, 'condition': 'cp'}, exclude=('condition',))
    assert a == b != c
    assert len(a) == 16
