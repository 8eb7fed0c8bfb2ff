import math

import numpy as np
import pytest

from cockpit import (DIRECTION_YAW, DIRECTIONS, CockpitConfig, compose, frame_angular_extents, frame_region_mask,
                     make_cockpit_rig)
from render import Camera, PreviousFrame, render
from scene import IDENTITY, PANEL_ID_BASE, Box, Entity, Pose, Role, Scene, build_racing_scene, default_track_spec
from utils.metrics import decoupling_report, depth_range, fidelity_report, mask_fraction

EYE = Pose((0.0, 0.0, 1.22))


def _head_camera(width=320, height=240):
    return Camera.fromFov(IDENTITY, math.radians(90.0), width, height)


@pytest.fixture(scope='module')
def track_scene():
    return build_racing_scene(default_track_spec(), 3)


def test_angular_extents():
    alpha, beta = frame_angular_extents(0.25, (math.radians(90.0), math.radians(90.0)))
    assert math.tan(alpha) == pytest.approx(0.5)
    assert math.tan(beta) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        frame_angular_extents(1.0, (1.0, 1.0))


def test_capture_resolution_snaps_to_head_pixels():
    rig = make_cockpit_rig(CockpitConfig(), _head_camera())
    assert (rig.capture_width, rig.capture_height) == (176, 132)
    assert [p.entity_id for p in rig.panels] == [PANEL_ID_BASE + i for i in range(4)]


@pytest.mark.parametrize('direction', DIRECTIONS)
def test_mask_occupancy_per_direction(direction):
    camera = _head_camera()
    rig = make_cockpit_rig(CockpitConfig(coverage=0.30), camera)
    body = Pose((0.0, 0.0, 0.0))
    head = Pose(EYE.position, yaw=DIRECTION_YAW[direction])
    mask = frame_region_mask(camera.withPose(head), body, head, rig)
    assert mask_fraction(mask) == pytest.approx(0.30, abs=0.01)


def test_disabled_panels_match_plain_render(track_scene):
    camera = _head_camera(64, 48).withPose(EYE)
    rig = make_cockpit_rig(CockpitConfig(enabled=()), camera)
    composed = compose(track_scene, IDENTITY, EYE, rig, camera)
    plain = render(track_scene, camera)
    assert np.array_equal(composed.color, plain.color)
    assert np.array_equal(composed.depth, plain.depth)


def test_see_through_fidelity(track_scene):
    camera = _head_camera(160, 120).withPose(EYE)
    rig = make_cockpit_rig(CockpitConfig(), camera)
    report = fidelity_report(track_scene, IDENTITY, EYE, rig, camera)
    assert report.pixels['Front'] > 0
    assert report.per_panel['Front'] <= 1
    assert report.overall <= 1


def test_panel_depth_is_flat(track_scene):
    camera = _head_camera(80, 60).withPose(EYE)
    rig = make_cockpit_rig(CockpitConfig(), camera)
    bundle = compose(track_scene, IDENTITY, EYE, rig, camera)
    inside = np.isin(bundle.entity_id, rig.panelIds())
    assert inside.any()
    assert depth_range(bundle.depth, inside) == 0.0
    plain = render(track_scene, camera)
    assert depth_range(plain.depth, inside) > 1.0


def _head_poses():
    return [Pose(EYE.position, yaw=y, pitch=p) for y, p in [(0.0, 0.0), (0.3, 0.0), (-0.5, 0.1), (1.2, -0.2),
                                                              (2.5, 0.05)]]


def test_body_anchor_decouples_head(track_scene):
    camera = _head_camera(64, 48)
    rig = make_cockpit_rig(CockpitConfig(anchor='Body'), camera)
    hashes = decoupling_report(track_scene, IDENTITY, _head_poses(), rig)
    assert set(hashes) == set(DIRECTIONS)
    for direction in DIRECTIONS:
        assert len(hashes[direction]) == 1


def test_head_anchor_follows_head(track_scene):
    camera = _head_camera(64, 48)
    rig = make_cockpit_rig(CockpitConfig(anchor='Head'), camera)
    hashes = decoupling_report(track_scene, IDENTITY, _head_poses(), rig)
    for direction in DIRECTIONS:
        assert len(hashes[direction]) >= 2


def test_world_geometry_occludes_panels():
    camera = _head_camera(64, 48).withPose(EYE)
    rig = make_cockpit_rig(CockpitConfig(), camera)
    # a wall 0.5 m ahead, nearer than the 1 m panels
    scene = Scene([Entity(1, Box((0.5, -5.0, 0.0), (0.6, 5.0, 5.0)), role=Role.WALL)])
    bundle = compose(scene, IDENTITY, EYE, rig, camera)
    assert not np.isin(bundle.entity_id, rig.panelIds()).any()


def test_invalid_coverage():
    with pytest.raises(ValueError, match='0 < c < 1'):
        make_cockpit_rig(CockpitConfig(coverage=1.5), _head_camera())


def test_head_anchor_mask_ignores_head_orientation():
    camera = _head_camera(64, 48)
    rig = make_cockpit_rig(CockpitConfig(anchor='Head'), camera)
    poses = _head_poses() + [Pose(EYE.position, yaw=0.4, pitch=-0.1, roll=0.2)]
    masks = [frame_region_mask(camera.withPose(h), IDENTITY, h, rig) for h in poses]
    assert masks[0].any()
    for mask in masks[1:]:
        assert np.array_equal(mask, masks[0])


def test_composed_panel_pixels_match_region_mask(track_scene):
    camera = _head_camera(64, 48)
    rig = make_cockpit_rig(CockpitConfig(), camera)
    for head in _head_poses()[:3]:
        bundle = compose(track_scene, IDENTITY, head, rig, camera.withPose(head))
        mask = frame_region_mask(camera.withPose(head), IDENTITY, head, rig)
        assert np.array_equal(np.isin(bundle.entity_id, rig.panelIds()), mask)


def test_occupancy_grows_with_coverage():
    camera = _head_camera().withPose(EYE)
    fractions = []
    for c in (0.1, 0.2, 0.3, 0.4, 0.5):
        rig = make_cockpit_rig(CockpitConfig(coverage=c), camera)
        fractions.append(mask_fraction(frame_region_mask(camera, IDENTITY, EYE, rig)))
    assert all(a < b for a, b in zip(fractions, fractions[1:]))


def _yaw_flow(camera, delta):
    '''Image motion of static points seen by a camera that yawed by delta about its own center.'''
    v, u = np.mgrid[0:camera.height, 0:camera.width] + 0.5
    a = -(u - camera.cx) / camera.fx
    b = -(v - camera.cy) / camera.fy
    den = math.cos(delta) - a * math.sin(delta)
    pu = camera.cx - camera.fx * (math.sin(delta) + a * math.cos(delta)) / den
    pv = camera.cy - camera.fy * b / den
    return np.stack([u - pu, v - pv], axis=-1)


@pytest.mark.parametrize('anchor', ['Body', 'Head'])
def test_panel_motion_under_head_turn(track_scene, anchor):
    delta = 0.02
    camera = _head_camera(64, 48)
    rig = make_cockpit_rig(CockpitConfig(anchor=anchor), camera)
    head0 = EYE
    head1 = Pose(EYE.position, yaw=delta)
    prev = PreviousFrame(camera.withPose(head0), track_scene.entityPoses(), IDENTITY, head0)
    bundle = compose(track_scene, IDENTITY, head1, rig, camera.withPose(head1), prev)
    panel = np.isin(bundle.entity_id, rig.panelIds())
    assert panel.any()
    if anchor == 'Body':
        # panels stay put in the world, so they flow like any static point
        expected = _yaw_flow(camera, delta)[panel]
        assert np.abs(bundle.motion[panel] - expected).max() <= 1e-3
        assert np.abs(bundle.motion[panel]).max() > 0.1
    else:
        assert np.abs(bundle.motion[panel]).max() <= 1e-3
