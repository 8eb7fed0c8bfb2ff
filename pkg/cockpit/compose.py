# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from render.camera import Camera
from render.raycast import FrameBundle, PreviousFrame, RayCaster, render
from scene.entities import Scene, intersect_quad
from scene.geometry import Pose, rotate_components, rotate_components_t
from .rig import CockpitRig


def capture_views(scene: Scene, anchor_pose: Pose, rig: CockpitRig, prev: PreviousFrame = None, num_workers=1):
    '''One world render per panel, from the eye along the panel's cardinal axis.'''
    cameras = rig.cameras(anchor_pose)
    prevs = [None] * len(cameras)
    if prev is not None and prev.head_pose is not None:
        prev_anchor = rig.anchorPose(prev.body_pose, prev.head_pose)
        prevs = [PreviousFrame(c, prev.entity_poses) for c in rig.cameras(prev_anchor)]
    if num_workers > 1 and len(cameras) > 1:
        with ThreadPoolExecutor(max_workers=min(num_workers, len(cameras))) as pool:
            return list(pool.map(lambda cp: render(scene, cp[0], cp[1]), zip(cameras, prevs)))
    return [render(scene, c, p) for c, p in zip(cameras, prevs)]


def panel_hits(rig: CockpitRig, anchor: Pose, camera: Camera):
    '''Nearest panel along each head ray: (t, panel index or -1, s, r).'''
    dx, dy, dz = camera.pixelRays()
    ox, oy, oz = camera.position
    shape = dx.shape
    t_best = np.full(shape, np.inf)
    index = np.full(shape, -1, dtype=np.int32)
    s_best = np.zeros(shape)
    r_best = np.zeros(shape)
    for k, panel in enumerate(rig.panels):
        quad = rig.worldQuad(panel, anchor)
        t, _, _, _, s, r = intersect_quad(quad, ox, oy, oz, dx, dy, dz)
        better = t < t_best
        t_best = np.where(better, t, t_best)
        index = np.where(better, k, index)
        s_best = np.where(better, s, s_best)
        r_best = np.where(better, r, r_best)
    return t_best, index, s_best, r_best, (dx, dy, dz)


def sample_bilinear(color, x, y):
    '''Bilinear lookup at continuous texel coordinates (texel centers at integers), clamped to the edge.'''
    h, w = color.shape[:2]
    x = np.clip(x, 0.0, w - 1.0)
    y = np.clip(y, 0.0, h - 1.0)
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (x - x0)[:, None]
    fy = (y - y0)[:, None]
    c = color.astype(np.float64)
    top = c[y0, x0] * (1.0 - fx) + c[y0, x1] * fx
    bottom = c[y1, x0] * (1.0 - fx) + c[y1, x1] * fx
    value = top * (1.0 - fy) + bottom * fy
    return np.clip(np.floor(value + 0.5), 0, 255).astype(np.uint8)


def frame_region_mask(head_camera: Camera, body_pose: Pose, head_pose: Pose, rig: CockpitRig):
    '''Pixels whose head ray meets a panel quad; depends on geometry only, never on the scene.'''
    if not rig.panels:
        return np.zeros((head_camera.height, head_camera.width), dtype=bool)
    t, _, _, _, _ = panel_hits(rig, rig.anchorPose(body_pose, head_pose), head_camera)
    return np.isfinite(t)


def compose(scene: Scene, body_pose: Pose, head_pose: Pose, rig: CockpitRig, head_camera: Camera,
            prev: PreviousFrame = None, num_workers=1, captures=None):
    '''
    World view with the textured panels drawn in.

    Panels are opaque and unlit, and depth-tested with their true ray distance: world
    geometry nearer than the panel hides it. Panel pixels store the panel distance as depth
    and the quad's own rigid motion.
    '''
    if not rig.panels:
        return render(scene, head_camera, prev, num_workers)
    world, world_t = RayCaster(scene, head_camera, prev, num_workers).trace()
    anchor = rig.anchorPose(body_pose, head_pose)
    if captures is None:
        captures = capture_views(scene, anchor, rig, prev, num_workers)

    t_panel, index, s, r, (dx, dy, dz) = panel_hits(rig, anchor, head_camera)
    show = np.isfinite(t_panel) & (t_panel <= world_t)
    color = world.color.copy()
    depth = world.depth.copy()
    ids = world.entity_id.copy()
    motion = world.motion.copy()

    prev_anchor = None
    if prev is not None and prev.head_pose is not None:
        prev_anchor = rig.anchorPose(prev.body_pose, prev.head_pose)

    for k, panel in enumerate(rig.panels):
        sel = show & (index == k)
        if not sel.any():
            continue
        tex = captures[k].color
        color[sel] = sample_bilinear(tex, s[sel] * tex.shape[1] - 0.5, r[sel] * tex.shape[0] - 0.5)
        depth[sel] = np.float32(panel.distance)
        ids[sel] = panel.entity_id
        motion[sel] = 0.0
        if prev_anchor is not None and not (prev_anchor == anchor and prev.camera.pose == head_camera.pose):
            motion[sel] = _panel_motion(head_camera, prev, anchor, prev_anchor, t_panel, dx, dy, dz, sel)
    return FrameBundle(color, depth, ids, motion)


def _panel_motion(camera, prev, anchor, prev_anchor, t, dx, dy, dz, sel):
    '''Image motion of points rigidly attached to the anchor frame.'''
    ox, oy, oz = camera.position
    x = ox + t[sel] * dx[sel]
    y = oy + t[sel] * dy[sel]
    z = oz + t[sel] * dz[sel]
    a = anchor.position
    x, y, z = rotate_components_t(anchor.rotation(), x - a[0], y - a[1], z - a[2])
    b = prev_anchor.position
    x, y, z = rotate_components(prev_anchor.rotation(), x, y, z)
    pu, pv, front = prev.camera.projectComponents(x + b[0], y + b[1], z + b[2])
    jj, ii = np.nonzero(sel)
    mu = np.where(front, ii + 0.5 - pu, 0.0)
    mv = np.where(front, jj + 0.5 - pv, 0.0)
    return np.stack([mu, mv], axis=1).astype(np.float32)
