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

'''
CPU ray caster producing color, depth, entity-id and analytic motion buffers.

Per-pixel work only uses elementwise arithmetic (+, -, *, /, sqrt, floor), so a
pixel's value does not depend on how the image is split into bands or culled.
'''

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from scene.entities import Scene, intersect_entity
from scene.geometry import Pose, rotate_components, rotate_components_t
from .camera import Camera


@dataclass
class FrameBundle(object):
    color: np.ndarray  # (h, w, 3) uint8
    depth: np.ndarray  # (h, w) float32, +inf on miss
    entity_id: np.ndarray  # (h, w) int32, 0 = none
    motion: np.ndarray  # (h, w, 2) float32, pixels/frame

    def __post_init__(self):
        h, w = self.depth.shape
        if self.color.shape != (h, w, 3) or self.entity_id.shape != (h, w) or self.motion.shape != (h, w, 2):
            raise ValueError('frame buffers disagree in size: color {} depth {} id {} motion {}'.format(
                self.color.shape, self.depth.shape, self.entity_id.shape, self.motion.shape))

    @property
    def height(self):
        return self.depth.shape[0]

    @property
    def width(self):
        return self.depth.shape[1]

    @staticmethod
    def empty(width, height, background=(0, 0, 0)):
        color = np.empty((height, width, 3), dtype=np.uint8)
        color[:] = np.asarray(background, dtype=np.uint8)
        return FrameBundle(color,
                           np.full((height, width), np.inf, dtype=np.float32),
                           np.zeros((height, width), dtype=np.int32),
                           np.zeros((height, width, 2), dtype=np.float32))


@dataclass(frozen=True)
class PreviousFrame(object):
    '''What the previous tick looked like: its camera and the pose of every entity.'''
    camera: Camera
    entity_poses: dict
    body_pose: Pose = None
    head_pose: Pose = None


@dataclass(frozen=True)
class ShadingModel(object):
    light_dir: tuple
    light_intensity: float
    ambient: float
    background: tuple

    @staticmethod
    def fromScene(scene: Scene):
        return ShadingModel(tuple(scene.light_dir), scene.light_intensity, scene.ambient, tuple(scene.background))

    def backgroundColor(self):
        return quantize(np.asarray(self.background, dtype=np.float64))


def quantize(rgb):
    '''Clamp to [0, 1] and round half up to 8 bits.'''
    return np.floor(np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def ramp_checker(x, y, period):
    '''Weight in [0, 1] of a checker with linear ramps between the two albedos (keeps image gradients).'''
    fx = x / period
    fy = y / period
    tx = np.abs(2.0 * (fx - np.floor(fx + 0.5)))
    ty = np.abs(2.0 * (fy - np.floor(fy + 0.5)))
    return tx * ty + (1.0 - tx) * (1.0 - ty)


class RayCaster(object):
    def __init__(self, scene: Scene, camera: Camera, prev: PreviousFrame = None, num_workers=1):
        self.scene = scene
        self.camera = camera
        self.prev = prev
        self.num_workers = max(1, int(num_workers))
        self.shading = ShadingModel.fromScene(scene)
        self.entities = [e for e in scene.entities if e.alive]

        # index 0 is "no hit"; entity k sits at k + 1
        n = len(self.entities)
        self.ids = np.zeros(n + 1, dtype=np.int32)
        self.albedo = np.zeros((n + 1, 3))
        self.albedo_alt = np.zeros((n + 1, 3))
        self.checker = np.zeros(n + 1)
        for k, e in enumerate(self.entities):
            self.ids[k + 1] = e.id
            self.albedo[k + 1] = e.albedo
            self.albedo_alt[k + 1] = e.albedo_alt
            self.checker[k + 1] = e.checker
        self.bounds = [self._screenBounds(e) for e in self.entities]

        self.camera_static = prev is not None and prev.camera.pose == camera.pose

    def _screenBounds(self, entity):
        '''Conservative (j0, j1, i0, i1) pixel rectangle of the entity, None when off screen.'''
        cam = self.camera
        full = (0, cam.height, 0, cam.width)
        sphere = entity.boundingSphere()
        if sphere is None:
            return full
        center, r = sphere
        px, py, pz = cam.position
        lx, ly, lz = rotate_components_t(cam.rotation, center[0] - px, center[1] - py, center[2] - pz)
        if lx + r <= 0.0:
            return None
        if lx - r <= 1e-6:
            return full
        xs = (lx - r, lx + r)
        ry = [y / x for y in (ly - r, ly + r) for x in xs]
        rz = [z / x for z in (lz - r, lz + r) for x in xs]
        u_lo, u_hi = cam.cx - cam.fx * max(ry), cam.cx - cam.fx * min(ry)
        v_lo, v_hi = cam.cy - cam.fy * max(rz), cam.cy - cam.fy * min(rz)
        i0 = max(0, int(math.floor(u_lo)) - 1)
        i1 = min(cam.width, int(math.ceil(u_hi)) + 1)
        j0 = max(0, int(math.floor(v_lo)) - 1)
        j1 = min(cam.height, int(math.ceil(v_hi)) + 1)
        if i0 >= i1 or j0 >= j1:
            return None
        return j0, j1, i0, i1

    def _traceBand(self, j0, j1, out):
        cam = self.camera
        dx, dy, dz = cam.pixelRays(j0, j1)
        ox, oy, oz = cam.position
        shape = dx.shape
        t_best = np.full(shape, np.inf)
        idx = np.zeros(shape, dtype=np.int32)
        nx = np.zeros(shape)
        ny = np.zeros(shape)
        nz = np.zeros(shape)

        for k, (e, b) in enumerate(zip(self.entities, self.bounds)):
            if b is None:
                continue
            r0, r1 = max(b[0], j0), min(b[1], j1)
            if r0 >= r1:
                continue
            sub = (slice(r0 - j0, r1 - j0), slice(b[2], b[3]))
            t, ex, ey, ez = intersect_entity(e, ox, oy, oz, dx[sub], dy[sub], dz[sub])
            better = t < t_best[sub]
            if not better.any():
                continue
            t_best[sub] = np.where(better, t, t_best[sub])
            idx[sub] = np.where(better, k + 1, idx[sub])
            nx[sub] = np.where(better, ex, nx[sub])
            ny[sub] = np.where(better, ey, ny[sub])
            nz[sub] = np.where(better, ez, nz[sub])

        hit = idx > 0
        t = np.where(hit, t_best, 0.0)
        hx, hy, hz = ox + t * dx, oy + t * dy, oz + t * dz

        # two-sided surfaces: face the normal towards the viewer
        facing = nx * dx + ny * dy + nz * dz
        flip = np.where(facing > 0.0, -1.0, 1.0)
        lx, ly, lz = self.shading.light_dir
        lam = np.maximum(0.0, flip * (nx * lx + ny * ly + nz * lz))
        light = self.shading.ambient + self.shading.light_intensity * lam

        albedo = self.albedo[idx]
        period = self.checker[idx]
        pattern = period > 0.0
        if pattern.any():
            w = ramp_checker(hx[pattern], hy[pattern], period[pattern])
            a = albedo[pattern]
            albedo[pattern] = a + (self.albedo_alt[idx[pattern]] - a) * w[:, None]
        rgb = quantize(albedo * light[..., None])
        rgb[~hit] = self.shading.backgroundColor()

        rows = slice(j0, j1)
        out['t'][rows] = np.where(hit, t_best, np.inf)
        out['color'][rows] = rgb
        out['depth'][rows] = np.where(hit, t_best, np.inf).astype(np.float32)
        out['entity_id'][rows] = self.ids[idx]
        if self.prev is not None:
            out['motion'][rows] = self._motion(j0, j1, idx, hx, hy, hz)

    def _motion(self, j0, j1, idx, hx, hy, hz):
        cam = self.camera
        h, w = idx.shape
        motion = np.zeros((h, w, 2))
        u = np.arange(w, dtype=np.float64) + 0.5
        v = np.arange(j0, j1, dtype=np.float64) + 0.5
        uu, vv = np.meshgrid(u, v)
        for k in np.unique(idx):
            if k == 0:
                continue
            e = self.entities[k - 1]
            prev_pose = self.prev.entity_poses.get(e.id)
            if prev_pose is None:
                continue
            static = prev_pose == e.pose
            if static and self.camera_static:
                continue
            sel = idx == k
            x, y, z = hx[sel], hy[sel], hz[sel]
            if not static:
                # body-frame coordinates under the current pose, replayed through the previous pose
                p = e.pose.position
                x, y, z = rotate_components_t(e.pose.rotation(), x - p[0], y - p[1], z - p[2])
                q = prev_pose.position
                x, y, z = rotate_components(prev_pose.rotation(), x, y, z)
                x, y, z = x + q[0], y + q[1], z + q[2]
            pu, pv, front = self.prev.camera.projectComponents(x, y, z)
            mu = np.where(front, uu[sel] - pu, 0.0)
            mv = np.where(front, vv[sel] - pv, 0.0)
            motion[sel, 0] = mu
            motion[sel, 1] = mv
        return motion.astype(np.float32)

    def trace(self):
        '''Full-resolution buffers plus the float64 ray distances.'''
        cam = self.camera
        h, w = cam.height, cam.width
        out = {'t': np.empty((h, w)),
               'color': np.empty((h, w, 3), dtype=np.uint8),
               'depth': np.empty((h, w), dtype=np.float32),
               'entity_id': np.empty((h, w), dtype=np.int32),
               'motion': np.zeros((h, w, 2), dtype=np.float32)}
        edges = np.linspace(0, h, min(h, self.num_workers) + 1).astype(int)
        bands = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        if len(bands) == 1:
            self._traceBand(bands[0][0], bands[0][1], out)
        else:
            with ThreadPoolExecutor(max_workers=self.num_workers) as pool:
                list(pool.map(lambda band: self._traceBand(band[0], band[1], out), bands))
        bundle = FrameBundle(out['color'], out['depth'], out['entity_id'], out['motion'])
        return bundle, out['t']


def render(scene: Scene, camera: Camera, prev: PreviousFrame = None, num_workers=1):
    bundle, _ = RayCaster(scene, camera, prev, num_workers).trace()
    return bundle
