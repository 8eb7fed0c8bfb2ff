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

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .geometry import IDENTITY, Pose, rotate_components, rotate_components_t

T_EPS = 1e-9

# Scene entity ids live below this; cockpit panels are numbered from it.
PANEL_ID_BASE = 1000000

_SUN = (0.3, 0.2, 0.93)
DEFAULT_LIGHT_DIR = tuple(c / math.sqrt(sum(v * v for v in _SUN)) for c in _SUN)


class Role(str, Enum):
    COIN = 'Coin'
    BARRIER = 'Barrier'
    WALL = 'Wall'
    GROUND = 'Ground'
    ROBOT = 'Robot'
    COCKPIT_PANEL = 'CockpitPanel'
    DECOR = 'Decor'


@dataclass(frozen=True)
class Sphere(object):
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError('sphere radius must be > 0, got {}'.format(self.radius))


@dataclass(frozen=True)
class Box(object):
    min: tuple
    max: tuple

    def __post_init__(self):
        if not all(a < b for a, b in zip(self.min, self.max)):
            raise ValueError('box min must be < max componentwise, got {} / {}'.format(self.min, self.max))


@dataclass(frozen=True)
class GroundPlane(object):
    height: float = 0.0


@dataclass(frozen=True)
class Quad(object):
    '''Planar parallelogram; corners ordered c0, c1, c2, c3 around the rim.'''
    corners: tuple

    def __post_init__(self):
        c = np.asarray(self.corners, dtype=np.float64)
        if c.shape != (4, 3):
            raise ValueError('quad needs 4 corners of 3 components')
        gap = np.abs(c[0] + (c[1] - c[0]) + (c[3] - c[0]) - c[2]).max()
        scale = max(1.0, float(np.abs(c).max()))
        if gap > 1e-6 * scale:
            raise ValueError('quad corners are not a planar parallelogram (gap {:.3g})'.format(gap))
        object.__setattr__(self, 'corners', tuple(tuple(float(v) for v in row) for row in c))

    def frame(self):
        c = np.asarray(self.corners, dtype=np.float64)
        e1 = c[1] - c[0]
        e2 = c[3] - c[0]
        n = np.cross(e1, e2)
        n = n / math.sqrt(float(n @ n))
        return c[0], e1, e2, n


@dataclass(frozen=True)
class Entity(object):
    id: int
    shape: object
    albedo: tuple = (0.5, 0.5, 0.5)
    role: Role = Role.DECOR
    pose: Pose = IDENTITY
    alive: bool = True
    # ground pattern: period in meters (0 = flat albedo) and the second albedo
    checker: float = 0.0
    albedo_alt: tuple = (0.0, 0.0, 0.0)
    # compound objects (robot head) point at their owning entity
    parent: int = 0

    def __post_init__(self):
        if not all(0.0 <= a <= 1.0 for a in self.albedo):
            raise ValueError('entity {}: albedo must lie in [0, 1]^3, got {}'.format(self.id, self.albedo))

    @property
    def owner(self):
        return self.parent if self.parent else self.id

    def boundingSphere(self):
        '''World-space (center, radius), or None for unbounded shapes.'''
        shape = self.shape
        if isinstance(shape, Sphere):
            center, radius = np.asarray(shape.center, dtype=np.float64), shape.radius
        elif isinstance(shape, Box):
            lo, hi = np.asarray(shape.min, dtype=np.float64), np.asarray(shape.max, dtype=np.float64)
            center = 0.5 * (lo + hi)
            radius = 0.5 * float(np.linalg.norm(hi - lo))
        elif isinstance(shape, Quad):
            c = np.asarray(shape.corners, dtype=np.float64)
            center = c.mean(axis=0)
            radius = float(np.linalg.norm(c - center, axis=1).max())
        else:
            return None
        if not self.pose.isIdentity():
            center = self.pose.transformPoint(center)
        return center, radius


def _intersect_sphere(shape, ox, oy, oz, dx, dy, dz):
    cx, cy, cz = shape.center
    px, py, pz = ox - cx, oy - cy, oz - cz
    b = px * dx + py * dy + pz * dz
    c = px * px + py * py + pz * pz - shape.radius * shape.radius
    disc = b * b - c
    hit = disc >= 0.0
    sq = np.sqrt(np.where(hit, disc, 0.0))
    t0 = -b - sq
    t1 = -b + sq
    t = np.where(t0 > T_EPS, t0, np.where(t1 > T_EPS, t1, np.inf))
    t = np.where(hit, t, np.inf)
    fin = np.isfinite(t)
    ts = np.where(fin, t, 0.0)
    inv_r = 1.0 / shape.radius
    nx = (px + ts * dx) * inv_r
    ny = (py + ts * dy) * inv_r
    nz = (pz + ts * dz) * inv_r
    return t, nx, ny, nz


def _slab(lo, hi, o, d):
    zero = d == 0.0
    safe = np.where(zero, 1.0, d)
    t1 = (lo - o) / safe
    t2 = (hi - o) / safe
    near = np.minimum(t1, t2)
    far = np.maximum(t1, t2)
    inside = (o >= lo) & (o <= hi)
    near = np.where(zero, np.where(inside, -np.inf, np.inf), near)
    far = np.where(zero, np.where(inside, np.inf, -np.inf), far)
    return near, far


def _intersect_box(shape, ox, oy, oz, dx, dy, dz):
    nx0, fx0 = _slab(shape.min[0], shape.max[0], ox, dx)
    ny0, fy0 = _slab(shape.min[1], shape.max[1], oy, dy)
    nz0, fz0 = _slab(shape.min[2], shape.max[2], oz, dz)
    t_near = np.maximum(np.maximum(nx0, ny0), nz0)
    t_far = np.minimum(np.minimum(fx0, fy0), fz0)
    hit = (t_near <= t_far) & (t_far > T_EPS)
    from_inside = t_near <= T_EPS
    t = np.where(hit, np.where(from_inside, t_far, t_near), np.inf)

    # face normal of the entry slab (exit slab when starting inside)
    ax = np.zeros(t.shape, dtype=np.int8)
    ax = np.where(ny0 > nx0, 1, ax)
    ax = np.where(nz0 > np.maximum(nx0, ny0), 2, ax)
    ax_out = np.zeros(t.shape, dtype=np.int8)
    ax_out = np.where(fy0 < fx0, 1, ax_out)
    ax_out = np.where(fz0 < np.minimum(fx0, fy0), 2, ax_out)
    ax = np.where(from_inside, ax_out, ax)
    sign_in = np.where(from_inside, 1.0, -1.0)
    nx = np.where(ax == 0, sign_in * np.sign(dx), 0.0)
    ny = np.where(ax == 1, sign_in * np.sign(dy), 0.0)
    nz = np.where(ax == 2, sign_in * np.sign(dz), 0.0)
    return t, nx, ny, nz


def _intersect_plane(shape, ox, oy, oz, dx, dy, dz):
    zero = dz == 0.0
    t = (shape.height - oz) / np.where(zero, 1.0, dz)
    t = np.where(zero | ~(t > T_EPS), np.inf, t)
    ones = np.ones(t.shape)
    return t, 0.0 * ones, 0.0 * ones, ones


def intersect_quad(shape, ox, oy, oz, dx, dy, dz):
    '''Returns t, normal components and the parallelogram coordinates (s, r) in [0, 1]^2.'''
    c0, e1, e2, n = shape.frame()
    denom = dx * n[0] + dy * n[1] + dz * n[2]
    zero = denom == 0.0
    wx, wy, wz = c0[0] - ox, c0[1] - oy, c0[2] - oz
    t = (wx * n[0] + wy * n[1] + wz * n[2]) / np.where(zero, 1.0, denom)
    qx = ox + t * dx - c0[0]
    qy = oy + t * dy - c0[1]
    qz = oz + t * dz - c0[2]
    a1 = qx * e1[0] + qy * e1[1] + qz * e1[2]
    a2 = qx * e2[0] + qy * e2[1] + qz * e2[2]
    g11 = float(e1 @ e1)
    g22 = float(e2 @ e2)
    g12 = float(e1 @ e2)
    det = g11 * g22 - g12 * g12
    s = (g22 * a1 - g12 * a2) / det
    r = (g11 * a2 - g12 * a1) / det
    hit = ~zero & (t > T_EPS) & (s >= 0.0) & (s <= 1.0) & (r >= 0.0) & (r <= 1.0)
    t = np.where(hit, t, np.inf)
    ones = np.ones(t.shape)
    return t, n[0] * ones, n[1] * ones, n[2] * ones, s, r


def _intersect_local(shape, ox, oy, oz, dx, dy, dz):
    if isinstance(shape, Sphere):
        return _intersect_sphere(shape, ox, oy, oz, dx, dy, dz)
    if isinstance(shape, Box):
        return _intersect_box(shape, ox, oy, oz, dx, dy, dz)
    if isinstance(shape, GroundPlane):
        return _intersect_plane(shape, ox, oy, oz, dx, dy, dz)
    if isinstance(shape, Quad):
        return intersect_quad(shape, ox, oy, oz, dx, dy, dz)[:4]
    raise ValueError('unsupported shape: {}'.format(type(shape).__name__))


def intersect_entity(entity, ox, oy, oz, dx, dy, dz):
    '''Nearest hit of one entity for arrays of world rays: (t, world normal components).'''
    if entity.pose.isIdentity():
        return _intersect_local(entity.shape, ox, oy, oz, dx, dy, dz)
    rot = entity.pose.rotation()
    px, py, pz = entity.pose.position
    lox, loy, loz = rotate_components_t(rot, ox - px, oy - py, oz - pz)
    ldx, ldy, ldz = rotate_components_t(rot, dx, dy, dz)
    t, nx, ny, nz = _intersect_local(entity.shape, lox, loy, loz, ldx, ldy, ldz)
    nx, ny, nz = rotate_components(rot, nx, ny, nz)
    return t, nx, ny, nz


@dataclass
class Scene(object):
    entities: list = field(default_factory=list)
    light_dir: tuple = DEFAULT_LIGHT_DIR  # unit vector pointing towards the light
    light_intensity: float = 0.8
    ambient: float = 0.3
    background: tuple = (0.55, 0.7, 0.9)

    def __post_init__(self):
        ids = [e.id for e in self.entities]
        if len(ids) != len(set(ids)):
            raise ValueError('entity ids must be unique within a scene')
        if any(i <= 0 or i >= PANEL_ID_BASE for i in ids):
            raise ValueError('scene entity ids must lie in [1, {})'.format(PANEL_ID_BASE))
        norm = math.sqrt(sum(c * c for c in self.light_dir))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError('light direction must be normalized, |l| = {}'.format(norm))
        if not 0.0 <= self.ambient <= 1.0:
            raise ValueError('ambient must lie in [0, 1], got {}'.format(self.ambient))
        self._index = {e.id: i for i, e in enumerate(self.entities)}

    def entity(self, entity_id):
        return self.entities[self._index[entity_id]]

    def updateEntity(self, entity_id, **changes):
        i = self._index[entity_id]
        self.entities[i] = replace(self.entities[i], **changes)

    def byRole(self, role):
        return [e for e in self.entities if e.role == role]

    def entityPoses(self):
        return {e.id: e.pose for e in self.entities}

    def copy(self):
        return Scene(list(self.entities), self.light_dir, self.light_intensity, self.ambient, self.background)

    def castRays(self, ox, oy, oz, dx, dy, dz, t_max=np.inf, skip=(), roles=None):
        '''Nearest alive entity along each ray; ties keep the earlier entity.'''
        t_best = np.full(np.shape(dx), np.inf)
        id_best = np.zeros(np.shape(dx), dtype=np.int32)
        nx = np.zeros(np.shape(dx))
        ny = np.zeros(np.shape(dx))
        nz = np.zeros(np.shape(dx))
        for e in self.entities:
            if not e.alive or e.id in skip or (roles is not None and e.role not in roles):
                continue
            t, ex, ey, ez = intersect_entity(e, ox, oy, oz, dx, dy, dz)
            better = (t < t_best) & (t <= t_max)
            t_best = np.where(better, t, t_best)
            id_best = np.where(better, np.int32(e.id), id_best)
            nx = np.where(better, ex, nx)
            ny = np.where(better, ey, ny)
            nz = np.where(better, ez, nz)
        return t_best, id_best, nx, ny, nz


@dataclass(frozen=True)
class Hit(object):
    entity_id: int
    t: float
    point: tuple
    normal: tuple


def query_ray(scene, origin, direction, t_max=np.inf, skip=(), roles=None):
    '''Nearest intersection with 0 < t <= t_max, or None on a miss.'''
    o = np.asarray(origin, dtype=np.float64).reshape(3)
    d = np.asarray(direction, dtype=np.float64).reshape(3)
    if not (np.all(np.isfinite(o)) and np.all(np.isfinite(d))):
        raise ValueError('query_ray: non-finite origin or direction ({}, {})'.format(o.tolist(), d.tolist()))
    if abs(math.sqrt(float(d @ d)) - 1.0) > 1e-6:
        raise ValueError('query_ray: direction must be normalized, got {}'.format(d.tolist()))
    if not t_max > 0:
        raise ValueError('query_ray: t_max must be > 0, got {}'.format(t_max))
    t, ids, nx, ny, nz = scene.castRays(o[0:1], o[1:2], o[2:3], d[0:1], d[1:2], d[2:3], t_max=t_max, skip=skip, roles=roles)
    if not np.isfinite(t[0]):
        return None
    tt = float(t[0])
    return Hit(int(ids[0]), tt, tuple((o + tt * d).tolist()), (float(nx[0]), float(ny[0]), float(nz[0])))
