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
Procedural construction of the racing track and the FPS arena.

Both builders are pure functions of (spec, seed): the seed only drives the
placement of roadside decor, so gameplay geometry is fixed by the TrackSpec or ArenaSpec.
'''

import math
from dataclasses import dataclass, field

import numpy as np

from .entities import Box, Entity, GroundPlane, Quad, Role, Scene, Sphere
from .geometry import Pose

TRACK_LIFT = 0.02  # track surface sits above the ground plane to avoid coplanar ties
COIN_RADIUS = 0.5
BARRIER_HALF = (0.5, 1.5, 1.0)  # half length along track, half width, full height
ROBOT_BODY = Box((-0.4, -0.4, 0.0), (0.4, 0.4, 1.0))
ROBOT_HEAD = Sphere((0.0, 0.0, 1.5), 0.5)

GROUND_ALBEDO = (0.27, 0.45, 0.22)
GROUND_ALBEDO_ALT = (0.55, 0.75, 0.4)
TRACK_ALBEDO = (0.32, 0.32, 0.34)
TRACK_ALBEDO_ALT = (0.5, 0.5, 0.52)
COIN_ALBEDO = (1.0, 0.84, 0.0)
BARRIER_ALBEDO = (0.85, 0.15, 0.1)
DECOR_ALBEDO = (0.15, 0.4, 0.18)
WALL_ALBEDO = (0.5, 0.5, 0.5)
ARENA_FLOOR_ALBEDO = (0.35, 0.33, 0.3)
ARENA_FLOOR_ALBEDO_ALT = (0.6, 0.58, 0.55)
ROBOT_ALBEDO = (0.2, 0.3, 0.8)


@dataclass
class TrackSpec(object):
    centerline: list
    width: float = 12.0
    coins: list = field(default_factory=list)  # arc-length positions, m
    barriers: list = field(default_factory=list)  # (arc-length, lateral offset) pairs, m
    laps: int = 2
    decor: int = 80

    def validate(self):
        c = np.asarray(self.centerline, dtype=np.float64)
        if c.ndim != 2 or c.shape[1] != 3 or c.shape[0] < 8:
            raise ValueError('track centerline needs >= 8 vertices of 3 components, got shape {}'.format(c.shape))
        if not np.all(np.isfinite(c)):
            raise ValueError('track centerline has non-finite vertices')
        if not np.allclose(c[0], c[-1], atol=1e-6):
            raise ValueError('track centerline is open: first {} != last {}'.format(c[0].tolist(), c[-1].tolist()))
        if not self.width > 2.0 * BARRIER_HALF[1]:
            raise ValueError('track width must exceed {} m, got {}'.format(2.0 * BARRIER_HALF[1], self.width))
        if self.laps < 1:
            raise ValueError('laps must be >= 1, got {}'.format(self.laps))
        length = Centerline(c).length
        for s in self.coins:
            if not 0.0 <= s < length:
                raise ValueError('coin at s={} lies outside [0, {:.1f})'.format(s, length))
        for s, lateral in self.barriers:
            if not 0.0 <= s < length:
                raise ValueError('barrier at s={} lies outside [0, {:.1f})'.format(s, length))
            if abs(lateral) + BARRIER_HALF[1] > 0.5 * self.width:
                raise ValueError('barrier at s={} with offset {} leaves the track'.format(s, lateral))

    def toDict(self):
        return {'centerline': [list(map(float, v)) for v in self.centerline], 'width': self.width,
                'coins': [float(s) for s in self.coins],
                'barriers': [[float(s), float(o)] for s, o in self.barriers],
                'laps': self.laps, 'decor': self.decor}

    @staticmethod
    def fromDict(data):
        return TrackSpec(centerline=[tuple(v) for v in data['centerline']],
                         width=float(data.get('width', 12.0)),
                         coins=[float(s) for s in data.get('coins', [])],
                         barriers=[(float(s), float(o)) for s, o in data.get('barriers', [])],
                         laps=int(data.get('laps', 2)),
                         decor=int(data.get('decor', 80)))


@dataclass
class ArenaSpec(object):
    walls: list  # (min, max) box corner pairs
    spawns: list  # (x, y, yaw) per robot
    waypoints: list  # closed polyline of (x, y)
    detection_radius: float = 15.0
    robot_count: int = 6

    def validate(self):
        if self.robot_count < 1 or self.robot_count > len(self.spawns):
            raise ValueError('robot_count must lie in [1, {}], got {}'.format(len(self.spawns), self.robot_count))
        if not self.detection_radius > 0:
            raise ValueError('detection_radius must be > 0, got {}'.format(self.detection_radius))
        boxes = [Box(tuple(lo), tuple(hi)) for lo, hi in self.walls]
        for i, (x, y, _) in enumerate(self.spawns[:self.robot_count]):
            for j, box in enumerate(boxes):
                if circle_hits_box(x, y, 0.5, box):
                    raise ValueError('robot spawn {} at ({}, {}) lies inside wall {}'.format(i, x, y, j))
        w = np.asarray(self.waypoints, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] < 3 or w.shape[1] != 2:
            raise ValueError('patrol waypoints need >= 3 vertices of (x, y), got shape {}'.format(w.shape))
        if not np.allclose(w[0], w[-1]):
            raise ValueError('patrol waypoints must form a closed polyline')
        for k in range(len(w) - 1):
            for j, box in enumerate(boxes):
                if segment_hits_box(w[k], w[k + 1], box, clearance=0.5):
                    raise ValueError('patrol segment {} crosses wall {}'.format(k, j))

    def toDict(self):
        return {'walls': [[list(lo), list(hi)] for lo, hi in self.walls],
                'spawns': [list(s) for s in self.spawns],
                'waypoints': [list(p) for p in self.waypoints],
                'detection_radius': self.detection_radius, 'robot_count': self.robot_count}

    @staticmethod
    def fromDict(data):
        return ArenaSpec(walls=[(tuple(lo), tuple(hi)) for lo, hi in data['walls']],
                         spawns=[tuple(s) for s in data['spawns']],
                         waypoints=[tuple(p) for p in data['waypoints']],
                         detection_radius=float(data.get('detection_radius', 15.0)),
                         robot_count=int(data.get('robot_count', len(data['spawns']))))


def circle_hits_box(x, y, radius, box):
    qx = min(max(x, box.min[0]), box.max[0])
    qy = min(max(y, box.min[1]), box.max[1])
    return (x - qx) ** 2 + (y - qy) ** 2 < radius * radius


def segment_hits_box(a, b, box, clearance=0.0):
    '''2D slab test of segment a-b against a box footprint grown by `clearance`.'''
    lo = (box.min[0] - clearance, box.min[1] - clearance)
    hi = (box.max[0] + clearance, box.max[1] + clearance)
    t0, t1 = 0.0, 1.0
    for k in range(2):
        d = b[k] - a[k]
        if d == 0.0:
            if a[k] < lo[k] or a[k] > hi[k]:
                return False
            continue
        u0 = (lo[k] - a[k]) / d
        u1 = (hi[k] - a[k]) / d
        if u0 > u1:
            u0, u1 = u1, u0
        t0, t1 = max(t0, u0), min(t1, u1)
        if t0 > t1:
            return False
    return True


class Centerline(object):
    '''Arc-length parameterization of a closed 3D polyline.'''

    def __init__(self, vertices):
        self.vertices = np.asarray(vertices, dtype=np.float64)
        seg = np.diff(self.vertices, axis=0)
        self.seg_len = np.sqrt((seg ** 2).sum(axis=1))
        self.seg_dir = seg / self.seg_len[:, None]
        self.cum = np.concatenate([[0.0], np.cumsum(self.seg_len)])
        self.length = float(self.cum[-1])
        self.n_seg = len(self.seg_len)

    def segmentAt(self, s):
        s = s % self.length
        k = int(np.searchsorted(self.cum, s, side='right')) - 1
        return min(max(k, 0), self.n_seg - 1), s

    def pointAt(self, s):
        k, s = self.segmentAt(s)
        return self.vertices[k] + (s - self.cum[k]) * self.seg_dir[k]

    def heading(self, k):
        d = self.seg_dir[k]
        return math.atan2(d[1], d[0])

    def grade(self, k):
        d = self.seg_dir[k]
        return math.atan2(d[2], math.hypot(d[0], d[1]))

    def leftNormal(self, k):
        d = self.seg_dir[k]
        h = math.hypot(d[0], d[1])
        return np.array([-d[1] / h, d[0] / h, 0.0])

    def frameAt(self, s):
        '''(point, heading, grade, left normal) at arc length s.'''
        k, _ = self.segmentAt(s)
        return self.pointAt(s), self.heading(k), self.grade(k), self.leftNormal(k)

    def project(self, xy, k_hint, search=3):
        '''Local arc-length projection of a 2D position, searching segments near k_hint.'''
        best = None
        for dk in range(-search, search + 1):
            k = (k_hint + dk) % self.n_seg
            a = self.vertices[k]
            d = self.seg_dir[k]
            h2 = d[0] * d[0] + d[1] * d[1]
            u = ((xy[0] - a[0]) * d[0] + (xy[1] - a[1]) * d[1]) / h2
            u = min(max(u, 0.0), self.seg_len[k])
            px, py = a[0] + u * d[0], a[1] + u * d[1]
            dist2 = (xy[0] - px) ** 2 + (xy[1] - py) ** 2
            if best is None or dist2 < best[0]:
                best = (dist2, k, self.cum[k] + u)
        return best[1], best[2]


def centerline_from_segments(segments, start=(0.0, 0.0, 0.0), heading=0.0, max_step=60.0, arc_step_deg=7.5):
    '''
    Integrate segment descriptors into a closed polyline.

    Each segment is a mapping with either `straight` (horizontal length, m) and an optional
    `grade_deg`, or `turn_deg` and `radius` (m) for a flat arc turning left for positive angles.
    '''
    x, y, z = (float(v) for v in start)
    psi = float(heading)
    pts = [(x, y, z)]
    for seg in segments:
        if 'straight' in seg:
            length = float(seg['straight'])
            slope = math.tan(math.radians(float(seg.get('grade_deg', 0.0))))
            n = max(1, int(math.ceil(length / max_step)))
            for i in range(1, n + 1):
                u = length * i / n
                pts.append((x + u * math.cos(psi), y + u * math.sin(psi), z + u * slope))
            x, y, z = pts[-1]
        else:
            turn = math.radians(float(seg['turn_deg']))
            radius = float(seg['radius'])
            n = max(1, int(math.ceil(abs(math.degrees(turn)) / arc_step_deg)))
            side = 1.0 if turn > 0 else -1.0
            cx = x - side * radius * math.sin(psi)
            cy = y + side * radius * math.cos(psi)
            for i in range(1, n + 1):
                a = psi + turn * i / n
                pts.append((cx + side * radius * math.sin(a), cy - side * radius * math.cos(a), z))
            psi += turn
            x, y, z = pts[-1]
    if np.allclose(pts[0], pts[-1], atol=1e-6):
        pts[-1] = pts[0]
    return pts


DEFAULT_TRACK_SEGMENTS = [
    {'straight': 360.0},
    {'straight': 120.0, 'grade_deg': 8.0},
    {'straight': 120.0, 'grade_deg': -8.0},
    {'turn_deg': 90.0, 'radius': 80.0},
    {'straight': 250.0},
    {'turn_deg': 90.0, 'radius': 80.0},
    {'straight': 300.0},
    {'straight': 150.0, 'grade_deg': 8.0},
    {'straight': 150.0, 'grade_deg': -8.0},
    {'turn_deg': 90.0, 'radius': 80.0},
    {'straight': 250.0},
    {'turn_deg': 90.0, 'radius': 80.0},
]


def default_track_spec(n_coins=50, n_barriers=8, laps=2):
    centerline = centerline_from_segments(DEFAULT_TRACK_SEGMENTS)
    length = Centerline(centerline).length
    coins = [(i + 0.5) * length / n_coins for i in range(n_coins)]
    barriers = []
    for i in range(n_barriers):
        s = (i + 0.3) * length / n_barriers
        barriers.append((s, 3.5 if i % 2 == 0 else -3.5))
    return TrackSpec(centerline=centerline, width=12.0, coins=coins, barriers=barriers, laps=laps)


def default_arena_spec():
    walls = [
        ((-31.0, -31.0, 0.0), (31.0, -30.0, 6.0)),
        ((-31.0, 30.0, 0.0), (31.0, 31.0, 6.0)),
        ((-31.0, -30.0, 0.0), (-30.0, 30.0, 6.0)),
        ((30.0, -30.0, 0.0), (31.0, 30.0, 6.0)),
        ((-12.0, -12.0, 0.0), (-6.0, -6.0, 6.0)),
        ((6.0, -12.0, 0.0), (12.0, -6.0, 6.0)),
        ((-12.0, 6.0, 0.0), (-6.0, 12.0, 6.0)),
        ((6.0, 6.0, 0.0), (12.0, 12.0, 6.0)),
        ((-2.0, -2.0, 0.0), (2.0, 2.0, 6.0)),
    ]
    spawns = [(0.0, -25.0, math.pi / 2), (25.0, 0.0, math.pi), (0.0, 25.0, -math.pi / 2),
              (-25.0, 0.0, 0.0), (0.0, -14.0, math.pi / 2), (0.0, 14.0, -math.pi / 2)]
    waypoints = [(-20.0, -20.0), (20.0, -20.0), (20.0, 20.0), (-20.0, 20.0), (-20.0, -20.0)]
    return ArenaSpec(walls=walls, spawns=spawns, waypoints=waypoints, detection_radius=15.0, robot_count=6)


def _track_quads(line, width, first_id):
    hw = 0.5 * width
    entities = []
    for k in range(line.n_seg):
        a = line.vertices[k] + (0.0, 0.0, TRACK_LIFT)
        b = line.vertices[k + 1] + (0.0, 0.0, TRACK_LIFT)
        n = hw * line.leftNormal(k)
        quad = Quad((tuple(a + n), tuple(b + n), tuple(b - n), tuple(a - n)))
        entities.append(Entity(first_id + k, quad, TRACK_ALBEDO, Role.DECOR,
                               checker=4.0, albedo_alt=TRACK_ALBEDO_ALT))
    return entities


def _roadside_decor(line, width, count, rng, first_id):
    '''Boxes scattered beside the track; rejected when closer than their size to any centerline vertex.'''
    entities = []
    verts = line.vertices[:-1, :2]
    tries = 0
    while len(entities) < count and tries < 20 * count:
        tries += 1
        s = rng.uniform(0.0, line.length)
        side = 1.0 if rng.random() < 0.5 else -1.0
        off = 0.5 * width + rng.uniform(4.0, 25.0)
        size = rng.uniform(0.8, 2.5)
        height = rng.uniform(2.0, 8.0)
        p, psi, _, left = line.frameAt(s)
        c = p[:2] + side * off * left[:2]
        if np.min(np.hypot(verts[:, 0] - c[0], verts[:, 1] - c[1])) < 0.5 * width + 2.0 * size:
            continue
        box = Box((-size, -size, 0.0), (size, size, height))
        pose = Pose((float(c[0]), float(c[1]), 0.0), yaw=float(psi))
        entities.append(Entity(first_id + len(entities), box, DECOR_ALBEDO, Role.DECOR, pose=pose))
    return entities


def build_racing_scene(spec: TrackSpec, seed: int):
    spec.validate()
    rng = np.random.default_rng(seed)
    line = Centerline(spec.centerline)

    entities = [Entity(1, GroundPlane(0.0), GROUND_ALBEDO, Role.GROUND, checker=1.0, albedo_alt=GROUND_ALBEDO_ALT)]
    next_id = 2
    for s in spec.coins:
        p = line.pointAt(s)
        center = (float(p[0]), float(p[1]), float(p[2]) + TRACK_LIFT + COIN_RADIUS)
        entities.append(Entity(next_id, Sphere(center, COIN_RADIUS), COIN_ALBEDO, Role.COIN))
        next_id += 1
    for s, lateral in spec.barriers:
        p, psi, _, left = line.frameAt(s)
        c = p + lateral * left
        box = Box((-BARRIER_HALF[0], -BARRIER_HALF[1], 0.0), (BARRIER_HALF[0], BARRIER_HALF[1], BARRIER_HALF[2]))
        pose = Pose((float(c[0]), float(c[1]), float(c[2]) + TRACK_LIFT), yaw=psi)
        entities.append(Entity(next_id, box, BARRIER_ALBEDO, Role.BARRIER, pose=pose))
        next_id += 1
    quads = _track_quads(line, spec.width, next_id)
    entities.extend(quads)
    next_id += len(quads)
    entities.extend(_roadside_decor(line, spec.width, spec.decor, rng, next_id))
    return Scene(entities)


def robot_entities(robot_id, head_id, pose, alive=True):
    body = Entity(robot_id, ROBOT_BODY, ROBOT_ALBEDO, Role.ROBOT, pose=pose, alive=alive)
    head = Entity(head_id, ROBOT_HEAD, ROBOT_ALBEDO, Role.DECOR, pose=pose, alive=alive, parent=robot_id)
    return body, head


def build_fps_scene(spec: ArenaSpec, seed: int):
    '''Walls, floor and robots. The layout is fully given by `spec`; `seed` only feeds gameplay draws.'''
    spec.validate()
    entities = [Entity(1, GroundPlane(0.0), ARENA_FLOOR_ALBEDO, Role.GROUND,
                       checker=2.0, albedo_alt=ARENA_FLOOR_ALBEDO_ALT)]
    next_id = 2
    for lo, hi in spec.walls:
        entities.append(Entity(next_id, Box(tuple(lo), tuple(hi)), WALL_ALBEDO, Role.WALL))
        next_id += 1
    n = spec.robot_count
    for i, (x, y, yaw) in enumerate(spec.spawns[:n]):
        pose = Pose((float(x), float(y), 0.0), yaw=float(yaw))
        entities.extend(robot_entities(next_id + i, next_id + n + i, pose))
    entities.sort(key=lambda e: e.id)
    return Scene(entities)
