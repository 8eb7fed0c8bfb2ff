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
FPS testbed: a patrolling bot player against robots that pursue and shoot
once the player is inside their detection radius.
'''

import math
from dataclasses import dataclass, replace

import numpy as np

from scene.builders import ArenaSpec, circle_hits_box
from scene.entities import Role, Scene
from scene.geometry import Pose, wrap_angle

ROBOT_AIM_HEIGHT = 1.0
ROBOT_FOOTPRINT = 0.5


@dataclass(frozen=True)
class FpsParams(object):
    walk_speed: float = 1.5
    engage_range: float = 25.0
    fire_rate: float = 2.0  # Hz
    hit_prob: float = 0.8
    magazine: int = 5
    reload_time: float = 2.0
    robot_hp: int = 14
    robot_speed: float = 2.0
    robot_fire_rate: float = 1.0
    robot_hit_prob: float = 0.5
    robot_stop_distance: float = 3.0
    eye_height: float = 1.6

    def validate(self):
        for name in ('walk_speed', 'engage_range', 'fire_rate', 'reload_time', 'robot_speed',
                     'robot_fire_rate', 'eye_height'):
            if not getattr(self, name) > 0:
                raise ValueError('{} must be > 0, got {}'.format(name, getattr(self, name)))
        for name in ('hit_prob', 'robot_hit_prob'):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError('{} must lie in [0, 1], got {}'.format(name, getattr(self, name)))
        if self.magazine < 1 or self.robot_hp < 1:
            raise ValueError('magazine and robot_hp must be >= 1')
        if self.robot_stop_distance < 0:
            raise ValueError('robot_stop_distance must be >= 0, got {}'.format(self.robot_stop_distance))

    def ticks(self, seconds, dt):
        return max(1, int(round(seconds / dt)))


@dataclass
class RobotState(object):
    id: int
    head_id: int
    x: float
    y: float
    yaw: float
    hits: int = 0
    alive: bool = True
    cooldown: int = 0
    death_tick: int = -1

    def pose(self):
        return Pose((self.x, self.y, 0.0), yaw=self.yaw)


@dataclass
class FpsState(object):
    tick: int
    x: float
    y: float
    yaw: float
    distance: float
    waypoint: int  # index of the waypoint being walked towards
    robots: list
    shots_received: int = 0
    shots_fired: int = 0
    magazine: int = 5
    reload_ticks: int = 0
    cooldown_ticks: int = 0
    speed: float = 0.0
    done: bool = False

    @property
    def robotsAlive(self):
        return sum(1 for r in self.robots if r.alive)

    def bodyPose(self):
        return Pose((self.x, self.y, 0.0), yaw=self.yaw)

    def copy(self):
        return replace(self, robots=[replace(r) for r in self.robots])


class FpsWorld(object):
    def __init__(self, spec: ArenaSpec, scene: Scene, params: FpsParams = None):
        self.spec = spec
        self.scene = scene
        self.params = params or FpsParams()
        self.params.validate()
        self.walls = [e.shape for e in scene.byRole(Role.WALL)]
        self.waypoints = np.asarray(spec.waypoints, dtype=np.float64)
        heads = {e.parent: e.id for e in scene.entities if e.parent}
        self.robot_ids = sorted(e.id for e in scene.byRole(Role.ROBOT))
        self.head_ids = [heads[i] for i in self.robot_ids]
        self._synced = {}

    def initialState(self):
        p0, p1 = self.waypoints[0], self.waypoints[1]
        robots = []
        for rid, hid in zip(self.robot_ids, self.head_ids):
            e = self.scene.entity(rid)
            robots.append(RobotState(rid, hid, float(e.pose.position[0]), float(e.pose.position[1]), e.pose.yaw))
        return FpsState(tick=0, x=float(p0[0]), y=float(p0[1]), yaw=math.atan2(p1[1] - p0[1], p1[0] - p0[0]),
                        distance=0.0, waypoint=1, robots=robots, magazine=self.params.magazine)

    def headPose(self, state: FpsState, head_yaw=0.0, head_pitch=0.0):
        return Pose((state.x, state.y, self.params.eye_height), yaw=wrap_angle(state.yaw + head_yaw), pitch=head_pitch)

    def lineOfSight(self, state: FpsState, robots):
        '''Unobstructed eye-to-robot segments, one batched wall query for all given robots.'''
        if not robots:
            return []
        ez = self.params.eye_height
        dx = np.array([r.x - state.x for r in robots])
        dy = np.array([r.y - state.y for r in robots])
        dz = np.full(len(robots), ROBOT_AIM_HEIGHT - ez)
        dist = np.sqrt(dx * dx + dy * dy + dz * dz)
        dist = np.maximum(dist, 1e-9)
        t, _, _, _, _ = self.scene.castRays(state.x, state.y, ez, dx / dist, dy / dist, dz / dist,
                                            t_max=np.inf, roles={Role.WALL})
        return [bool(v) for v in t >= dist]

    def blocked(self, x, y):
        return any(circle_hits_box(x, y, ROBOT_FOOTPRINT, w) for w in self.walls)

    def syncScene(self, state: FpsState):
        '''Mirror robot poses and liveness into the scene (between ticks only).'''
        for r in state.robots:
            key = (r.x, r.y, r.yaw, r.alive)
            if self._synced.get(r.id) == key:
                continue
            pose = r.pose()
            self.scene.updateEntity(r.id, pose=pose, alive=r.alive)
            self.scene.updateEntity(r.head_id, pose=pose, alive=r.alive)
            self._synced[r.id] = key

    def step(self, state, dt, rng):
        return step_fps(state, self, dt, rng)

    def logRow(self, state: FpsState, head_pose: Pose, dt):
        return {'tick': state.tick, 'time': state.tick * dt, 'x': state.x, 'y': state.y, 'z': 0.0,
                'yaw': state.yaw, 'pitch': 0.0, 'head_yaw': head_pose.yaw, 'head_pitch': head_pose.pitch,
                'speed': state.speed, 'coins': 0, 'crashes': 0, 'distance': state.distance,
                'shots_received': state.shots_received, 'robots_alive': state.robotsAlive,
                'shots_fired': state.shots_fired, 'magazine': state.magazine}

    def summaryExtra(self, state: FpsState):
        return {'robots': [{'id': r.id, 'hits': r.hits, 'death_tick': r.death_tick} for r in state.robots]}


def _walk(world: FpsWorld, s: FpsState, budget):
    w = world.waypoints
    n = len(w) - 1
    while budget > 0.0:
        tx, ty = w[s.waypoint]
        ddx, ddy = tx - s.x, ty - s.y
        gap = math.hypot(ddx, ddy)
        if gap > 0.0:
            s.yaw = math.atan2(ddy, ddx)
        if gap <= budget:
            s.x, s.y = float(tx), float(ty)
            s.distance += gap
            budget -= gap
            s.waypoint = s.waypoint % n + 1
        else:
            s.x += budget * ddx / gap
            s.y += budget * ddy / gap
            s.distance += budget
            budget = 0.0


def step_fps(state: FpsState, world: FpsWorld, dt, rng):
    '''Advance one fixed step; the player's shot draws first, then robots in id order.'''
    if state.done:
        return state
    prm = world.params
    s = state.copy()
    s.tick += 1

    if s.cooldown_ticks > 0:
        s.cooldown_ticks -= 1
    if s.reload_ticks > 0:
        s.reload_ticks -= 1
        if s.reload_ticks == 0:
            s.magazine = prm.magazine

    alive = [r for r in s.robots if r.alive]
    reach = max(prm.engage_range, world.spec.detection_radius)
    near = [r for r in alive if math.hypot(r.x - s.x, r.y - s.y) <= reach]
    visible = {r.id: v for r, v in zip(near, world.lineOfSight(s, near))}

    # player
    target, best = None, math.inf
    for r in near:
        d = math.hypot(r.x - s.x, r.y - s.y)
        if visible[r.id] and d <= prm.engage_range and d < best:
            target, best = r, d
    s.speed = 0.0 if target is not None else prm.walk_speed
    if target is None:
        _walk(world, s, prm.walk_speed * dt)
    else:
        s.yaw = math.atan2(target.y - s.y, target.x - s.x)
        if s.magazine > 0 and s.cooldown_ticks == 0 and s.reload_ticks == 0:
            s.shots_fired += 1
            s.magazine -= 1
            s.cooldown_ticks = prm.ticks(1.0 / prm.fire_rate, dt)
            if rng.random() < prm.hit_prob:
                target.hits += 1
                if target.hits >= prm.robot_hp:
                    target.alive = False
                    target.death_tick = s.tick
            if s.magazine == 0:
                s.reload_ticks = prm.ticks(prm.reload_time, dt)

    # robots
    for r in alive:
        if r.cooldown > 0:
            r.cooldown -= 1
        if not r.alive or r.id not in visible or not visible[r.id]:
            continue
        ddx, ddy = s.x - r.x, s.y - r.y
        d = math.hypot(ddx, ddy)
        if d > world.spec.detection_radius:
            continue
        r.yaw = math.atan2(ddy, ddx)
        if d > prm.robot_stop_distance:
            step = min(prm.robot_speed * dt, d - prm.robot_stop_distance)
            nx, ny = r.x + step * ddx / d, r.y + step * ddy / d
            if not world.blocked(nx, ny):
                r.x, r.y = nx, ny
        if r.cooldown == 0:
            r.cooldown = prm.ticks(1.0 / prm.robot_fire_rate, dt)
            if rng.random() < prm.robot_hit_prob:
                s.shots_received += 1

    if s.robotsAlive == 0:
        s.done = True
    return s
