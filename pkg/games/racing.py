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
Racing testbed: an invisible car driven by a scripted pilot around a closed
track, collecting coins and crashing into barriers.
'''

import math
from dataclasses import dataclass, replace

import numpy as np

from scene.builders import BARRIER_HALF, COIN_RADIUS, TRACK_LIFT, Centerline, TrackSpec
from scene.entities import Role, Scene
from scene.geometry import Pose, wrap_angle

KMH_70 = 70.0 / 3.6


@dataclass(frozen=True)
class RacingParams(object):
    v_max: float = KMH_70
    v_curve: float = 13.9  # target speed through a quarter turn within the look-ahead
    accel: float = 6.0
    brake: float = 10.0
    coin_radius: float = 1.2
    car_radius: float = 1.0
    crash_pause: float = 3.0
    eye_height: float = 1.2
    kp: float = 2.5
    kd: float = 0.3
    max_yaw_rate: float = 1.5
    look_ahead_min: float = 8.0
    look_ahead_gain: float = 0.8
    curve_horizon: float = 40.0
    wander_amplitude: float = 2.5

    def validate(self):
        if not 0.0 < self.v_max <= KMH_70 + 1e-9:
            raise ValueError('v_max must lie in (0, {:.3f}] m/s, got {}'.format(KMH_70, self.v_max))
        if not 0.0 < self.v_curve <= self.v_max:
            raise ValueError('v_curve must lie in (0, v_max], got {}'.format(self.v_curve))
        for name in ('accel', 'brake', 'coin_radius', 'car_radius', 'eye_height', 'max_yaw_rate', 'look_ahead_min'):
            if not getattr(self, name) > 0:
                raise ValueError('{} must be > 0, got {}'.format(name, getattr(self, name)))
        if self.crash_pause < 0 or self.wander_amplitude < 0:
            raise ValueError('crash_pause and wander_amplitude must be >= 0')


@dataclass(frozen=True)
class RacingPilot(object):
    '''PD steering towards a look-ahead point on the centerline, offset by a smooth seeded wander.'''
    amplitude: float
    period: float
    phase: float

    @staticmethod
    def fromSeed(seed, params: RacingParams):
        rng = np.random.default_rng(seed)
        return RacingPilot(amplitude=params.wander_amplitude * float(rng.uniform(0.6, 1.0)),
                           period=float(rng.uniform(8.0, 16.0)),
                           phase=float(rng.uniform(0.0, 2.0 * math.pi)))

    def lateralTarget(self, t):
        return self.amplitude * math.sin(2.0 * math.pi * t / self.period + self.phase)


@dataclass
class RacingState(object):
    tick: int
    x: float
    y: float
    z: float
    yaw: float
    pitch: float
    speed: float
    lap: int
    progress: float  # cumulative arc length, m
    local_s: float  # arc length within the current lap
    seg: int
    coins: int
    crashes: int
    pause_ticks: int
    distance: float
    coin_alive: np.ndarray
    ignore_barrier: int = 0
    heading_err: float = 0.0
    done: bool = False

    def bodyPose(self):
        return Pose((self.x, self.y, self.z), yaw=self.yaw, pitch=self.pitch)


class RacingWorld(object):
    '''Everything the stepper reads besides the state: track, barrier footprints, pilot and constants.'''

    def __init__(self, spec: TrackSpec, scene: Scene, seed, params: RacingParams = None):
        self.spec = spec
        self.scene = scene
        self.params = params or RacingParams()
        self.params.validate()
        self.track = Centerline(spec.centerline)
        self.pilot = RacingPilot.fromSeed(seed, self.params)

        coins = scene.byRole(Role.COIN)
        self.coin_ids = np.array([e.id for e in coins], dtype=np.int64)
        self.coin_xyz = np.array([e.shape.center for e in coins], dtype=np.float64).reshape(-1, 3)
        barriers = scene.byRole(Role.BARRIER)
        self.barrier_ids = np.array([e.id for e in barriers], dtype=np.int64)
        self.barrier_xy = np.array([e.pose.position[:2] for e in barriers], dtype=np.float64).reshape(-1, 2)
        self.barrier_cos = np.array([math.cos(e.pose.yaw) for e in barriers])
        self.barrier_sin = np.array([math.sin(e.pose.yaw) for e in barriers])
        self._synced = np.ones(len(coins), dtype=bool)

    def initialState(self):
        p, psi, grade, _ = self.track.frameAt(0.0)
        return RacingState(tick=0, x=float(p[0]), y=float(p[1]), z=float(p[2]) + TRACK_LIFT, yaw=psi, pitch=grade,
                           speed=0.0, lap=0, progress=0.0, local_s=0.0, seg=0, coins=0, crashes=0,
                           pause_ticks=0, distance=0.0, coin_alive=np.ones(len(self.coin_ids), dtype=bool))

    def headPose(self, state: RacingState, head_yaw=0.0, head_pitch=0.0):
        return Pose((state.x, state.y, state.z + self.params.eye_height),
                    yaw=wrap_angle(state.yaw + head_yaw), pitch=state.pitch + head_pitch)

    def overlappingBarriers(self, x, y):
        if len(self.barrier_ids) == 0:
            return self.barrier_ids
        dx = x - self.barrier_xy[:, 0]
        dy = y - self.barrier_xy[:, 1]
        lx = self.barrier_cos * dx + self.barrier_sin * dy
        ly = -self.barrier_sin * dx + self.barrier_cos * dy
        qx = lx - np.clip(lx, -BARRIER_HALF[0], BARRIER_HALF[0])
        qy = ly - np.clip(ly, -BARRIER_HALF[1], BARRIER_HALF[1])
        r = self.params.car_radius
        return self.barrier_ids[qx * qx + qy * qy <= r * r]

    def syncScene(self, state: RacingState):
        '''Mirror coin liveness into the scene (between ticks only).'''
        changed = np.nonzero(self._synced != state.coin_alive)[0]
        for k in changed:
            self.scene.updateEntity(int(self.coin_ids[k]), alive=bool(state.coin_alive[k]))
        self._synced = state.coin_alive.copy()

    def step(self, state, dt, rng=None):
        return step_racing(state, self, dt)

    def logRow(self, state: RacingState, head_pose: Pose, dt):
        return {'tick': state.tick, 'time': state.tick * dt, 'x': state.x, 'y': state.y, 'z': state.z,
                'yaw': state.yaw, 'pitch': state.pitch, 'head_yaw': head_pose.yaw, 'head_pitch': head_pose.pitch,
                'speed': state.speed, 'coins': state.coins, 'crashes': state.crashes, 'distance': state.distance,
                'shots_received': 0, 'robots_alive': 0, 'lap': state.lap}

    def summaryExtra(self, state: RacingState):
        return {'laps': state.lap}


def _respawn(world: RacingWorld, s: RacingState):
    p, psi, grade, _ = world.track.frameAt(s.local_s)
    s.x, s.y, s.z = float(p[0]), float(p[1]), float(p[2]) + TRACK_LIFT
    s.yaw, s.pitch = psi, grade
    s.speed = 0.0
    s.heading_err = 0.0


def step_racing(state: RacingState, world: RacingWorld, dt):
    '''Advance one fixed step; returns a new state.'''
    if state.done:
        return state
    prm = world.params
    track = world.track
    s = replace(state, coin_alive=state.coin_alive.copy())
    s.tick += 1
    t = s.tick * dt

    if s.pause_ticks > 0:
        s.pause_ticks -= 1
        if s.pause_ticks == 0:
            _respawn(world, s)
        return s

    # steering
    look = max(prm.look_ahead_min, prm.look_ahead_gain * s.speed)
    p, _, _, left = track.frameAt(s.local_s + look)
    lateral = world.pilot.lateralTarget(t)
    tx, ty = p[0] + lateral * left[0], p[1] + lateral * left[1]
    err = wrap_angle(math.atan2(ty - s.y, tx - s.x) - s.yaw)
    rate = prm.kp * err + prm.kd * (err - s.heading_err) / dt
    rate = min(max(rate, -prm.max_yaw_rate), prm.max_yaw_rate)
    s.heading_err = err
    s.yaw = wrap_angle(s.yaw + rate * dt)

    # throttle towards a curvature-limited target speed
    k_now, _ = track.segmentAt(s.local_s)
    k_far, _ = track.segmentAt(s.local_s + prm.curve_horizon)
    bend = abs(wrap_angle(track.heading(k_far) - track.heading(k_now)))
    target = prm.v_max - (prm.v_max - prm.v_curve) * min(1.0, bend / (0.25 * math.pi))
    if s.speed < target:
        s.speed = min(target, s.speed + prm.accel * dt)
    else:
        s.speed = max(target, s.speed - prm.brake * dt)
    s.speed = min(max(s.speed, 0.0), prm.v_max)

    # speed is along the surface: shrink the planar step until the 3D step fits
    step = s.speed * dt
    planar = step * math.cos(s.pitch)
    for _ in range(4):
        x, y = s.x + planar * math.cos(s.yaw), s.y + planar * math.sin(s.yaw)
        k, local = track.project((x, y), s.seg)
        dz = float(track.pointAt(local)[2]) + TRACK_LIFT - s.z
        length = math.hypot(planar, dz)
        if length <= step or abs(dz) >= step:
            break
        planar *= math.sqrt(step * step - dz * dz) / planar
    s.x, s.y = x, y
    s.distance += length

    delta = local - s.local_s
    half = 0.5 * track.length
    if delta > half:
        delta -= track.length
    elif delta <= -half:
        delta += track.length
    s.progress += delta
    s.local_s = local
    s.seg = k
    s.z = float(track.pointAt(local)[2]) + TRACK_LIFT
    s.pitch = track.grade(k)

    # coins: body center at coin height
    alive = s.coin_alive
    if alive.any():
        d = world.coin_xyz - (s.x, s.y, s.z + COIN_RADIUS)
        hit = alive & ((d * d).sum(axis=1) <= prm.coin_radius * prm.coin_radius)
        n = int(hit.sum())
        if n:
            alive[hit] = False
            s.coins += n

    # barriers
    touching = world.overlappingBarriers(s.x, s.y)
    if s.ignore_barrier and s.ignore_barrier not in touching:
        s.ignore_barrier = 0
    fresh = [int(b) for b in touching if int(b) != s.ignore_barrier]
    if fresh:
        s.speed = 0.0
        s.crashes += 1
        s.ignore_barrier = fresh[0]
        s.pause_ticks = int(round(prm.crash_pause / dt))
        if s.pause_ticks == 0:
            _respawn(world, s)

    # laps: progress may only complete a lap forwards
    lap = int(math.floor(s.progress / track.length))
    if lap > s.lap:
        s.lap = lap
        s.coin_alive[:] = True
        if s.lap >= world.spec.laps:
            s.done = True
    return s
