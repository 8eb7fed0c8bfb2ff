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
Four borderless view panels around the user, one per cardinal direction of the
body frame, each fed by a capture camera placed at the eye.
'''

import math
from dataclasses import dataclass, field

import numpy as np

from render.camera import Camera
from scene.entities import PANEL_ID_BASE, Quad
from scene.geometry import Pose, matrix_to_euler, yaw_matrix

DIRECTIONS = ('Front', 'Left', 'Back', 'Right')
DIRECTION_YAW = {'Front': 0.0, 'Left': 0.5 * math.pi, 'Back': math.pi, 'Right': -0.5 * math.pi}
ANCHORS = ('Body', 'Head')


@dataclass
class CockpitConfig(object):
    coverage: float = 0.30
    distance: float = 1.0
    anchor: str = 'Body'
    capture_resolution: tuple = None  # None: matched to the panel's head-pixel footprint
    enabled: tuple = DIRECTIONS
    snap_to_pixels: bool = True

    def validate(self):
        if not 0.0 < self.coverage < 1.0:
            raise ValueError('coverage must satisfy 0 < c < 1, got {}'.format(self.coverage))
        if not self.distance > 0.0:
            raise ValueError('panel distance must be > 0, got {}'.format(self.distance))
        if self.anchor not in ANCHORS:
            raise ValueError('anchor must be one of {}, got {}'.format(ANCHORS, self.anchor))
        unknown = [d for d in self.enabled if d not in DIRECTIONS]
        if unknown:
            raise ValueError('unknown panel directions {}'.format(unknown))
        if self.capture_resolution is not None:
            w, h = self.capture_resolution
            if int(w) < 8 or int(h) < 8:
                raise ValueError('capture resolution must be >= 8x8, got {}x{}'.format(w, h))

    def toDict(self):
        return {'coverage': self.coverage, 'distance': self.distance, 'anchor': self.anchor,
                'capture_resolution': None if self.capture_resolution is None else list(self.capture_resolution),
                'enabled': list(self.enabled), 'snap_to_pixels': self.snap_to_pixels}


def frame_angular_extents(c, head_fov):
    '''Half-extents (alpha, beta) of a panel covering area fraction c of a (H, V) viewport.'''
    if not 0.0 < c < 1.0:
        raise ValueError('coverage must satisfy 0 < c < 1, got {}'.format(c))
    h_fov, v_fov = head_fov
    k = math.sqrt(c)
    return math.atan(k * math.tan(0.5 * h_fov)), math.atan(k * math.tan(0.5 * v_fov))


def _same_parity_round(x, n):
    '''Integer nearest to x with the parity of n, at least 8.'''
    k = n % 2
    m = 2 * int(round((x - k) / 2.0)) + k
    while m < 8:
        m += 2
    return m


@dataclass(frozen=True)
class FramePanel(object):
    direction: str
    yaw: float  # cardinal rotation about the anchor's up axis
    alpha: float
    beta: float
    distance: float
    entity_id: int

    @property
    def localCorners(self):
        '''TL, TR, BR, BL as seen from the eye, in the panel's own frame (+X = viewing axis).'''
        d = self.distance
        hw = d * math.tan(self.alpha)
        hh = d * math.tan(self.beta)
        return np.array([(d, hw, hh), (d, -hw, hh), (d, -hw, -hh), (d, hw, -hh)], dtype=np.float64)

    @property
    def corners(self):
        '''Quad corners in the anchor (body) frame.'''
        return self.localCorners @ yaw_matrix(self.yaw).T


@dataclass
class CockpitRig(object):
    config: CockpitConfig
    panels: list = field(default_factory=list)
    capture_width: int = 0
    capture_height: int = 0
    capture_fx: float = 1.0
    capture_fy: float = 1.0

    def anchorPose(self, body_pose: Pose, head_pose: Pose):
        '''Eye point with the body yaw (Body anchor) or the full head orientation (Head anchor).'''
        if self.config.anchor == 'Head':
            return head_pose
        return Pose(head_pose.position, yaw=body_pose.yaw)

    def panelPose(self, panel: FramePanel, anchor: Pose):
        if anchor.pitch == 0.0 and anchor.roll == 0.0:
            return Pose(anchor.position, yaw=anchor.yaw + panel.yaw)
        yaw, pitch, roll = matrix_to_euler(anchor.rotation() @ yaw_matrix(panel.yaw))
        return Pose(anchor.position, yaw, pitch, roll)

    def captureCamera(self, panel: FramePanel, anchor: Pose):
        return Camera(self.panelPose(panel, anchor), self.capture_width, self.capture_height,
                      self.capture_fx, self.capture_fy)

    def cameras(self, anchor: Pose):
        return [self.captureCamera(p, anchor) for p in self.panels]

    def worldQuad(self, panel: FramePanel, anchor: Pose):
        pose = self.panelPose(panel, anchor)
        rot = pose.rotation()
        corners = panel.localCorners @ rot.T + pose.xyz
        return Quad(tuple(map(tuple, corners)))

    def panelIds(self):
        return [p.entity_id for p in self.panels]


def make_cockpit_rig(config: CockpitConfig, head_camera: Camera):
    config.validate()
    alpha, beta = frame_angular_extents(config.coverage, (head_camera.hfov, head_camera.vfov))
    k = math.sqrt(config.coverage)
    if config.capture_resolution is not None:
        cw, ch = (int(v) for v in config.capture_resolution)
        fx = 0.5 * cw / math.tan(alpha)
        fy = 0.5 * ch / math.tan(beta)
    elif config.snap_to_pixels:
        # capture texels coincide with head pixels when the head faces a panel
        cw = _same_parity_round(k * head_camera.width, head_camera.width)
        ch = _same_parity_round(k * head_camera.height, head_camera.height)
        fx, fy = head_camera.fx, head_camera.fy
        alpha = math.atan(0.5 * cw / fx)
        beta = math.atan(0.5 * ch / fy)
    else:
        cw = max(8, int(round(k * head_camera.width)))
        ch = max(8, int(round(k * head_camera.height)))
        fx = 0.5 * cw / math.tan(alpha)
        fy = 0.5 * ch / math.tan(beta)

    panels = [FramePanel(d, DIRECTION_YAW[d], alpha, beta, config.distance, PANEL_ID_BASE + i)
              for i, d in enumerate(DIRECTIONS) if d in config.enabled]
    return CockpitRig(config, panels, cw, ch, fx, fy)
