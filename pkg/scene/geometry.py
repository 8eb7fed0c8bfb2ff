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
Vectors and rigid poses.

Convention: right-handed, +X forward, +Y left, +Z up, meters.
A pose's orientation is (yaw, pitch, roll) in radians applied yaw -> pitch -> roll,
with positive pitch looking up: R = Rz(yaw) . Ry(-pitch) . Rx(roll).
'''

from dataclasses import dataclass
import math

import numpy as np
from scipy.spatial.transform import Rotation as R


def vec3(x, y=None, z=None):
    if y is None:
        return np.asarray(x, dtype=np.float64).reshape(3)
    return np.array([x, y, z], dtype=np.float64)


def normalize(v):
    v = np.asarray(v, dtype=np.float64)
    n = math.sqrt(float(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
    if n == 0.0 or not math.isfinite(n):
        raise ValueError('cannot normalize vector {}'.format(v.tolist()))
    return v / n


def euler_matrix(yaw, pitch=0.0, roll=0.0):
    if yaw == 0.0 and pitch == 0.0 and roll == 0.0:
        return np.eye(3)
    return R.from_euler('ZYX', [yaw, -pitch, roll]).as_matrix()


def yaw_matrix(yaw):
    return euler_matrix(yaw, 0.0, 0.0)


def matrix_to_euler(rot):
    yaw, neg_pitch, roll = R.from_matrix(rot).as_euler('ZYX')
    return float(yaw), float(-neg_pitch), float(roll)


def wrap_angle(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class Pose(object):
    position: tuple = (0.0, 0.0, 0.0)
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def __post_init__(self):
        pos = tuple(float(c) for c in self.position)
        if len(pos) != 3:
            raise ValueError('pose position needs 3 components, got {}'.format(pos))
        object.__setattr__(self, 'position', pos)
        for name in ('yaw', 'pitch', 'roll'):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError('pose {} must be finite, got {}'.format(name, value))
            object.__setattr__(self, name, value)

    @property
    def xyz(self):
        return np.array(self.position, dtype=np.float64)

    def rotation(self):
        return euler_matrix(self.yaw, self.pitch, self.roll)

    def isIdentity(self):
        return self.position == (0.0, 0.0, 0.0) and self.yaw == 0.0 and self.pitch == 0.0 and self.roll == 0.0

    def transformPoint(self, p):
        return self.rotation() @ np.asarray(p, dtype=np.float64) + self.xyz

    def inverseTransformPoint(self, p):
        return self.rotation().T @ (np.asarray(p, dtype=np.float64) - self.xyz)

    def compose(self, child):
        '''World pose of `child`, which is expressed in this pose's frame.'''
        rot = self.rotation() @ child.rotation()
        yaw, pitch, roll = matrix_to_euler(rot)
        return Pose(tuple(self.transformPoint(child.xyz)), yaw, pitch, roll)

    def inverse(self):
        rot_t = self.rotation().T
        yaw, pitch, roll = matrix_to_euler(rot_t)
        return Pose(tuple(-(rot_t @ self.xyz)), yaw, pitch, roll)

    def withOrientation(self, yaw=None, pitch=None, roll=None):
        return Pose(self.position,
                    self.yaw if yaw is None else yaw,
                    self.pitch if pitch is None else pitch,
                    self.roll if roll is None else roll)

    def toDict(self):
        return {'position': list(self.position), 'yaw': self.yaw, 'pitch': self.pitch, 'roll': self.roll}

    @staticmethod
    def fromDict(data):
        return Pose(tuple(data.get('position', (0.0, 0.0, 0.0))),
                    data.get('yaw', 0.0), data.get('pitch', 0.0), data.get('roll', 0.0))


IDENTITY = Pose()


def rotate_components(rot, x, y, z):
    '''Apply a 3x3 matrix to component arrays elementwise (no BLAS, so results do not depend on array layout).'''
    return (rot[0, 0] * x + rot[0, 1] * y + rot[0, 2] * z,
            rot[1, 0] * x + rot[1, 1] * y + rot[1, 2] * z,
            rot[2, 0] * x + rot[2, 1] * y + rot[2, 2] * z)


def rotate_components_t(rot, x, y, z):
    return (rot[0, 0] * x + rot[1, 0] * y + rot[2, 0] * z,
            rot[0, 1] * x + rot[1, 1] * y + rot[2, 1] * z,
            rot[0, 2] * x + rot[1, 2] * y + rot[2, 2] * z)
