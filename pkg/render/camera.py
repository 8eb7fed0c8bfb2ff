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

import numpy as np

from scene.geometry import Pose, rotate_components, rotate_components_t


class Camera(object):
    '''
    Pinhole camera looking along its local +X, image u to the right and v down.

    Pixel (i, j) has its center at (i + 0.5, j + 0.5); the principal point is (w/2, h/2).
    The intrinsics are kept as focal lengths so cameras sharing a focal length
    produce bit-identical rays for coinciding pixel offsets.
    '''

    def __init__(self, pose: Pose, width, height, fx, fy=None):
        if int(width) < 8 or int(height) < 8:
            raise ValueError('camera resolution must be >= 8x8, got {}x{}'.format(width, height))
        fy = fx if fy is None else fy
        if not (fx > 0 and fy > 0):
            raise ValueError('camera focal lengths must be > 0, got {}/{}'.format(fx, fy))
        self.pose = pose
        self.width = int(width)
        self.height = int(height)
        self.fx = float(fx)
        self.fy = float(fy)
        self.cx = 0.5 * self.width
        self.cy = 0.5 * self.height
        self.rotation = pose.rotation()

    @staticmethod
    def fromFov(pose: Pose, hfov, width, height, vfov=None):
        '''hfov/vfov in radians; vfov defaults to square pixels.'''
        if not 0.0 < hfov < math.pi:
            raise ValueError('horizontal FoV must lie in (0, pi), got {}'.format(hfov))
        fx = 0.5 * width / math.tan(0.5 * hfov)
        if vfov is None:
            return Camera(pose, width, height, fx, fx)
        if not 0.0 < vfov < math.pi:
            raise ValueError('vertical FoV must lie in (0, pi), got {}'.format(vfov))
        return Camera(pose, width, height, fx, 0.5 * height / math.tan(0.5 * vfov))

    @property
    def hfov(self):
        return 2.0 * math.atan(self.cx / self.fx)

    @property
    def vfov(self):
        return 2.0 * math.atan(self.cy / self.fy)

    @property
    def aspect(self):
        return self.width / self.height

    @property
    def position(self):
        return self.pose.position

    def withPose(self, pose: Pose):
        return Camera(pose, self.width, self.height, self.fx, self.fy)

    def pixelRays(self, row_start=0, row_stop=None):
        '''World ray directions for rows [row_start, row_stop), as (dx, dy, dz) arrays of shape (rows, w).'''
        row_stop = self.height if row_stop is None else row_stop
        u = np.arange(self.width, dtype=np.float64) + 0.5
        v = np.arange(row_start, row_stop, dtype=np.float64) + 0.5
        uu, vv = np.meshgrid(u, v)
        return self.directions(uu, vv)

    def directions(self, u, v):
        cy_ = -(u - self.cx) / self.fx
        cz_ = -(v - self.cy) / self.fy
        inv = 1.0 / np.sqrt(1.0 + cy_ * cy_ + cz_ * cz_)
        return rotate_components(self.rotation, inv, cy_ * inv, cz_ * inv)

    def projectComponents(self, x, y, z):
        '''Continuous (u, v) of world points plus a mask of points in front of the camera.'''
        px, py, pz = self.position
        lx, ly, lz = rotate_components_t(self.rotation, x - px, y - py, z - pz)
        front = lx > 0.0
        safe = np.where(front, lx, 1.0)
        u = self.cx - self.fx * ly / safe
        v = self.cy - self.fy * lz / safe
        return u, v, front


def camera_ray(camera: Camera, pixel):
    i, j = pixel
    if not (0 <= i < camera.width and 0 <= j < camera.height):
        raise ValueError('pixel {} outside {}x{} image'.format(pixel, camera.width, camera.height))
    d = camera.directions(np.array([i + 0.5]), np.array([j + 0.5]))
    return np.array(camera.position), np.array([d[0][0], d[1][0], d[2][0]])


def project(camera: Camera, point):
    '''(u, v) image coordinates, or None when the point is on or behind the camera plane.'''
    p = np.asarray(point, dtype=np.float64).reshape(3)
    u, v, front = camera.projectComponents(p[0:1], p[1:2], p[2:3])
    if not front[0]:
        return None
    return float(u[0]), float(v[0])
