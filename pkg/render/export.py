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
Frame I/O: binary PPM (P6, maxval 255) for color and masks, and little-endian
raster files with an 8-byte header (4-byte magic, uint16 width, uint16 height)
for depth, entity ids, motion and region masks.
'''

import os

import numpy as np
from PIL import Image

from .raycast import FrameBundle

RASTERS = {
    'depth': (b'DPT1', np.dtype('<f4'), 1),
    'entity_id': (b'EID1', np.dtype('<i4'), 1),
    'motion': (b'MOV1', np.dtype('<f4'), 2),
    'mask': (b'MSK1', np.dtype('u1'), 1),
}


def save_ppm(path, color):
    color = np.ascontiguousarray(color, dtype=np.uint8)
    if color.ndim == 2:
        color = np.repeat(color[..., None], 3, axis=2)
    Image.fromarray(color).save(path, format='PPM')


def load_ppm(path):
    if not os.path.isfile(path):
        raise FileNotFoundError('image not found: {}'.format(path))
    with Image.open(path) as img:
        return np.asarray(img.convert('RGB'), dtype=np.uint8).copy()


def mask_to_image(mask):
    return np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)


def save_raster(path, kind, data):
    magic, dtype, channels = RASTERS[kind]
    data = np.asarray(data)
    h, w = data.shape[:2]
    if w > 0xFFFF or h > 0xFFFF:
        raise ValueError('raster {}x{} exceeds the 16-bit header'.format(w, h))
    header = np.array([w, h], dtype='<u2')
    with open(path, 'wb') as f:
        f.write(magic)
        header.tofile(f)
        np.ascontiguousarray(data, dtype=dtype).reshape(h, w * channels).tofile(f)


def load_raster(path, kind):
    magic, dtype, channels = RASTERS[kind]
    if not os.path.isfile(path):
        raise FileNotFoundError('raster not found: {}'.format(path))
    with open(path, 'rb') as f:
        got = f.read(4)
        if got != magic:
            raise ValueError('{}: bad magic {!r}, expected {!r}'.format(path, got, magic))
        w, h = (int(v) for v in np.fromfile(f, dtype='<u2', count=2))
        data = np.fromfile(f, dtype=dtype, count=w * h * channels)
    if data.size != w * h * channels:
        raise ValueError('{}: truncated raster, {} of {} values'.format(path, data.size, w * h * channels))
    data = data.astype(dtype.newbyteorder('='))
    return data.reshape(h, w, channels) if channels > 1 else data.reshape(h, w)


def save_bundle(prefix, bundle: FrameBundle):
    '''Writes <prefix>.ppm/.dpt/.eid/.mov.'''
    save_ppm(prefix + '.ppm', bundle.color)
    save_raster(prefix + '.dpt', 'depth', bundle.depth)
    save_raster(prefix + '.eid', 'entity_id', bundle.entity_id)
    save_raster(prefix + '.mov', 'motion', bundle.motion)


def load_bundle(prefix):
    return FrameBundle(load_ppm(prefix + '.ppm'),
                       load_raster(prefix + '.dpt', 'depth'),
                       load_raster(prefix + '.eid', 'entity_id'),
                       load_raster(prefix + '.mov', 'motion'))
