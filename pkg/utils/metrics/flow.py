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
Dense single-level Lucas-Kanade optical flow.

Window sums use unfold-based neighbourhood gathering, as in the kNN
post-processing of SalsaNext / lidar-bonnetal.
'''

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

LUMA = (0.299, 0.587, 0.114)


@dataclass
class FlowField(object):
    flow: np.ndarray  # (h, w, 2) pixels/frame, zero where invalid
    valid: np.ndarray  # (h, w) bool
    min_eig: np.ndarray  # (h, w) smaller eigenvalue of the mean structure tensor

    @property
    def validFraction(self):
        return float(self.valid.mean())


def luminance(color):
    c = np.asarray(color, dtype=np.float64) / 255.0
    return LUMA[0] * c[..., 0] + LUMA[1] * c[..., 1] + LUMA[2] * c[..., 2]


def window_mean(x: np.ndarray, window: int):
    '''Mean over a window x window neighbourhood (zero padded at the border).'''
    h, w = x.shape
    t = torch.from_numpy(np.ascontiguousarray(x, dtype=np.float64)).view(1, 1, h, w)
    cols = F.unfold(t, kernel_size=window, padding=window // 2)
    return (cols.sum(dim=1) / float(window * window)).view(h, w).numpy()


def estimate_flow(prev, curr, tau=1e-3, window=5):
    '''
    Flow from `prev` to `curr` (FrameBundles or uint8 color arrays).

    Gradients are taken on the average of both frames; a pixel is valid when the smaller
    eigenvalue of its mean 2x2 structure tensor exceeds `tau` and its window lies inside the image.
    '''
    c0 = prev.color if hasattr(prev, 'color') else prev
    c1 = curr.color if hasattr(curr, 'color') else curr
    if c0.shape != c1.shape:
        raise ValueError('flow frames differ in size: {} vs {}'.format(c0.shape, c1.shape))
    if window < 3 or window % 2 == 0:
        raise ValueError('flow window must be odd and >= 3, got {}'.format(window))
    l0 = luminance(c0)
    l1 = luminance(c1)
    avg = 0.5 * (l0 + l1)
    iy, ix = np.gradient(avg)
    it = l1 - l0

    sxx = window_mean(ix * ix, window)
    syy = window_mean(iy * iy, window)
    sxy = window_mean(ix * iy, window)
    sxt = window_mean(ix * it, window)
    syt = window_mean(iy * it, window)

    half_tr = 0.5 * (sxx + syy)
    min_eig = half_tr - np.sqrt((0.5 * (sxx - syy)) ** 2 + sxy * sxy)
    valid = min_eig > tau
    r = window // 2
    valid[:r] = False
    valid[-r:] = False
    valid[:, :r] = False
    valid[:, -r:] = False

    det = np.where(valid, sxx * syy - sxy * sxy, 1.0)
    u = -(syy * sxt - sxy * syt) / det
    v = -(sxx * syt - sxy * sxt) / det
    flow = np.stack([np.where(valid, u, 0.0), np.where(valid, v, 0.0)], axis=-1)
    return FlowField(flow, valid, min_eig)
