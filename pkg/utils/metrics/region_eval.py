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

import csv
from dataclasses import dataclass

import numpy as np

REGIONS = ('inside', 'outside', 'full')


@dataclass
class RegionStats(object):
    region: str
    mean_flow_deg_s: float  # None when the region has no valid flow pixel
    depth_range_m: float  # None when the region has no finite depth
    pixels: int
    valid_pixels: int
    fraction: float

    @property
    def flagged(self):
        return self.mean_flow_deg_s is None

    def toRow(self, tick):
        return [tick, self.region, _fmt(self.mean_flow_deg_s), _fmt(self.depth_range_m), self.pixels]


def _fmt(x):
    return '' if x is None else '{:.6f}'.format(x)


def angular_speed(flow, camera, dt):
    '''deg/s between the ray through each pixel and the ray through its flow origin.'''
    h, w = flow.shape[:2]
    u = np.arange(w, dtype=np.float64) + 0.5
    v = np.arange(h, dtype=np.float64) + 0.5
    uu, vv = np.meshgrid(u, v)
    a1 = -(uu - camera.cx) / camera.fx
    b1 = -(vv - camera.cy) / camera.fy
    a0 = -(uu - flow[..., 0] - camera.cx) / camera.fx
    b0 = -(vv - flow[..., 1] - camera.cy) / camera.fy
    # rays (1, a, b); angle from cross and dot products
    cx_ = a0 * b1 - b0 * a1
    cy_ = b0 - b1
    cz_ = a1 - a0
    cross = np.sqrt(cx_ * cx_ + cy_ * cy_ + cz_ * cz_)
    dot = 1.0 + a0 * a1 + b0 * b1
    return np.degrees(np.arctan2(cross, dot)) / dt


def region_stats(bundle, flow, mask, camera, dt):
    '''Inside/outside/full aggregates of angular flow speed and depth range.'''
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != bundle.depth.shape or flow.valid.shape != bundle.depth.shape:
        raise ValueError('region inputs disagree in size: mask {} flow {} frame {}'.format(
            mask.shape, flow.valid.shape, bundle.depth.shape))
    if not dt > 0:
        raise ValueError('dt must be > 0, got {}'.format(dt))
    speed = angular_speed(flow.flow, camera, dt)
    finite = np.isfinite(bundle.depth)
    total = mask.size
    stats = []
    for label, region in zip(REGIONS, (mask, ~mask, np.ones_like(mask))):
        sel = region & flow.valid
        n_valid = int(sel.sum())
        mean_flow = float(speed[sel].mean()) if n_valid else None
        depths = bundle.depth[region & finite]
        depth_range = float(depths.max()) - float(depths.min()) if depths.size else None
        n = int(region.sum())
        stats.append(RegionStats(label, mean_flow, depth_range, n, n_valid, n / total))
    return stats


def depth_range(depth, region):
    d = depth[np.asarray(region, dtype=bool) & np.isfinite(depth)]
    if d.size == 0:
        return None
    return float(d.max()) - float(d.min())


def mask_fraction(mask):
    return float(np.count_nonzero(mask)) / float(np.size(mask))

METRICS_COLUMNS = ('tick', 'region', 'mean_flow_deg_s', 'depth_range_m', 'pixels')


def write_region_csv(path, header: dict, rows, regions=REGIONS):
    '''Rows are (tick, RegionStats) pairs; `header` entries become leading '#' lines.'''
    with open(path, 'w', newline='') as f:
        for key, value in header.items():
            f.write('# {}: {}\n'.format(key, value))
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(METRICS_COLUMNS)
        for tick, stats in rows:
            if stats.region in regions:
                writer.writerow(stats.toRow(tick))
