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

import hashlib
from dataclasses import dataclass, field

import numpy as np

from cockpit.compose import panel_hits, capture_views, compose
from render.raycast import RayCaster


@dataclass
class FidelityReport(object):
    per_panel: dict = field(default_factory=dict)  # direction -> max channel deviation (None: not on screen)
    pixels: dict = field(default_factory=dict)  # direction -> unoccluded panel pixels
    overall: int = 0

    def toDict(self):
        return {'per_panel': dict(self.per_panel), 'pixels': dict(self.pixels), 'overall': self.overall}


def fidelity_report(scene, body_pose, head_pose, rig, camera, num_workers=1):
    '''Max |composed - plain| per 8-bit channel inside each panel's mask.'''
    plain, plain_t = RayCaster(scene, camera, None, num_workers).trace()
    if rig.panels:
        t_panel, index, _, _, _ = panel_hits(rig, rig.anchorPose(body_pose, head_pose), camera)
        nearer = np.isfinite(t_panel) & (plain_t < t_panel)
        if nearer.any():
            raise ValueError('fidelity precondition violated: {} pixels of world geometry lie nearer '
                             'than the panels (min depth {:.3f} m)'.format(int(nearer.sum()),
                                                                            float(plain.depth[nearer].min())))
    composed = compose(scene, body_pose, head_pose, rig, camera, None, num_workers)
    diff = np.abs(composed.color.astype(np.int16) - plain.color.astype(np.int16)).max(axis=2)

    report = FidelityReport()
    for panel in rig.panels:
        sel = composed.entity_id == panel.entity_id
        n = int(sel.sum())
        report.pixels[panel.direction] = n
        report.per_panel[panel.direction] = int(diff[sel].max()) if n else None
    if rig.panels:
        inside = np.isin(composed.entity_id, rig.panelIds())
        report.overall = int(diff[inside].max()) if inside.any() else 0
    else:
        report.overall = int(diff.max())
    return report


def texture_hash(color):
    return hashlib.sha256(np.ascontiguousarray(color).tobytes()).hexdigest()


def decoupling_report(scene, body_pose, head_poses, rig, num_workers=1):
    '''Distinct capture-texture hashes per panel over a set of head poses.'''
    hashes = {p.direction: set() for p in rig.panels}
    for head_pose in head_poses:
        anchor = rig.anchorPose(body_pose, head_pose)
        for panel, bundle in zip(rig.panels, capture_views(scene, anchor, rig, None, num_workers)):
            hashes[panel.direction].add(texture_hash(bundle.color))
    return {k: sorted(v) for k, v in hashes.items()}
