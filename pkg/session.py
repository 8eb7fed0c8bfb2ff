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

import datetime
import json
import math
import os
import time

import numpy as np

from cockpit import compose, frame_region_mask, make_cockpit_rig
from games import SessionLog, make_world
from option import Option
from render import Camera, PreviousFrame, render, save_bundle, save_raster
from scene import IDENTITY, build_fps_scene, build_racing_scene
from utils.metrics import RegionRollup, estimate_flow, eval_results, region_stats, tensorboard_logger, write_region_csv

FRAMES_DIR = 'frames'
MANIFEST = 'manifest.json'


def frame_prefix(out_dir, tick):
    return os.path.join(out_dir, FRAMES_DIR, '{:06d}'.format(tick))


class Session(object):
    '''
    One game session: fixed-step simulation with optional rendering every
    `render_every` ticks. Rendering only reads the scene, so the logged
    trajectory does not depend on the condition or the render cadence.
    '''

    def __init__(self, settings: Option, recorder=None, save_frames=False):
        self.settings = settings
        self.recorder = recorder
        self.save_frames = save_frames
        self.dt = settings.dt

        self.scene = self._initScene()
        self.world = make_world(settings.game, settings.scene_spec, self.scene, settings.seed, settings.params)
        self.rng = np.random.default_rng(settings.seed)

        # Normal sessions keep the rig geometry for the would-be panel mask
        self.camera = self._initCamera()
        self.rig = make_cockpit_rig(settings.cockpit, self.camera)

        self.log = SessionLog(settings.game, settings.condition, settings.seed, settings.dt, settings.config_hash)
        self.metric_rows = []
        self.rollup = RegionRollup()
        self.rendered_ticks = []

        self._prev_frame = None
        self._prev_bundle = None
        self._prev_tick = None

    def _initScene(self):
        if self.settings.game == 'racing':
            return build_racing_scene(self.settings.scene_spec, self.settings.seed)
        return build_fps_scene(self.settings.scene_spec, self.settings.seed)

    def _initCamera(self):
        w, h = self.settings.resolution
        return Camera.fromFov(IDENTITY, math.radians(self.settings.head_fov_deg), w, h)

    def headYaw(self, tick):
        amplitude = math.radians(self.settings.head_sweep_deg)
        if amplitude == 0.0:
            return 0.0
        return amplitude * math.sin(2.0 * math.pi * tick * self.dt / self.settings.head_sweep_period)

    def _logTick(self, state):
        head_pose = self.world.headPose(state, self.headYaw(state.tick))
        row = self.world.logRow(state, head_pose, self.dt)
        self.log.addRow(row)
        return head_pose, row

    def _renderTick(self, state, head_pose, row):
        settings = self.settings
        body_pose = state.bodyPose()
        camera = self.camera.withPose(head_pose)
        if settings.condition == 'cp':
            bundle = compose(self.scene, body_pose, head_pose, self.rig, camera, self._prev_frame, settings.num_workers)
            mask = np.isin(bundle.entity_id, self.rig.panelIds())
        else:
            bundle = render(self.scene, camera, self._prev_frame, settings.num_workers)
            mask = frame_region_mask(camera, body_pose, head_pose, self.rig)

        stats = None
        if settings.metrics_enabled and self._prev_bundle is not None:
            flow = estimate_flow(self._prev_bundle, bundle, settings.flow_tau, settings.flow_window)
            stats = region_stats(bundle, flow, mask, camera, self.dt * (state.tick - self._prev_tick))
            self.metric_rows.extend((state.tick, s) for s in stats)
            self.rollup.update(stats)
        tensorboard_logger(state.tick, settings.condition, self.recorder, row, stats)

        if self.save_frames:
            prefix = frame_prefix(settings.out_dir, state.tick)
            save_bundle(prefix, bundle)
            save_raster(prefix + '.msk', 'mask', mask)
        self.rendered_ticks.append(state.tick)

        self._prev_frame = PreviousFrame(camera, self.scene.entityPoses(), body_pose, head_pose)
        self._prev_bundle = bundle
        self._prev_tick = state.tick

    def _progress(self, state, row, t_start):
        if self.recorder is None:
            return
        limit = self.settings.truncate_ticks or self.settings.max_ticks
        log_str = '>>> {} T[{:06d}|{:06d}] '.format(self.settings.condition.upper(), state.tick, limit)
        if self.settings.game == 'racing':
            log_str += 'Lap {} Speed {:.2f} Coins {} Crashes {} '.format(
                row['lap'], row['speed'], row['coins'], row['crashes'])
        else:
            log_str += 'Distance {:.2f} Shots {} Received {} Robots {} '.format(
                row['distance'], row['shots_fired'], row['shots_received'], row['robots_alive'])
        log_str += 'Frames {} Elapsed {}'.format(len(self.rendered_ticks),
                                                 datetime.timedelta(seconds=int(time.time() - t_start)))
        self.recorder.logger.info(log_str)

    def run(self):
        settings = self.settings
        k = settings.render_every
        if self.save_frames:
            os.makedirs(os.path.join(settings.out_dir, FRAMES_DIR), exist_ok=True)
        t_start = time.time()

        state = self.world.initialState()
        self.world.syncScene(state)
        while True:
            head_pose, row = self._logTick(state)
            if k > 0 and state.tick % k == 0:
                self._renderTick(state, head_pose, row)
            if state.tick % settings.log_frequency == 0:
                self._progress(state, row, t_start)
            if state.done:
                self.log.status = 'complete'
                break
            if settings.truncate_ticks is not None and state.tick >= settings.truncate_ticks:
                self.log.status = 'truncated'
                break
            if state.tick >= settings.max_ticks:
                self.log.status = 'timeout'
                break
            state = self.world.step(state, self.dt, self.rng)
            self.world.syncScene(state)

        self.log.extra = self.world.summaryExtra(state)
        self._progress(state, row, t_start)
        if self.recorder is not None:
            self.recorder.logger.info('=== {}'.format(self.log.summaryLine()))
            if self.rollup.frames:
                eval_results(self.recorder, self.rollup, settings.condition)
            self.recorder.logger.info('=== Total cost time: {}'.format(
                datetime.timedelta(seconds=time.time() - t_start)))
        return self.log

    def metricsHeader(self):
        return {'config_hash': self.settings.config_hash, 'condition': self.settings.condition}

    def write(self):
        out_dir = self.settings.out_dir
        self.log.write(out_dir)
        if self.settings.render_every > 0 and self.settings.metrics_enabled:
            write_region_csv(os.path.join(out_dir, 'metrics.csv'), self.metricsHeader(), self.metric_rows)
            with open(os.path.join(out_dir, 'metrics_summary.json'), 'w') as f:
                json.dump(dict(self.rollup.toDict(), **self.metricsHeader()), f, indent=2, sort_keys=True)
                f.write('\n')
        if self.save_frames:
            manifest = {'width': self.camera.width, 'height': self.camera.height,
                        'fx': self.camera.fx, 'fy': self.camera.fy, 'dt': self.dt,
                        'render_every': self.settings.render_every, 'ticks': self.rendered_ticks,
                        'tau': self.settings.flow_tau, 'window': self.settings.flow_window}
            manifest.update(self.metricsHeader())
            with open(os.path.join(out_dir, FRAMES_DIR, MANIFEST), 'w') as f:
                json.dump(manifest, f, indent=2, sort_keys=True)
                f.write('\n')


def run_session(settings: Option, recorder=None, save_frames=False, write=True):
    '''Runs one session to its end condition; returns the Session (log, metric rows, rollup).'''
    session = Session(settings, recorder, save_frames)
    session.run()
    if write:
        settings.check_path()
        session.write()
    return session
