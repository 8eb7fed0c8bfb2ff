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

import argparse
import json
import math
import os
import sys

import numpy as np

import utils.tools as tools
from analysis import analyze_study, format_report, load_study, write_report
from cockpit import compose, frame_region_mask
from option import Option
from render import Camera, load_bundle, load_raster, mask_to_image, render, save_ppm
from scene import IDENTITY, Pose, default_arena_spec, default_track_spec
from session import FRAMES_DIR, MANIFEST, Session, frame_prefix, run_session
from utils.metrics import REGIONS, estimate_flow, mask_fraction, region_stats, write_region_csv


def _overrides(args):
    overrides = {
        'condition': getattr(args, 'condition', None),
        'seed': getattr(args, 'seed', None),
        'render_every': getattr(args, 'render_every', None),
        'out_dir': getattr(args, 'out', None),
        'resolution': getattr(args, 'resolution', None),
        'cockpit.coverage': getattr(args, 'coverage', None),
        'cockpit.anchor': getattr(args, 'anchor', None),
        'session.truncate_ticks': getattr(args, 'truncate_ticks', None),
    }
    if getattr(args, 'tensorboard', False):
        overrides['log.tensorboard'] = True
    return overrides


class Experiment(object):
    def __init__(self, settings: Option, save_frames=False):
        self.settings = settings
        self.settings.check_path()
        self.save_frames = save_frames
        self.recorder = tools.Recorder(self.settings, self.settings.out_dir, self.settings.use_tensorboard)
        self.recorder.logger.info('config hash: {}'.format(self.settings.config_hash))

    def run(self):
        try:
            session = run_session(self.settings, self.recorder, self.save_frames)
        finally:
            self.recorder.close()
        print(session.log.summaryLine())
        return session


def cmd_simulate(args):
    settings = Option(args.config, _overrides(args))
    session = Experiment(settings, save_frames=args.save_frames).run()
    if session.log.status == 'timeout':
        raise RuntimeError('session timed out after {} ticks without reaching its end condition'.format(
            settings.max_ticks))
    return 0


def cmd_snapshot(args):
    settings = Option(args.config, _overrides(args))
    session = Session(settings)
    world = session.world
    state = world.initialState()
    rng = np.random.default_rng(settings.seed)
    for _ in range(args.tick):
        if state.done:
            break
        state = world.step(state, settings.dt, rng)
    world.syncScene(state)

    body = state.bodyPose()
    values = [args.x, args.y, args.z, args.yaw, args.head_yaw, args.head_pitch]
    if any(v is not None and not math.isfinite(v) for v in values):
        raise ValueError('snapshot pose must be finite, got {}'.format(values))
    px, py, pz = body.position
    body = Pose((px if args.x is None else args.x, py if args.y is None else args.y,
                 pz if args.z is None else args.z),
                yaw=body.yaw if args.yaw is None else math.radians(args.yaw), pitch=body.pitch)
    head = Pose((body.position[0], body.position[1], body.position[2] + world.params.eye_height),
                yaw=body.yaw + math.radians(args.head_yaw or 0.0),
                pitch=body.pitch + math.radians(args.head_pitch or 0.0))

    camera = session.camera.withPose(head)
    rig = session.rig
    composed = compose(session.scene, body, head, rig, camera, None, settings.num_workers)
    plain = render(session.scene, camera, None, settings.num_workers)
    mask = frame_region_mask(camera, body, head, rig)

    settings.check_path()
    out = settings.out_dir
    save_ppm(os.path.join(out, 'snapshot_cp.ppm'), composed.color)
    save_ppm(os.path.join(out, 'snapshot_normal.ppm'), plain.color)
    save_ppm(os.path.join(out, 'snapshot_mask.ppm'), mask_to_image(mask))
    print('mask fraction: {:.4f}'.format(mask_fraction(mask)))
    print('config hash: {}'.format(settings.config_hash))
    return 0


def offline_metrics(session_dir, regions=REGIONS):
    '''Recomputes region metrics from stored frames; returns (header, rows).'''
    manifest_path = os.path.join(session_dir, FRAMES_DIR, MANIFEST)
    if not os.path.isfile(manifest_path):
        raise FileNotFoundError('no frame stream in {} (missing {})'.format(session_dir, manifest_path))
    with open(manifest_path) as f:
        manifest = json.load(f)
    ticks = manifest['ticks']
    if not ticks:
        raise ValueError('frame stream in {} is empty'.format(session_dir))
    camera = Camera(IDENTITY, manifest['width'], manifest['height'], manifest['fx'], manifest['fy'])
    rows = []
    prev, prev_tick = None, None
    for tick in ticks:
        prefix = frame_prefix(session_dir, tick)
        bundle = load_bundle(prefix)
        if prev is not None:
            mask = load_raster(prefix + '.msk', 'mask').astype(bool)
            flow = estimate_flow(prev, bundle, manifest['tau'], manifest['window'])
            stats = region_stats(bundle, flow, mask, camera, manifest['dt'] * (tick - prev_tick))
            rows.extend((tick, s) for s in stats if s.region in regions)
        prev, prev_tick = bundle, tick
    header = {'config_hash': manifest['config_hash'], 'condition': manifest['condition']}
    return header, rows


def cmd_metrics(args):
    regions = REGIONS if args.regions is None else tuple(r.strip() for r in args.regions.split(','))
    unknown = [r for r in regions if r not in REGIONS]
    if unknown:
        raise ValueError('unknown regions {}, expected a subset of {}'.format(unknown, REGIONS))
    header, rows = offline_metrics(args.session_dir, regions)
    out = args.out or os.path.join(args.session_dir, 'metrics_offline.csv')
    write_region_csv(out, header, rows, regions)
    print('wrote {} rows to {}'.format(len(rows), out))
    return 0


def cmd_analyze(args):
    if not args.questionnaire and not args.performance:
        raise ValueError('analyze needs at least one --questionnaire or --performance CSV')
    table = load_study(args.questionnaire or (), args.performance or (), args.weights)
    report = analyze_study(table)
    os.makedirs(args.out, exist_ok=True)
    write_report(report, os.path.join(args.out, 'report.json'), os.path.join(args.out, 'report.txt'))
    print(format_report(report), end='')
    return 0


def cmd_gen_scene(args):
    spec = default_track_spec() if args.game == 'racing' else default_arena_spec()
    text = json.dumps(spec.toDict(), indent=2)
    if args.out:
        with open(args.out, 'w') as f:
            f.write(text + '\n')
    else:
        print(text)
    return 0


def _run_flags(p):
    p.add_argument('--config', type=str, required=True, help='path of config file (YAML or JSON)')
    p.add_argument('--condition', type=str, choices=('cp', 'normal'), help='cockpit panels on (cp) or off')
    p.add_argument('--seed', type=int, help='random seed')
    p.add_argument('--render-every', dest='render_every', type=int, help='render every k-th tick, 0 disables')
    p.add_argument('--out', type=str, help='output directory')
    p.add_argument('--resolution', type=str, help='head resolution WxH')
    p.add_argument('--coverage', type=float, help='panel coverage fraction of the head view')
    p.add_argument('--anchor', type=str, choices=('Body', 'Head', 'body', 'head'), help='panel anchor')


def build_parser():
    parser = argparse.ArgumentParser(description='Cockpit-panel workbench')
    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('simulate', help='run one game session')
    _run_flags(p)
    p.add_argument('--truncate-ticks', dest='truncate_ticks', type=int, help='stop after this many ticks')
    p.add_argument('--save-frames', dest='save_frames', action='store_true', help='store frames for offline metrics')
    p.add_argument('--tensorboard', action='store_true', help='log scalars with tensorboardX')
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('snapshot', help='render one composed and one plain still')
    _run_flags(p)
    p.add_argument('--tick', type=int, default=0, help='simulate this many ticks first')
    p.add_argument('--x', type=float)
    p.add_argument('--y', type=float)
    p.add_argument('--z', type=float)
    p.add_argument('--yaw', type=float, help='body yaw, degrees')
    p.add_argument('--head-yaw', dest='head_yaw', type=float, help='head yaw relative to the body, degrees')
    p.add_argument('--head-pitch', dest='head_pitch', type=float, help='head pitch relative to the body, degrees')
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser('metrics', help='recompute region metrics from stored frames')
    p.add_argument('session_dir', type=str)
    p.add_argument('--regions', type=str, help='comma separated subset of inside,outside,full')
    p.add_argument('--out', type=str, help='output CSV path')
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser('analyze', help='paired analysis of study CSVs')
    p.add_argument('--questionnaire', type=str, action='append', help='SSQ/IEQ ratings CSV')
    p.add_argument('--performance', type=str, action='append', help='performance measures CSV')
    p.add_argument('--weights', type=str, default='none', choices=('none', 'kennedy'), help='SSQ weighting')
    p.add_argument('--out', type=str, default='report', help='output directory')
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser('gen-scene', help='print the default scene spec as JSON')
    p.add_argument('--game', type=str, required=True, choices=('racing', 'fps'))
    p.add_argument('--out', type=str, help='output JSON path')
    p.set_defaults(func=cmd_gen_scene)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, 'func', None) is None:
        parser.print_help()
        return 1
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, RuntimeError, KeyError) as e:
        print('ERROR: {}'.format(e), file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
