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

import copy
import dataclasses
import math
import os

import yaml

from cockpit.rig import CockpitConfig
from games import GAMES, FpsParams, RacingParams
from scene.builders import ArenaSpec, TrackSpec, default_arena_spec, default_track_spec
from utils.tools import config_hash

CONDITIONS = ('cp', 'normal')
# fields that change neither the simulated world nor the content of a rendered frame
HASH_EXCLUDE = ('condition', 'render_every', 'out_dir', 'num_workers', 'log')
DEFAULT_MAX_TICKS = {'racing': 40000, 'fps': 30000}


class ConfigError(ValueError):
    '''Invalid run configuration; the message starts with the dotted path of the field.'''

    def __init__(self, path, message):
        self.path = path
        super(ConfigError, self).__init__('{}: {}'.format(path, message))


def _section(config, name):
    value = config.get(name)
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(name, 'must be a mapping, got {}'.format(type(value).__name__))
    return value


def _number(path, value, lo=None, hi=None, integer=False, open_lo=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, 'must be a number, got {!r}'.format(value))
    if integer and value != int(value):
        raise ConfigError(path, 'must be an integer, got {}'.format(value))
    if not math.isfinite(value):
        raise ConfigError(path, 'must be finite, got {}'.format(value))
    if lo is not None and (value <= lo if open_lo else value < lo):
        raise ConfigError(path, 'must be {} {}, got {}'.format('>' if open_lo else '>=', lo, value))
    if hi is not None and value > hi:
        raise ConfigError(path, 'must be <= {}, got {}'.format(hi, value))
    return int(value) if integer else float(value)


def _params(path, cls, values):
    names = {f.name for f in dataclasses.fields(cls)}
    for key in values:
        if key not in names:
            raise ConfigError('{}.{}'.format(path, key), 'unknown parameter')
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in values:
            kwargs[f.name] = _number('{}.{}'.format(path, f.name), values[f.name], integer=f.type is int or f.type == 'int')
    params = cls(**kwargs)
    try:
        params.validate()
    except ValueError as e:
        raise ConfigError(path, str(e))
    return params


def apply_overrides(config, overrides):
    '''Set dotted-path keys, e.g. {"cockpit.coverage": 0.2}; None values are ignored.'''
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = config
        parts = key.split('.')
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]
        node[parts[-1]] = value
    return config


def load_config(config_path):
    if not os.path.isfile(config_path):
        raise FileNotFoundError('config file not found: {}'.format(config_path))
    with open(config_path, 'r') as f:
        try:
            config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError('<file>', 'cannot parse {}: {}'.format(config_path, e))
    if config is None:
        config = {}
    if not isinstance(config, dict):
        raise ConfigError('<root>', 'config must be a mapping, got {}'.format(type(config).__name__))
    return config


class Option(object):
    def __init__(self, config_path=None, overrides=None, config=None):
        self.config_path = config_path
        if config is None:
            config = load_config(config_path) if config_path is not None else {}
        self.config = apply_overrides(copy.deepcopy(config), overrides)
        c = self.config

        # General options
        self.game = str(c.get('game', 'racing')).lower()
        if self.game not in GAMES:
            raise ConfigError('game', 'must be one of {}, got {!r}'.format(GAMES, c.get('game')))
        self.condition = str(c.get('condition', 'cp')).lower()
        if self.condition not in CONDITIONS:
            raise ConfigError('condition', 'must be one of {}, got {!r}'.format(CONDITIONS, c.get('condition')))
        self.seed = _number('seed', c.get('seed', 1), lo=0, integer=True)
        self.dt = _number('dt', c.get('dt', 1.0 / 30.0), lo=0.0, open_lo=True)
        self.resolution = self._resolution(c.get('resolution', [320, 240]))
        self.head_fov_deg = _number('head_fov_deg', c.get('head_fov_deg', 90.0), lo=0.0, hi=170.0, open_lo=True)
        self.render_every = _number('render_every', c.get('render_every', 1), lo=0, integer=True)
        self.num_workers = _number('num_workers', c.get('num_workers', 1), lo=1, integer=True)
        self.out_dir = c.get('out_dir') or os.path.join('runs', '{}_{}_seed{}'.format(self.game, self.condition, self.seed))

        # Cockpit config
        cockpit = _section(c, 'cockpit')
        capture = cockpit.get('capture_resolution')
        self.cockpit = CockpitConfig(
            coverage=_number('cockpit.coverage', cockpit.get('coverage', 0.30)),
            distance=_number('cockpit.distance', cockpit.get('distance', 1.0)),
            anchor=str(cockpit.get('anchor', 'Body')).capitalize(),
            capture_resolution=None if capture is None else self._resolution(capture, 'cockpit.capture_resolution'),
            enabled=tuple(cockpit.get('enabled', ('Front', 'Left', 'Back', 'Right'))),
            snap_to_pixels=bool(cockpit.get('snap_to_pixels', True)))
        if not 0.0 < self.cockpit.coverage < 1.0:
            raise ConfigError('cockpit.coverage', 'must satisfy 0 < c < 1, got {}'.format(self.cockpit.coverage))
        try:
            self.cockpit.validate()
        except ValueError as e:
            raise ConfigError('cockpit', str(e))

        # Scene config
        self.scene_spec = self._sceneSpec(c.get('scene'))

        # Game tunables
        self.racing = _params('racing', RacingParams, _section(c, 'racing'))
        self.fps = _params('fps', FpsParams, _section(c, 'fps'))

        # Session config
        session = _section(c, 'session')
        self.max_ticks = _number('session.max_ticks', session.get('max_ticks', DEFAULT_MAX_TICKS[self.game]),
                                 lo=1, integer=True)
        truncate = session.get('truncate_ticks')
        self.truncate_ticks = None if truncate is None else _number('session.truncate_ticks', truncate, lo=1, integer=True)
        self.head_sweep_deg = _number('session.head_sweep_deg', session.get('head_sweep_deg', 0.0), lo=0.0, hi=180.0)
        self.head_sweep_period = _number('session.head_sweep_period', session.get('head_sweep_period', 8.0),
                                         lo=0.0, open_lo=True)

        # Metrics config
        metrics = _section(c, 'metrics')
        self.metrics_enabled = bool(metrics.get('enabled', True))
        self.flow_tau = _number('metrics.tau', metrics.get('tau', 1e-3), lo=0.0)
        self.flow_window = _number('metrics.window', metrics.get('window', 5), lo=3, integer=True)
        if self.flow_window % 2 == 0:
            raise ConfigError('metrics.window', 'must be odd, got {}'.format(self.flow_window))

        # Log config
        log = _section(c, 'log')
        self.use_tensorboard = bool(log.get('tensorboard', False))
        self.log_frequency = _number('log.frequency', log.get('frequency', 300), lo=1, integer=True)

        self.config_hash = config_hash(self.resolved(), HASH_EXCLUDE)

    @staticmethod
    def _resolution(value, path='resolution'):
        if isinstance(value, str):
            parts = value.lower().split('x')
            if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
                raise ConfigError(path, 'expected WxH, got {!r}'.format(value))
            value = [int(p) for p in parts]
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(path, 'expected [width, height], got {!r}'.format(value))
        w = _number(path + '[0]', value[0], lo=8, integer=True)
        h = _number(path + '[1]', value[1], lo=8, integer=True)
        return (w, h)

    def _sceneSpec(self, data):
        if data is None:
            return default_track_spec() if self.game == 'racing' else default_arena_spec()
        if not isinstance(data, dict):
            raise ConfigError('scene', 'must be a mapping, got {}'.format(type(data).__name__))
        required = ('centerline',) if self.game == 'racing' else ('walls', 'spawns', 'waypoints')
        for key in required:
            if key not in data:
                raise ConfigError('scene.{}'.format(key), 'missing for game {}'.format(self.game))
        try:
            spec = TrackSpec.fromDict(data) if self.game == 'racing' else ArenaSpec.fromDict(data)
            spec.validate()
        except (TypeError, ValueError) as e:
            raise ConfigError('scene', str(e))
        return spec

    @property
    def params(self):
        return self.racing if self.game == 'racing' else self.fps

    def resolved(self):
        '''The fully defaulted configuration as plain data.'''
        return {
            'game': self.game, 'condition': self.condition, 'seed': self.seed, 'dt': self.dt,
            'resolution': list(self.resolution), 'head_fov_deg': self.head_fov_deg,
            'render_every': self.render_every, 'num_workers': self.num_workers, 'out_dir': self.out_dir,
            'cockpit': self.cockpit.toDict(),
            'scene': self.scene_spec.toDict(),
            self.game: dataclasses.asdict(self.params),
            'session': {'max_ticks': self.max_ticks, 'truncate_ticks': self.truncate_ticks,
                        'head_sweep_deg': self.head_sweep_deg, 'head_sweep_period': self.head_sweep_period},
            'metrics': {'enabled': self.metrics_enabled, 'tau': self.flow_tau, 'window': self.flow_window},
            'log': {'tensorboard': self.use_tensorboard, 'frequency': self.log_frequency},
        }

    def check_path(self):
        os.makedirs(self.out_dir, exist_ok=True)
