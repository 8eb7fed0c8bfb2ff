import math
import os
import sys

import pytest

HERE = os.path.abspath(__file__)
ROOT = os.path.dirname(os.path.dirname(HERE))

sys.path.insert(0, ROOT)

# noinspection PyPep8
from option import Option
# noinspection PyPep8
from scene import ArenaSpec, build_fps_scene, build_racing_scene, default_track_spec

DT = 1.0 / 30.0


def config_path(game):
    return os.path.join(ROOT, 'config_{}.yaml'.format(game))


def make_settings(out_dir, game='racing', condition='cp', **overrides):
    '''Option from an in-memory mapping; dotted keys override nested fields.'''
    config = {'game': game, 'condition': condition, 'seed': 3, 'dt': DT, 'out_dir': str(out_dir),
              'resolution': [32, 24], 'render_every': 0, 'log': {'frequency': 100000}}
    return Option(config=config, overrides=overrides)


@pytest.fixture
def racing_spec():
    return default_track_spec(n_coins=50, n_barriers=0, laps=1)


@pytest.fixture
def racing_scene(racing_spec):
    return build_racing_scene(racing_spec, 3)


@pytest.fixture
def duel_spec():
    '''One robot 10 m ahead of the player on an open floor.'''
    return ArenaSpec(walls=[], spawns=[(10.0, 0.0, math.pi)],
                     waypoints=[(0.0, 0.0), (-5.0, 0.0), (-5.0, -5.0), (0.0, 0.0)],
                     detection_radius=15.0, robot_count=1)


@pytest.fixture
def duel_scene(duel_spec):
    return build_fps_scene(duel_spec, 3)
