from .racing import KMH_70, RacingParams, RacingPilot, RacingState, RacingWorld, step_racing
from .fps import FpsParams, FpsState, FpsWorld, RobotState, step_fps
from .session_log import COLUMNS, SUMMARY_MEASURES, SessionLog, columns_for, read_session_csv

GAMES = ('racing', 'fps')


def make_world(game, spec, scene, seed, params=None):
    if game == 'racing':
        return RacingWorld(spec, scene, seed, params)
    if game == 'fps':
        return FpsWorld(spec, scene, params)
    raise ValueError('unknown game: {}'.format(game))
