import dataclasses
import math

import numpy as np
import pytest

from conftest import DT, make_settings
from games import KMH_70, FpsParams, FpsWorld, RacingParams, RacingWorld, SessionLog, columns_for, read_session_csv
from scene import build_fps_scene, build_racing_scene, default_track_spec
from session import Session, run_session

SEEDS = list(range(10))


def _drive(world, state, ticks, rng=None):
    states = [state]
    for _ in range(ticks):
        if state.done:
            break
        state = world.step(state, DT, rng)
        world.syncScene(state)
        states.append(state)
    return states


def test_params_validation():
    with pytest.raises(ValueError, match='v_max'):
        RacingParams(v_max=25.0).validate()
    with pytest.raises(ValueError, match='hit_prob'):
        FpsParams(hit_prob=1.5).validate()
    assert FpsParams().ticks(0.5, DT) == 15
    assert FpsParams().ticks(2.0, DT) == 60


def test_racing_tracks_centerline_and_collects_coins(racing_spec, racing_scene):
    world = RacingWorld(racing_spec, racing_scene, 3, RacingParams(wander_amplitude=0.0))
    states = _drive(world, world.initialState(), 20000)
    final = states[-1]
    assert final.done and final.lap == 1
    assert final.crashes == 0
    assert final.coins >= 45
    assert max(s.speed for s in states) == pytest.approx(KMH_70)


def test_coins_revive_on_lap(racing_spec, racing_scene):
    spec = dataclasses.replace(racing_spec, laps=2)
    world = RacingWorld(spec, racing_scene, 3, RacingParams(wander_amplitude=0.0))
    states = _drive(world, world.initialState(), 20000)
    k = next(i for i, s in enumerate(states) if s.lap == 1)
    assert not states[k - 1].coin_alive.all()
    assert states[k].coin_alive.all()
    assert states[-1].done and states[-1].lap == 2
    assert states[-1].coins > 50


def test_barrier_crash_pauses_and_respawns():
    clean = default_track_spec(n_coins=0, n_barriers=0, laps=1)
    blocked = dataclasses.replace(clean, barriers=[(300.0, 0.0)])
    params = RacingParams(wander_amplitude=0.0)

    free = RacingWorld(clean, build_racing_scene(clean, 3), 3, params)
    hit = RacingWorld(blocked, build_racing_scene(blocked, 3), 3, params)
    free_states = _drive(free, free.initialState(), 20000)
    hit_states = _drive(hit, hit.initialState(), 20000)

    assert free_states[-1].crashes == 0
    assert hit_states[-1].crashes == 1
    assert hit_states[-1].done
    delay = (hit_states[-1].tick - free_states[-1].tick) * DT
    assert delay >= params.crash_pause

    # the car stands still for the whole pause
    k = next(i for i, s in enumerate(hit_states) if s.crashes == 1)
    pause = int(round(params.crash_pause / DT))
    assert all(s.speed == 0.0 for s in hit_states[k:k + pause])


@pytest.mark.parametrize('seed', SEEDS)
def test_racing_session_constants(tmp_path, seed):
    settings = make_settings(tmp_path, 'racing', seed=seed)
    session = Session(settings)
    log = session.run()
    assert log.status == 'complete'
    assert log.rows[-1]['lap'] == 2
    speeds = np.array([r['speed'] for r in log.rows])
    assert speeds.max() <= KMH_70 + 1e-9


def test_racing_step_length_respects_speed_on_grades():
    spec = default_track_spec(n_coins=0, n_barriers=0, laps=1)
    world = RacingWorld(spec, build_racing_scene(spec, 3), 3, RacingParams(wander_amplitude=0.0))
    states = _drive(world, world.initialState(), 20000)
    assert states[-1].done
    xyz = np.array([(s.x, s.y, s.z) for s in states])
    steps = np.linalg.norm(np.diff(xyz, axis=0), axis=1)
    limit = np.array([s.speed for s in states[1:]]) * DT
    assert (steps <= limit + 1e-9).all()
    graded = np.abs([s.pitch for s in states[1:]]) > math.radians(7.0)
    assert graded.any()
    assert steps[graded].max() == pytest.approx(KMH_70 * DT, rel=1e-3)
    assert states[-1].distance == pytest.approx(steps.sum(), rel=1e-9)


def _duel(duel_spec, duel_scene, **params):
    return FpsWorld(duel_spec, duel_scene, FpsParams(**params))


def test_robot_dies_at_fourteenth_hit(duel_spec, duel_scene):
    world = _duel(duel_spec, duel_scene, hit_prob=1.0)
    state = world.initialState()
    state.robots[0].hits = 13
    state = world.step(state, DT, np.random.default_rng(0))
    assert state.shots_fired == 1
    assert not state.robots[0].alive
    assert state.robots[0].death_tick == 1
    assert state.done


def test_robot_survives_thirteen_hits(duel_spec, duel_scene):
    world = _duel(duel_spec, duel_scene, hit_prob=1.0)
    state = world.initialState()
    state.robots[0].hits = 12
    state = world.step(state, DT, np.random.default_rng(0))
    assert state.robots[0].hits == 13
    assert state.robots[0].alive
    assert not state.done


def test_reload_after_every_fifth_shot(duel_spec, duel_scene):
    world = _duel(duel_spec, duel_scene, hit_prob=0.0)
    rng = np.random.default_rng(0)
    states = _drive(world, world.initialState(), 400, rng)
    shot_ticks = [b.tick for a, b in zip(states, states[1:]) if b.shots_fired > a.shots_fired]
    gaps = np.diff(shot_ticks)
    assert len(shot_ticks) >= 11
    assert list(gaps[:4]) == [15, 15, 15, 15]
    assert gaps[4] == 60
    assert gaps[9] == 60
    assert all(g == 15 for k, g in enumerate(gaps[:10]) if k not in (4, 9))


def test_robot_closes_in_and_stops(duel_spec, duel_scene):
    world = _duel(duel_spec, duel_scene, hit_prob=0.0, robot_hit_prob=1.0)
    states = _drive(world, world.initialState(), 300, np.random.default_rng(1))
    robot = states[-1].robots[0]
    gap = np.hypot(robot.x - states[-1].x, robot.y - states[-1].y)
    assert gap == pytest.approx(world.params.robot_stop_distance, abs=1e-6)
    assert states[-1].shots_received > 0


def test_robot_behind_wall_holds_position(duel_spec):
    spec = dataclasses.replace(duel_spec, walls=[((4.0, -3.0, 0.0), (5.0, 3.0, 6.0))])
    world = FpsWorld(spec, build_fps_scene(spec, 3), FpsParams(hit_prob=0.0, robot_hit_prob=1.0))
    states = _drive(world, world.initialState(), 100, np.random.default_rng(1))
    robot = states[-1].robots[0]
    assert (robot.x, robot.y) == (10.0, 0.0)
    assert states[-1].shots_received == 0
    assert states[-1].shots_fired == 0


@pytest.mark.parametrize('seed', SEEDS)
def test_fps_session_constants(tmp_path, seed):
    settings = make_settings(tmp_path, 'fps', seed=seed)
    session = Session(settings)
    log = session.run()
    assert log.status == 'complete'
    for robot in log.extra['robots']:
        assert robot['hits'] == 14
        assert robot['death_tick'] > 0
    assert log.rows[-1]['robots_alive'] == 0


def _read_bytes(path):
    with open(path, 'rb') as f:
        return f.read()


@pytest.mark.parametrize('game', ['racing', 'fps'])
def test_session_is_deterministic(tmp_path, game):
    for name in ('a', 'b'):
        run_session(make_settings(tmp_path / name, game, **{'session.truncate_ticks': 600}))
    for artifact in ('session.csv', 'summary.json'):
        assert _read_bytes(str(tmp_path / 'a' / artifact)) == _read_bytes(str(tmp_path / 'b' / artifact))


@pytest.mark.parametrize('game', ['racing', 'fps'])
@pytest.mark.parametrize('seed', SEEDS)
def test_condition_does_not_change_the_log(tmp_path, game, seed):
    overrides = {'session.truncate_ticks': 150, 'render_every': 30, 'session.head_sweep_deg': 30.0}
    cp = run_session(make_settings(tmp_path / 'cp', game, 'cp', seed=seed, **overrides))
    run_session(make_settings(tmp_path / 'normal', game, 'normal', seed=seed, **overrides))
    assert len(cp.rendered_ticks) == 6

    h_cp, cols_cp, rows_cp = read_session_csv(str(tmp_path / 'cp' / 'session.csv'))
    h_normal, cols_normal, rows_normal = read_session_csv(str(tmp_path / 'normal' / 'session.csv'))
    assert rows_cp == rows_normal
    assert cols_cp == cols_normal == columns_for(game)
    assert h_cp.pop('condition') == 'cp'
    assert h_normal.pop('condition') == 'normal'
    assert h_cp == h_normal


def _inside_depth_ranges(session):
    return [s.depth_range_m for _, s in session.metric_rows if s.region == 'inside']


def test_panels_remove_parallax_over_a_session(tmp_path):
    overrides = {'session.truncate_ticks': 300, 'render_every': 10, 'resolution': [80, 60]}
    cp = run_session(make_settings(tmp_path / 'cp', 'racing', 'cp', **overrides))
    normal = run_session(make_settings(tmp_path / 'normal', 'racing', 'normal', **overrides))

    cp_ranges = _inside_depth_ranges(cp)
    normal_ranges = _inside_depth_ranges(normal)
    assert len(cp_ranges) == len(normal_ranges) == 30
    assert all(r == 0.0 for r in cp_ranges)
    deep = sum(1 for r in normal_ranges if r is not None and r > 1.0)
    assert deep >= 0.9 * len(normal_ranges)


def test_session_log_rejects_out_of_order_ticks():
    log = SessionLog('racing', 'cp', 1, DT, '0' * 16)
    row = {c: 0 for c in columns_for('racing')}
    log.addRow(dict(row, tick=1))
    with pytest.raises(ValueError, match='strictly increasing'):
        log.addRow(dict(row, tick=1))
