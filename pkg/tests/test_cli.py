import json
import os

import pytest

from conftest import config_path
from main import main

FAST = ['--resolution', '32x24', '--truncate-ticks', '30']


def _read(path):
    with open(path, 'rb') as f:
        return f.read()


@pytest.mark.parametrize('game', ['racing', 'fps'])
def test_gen_scene(tmp_path, game):
    out = str(tmp_path / 'scene.json')
    assert main(['gen-scene', '--game', game, '--out', out]) == 0
    with open(out) as f:
        spec = json.load(f)
    assert spec


def test_snapshot(tmp_path, capsys):
    code = main(['snapshot', '--config', config_path('racing'), '--resolution', '160x120', '--out', str(tmp_path)])
    assert code == 0
    assert 'mask fraction: 0.3025' in capsys.readouterr().out
    for name in ('snapshot_cp.ppm', 'snapshot_normal.ppm', 'snapshot_mask.ppm'):
        assert _read(str(tmp_path / name))[:2] == b'P6'


def test_simulate_outputs_and_determinism(tmp_path):
    a, b, c = (str(tmp_path / k) for k in 'abc')
    for out in (a, b):
        assert main(['simulate', '--config', config_path('racing'), '--render-every', '10', '--out', out] + FAST) == 0
    for name in ('session.csv', 'summary.json', 'metrics.csv'):
        assert os.path.isfile(os.path.join(a, name))
    assert _read(os.path.join(a, 'session.csv')) == _read(os.path.join(b, 'session.csv'))

    # rendering does not feed back into the simulation
    assert main(['simulate', '--config', config_path('racing'), '--render-every', '0', '--out', c] + FAST) == 0
    assert _read(os.path.join(a, 'session.csv')) == _read(os.path.join(c, 'session.csv'))
    assert not os.path.exists(os.path.join(c, 'metrics.csv'))


def test_simulate_rejects_bad_coverage(tmp_path, capsys):
    code = main(['simulate', '--config', config_path('racing'), '--coverage', '1.5', '--out', str(tmp_path)] + FAST)
    assert code == 1
    assert 'cockpit.coverage' in capsys.readouterr().err


def test_offline_metrics_match_inline(tmp_path):
    out = str(tmp_path / 'run')
    args = ['simulate', '--config', config_path('fps'), '--render-every', '10', '--save-frames', '--out', out]
    assert main(args + FAST) == 0
    assert main(['metrics', out]) == 0
    assert _read(os.path.join(out, 'metrics_offline.csv')) == _read(os.path.join(out, 'metrics.csv'))

    subset = str(tmp_path / 'subset.csv')
    assert main(['metrics', out, '--regions', 'inside,outside', '--out', subset]) == 0
    with open(subset) as f:
        regions = {line.split(',')[1] for line in f.read().splitlines()[3:]}
    assert regions == {'inside', 'outside'}


def test_metrics_without_frames(tmp_path, capsys):
    assert main(['metrics', str(tmp_path)]) == 1
    assert 'ERROR' in capsys.readouterr().err


def _write(path, lines):
    with open(path, 'w') as f:
        f.write('\n'.join(lines) + '\n')
    return str(path)


def _study(tmp_path, drop=None):
    header = 'participant_id,condition,instrument,' + ','.join('item_{}'.format(k) for k in range(1, 17))
    lines = [header]
    for k in range(8):
        pid = 'P{:02d}'.format(k + 1)
        normal = [0] * 16
        normal[5], normal[14] = 2, 1 + k % 2
        cp = [0] * 16
        cp[14] = k % 2
        lines.append(','.join([pid, 'normal', 'SSQ'] + [str(v) for v in normal]))
        if pid != drop:
            lines.append(','.join([pid, 'cp', 'SSQ'] + [str(v) for v in cp]))
    return _write(tmp_path / 'ssq.csv', lines)


def test_analyze(tmp_path):
    out = str(tmp_path / 'report')
    assert main(['analyze', '--questionnaire', _study(tmp_path), '--out', out]) == 0
    with open(os.path.join(out, 'report.json')) as f:
        report = json.load(f)
    assert len(report['participants']) == 8
    assert os.path.isfile(os.path.join(out, 'report.txt'))


def test_analyze_names_unpaired_participant(tmp_path, capsys):
    code = main(['analyze', '--questionnaire', _study(tmp_path, drop='P05'), '--out', str(tmp_path / 'r')])
    assert code == 1
    assert 'P05' in capsys.readouterr().err


@pytest.mark.parametrize('game', ['racing', 'fps'])
def test_simulate_shipped_configs(tmp_path, game):
    out = str(tmp_path / game)
    assert main(['simulate', '--config', config_path(game), '--truncate-ticks', '5', '--render-every', '0',
                 '--out', out]) == 0
    with open(os.path.join(out, 'summary.json')) as f:
        assert json.load(f)
