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
Per-tick session log: '#'-prefixed header lines, a CSV table and a JSON summary.
'''

import csv
import json
import os
from dataclasses import dataclass, field

COLUMNS = ['tick', 'time', 'x', 'y', 'z', 'yaw', 'pitch', 'head_yaw', 'head_pitch', 'speed',
           'coins', 'crashes', 'distance', 'shots_received', 'robots_alive']
EXTRA_COLUMNS = {'racing': ['lap'], 'fps': ['shots_fired', 'magazine']}
SUMMARY_MEASURES = {'racing': ('Time', 'Crashes', 'Coins'), 'fps': ('Time', 'Distance', 'ShotsReceived')}
HEADER_KEYS = ('game', 'condition', 'seed', 'dt', 'config_hash')
STATUSES = ('complete', 'truncated', 'timeout')


def columns_for(game):
    if game not in EXTRA_COLUMNS:
        raise ValueError('unknown game: {}'.format(game))
    return COLUMNS + EXTRA_COLUMNS[game]


def _fmt(value):
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return '{:.6f}'.format(value)


@dataclass
class SessionLog(object):
    game: str
    condition: str
    seed: int
    dt: float
    config_hash: str
    rows: list = field(default_factory=list)
    status: str = 'complete'
    extra: dict = field(default_factory=dict)  # additional summary entries, e.g. robot death ticks

    @property
    def columns(self):
        return columns_for(self.game)

    def header(self):
        return {'game': self.game, 'condition': self.condition, 'seed': self.seed,
                'dt': self.dt, 'config_hash': self.config_hash}

    def addRow(self, row: dict):
        if self.rows and row['tick'] <= self.rows[-1]['tick']:
            raise ValueError('session rows must be strictly increasing in tick: {} after {}'.format(
                row['tick'], self.rows[-1]['tick']))
        missing = [c for c in self.columns if c not in row]
        if missing:
            raise ValueError('session row lacks columns {}'.format(missing))
        self.rows.append(row)

    def summary(self):
        last = self.rows[-1] if self.rows else None
        ticks = last['tick'] if last else 0
        values = {'Time': ticks * self.dt,
                  'Crashes': last['crashes'] if last else 0,
                  'Coins': last['coins'] if last else 0,
                  'Distance': last['distance'] if last else 0.0,
                  'ShotsReceived': last['shots_received'] if last else 0}
        summary = {k: values[k] for k in SUMMARY_MEASURES[self.game]}
        summary.update(self.header())
        summary['ticks'] = ticks
        summary['status'] = self.status
        summary.update(self.extra)
        return summary

    def summaryLine(self):
        measures = ', '.join('{}: {}'.format(k, _fmt(self.summary()[k])) for k in SUMMARY_MEASURES[self.game])
        return '{} {} seed {} [{}] {}'.format(self.game, self.condition, self.seed, self.status, measures)

    def writeCsv(self, path):
        with open(path, 'w', newline='') as f:
            dt = '{:.10f}'.format(self.dt)
            for key in HEADER_KEYS:
                f.write('# {}: {}\n'.format(key, dt if key == 'dt' else self.header()[key]))
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([_fmt(row[c]) for c in self.columns])

    def writeSummary(self, path):
        with open(path, 'w') as f:
            json.dump(self.summary(), f, indent=2, sort_keys=True)
            f.write('\n')

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        self.writeCsv(os.path.join(out_dir, 'session.csv'))
        self.writeSummary(os.path.join(out_dir, 'summary.json'))


def read_session_csv(path):
    '''(header dict, column names, list of string rows).'''
    if not os.path.isfile(path):
        raise FileNotFoundError('session log not found: {}'.format(path))
    header, lines = {}, []
    with open(path, newline='') as f:
        for line in f:
            if line.startswith('#'):
                key, _, value = line[1:].strip().partition(':')
                header[key.strip()] = value.strip()
            else:
                lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader)
    return header, columns, list(reader)
