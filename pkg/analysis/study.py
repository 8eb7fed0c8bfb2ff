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
Within-subjects study tables: loading questionnaire and performance CSVs,
pairing the two conditions per participant, and the paired analysis.
'''

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .questionnaire import INSTRUMENTS, SSQ_MEASURES, QuestionnaireResponse, score_ieq, score_ssq
from .stats import DegenerateTestError, describe, paired_t, shapiro_wilk, spearman, wilcoxon_signed_rank

CONDITIONS = ('CP', 'Normal')
IMMERSION = 'Immersion'
ALPHA = 0.05
STUDY_TYPES = {'racing': ('Time', 'Crashes', 'Coins'), 'fps': ('Time', 'Distance', 'ShotsReceived')}


class StudyFormatError(ValueError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super(StudyFormatError, self).__init__('{}:{}: {}'.format(path, line, message))


def normalize_condition(value):
    v = str(value).strip().lower()
    if v == 'cp':
        return 'CP'
    if v == 'normal':
        return 'Normal'
    raise ValueError('unknown condition {!r}, expected cp or normal'.format(value))


@dataclass
class StudyTable(object):
    # participant -> condition -> measure -> value
    data: dict = field(default_factory=dict)
    performance_measures: list = field(default_factory=list)
    has_ssq: bool = False
    has_immersion: bool = False

    def set(self, participant, condition, measure, value):
        row = self.data.setdefault(participant, {}).setdefault(condition, {})
        if measure in row:
            raise ValueError('duplicate {} for participant {} ({})'.format(measure, participant, condition))
        row[measure] = float(value)

    @property
    def participants(self):
        return sorted(self.data)

    @property
    def measures(self):
        names = list(SSQ_MEASURES) if self.has_ssq else []
        if self.has_immersion:
            names.append(IMMERSION)
        return names + list(self.performance_measures)

    @property
    def studyType(self):
        for name, measures in STUDY_TYPES.items():
            if any(m in self.performance_measures for m in measures[1:]):
                return name
        return 'generic'

    def incomplete(self):
        '''(participant, condition, measure) triples missing from the pairing.'''
        missing = []
        for p in self.participants:
            for c in CONDITIONS:
                row = self.data[p].get(c, {})
                missing.extend((p, c, m) for m in self.measures if m not in row)
        return missing

    def values(self, measure, condition):
        return np.array([self.data[p][condition][measure] for p in self.participants], dtype=np.float64)


def _rows(path):
    if not os.path.isfile(path):
        raise FileNotFoundError('study file not found: {}'.format(path))
    with open(path, newline='') as f:
        reader = csv.reader(f)
        header = None
        for row in reader:
            line_no = reader.line_num
            if not row or row[0].startswith('#'):
                continue
            if header is None:
                header = [h.strip() for h in row]
                continue
            if len(row) != len(header):
                raise StudyFormatError(path, line_no, 'expected {} fields, got {}'.format(len(header), len(row)))
            yield line_no, header, dict(zip(header, (v.strip() for v in row)))


def load_questionnaires(table: StudyTable, path, weights='none'):
    for line_no, header, row in _rows(path):
        for key in ('participant_id', 'condition', 'instrument'):
            if key not in row:
                raise StudyFormatError(path, line_no, 'missing column {}'.format(key))
        items = [h for h in header if h.startswith('item_')]
        try:
            instrument = row['instrument'].upper()
            if instrument not in INSTRUMENTS:
                raise ValueError('unknown instrument {!r}'.format(row['instrument']))
            ratings = tuple(int(row[h]) for h in items if row[h] != '')
            resp = QuestionnaireResponse(row['participant_id'], normalize_condition(row['condition']),
                                         instrument, ratings)
            if instrument == 'SSQ':
                for name, value in score_ssq(resp, weights).toDict().items():
                    table.set(resp.participant, resp.condition, name, value)
                table.has_ssq = True
            else:
                table.set(resp.participant, resp.condition, IMMERSION, score_ieq(resp))
                table.has_immersion = True
        except ValueError as e:
            raise StudyFormatError(path, line_no, str(e))
    return table


def load_performance(table: StudyTable, path):
    for line_no, _, row in _rows(path):
        for key in ('participant_id', 'condition', 'measure', 'value'):
            if key not in row:
                raise StudyFormatError(path, line_no, 'missing column {}'.format(key))
        try:
            value = float(row['value'])
            if not np.isfinite(value) or value < 0:
                raise ValueError('measure value must be finite and non-negative, got {}'.format(row['value']))
            table.set(row['participant_id'], normalize_condition(row['condition']), row['measure'], value)
        except ValueError as e:
            raise StudyFormatError(path, line_no, str(e))
        if row['measure'] not in table.performance_measures:
            table.performance_measures.append(row['measure'])
    return table


def load_study(questionnaire_paths=(), performance_paths=(), weights='none'):
    table = StudyTable()
    for path in questionnaire_paths:
        load_questionnaires(table, path, weights)
    for path in performance_paths:
        load_performance(table, path)
    return table


@dataclass
class MeasureResult(object):
    measure: str
    descriptives: dict  # condition -> Descriptives
    normality: tuple = None  # (W, p) of the paired differences, None when undefined
    test: object = None  # TestResult
    flag: str = None
    changes: dict = None  # better / indifferent / worse counts under CP

    def toDict(self):
        return {'measure': self.measure,
                'descriptives': {c: d.toDict() for c, d in self.descriptives.items()},
                'normality': None if self.normality is None else {'W': self.normality[0], 'p': self.normality[1]},
                'test': None if self.test is None else self.test.toDict(),
                'flag': self.flag, 'changes': self.changes}


@dataclass
class StudyReport(object):
    study_type: str
    participants: list
    measures: list
    correlations: list  # dicts: condition, x, y, rho, p, flag

    def toDict(self):
        return {'study_type': self.study_type, 'participants': self.participants,
                'measures': [m.toDict() for m in self.measures], 'correlations': self.correlations}


def select_test(normality_p):
    '''Paired t for normally distributed differences (p > .05), Wilcoxon otherwise.'''
    return 't' if normality_p is not None and normality_p > ALPHA else 'Wilcoxon'


def _classify(cp, normal):
    return {'better': int((cp < normal).sum()), 'indifferent': int((cp == normal).sum()),
            'worse': int((cp > normal).sum())}


def _measure(table, measure):
    cp = table.values(measure, 'CP')
    normal = table.values(measure, 'Normal')
    result = MeasureResult(measure, {'CP': describe(cp), 'Normal': describe(normal)})
    d = cp - normal
    try:
        result.normality = shapiro_wilk(d)
    except ValueError:
        result.normality = None
    try:
        if select_test(None if result.normality is None else result.normality[1]) == 't':
            result.test = paired_t(cp, normal)
        else:
            result.test = wilcoxon_signed_rank(cp, normal)
    except DegenerateTestError as e:
        result.flag = 'no difference' if not d.any() else str(e)
    if measure in SSQ_MEASURES or measure == IMMERSION:
        result.changes = _classify(cp, normal)
    return result


def _correlate(table, condition, xs, ys):
    out = []
    for x in xs:
        for y in ys:
            entry = {'condition': condition, 'x': x, 'y': y, 'rho': None, 'p': None, 'flag': None}
            try:
                r = spearman(table.values(x, condition), table.values(y, condition))
                entry['rho'], entry['p'] = r.statistic, r.p
            except (DegenerateTestError, ValueError) as e:
                entry['flag'] = str(e)
            out.append(entry)
    return out


def analyze_study(table: StudyTable):
    missing = table.incomplete()
    if missing:
        names = sorted({p for p, _, _ in missing})
        raise ValueError('incomplete pairing for participants {}: missing {}'.format(
            ', '.join(names), ', '.join('{}/{}/{}'.format(*m) for m in missing[:10])))
    if len(table.participants) < 2:
        raise ValueError('a paired analysis needs at least 2 participants, got {}'.format(len(table.participants)))

    results = [_measure(table, m) for m in table.measures]
    sickness = list(SSQ_MEASURES) if table.has_ssq else []
    immersion = [IMMERSION] if table.has_immersion else []
    correlations = []
    for condition in CONDITIONS:
        correlations += _correlate(table, condition, table.performance_measures, sickness + immersion)
        correlations += _correlate(table, condition, immersion, sickness)
    return StudyReport(table.studyType, table.participants, results, correlations)
