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
Questionnaire scoring: the 16-item Simulator Sickness Questionnaire with its
three overlapping symptom clusters, and a summed immersion questionnaire.
'''

from dataclasses import dataclass

SSQ_ITEMS = (
    'General discomfort', 'Fatigue', 'Headache', 'Eye strain', 'Difficulty focusing',
    'Increased salivation', 'Sweating', 'Nausea', 'Difficulty concentrating', 'Fullness of head',
    'Blurred vision', 'Dizzy (eyes open)', 'Dizzy (eyes closed)', 'Vertigo', 'Stomach awareness', 'Burping',
)
# 1-based item numbers per cluster
NAUSEA_ITEMS = (1, 6, 7, 8, 9, 15, 16)
OCULOMOTOR_ITEMS = (1, 2, 3, 4, 5, 9, 11)
DISORIENTATION_ITEMS = (5, 8, 10, 11, 12, 13, 14)

SSQ_MEASURES = ('Nausea', 'Oculomotor', 'Disorientation', 'Total')
KENNEDY_WEIGHTS = {'Nausea': 9.54, 'Oculomotor': 7.58, 'Disorientation': 13.92, 'Total': 3.74}
WEIGHTINGS = ('none', 'kennedy')
INSTRUMENTS = ('SSQ', 'IEQ')
RATING_MAX = 4


@dataclass(frozen=True)
class QuestionnaireResponse(object):
    participant: str
    condition: str
    instrument: str
    ratings: tuple

    def validate(self):
        if self.instrument not in INSTRUMENTS:
            raise ValueError('unknown instrument {!r}, expected one of {}'.format(self.instrument, INSTRUMENTS))
        if self.instrument == 'SSQ' and len(self.ratings) != len(SSQ_ITEMS):
            raise ValueError('SSQ needs {} ratings, got {}'.format(len(SSQ_ITEMS), len(self.ratings)))
        if not self.ratings:
            raise ValueError('{} response of {} has no ratings'.format(self.instrument, self.participant))
        for k, r in enumerate(self.ratings):
            if isinstance(r, bool) or not isinstance(r, int) or not 0 <= r <= RATING_MAX:
                raise ValueError('{} item_{} of {}: rating must be an integer in 0..{}, got {!r}'.format(
                    self.instrument, k + 1, self.participant, RATING_MAX, r))


@dataclass(frozen=True)
class SSQScores(object):
    nausea: float
    oculomotor: float
    disorientation: float
    total: float

    def __add__(self, other):
        return SSQScores(self.nausea + other.nausea, self.oculomotor + other.oculomotor,
                         self.disorientation + other.disorientation, self.total + other.total)

    def toDict(self):
        return {'Nausea': self.nausea, 'Oculomotor': self.oculomotor,
                'Disorientation': self.disorientation, 'Total': self.total}


def _cluster(ratings, items):
    return sum(ratings[i - 1] for i in items)


def score_ssq(resp: QuestionnaireResponse, weights='none'):
    '''Unweighted cluster sums, Total over all items; `weights='kennedy'` applies the conventional scaling.'''
    if resp.instrument != 'SSQ':
        raise ValueError('score_ssq needs an SSQ response, got {}'.format(resp.instrument))
    resp.validate()
    n = _cluster(resp.ratings, NAUSEA_ITEMS)
    o = _cluster(resp.ratings, OCULOMOTOR_ITEMS)
    d = _cluster(resp.ratings, DISORIENTATION_ITEMS)
    if weights == 'kennedy':
        w = KENNEDY_WEIGHTS
        return SSQScores(n * w['Nausea'], o * w['Oculomotor'], d * w['Disorientation'], (n + o + d) * w['Total'])
    if weights not in (None, 'none'):
        raise ValueError('unknown SSQ weighting {!r}, expected one of {}'.format(weights, WEIGHTINGS))
    return SSQScores(n, o, d, sum(resp.ratings))


def score_ieq(resp: QuestionnaireResponse):
    if resp.instrument != 'IEQ':
        raise ValueError('score_ieq needs an IEQ response, got {}'.format(resp.instrument))
    resp.validate()
    return sum(resp.ratings)
