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

import json

from prettytable import PrettyTable

from .study import CONDITIONS, StudyReport


def _p(p):
    if p is None:
        return '-'
    if p < 0.001:
        return 'p < .001'
    return 'p = {}'.format('{:.3f}'.format(p).lstrip('0'))


def format_test(result):
    if result.test is None:
        return result.flag or '-'
    t = result.test
    if t.name == 't':
        return 't({}) = {:.2f}, {}'.format(t.df, t.statistic, _p(t.p))
    return 'Z = {:.2f}, {}'.format(t.statistic, _p(t.p))


def format_report(report: StudyReport):
    '''Descriptives per condition and the selected paired test, one measure per row pair.'''
    table = PrettyTable(['Measure', 'Condition', 'M', 's.d.', 'Mdn', '95% CI', 'Test'])
    table.align['Measure'] = 'l'
    table.align['Test'] = 'l'
    for m in report.measures:
        for k, c in enumerate(CONDITIONS):
            d = m.descriptives[c]
            table.add_row([m.measure if k == 0 else '', c, '{:.2f}'.format(d.mean), '{:.2f}'.format(d.sd),
                           '{:.2f}'.format(d.median), '[{:.2f}, {:.2f}]'.format(*d.ci95),
                           format_test(m) if k == 0 else ''])
    lines = ['Study: {} ({} participants)'.format(report.study_type, len(report.participants)), str(table)]

    changes = [m for m in report.measures if m.changes is not None]
    if changes:
        ct = PrettyTable(['Measure', 'Better', 'Indifferent', 'Worse'])
        for m in changes:
            ct.add_row([m.measure, m.changes['better'], m.changes['indifferent'], m.changes['worse']])
        lines += ['Change under CP relative to Normal', str(ct)]

    if report.correlations:
        rt = PrettyTable(['Condition', 'X', 'Y', 'rho', 'p'])
        for c in report.correlations:
            rho = c['flag'] if c['rho'] is None else '{:.3f}'.format(c['rho'])
            rt.add_row([c['condition'], c['x'], c['y'], rho, _p(c['p'])])
        lines += ["Spearman correlations", str(rt)]
    return '\n'.join(lines) + '\n'


def write_report(report: StudyReport, json_path, text_path):
    with open(json_path, 'w') as f:
        json.dump(report.toDict(), f, indent=2, sort_keys=True)
        f.write('\n')
    with open(text_path, 'w') as f:
        f.write(format_report(report))
