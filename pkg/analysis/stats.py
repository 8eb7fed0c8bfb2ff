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
Paired-sample statistics: Shapiro-Wilk (Royston approximation), Wilcoxon
signed-rank with an exact null distribution for small samples, dependent
t-test, and Spearman's rank correlation.
'''

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as st

SW_MAX_N = 50
WILCOXON_EXACT_MAX_N = 12
WILCOXON_MIN_N = 5

# Royston (1992) polynomial coefficients, lowest order first
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


class DegenerateTestError(ValueError):
    '''The test statistic is undefined for this data.'''


def _poly(coef, x):
    return sum(c * x ** k for k, c in enumerate(coef))


@dataclass
class Descriptives(object):
    n: int
    mean: float
    sd: float
    median: float
    ci95: tuple

    def toDict(self):
        return {'n': self.n, 'M': self.mean, 'SD': self.sd, 'Mdn': self.median, 'CI95': list(self.ci95)}


def describe(sample):
    x = np.asarray(sample, dtype=np.float64)
    n = x.size
    if n == 0:
        raise ValueError('cannot describe an empty sample')
    mean = float(x.mean())
    sd = float(x.std(ddof=1)) if n > 1 else 0.0
    half = float(st.t.ppf(0.975, n - 1)) * sd / math.sqrt(n) if n > 1 else 0.0
    return Descriptives(n, mean, sd, float(np.median(x)), (mean - half, mean + half))


@dataclass
class TestResult(object):
    name: str
    statistic: float
    p: float
    df: int = None
    descriptives: dict = field(default_factory=dict)  # label -> Descriptives
    details: dict = field(default_factory=dict)

    def toDict(self):
        return {'test': self.name, 'statistic': self.statistic, 'df': self.df, 'p': self.p,
                'descriptives': {k: v.toDict() for k, v in self.descriptives.items()},
                'details': dict(self.details)}


def _paired(x, y, min_n):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError('paired samples must be 1-D of equal length, got {} and {}'.format(x.shape, y.shape))
    if x.size < min_n:
        raise ValueError('need at least {} pairs, got {}'.format(min_n, x.size))
    return x, y


def shapiro_wilk(sample):
    '''(W, p) for 3 <= n <= 50.'''
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = x.size
    if n < 3 or n > SW_MAX_N:
        raise ValueError('Shapiro-Wilk needs 3 <= n <= {}, got {}'.format(SW_MAX_N, n))
    ss = float(((x - x.mean()) ** 2).sum())
    if x[-1] - x[0] <= 1e-12 * max(1.0, abs(x[-1])) or ss == 0.0:
        raise DegenerateTestError('Shapiro-Wilk: constant sample, W undefined')

    if n == 3:
        a = np.array([-math.sqrt(0.5), 0.0, math.sqrt(0.5)])
    else:
        m = st.norm.ppf((np.arange(1, n + 1) - 0.375) / (n + 0.25))
        mm = float((m * m).sum())
        u = 1.0 / math.sqrt(n)
        a = m / math.sqrt(mm)
        an = a[-1] + _poly(_C1, u)
        if n > 5:
            an1 = a[-2] + _poly(_C2, u)
            phi = (mm - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2) / (1.0 - 2.0 * an ** 2 - 2.0 * an1 ** 2)
            a = m / math.sqrt(phi)
            a[-1], a[-2], a[0], a[1] = an, an1, -an, -an1
        else:
            phi = (mm - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * an ** 2)
            a = m / math.sqrt(phi)
            a[-1], a[0] = an, -an
    w = min(1.0, float((a @ x) ** 2) / ss)

    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        return w, min(1.0, max(0.0, p))
    y = math.log1p(-w) if w < 1.0 else -math.inf
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return w, 0.0
        y = -math.log(gamma - y)
        mu = _poly(_C3, n)
        sigma = math.exp(_poly(_C4, n))
    else:
        ln = math.log(n)
        mu = _poly(_C5, ln)
        sigma = math.exp(_poly(_C6, ln))
    if y == -math.inf:
        return w, 1.0
    return w, float(st.norm.sf((y - mu) / sigma))


def signed_rank_counts(doubled_ranks):
    '''Null distribution of 2*W+ as counts over all 2^n sign assignments.'''
    total = int(sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled_ranks:
        r = int(r)
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(x, y, exact=None):
    '''
    Two-sided Wilcoxon signed-rank test on the differences x - y.

    Zero differences are dropped and tied magnitudes share their average rank. Z uses the
    tie-corrected variance with a 0.5 continuity correction; p is exact (all sign assignments)
    when at most 12 non-zero differences remain, unless `exact` says otherwise.
    '''
    x, y = _paired(x, y, 1)
    d = x - y
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        raise DegenerateTestError('degenerate pairing: all differences are zero')
    if n < WILCOXON_MIN_N:
        raise DegenerateTestError('degenerate pairing: only {} non-zero differences (need {})'.format(
            n, WILCOXON_MIN_N))
    ranks = st.rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float((tie_sizes ** 3 - tie_sizes).sum()) / 48.0
    dev = w_plus - mean
    correction = 0.5 * np.sign(dev) if abs(dev) >= 0.5 else dev
    z = (dev - correction) / math.sqrt(var)
    p_normal = min(1.0, 2.0 * float(st.norm.sf(abs(z))))

    use_exact = n <= WILCOXON_EXACT_MAX_N if exact is None else bool(exact)
    p = p_normal
    if use_exact:
        doubled = np.rint(2.0 * ranks).astype(np.int64)
        counts = signed_rank_counts(doubled)
        probs = counts / counts.sum()
        obs = int(round(2.0 * w_plus))
        p = min(1.0, 2.0 * min(float(probs[:obs + 1].sum()), float(probs[obs:].sum())))
    return TestResult('Wilcoxon', float(z), p, details={
        'W+': w_plus, 'n': int(n), 'exact': use_exact, 'p_normal': p_normal})


def paired_t(x, y):
    x, y = _paired(x, y, 2)
    d = x - y
    n = d.size
    sd = float(d.std(ddof=1))
    if sd <= 1e-12 * max(1.0, float(np.abs(d).max())):
        raise DegenerateTestError('paired t: differences have zero variance')
    t = float(d.mean()) / (sd / math.sqrt(n))
    p = min(1.0, 2.0 * float(st.t.sf(abs(t), n - 1)))
    return TestResult('t', t, p, df=n - 1)


def spearman(x, y):
    x, y = _paired(x, y, 4)
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise DegenerateTestError('Spearman: constant sample, rho undefined')
    rx = st.rankdata(x)
    ry = st.rankdata(y)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    rho = float((rx @ ry) / math.sqrt(float(rx @ rx) * float(ry @ ry)))
    rho = min(1.0, max(-1.0, rho))
    n = x.size
    if abs(rho) >= 1.0:
        p = 0.0
    else:
        t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p = min(1.0, 2.0 * float(st.t.sf(abs(t), n - 2)))
    return TestResult('Spearman', rho, p, df=n - 2)
