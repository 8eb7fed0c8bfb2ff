import numpy as np
import pytest
from scipy import stats as st

from analysis import (DegenerateTestError, QuestionnaireResponse, StudyFormatError, analyze_study, describe,
                      format_report, load_study, paired_t, score_ieq, score_ssq, select_test, shapiro_wilk,
                      signed_rank_counts, spearman, wilcoxon_signed_rank)

SSQ_HEADER = ['participant_id', 'condition', 'instrument'] + ['item_{}'.format(k) for k in range(1, 17)]


def _ssq(ratings):
    return QuestionnaireResponse('P01', 'CP', 'SSQ', tuple(ratings))


def test_ssq_extremes():
    zero = score_ssq(_ssq([0] * 16))
    assert (zero.nausea, zero.oculomotor, zero.disorientation, zero.total) == (0, 0, 0, 0)
    full = score_ssq(_ssq([4] * 16))
    assert (full.nausea, full.oculomotor, full.disorientation, full.total) == (28, 28, 28, 64)


def test_ssq_kennedy_weights():
    full = score_ssq(_ssq([4] * 16), weights='kennedy')
    assert full.nausea == pytest.approx(28 * 9.54)
    assert full.total == pytest.approx(84 * 3.74)


def test_ssq_rejects_bad_ratings():
    with pytest.raises(ValueError, match='0..4'):
        score_ssq(_ssq([5] + [0] * 15))
    with pytest.raises(ValueError, match='16 ratings'):
        score_ssq(_ssq([0] * 15))


CLUSTERS = {
    'nausea': (1, 6, 7, 8, 9, 15, 16),
    'oculomotor': (1, 2, 3, 4, 5, 9, 11),
    'disorientation': (5, 8, 10, 11, 12, 13, 14),
}


@pytest.mark.parametrize('item', range(1, 17))
def test_ssq_single_item_lands_in_its_clusters(item):
    ratings = [0] * 16
    ratings[item - 1] = 1
    scores = score_ssq(_ssq(ratings))
    for name, items in CLUSTERS.items():
        assert getattr(scores, name) == (1 if item in items else 0)
    assert scores.total == 1


def test_ssq_scoring_is_additive():
    rng = np.random.default_rng(4)
    for _ in range(20):
        a = rng.integers(0, 3, size=16)
        b = rng.integers(0, 3, size=16)
        whole = score_ssq(_ssq([int(v) for v in a + b]))
        parts = score_ssq(_ssq([int(v) for v in a])) + score_ssq(_ssq([int(v) for v in b]))
        assert whole == parts


def test_ieq_sums_ratings():
    assert score_ieq(QuestionnaireResponse('P01', 'CP', 'IEQ', (4, 0, 3, 2, 1))) == 10
    with pytest.raises(ValueError, match='IEQ response'):
        score_ieq(_ssq([0] * 16))
    with pytest.raises(ValueError, match='0..4'):
        score_ieq(QuestionnaireResponse('P01', 'CP', 'IEQ', (2, 7)))


def _brute_force_p(d):
    '''Two-sided exact p of the signed-rank statistic by enumerating all sign assignments.'''
    ranks = st.rankdata(np.abs(d))
    n = len(d)
    w_obs = ranks[d > 0].sum()
    below = above = 0
    chunk = 1 << 16
    bits = np.arange(n)
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n))
        signs = (codes[:, None] >> bits) & 1
        w = signs @ ranks
        below += int((w <= w_obs + 1e-9).sum())
        above += int((w >= w_obs - 1e-9).sum())
    total = float(1 << n)
    return min(1.0, 2.0 * min(below / total, above / total))


def test_wilcoxon_five_positive_differences():
    result = wilcoxon_signed_rank(np.arange(1.0, 6.0), np.zeros(5))
    assert result.details['exact']
    assert result.p == pytest.approx(0.0625)
    assert result.details['W+'] == 15.0


def test_wilcoxon_antisymmetry():
    x = np.array([3.1, 4.0, 2.2, 5.7, 1.0, 6.3, 2.9])
    y = np.array([2.0, 4.5, 1.0, 3.3, 1.4, 2.2, 1.8])
    a = wilcoxon_signed_rank(x, y)
    b = wilcoxon_signed_rank(y, x)
    assert a.p == pytest.approx(b.p)
    assert a.statistic == pytest.approx(-b.statistic)


def test_exact_counts_match_enumeration():
    d = np.array([1.0, -2.0, 3.0, 4.0, -5.0, 6.0, 7.0, -8.0, 9.0, 10.0])
    result = wilcoxon_signed_rank(d, np.zeros_like(d), exact=True)
    assert result.p == pytest.approx(_brute_force_p(d), abs=1e-12)
    counts = signed_rank_counts([2, 4, 6])
    assert counts.sum() == 8
    assert counts[0] == 1 and counts[12] == 1 and counts[6] == 2


def test_wilcoxon_ties_use_average_ranks():
    d = np.array([1.0, 1.0, -1.0, 2.0, 2.0, 3.0, -0.5])
    result = wilcoxon_signed_rank(d, np.zeros_like(d), exact=True)
    assert result.p == pytest.approx(_brute_force_p(d), abs=1e-12)


def test_normal_approximation_at_twenty():
    magnitudes = np.arange(1.0, 21.0)
    signs = np.ones(20)
    signs[[0, 1, 2, 4, 7, 12, 19]] = -1.0
    d = magnitudes * signs
    approx = wilcoxon_signed_rank(d, np.zeros_like(d))
    assert not approx.details['exact']
    assert approx.p == pytest.approx(_brute_force_p(d), abs=0.01)


def test_wilcoxon_degenerate_pairing():
    with pytest.raises(DegenerateTestError, match='degenerate pairing'):
        wilcoxon_signed_rank(np.ones(8), np.ones(8))
    with pytest.raises(DegenerateTestError, match='degenerate pairing'):
        wilcoxon_signed_rank(np.array([1.0, 2.0, 3.0, 0.0]), np.zeros(4))


def test_shapiro_three_points():
    w, p = shapiro_wilk([-1.0, 0.0, 1.0])
    assert w == pytest.approx(1.0)
    assert p == pytest.approx(1.0)


def test_shapiro_affine_invariance():
    x = np.array([2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 7.9, 3.0, 4.1, 2.2, 3.7])
    w1, p1 = shapiro_wilk(x)
    w2, p2 = shapiro_wilk(3.0 * x - 7.0)
    assert w1 == pytest.approx(w2, abs=1e-12)
    assert p1 == pytest.approx(p2, abs=1e-12)


@pytest.mark.parametrize('n', [4, 5, 8, 12, 20, 35])
def test_shapiro_matches_scipy(n):
    x = np.random.default_rng(n).gamma(2.0, size=n)
    w, p = shapiro_wilk(x)
    ref = st.shapiro(x)
    assert w == pytest.approx(ref[0], abs=1e-3)
    assert p == pytest.approx(ref[1], abs=1e-3)


def test_shapiro_rejects_constant_sample():
    with pytest.raises(DegenerateTestError):
        shapiro_wilk([2.0, 2.0, 2.0, 2.0])
    with pytest.raises(ValueError, match='3 <= n'):
        shapiro_wilk([1.0, 2.0])


def test_paired_t_matches_scipy():
    x = np.array([5.1, 4.8, 6.0, 5.5, 4.9, 5.7, 6.2, 5.0])
    y = np.array([4.2, 4.9, 5.1, 5.0, 4.1, 5.6, 5.0, 4.4])
    result = paired_t(x, y)
    ref = st.ttest_rel(x, y)
    assert result.statistic == pytest.approx(ref[0], rel=1e-9)
    assert result.p == pytest.approx(ref[1], rel=1e-9)
    assert result.df == 7


def test_paired_t_edge_cases():
    result = paired_t([1.0, 2.0, 3.0, 4.0], [2.0, 1.0, 4.0, 3.0])
    assert result.statistic == 0.0 and result.p == pytest.approx(1.0)
    with pytest.raises(DegenerateTestError):
        paired_t([1.0, 2.0, 3.0], [0.0, 1.0, 2.0])


def test_spearman_monotone():
    x = np.arange(1.0, 11.0)
    assert spearman(x, x ** 3).statistic == pytest.approx(1.0)
    assert spearman(x, -x).statistic == pytest.approx(-1.0)
    z = np.array([3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.0, 6.0, 5.5, 3.5])
    assert spearman(x ** 3, z).statistic == pytest.approx(spearman(x, z).statistic)
    ref = st.spearmanr(x, z)
    assert spearman(x, z).statistic == pytest.approx(ref[0])
    assert spearman(x, z).p == pytest.approx(ref[1], rel=1e-6)


def test_describe():
    d = describe([1.0, 2.0, 3.0, 4.0])
    assert d.mean == 2.5 and d.median == 2.5
    assert d.sd == pytest.approx(np.std([1, 2, 3, 4], ddof=1))
    half = st.t.ppf(0.975, 3) * d.sd / 2.0
    assert d.ci95 == pytest.approx((2.5 - half, 2.5 + half))


def test_select_test():
    assert select_test(0.2) == 't'
    assert select_test(0.01) == 'Wilcoxon'
    assert select_test(None) == 'Wilcoxon'


def _write_rows(path, header, rows):
    with open(path, 'w') as f:
        f.write(','.join(header) + '\n')
        for row in rows:
            f.write(','.join(str(v) for v in row) + '\n')
    return str(path)


def planted_nausea_rows(n=18):
    '''CP lowers four nausea-only items by 5 in total; Disorientation stays at zero under CP.'''
    rows = []
    for k in range(n):
        pid = 'P{:02d}'.format(k + 1)
        base = [0] * 16
        base[1] = k % 3  # fatigue, oculomotor only
        normal = list(base)
        normal[5], normal[6], normal[14], normal[15] = 2, 2, 1, 1
        cp = list(base)
        cp[14] = 1
        rows.append([pid, 'normal', 'SSQ'] + normal)
        rows.append([pid, 'cp', 'SSQ'] + cp)
    return rows


def test_planted_nausea_shift(tmp_path):
    path = _write_rows(tmp_path / 'ssq.csv', SSQ_HEADER, planted_nausea_rows())
    report = analyze_study(load_study([path]))
    by_name = {m.measure: m for m in report.measures}

    nausea = by_name['Nausea']
    assert nausea.test.name == 'Wilcoxon'
    assert nausea.test.p < 0.05
    assert nausea.descriptives['Normal'].mean - nausea.descriptives['CP'].mean == pytest.approx(5.0)
    assert nausea.changes == {'better': 18, 'indifferent': 0, 'worse': 0}

    disorientation = by_name['Disorientation']
    assert disorientation.descriptives['CP'].mean == 0.0
    assert disorientation.descriptives['CP'].sd == 0.0
    assert disorientation.flag == 'no difference'
    assert by_name['Oculomotor'].flag == 'no difference'

    text = format_report(report)
    assert 'Nausea' in text and 'p < .001' in text


def test_unpaired_participant_is_named(tmp_path):
    rows = [r for r in planted_nausea_rows() if not (r[0] == 'P07' and r[1] == 'cp')]
    path = _write_rows(tmp_path / 'ssq.csv', SSQ_HEADER, rows)
    with pytest.raises(ValueError, match='P07'):
        analyze_study(load_study([path]))


def test_malformed_row_reports_line(tmp_path):
    path = tmp_path / 'ssq.csv'
    rows = planted_nausea_rows(2)
    rows[1] = rows[1][:-1]
    _write_rows(path, SSQ_HEADER, rows)
    with pytest.raises(StudyFormatError, match=':3:'):
        load_study([str(path)])


def test_malformed_row_after_multiline_field_reports_physical_line(tmp_path):
    path = tmp_path / 'ssq.csv'
    rows = planted_nausea_rows(2)
    with open(path, 'w') as f:
        f.write(','.join(SSQ_HEADER) + '\n')
        f.write(','.join(str(v) for v in rows[0][:3]) + ',"0\n"' + ''.join(',0' for _ in range(15)) + '\n')
        f.write(','.join(str(v) for v in rows[1][:-1]) + '\n')
    with pytest.raises(StudyFormatError, match=':4:'):
        load_study([str(path)])


def test_performance_measures_and_correlations(tmp_path):
    q = _write_rows(tmp_path / 'ssq.csv', SSQ_HEADER, planted_nausea_rows(6))
    rows = []
    for k in range(6):
        pid = 'P{:02d}'.format(k + 1)
        rows.append([pid, 'cp', 'Crashes', k])
        rows.append([pid, 'normal', 'Crashes', k + (k % 2)])
        rows.append([pid, 'cp', 'Coins', 40 + k])
        rows.append([pid, 'normal', 'Coins', 41 + 2 * k])
    p = _write_rows(tmp_path / 'perf.csv', ['participant_id', 'condition', 'measure', 'value'], rows)
    report = analyze_study(load_study([q], [p]))
    assert report.study_type == 'racing'
    assert [m.measure for m in report.measures][-2:] == ['Crashes', 'Coins']
    pairs = {(c['condition'], c['x'], c['y']) for c in report.correlations}
    assert ('CP', 'Coins', 'Nausea') in pairs
    assert ('Normal', 'Crashes', 'Total') in pairs
