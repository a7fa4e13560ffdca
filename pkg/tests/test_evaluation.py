import os
import tempfile
import typing as t

import numpy as np
import pandas as pd
import pytest
from scipy import stats

from calsim.corpus import DOCUMENT
from calsim.corpus import QrelsMap
from calsim.engine import AssessmentRecord
from calsim.engine import RunLog
from calsim.engine import StrategyCode
from calsim.evaluation import EffortModel
from calsim.evaluation import JUDGE, HALF, SENT
from calsim.evaluation import effort_lambda
from calsim.evaluation import recall_at_effort
from calsim.evaluation import gain_curve
from calsim.evaluation import effort_label
from calsim.evaluation import index_runs
from calsim.evaluation import check_topics
from calsim.evaluation import recall_table
from calsim.evaluation import overall_table
from calsim.evaluation import combine_recall_tables
from calsim.evaluation import compare_strategies
from calsim.evaluation import paired_topics
from calsim.evaluation import lambda_sweep
from calsim.evaluation import lambda_invariant
from calsim.evaluation import comparison_table
from calsim.evaluation import write_gain_curves
from calsim.evaluation import COMPARISON_COLUMNS
from calsim.utils import DataError
from calsim.utils import TopicMismatchError


def make_log(topic_id: str,
             code: str,
             doc_ids: t.Sequence[str],
             sentences_read: t.Optional[t.Sequence[int]] = None,
             labels: t.Optional[t.Sequence[bool]] = None,
             ) -> RunLog:
    sentences_read = sentences_read or [1] * len(doc_ids)
    labels = labels or [False] * len(doc_ids)
    records = []
    cum_e_sent = 0
    for index, (doc_id, read, label) in enumerate(zip(doc_ids, sentences_read, labels), start=1):
        cum_e_sent += read
        records.append(AssessmentRecord(
            ordinal=index,
            batch_index=index,
            doc_id=doc_id,
            presented_item=doc_id,
            label=label,
            sentences_read=read,
            cum_e_judge=index,
            cum_e_sent=cum_e_sent,
        ))

    return RunLog(topic_id, StrategyCode.parse(code), records)


def random_runs(seed: int, num_topics: int = 4, codes=('ddd', 'sdd')):
    """
    Random run logs over a pool of 30 documents per topic with random relevance and random reading
    costs. Sentence feedback runs read one sentence per assessment.
    """
    rng = np.random.default_rng(seed)
    entries = {}
    logs = []
    for topic_index in range(num_topics):
        topic = f'T{topic_index}'
        doc_ids = [f'{topic}-d{index:02d}' for index in range(30)]
        relevant = rng.random(30) < 0.3
        relevant[0] = True
        entries[topic] = dict(zip(doc_ids, (bool(value) for value in relevant)))
        for code in codes:
            order = list(rng.permutation(doc_ids))[:int(rng.integers(5, 30))]
            if StrategyCode.parse(code).document_feedback:
                reads = [int(value) for value in rng.integers(1, 9, size=len(order))]
            else:
                reads = [1] * len(order)

            logs.append(make_log(topic, code, order, reads))

    return index_runs(logs), QrelsMap(DOCUMENT, entries)


def brute_force_recall(log: RunLog, doc_qrels: QrelsMap, lam: float, effort: float) -> float:
    relevant = doc_qrels.relevant(log.topic_id)
    found = 0
    for record in log.records:
        cost = (1 - lam) * record.cum_e_judge + lam * record.cum_e_sent
        if cost > effort + 1e-9:
            break
        found += record.doc_id in relevant

    return found / len(relevant)


class TestEffort:

    def test_effort_lambda(self):
        assert effort_lambda(10, 50, 0.5) == 30
        assert effort_lambda(10, 50, 0.0) == 10
        assert effort_lambda(10, 50, 1.0) == 50

    @pytest.mark.parametrize('lam', [-0.1, 1.5])
    def test_lambda_outside_range(self, lam):
        with pytest.raises(ValueError):
            effort_lambda(1, 2, lam)

        with pytest.raises(ValueError):
            EffortModel(lam)

    def test_model_names(self):
        assert JUDGE.name == 'judge'
        assert SENT.name == 'sent'
        assert HALF.name == '0.5'

    def test_effort_ordering(self):
        log = make_log('T', 'ddd', ['a', 'b', 'c'], [3, 1, 6])
        previous = None
        for lam in np.linspace(0, 1, 21):
            cumulative = EffortModel(float(lam)).cumulative(log)
            assert np.all(JUDGE.cumulative(log) <= cumulative + 1e-12)
            assert np.all(cumulative <= SENT.cumulative(log) + 1e-12)
            if previous is not None:
                assert np.all(previous <= cumulative + 1e-12)
            previous = cumulative

    def test_single_assessment_effort(self):
        log = make_log('T', 'ddd', ['a'], [7])
        for lam in (0.0, 0.3, 1.0):
            assert EffortModel(lam).cumulative(log)[0] == pytest.approx(1 + lam * (7 - 1))

    def test_effort_label(self):
        assert effort_label(1, 0) == '1R'
        assert effort_label(2, 100) == '2R+100'


class TestRecall:

    def test_known_value(self):
        qrels = QrelsMap(DOCUMENT, {'T': {'a': True, 'c': True, 'e': True, 'z': True, 'b': False}})
        log = make_log('T', 'ddd', ['a', 'b', 'c', 'd', 'e', 'f', 'z'])
        assert recall_at_effort(log, qrels, JUDGE, 6) == 0.75

    def test_zero_effort(self):
        qrels = QrelsMap(DOCUMENT, {'T': {'a': True}})
        log = make_log('T', 'ddd', ['a'])
        assert recall_at_effort(log, qrels, JUDGE, 0) == 0.0

    def test_complete_run(self):
        qrels = QrelsMap(DOCUMENT, {'T': {'a': True, 'b': True}})
        log = make_log('T', 'ddd', ['x', 'a', 'b'], [4, 2, 5])
        assert recall_at_effort(log, qrels, SENT, 1000) == 1.0

    def test_partial_document_does_not_count(self):
        qrels = QrelsMap(DOCUMENT, {'T': {'a': True}})
        log = make_log('T', 'ddd', ['a'], [5])
        assert recall_at_effort(log, qrels, SENT, 4.99) == 0.0
        assert recall_at_effort(log, qrels, SENT, 5) == 1.0

    def test_no_relevant_documents(self):
        qrels = QrelsMap(DOCUMENT, {'T': {'a': False}})
        with pytest.raises(DataError):
            recall_at_effort(make_log('T', 'ddd', ['a']), qrels, JUDGE, 1)

    def test_matches_brute_force(self):
        runs, qrels = random_runs(0, num_topics=10)
        rng = np.random.default_rng(1)
        for log in runs.values():
            for _ in range(10):
                lam = float(rng.choice(np.linspace(0, 1, 21)))
                effort = float(rng.uniform(0, 120))
                expected = brute_force_recall(log, qrels, lam, effort)
                assert recall_at_effort(log, qrels, EffortModel(lam), effort) == pytest.approx(expected, abs=1e-12)

    def test_monotone_in_effort(self):
        runs, qrels = random_runs(2)
        for log in runs.values():
            recalls = [recall_at_effort(log, qrels, HALF, effort) for effort in range(0, 150, 3)]
            assert all(0.0 <= recall <= 1.0 for recall in recalls)
            assert all(a <= b for a, b in zip(recalls, recalls[1:]))


class TestGainCurve:

    def test_points(self):
        qrels = QrelsMap(DOCUMENT, {'T': {'a': True, 'b': True}})
        curve = gain_curve(make_log('T', 'ddd', ['a', 'b', 'c']), qrels, JUDGE)
        assert curve.points == [(1.0, 0.5), (2.0, 1.0), (3.0, 1.0)]

        frame = curve.to_frame()
        assert list(frame.columns) == ['effort', 'effort_over_R', 'recall']
        assert list(frame['effort_over_R']) == [0.5, 1.0, 1.5]

    def test_empty_log(self):
        qrels = QrelsMap(DOCUMENT, {'T': {'a': True}})
        assert len(gain_curve(RunLog('T', StrategyCode.parse('ddd')), qrels, JUDGE)) == 0

    def test_sentence_model_uses_sentences_read(self):
        qrels = QrelsMap(DOCUMENT, {'T': {'a': True}})
        curve = gain_curve(make_log('T', 'ddd', ['a', 'b', 'c'], [2, 5, 1]), qrels, SENT)
        assert [effort for effort, _ in curve.points] == [2.0, 7.0, 8.0]

    def test_write_gain_curves(self):
        runs, qrels = random_runs(3, num_topics=2)
        with tempfile.TemporaryDirectory() as path:
            paths = write_gain_curves(path, runs, qrels)
            assert len(paths) == 2 * 2 * 3
            assert os.path.basename(paths[0]) == 'T0.ddd.judge.csv'
            frame = pd.read_csv(paths[0])
            assert len(frame) == len(runs[('T0', 'ddd')])


class TestTables:

    def test_recall_table_matches_brute_force(self):
        runs, qrels = random_runs(4, num_topics=3)
        table = recall_table(runs, qrels, a_values=(1, 2), b_values=(0, 10), dataset='random')
        assert list(table.columns) == ['dataset', 'topic', 'effort', 'model', 'ddd', 'sdd']
        # 2 a values * 2 b values * 3 models * (3 topics + mean)
        assert len(table) == 2 * 2 * 3 * 4

        for _, row in table[table['topic'] != 'mean'].iterrows():
            lam = {'judge': 0.0, 'sent': 1.0}.get(row['model'], None)
            lam = float(row['model']) if lam is None else lam
            a, _, b = row['effort'].partition('R')
            effort = float(a) * qrels.num_relevant(row['topic']) + (float(b[1:]) if b else 0.0)
            for code in ('ddd', 'sdd'):
                expected = brute_force_recall(runs[(row['topic'], code)], qrels, lam, effort)
                assert row[code] == pytest.approx(expected)

        means = table[(table['topic'] == 'mean') & (table['effort'] == '1R') & (table['model'] == 'judge')]
        topics = table[(table['topic'] != 'mean') & (table['effort'] == '1R') & (table['model'] == 'judge')]
        assert means['ddd'].iloc[0] == pytest.approx(topics['ddd'].mean())

    def test_strategy_columns_follow_canonical_order(self):
        runs, qrels = random_runs(5, num_topics=2, codes=('sss', 'ddd', 'dsd'))
        table = recall_table(runs, qrels)
        assert list(table.columns)[4:] == ['ddd', 'dsd', 'sss']

    def test_overall_is_macro_average(self):
        runs_1, qrels_1 = random_runs(6, num_topics=2)
        runs_2, qrels_2 = random_runs(7, num_topics=3)
        table_1 = recall_table(runs_1, qrels_1, dataset='one')
        table_2 = recall_table(runs_2, qrels_2, dataset='two')
        overall = overall_table([table_1, table_2])

        row = overall[(overall['effort'] == '2R') & (overall['model'] == 'sent')].iloc[0]
        values = []
        for table in (table_1, table_2):
            selected = table[(table['topic'] != 'mean') & (table['effort'] == '2R') & (table['model'] == 'sent')]
            values += list(selected['sdd'])

        assert row['dataset'] == 'Overall'
        assert row['sdd'] == pytest.approx(np.mean(values))

    def test_combined_tables_keep_strategy_order(self):
        runs_1, qrels_1 = random_runs(3, num_topics=2, codes=('sss', 'ddd'))
        runs_2, qrels_2 = random_runs(4, num_topics=2, codes=('sdd',))
        combined = combine_recall_tables([recall_table(runs_1, qrels_1, dataset='one'),
                                          recall_table(runs_2, qrels_2, dataset='two')])

        assert list(combined.columns) == ['dataset', 'topic', 'effort', 'model', 'ddd', 'sdd', 'sss']
        assert combined[combined['dataset'] == 'one']['sdd'].isna().all()

        overall = overall_table([recall_table(runs_1, qrels_1, dataset='one'),
                                 recall_table(runs_2, qrels_2, dataset='two')])
        assert not overall['sdd'].isna().any()

    def test_topic_without_relevant_documents(self):
        runs = index_runs([make_log('T9', 'ddd', ['a'])])
        with pytest.raises(TopicMismatchError) as info:
            check_topics(runs, QrelsMap(DOCUMENT, {'T1': {'a': True}}))

        assert sorted(info.value.orphans) == ['T9']

    def test_duplicate_runs(self):
        with pytest.raises(DataError):
            index_runs([make_log('T', 'ddd', ['a']), make_log('T', 'ddd', ['b'])])


class TestComparison:

    def test_matches_scipy(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            a = rng.random(n)
            b = np.clip(a + rng.normal(0.05, 0.1, size=n), 0, 1)
            result = compare_strategies(a, b)

            reference = stats.ttest_rel(b, a)
            assert result.p_value == pytest.approx(reference.pvalue, abs=1e-6)

            differences = b - a
            low, high = stats.t.interval(0.95, n - 1, loc=differences.mean(), scale=stats.sem(differences))
            assert result.ci_low == pytest.approx(low, abs=1e-6)
            assert result.ci_high == pytest.approx(high, abs=1e-6)
            assert result.mean == pytest.approx(differences.mean(), abs=1e-12)

    def test_identical_recalls(self):
        result = compare_strategies([0.2, 0.5, 0.9], [0.2, 0.5, 0.9])
        assert result.mean == 0.0
        assert result.p_value == 1.0
        assert result.degenerate
        assert not result.significant

    def test_constant_difference(self):
        result = compare_strategies([0.1, 0.2, 0.3, 0.4], [0.2, 0.3, 0.4, 0.5])
        assert result.degenerate
        assert result.mean == pytest.approx(0.1)
        assert result.ci_low == result.ci_high == result.mean

    def test_needs_two_pairs(self):
        with pytest.raises(ValueError):
            compare_strategies([0.5], [0.6])

        with pytest.raises(ValueError):
            compare_strategies([0.5, 0.1], [0.6])

    def test_paired_topics_mismatch(self):
        runs = index_runs([make_log('T1', 'ddd', ['a']), make_log('T2', 'ddd', ['a']), make_log('T1', 'sdd', ['a'])])
        with pytest.raises(TopicMismatchError):
            paired_topics(runs, 'ddd', 'sdd')


class TestLambdaSweep:

    def test_endpoints_reproduce_judge_and_sent(self):
        runs, qrels = random_runs(9, num_topics=6)
        grid = [round(0.05 * step, 2) for step in range(21)]
        sweep = lambda_sweep(runs, qrels, 'ddd', 'sdd', a=1, grid=grid)
        assert len(sweep) == 21
        assert [lam for lam, _ in sweep] == grid

        table = comparison_table(runs, qrels, [('ddd', 'sdd')], a_values=(1,), models=(JUDGE, SENT))
        assert list(table.columns) == COMPARISON_COLUMNS
        assert table.iloc[0]['mean_diff'] == sweep[0][1].mean
        assert table.iloc[1]['mean_diff'] == sweep[-1][1].mean

    @pytest.mark.parametrize('seed', [11, 12, 13])
    def test_sentence_advantage_grows_with_lambda(self, seed):
        """
        With a growing weight of the read sentences, the effort of document feedback grows while the
        effort of sentence feedback stays the same, so the mean difference sdd - ddd never decreases.
        """
        runs, qrels = random_runs(seed, num_topics=6)
        grid = np.linspace(0, 1, 21)
        for a, b in [(1, 0), (2, 0), (1, 10)]:
            means = [result.mean for _, result in lambda_sweep(runs, qrels, 'ddd', 'sdd', a=a, grid=grid, b=b)]
            assert all(later >= earlier - 1e-12 for earlier, later in zip(means, means[1:]))

    def test_sentence_feedback_is_constant_over_lambda(self):
        runs, qrels = random_runs(10, num_topics=4, codes=('sdd', 'sss'))
        for log in runs.values():
            assert lambda_invariant(log)
            recalls = {recall_at_effort(log, qrels, EffortModel(lam), 12) for lam in np.linspace(0, 1, 21)}
            assert len(recalls) == 1

    def test_document_feedback_is_not_invariant(self):
        assert not lambda_invariant(make_log('T', 'ddd', ['a', 'b'], [1, 3]))
