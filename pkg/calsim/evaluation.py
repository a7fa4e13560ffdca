"""
Effort and recall evaluation of run logs.

The effort of a run can be counted in judgments (E_judge), in sentences read (E_sent) or as the
convex combination of both, E_lambda = (1 - lambda) * E_judge + lambda * E_sent. Recall at effort E
is the fraction of the relevant documents that are part of the system output truncated at the
longest prefix whose effort does not exceed E.
"""
import os
import math
import typing as t
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats

from calsim.corpus import QrelsMap
from calsim.engine import RunLog
from calsim.engine import ALL_STRATEGIES
from calsim.utils import DataError
from calsim.utils import TopicMismatchError

TOLERANCE = 1e-9


@dataclass(frozen=True)
class EffortModel:
    lam: float

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f'lambda has to be within [0, 1], not {self.lam}')

    @property
    def name(self) -> str:
        if self.lam == 0.0:
            return 'judge'
        elif self.lam == 1.0:
            return 'sent'

        return f'{self.lam:g}'

    def cost(self, e_judge: float, e_sent: float) -> float:
        return effort_lambda(e_judge, e_sent, self.lam)

    def cumulative(self, log: RunLog) -> np.ndarray:
        """
        The cumulative effort after each assessment of the ``log``.
        """
        e_judge = np.array([record.cum_e_judge for record in log.records], dtype=np.float64)
        e_sent = np.array([record.cum_e_sent for record in log.records], dtype=np.float64)
        return e_judge + self.lam * (e_sent - e_judge)


JUDGE = EffortModel(0.0)
HALF = EffortModel(0.5)
SENT = EffortModel(1.0)
DEFAULT_MODELS = (JUDGE, HALF, SENT)


def effort_lambda(e_judge: float, e_sent: float, lam: float) -> float:
    """
    Returns the effort E_lambda = (1 - lambda) * E_judge + lambda * E_sent, computed as
    E_judge + lambda * (E_sent - E_judge) so that lambda = 0 and lambda = 1 reproduce E_judge and
    E_sent exactly.

    :raises ValueError: If lambda is outside of [0, 1]
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f'lambda has to be within [0, 1], not {lam}')

    return e_judge + lam * (e_sent - e_judge)


def _num_relevant(log: RunLog, doc_qrels: QrelsMap) -> int:
    num_relevant = doc_qrels.num_relevant(log.topic_id)
    if num_relevant == 0:
        raise DataError(f'recall is undefined for topic "{log.topic_id}" without relevant documents')

    return num_relevant


def _found(log: RunLog, doc_qrels: QrelsMap) -> np.ndarray:
    relevant = doc_qrels.relevant(log.topic_id)
    return np.cumsum([record.doc_id in relevant for record in log.records], dtype=np.int64)


def recall_at_effort(log: RunLog,
                     doc_qrels: QrelsMap,
                     model: EffortModel,
                     effort: float,
                     ) -> float:
    """
    Computes the recall of the system output of ``log`` truncated at ``effort``.

    An assessment is only included if its whole cumulative cost fits into the effort, a partially
    read document does not count.

    :raises DataError: If the topic has no relevant document
    """
    num_relevant = _num_relevant(log, doc_qrels)
    if not log.records:
        return 0.0

    cumulative = model.cumulative(log)
    prefix = int(np.searchsorted(cumulative, effort + TOLERANCE, side='right'))
    if prefix == 0:
        return 0.0

    return float(_found(log, doc_qrels)[prefix - 1]) / num_relevant


@dataclass
class GainCurve:
    topic_id: str
    strategy: str
    model: EffortModel
    num_relevant: int
    points: t.List[t.Tuple[float, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'effort': [effort for effort, _ in self.points],
            'effort_over_R': [effort / self.num_relevant for effort, _ in self.points],
            'recall': [recall for _, recall in self.points],
        })


def gain_curve(log: RunLog, doc_qrels: QrelsMap, model: EffortModel) -> GainCurve:
    """
    Returns the gain curve of the run with one (cumulative effort, recall) point per assessment.
    """
    num_relevant = _num_relevant(log, doc_qrels)
    cumulative = model.cumulative(log)
    found = _found(log, doc_qrels)
    points = [(float(effort), float(count) / num_relevant) for effort, count in zip(cumulative, found)]
    return GainCurve(log.topic_id, log.strategy.code, model, num_relevant, points)


def effort_level(num_relevant: int, a: float, b: float) -> float:
    return a * num_relevant + b


def effort_label(a: float, b: float) -> str:
    label = f'{a:g}R'
    if b:
        label += f'+{b:g}'

    return label


# == TABLES ==

RunIndex = t.Dict[t.Tuple[str, str], RunLog]
# the columns of a recall table that precede the strategy columns
KEY_COLUMNS = ('dataset', 'topic', 'effort', 'model')


def index_runs(logs: t.Iterable[RunLog]) -> RunIndex:
    """
    Returns a dict that maps (topic id, strategy code) to the run log.
    """
    index = {}
    for log in logs:
        key = (log.topic_id, log.strategy.code)
        if key in index:
            raise DataError(f'more than one run log for topic "{key[0]}" and strategy "{key[1]}"')
        index[key] = log

    return index


def strategy_columns(runs: RunIndex) -> t.List[str]:
    present = {code for _, code in runs}
    return [strategy.code for strategy in ALL_STRATEGIES if strategy.code in present]


def check_topics(runs: RunIndex, doc_qrels: QrelsMap) -> t.List[str]:
    """
    Returns the sorted topic ids of the runs.

    :raises TopicMismatchError: If any run topic has no relevance judgments.
    """
    topics = sorted({topic for topic, _ in runs})
    orphans = [topic for topic in topics if doc_qrels.num_relevant(topic) == 0]
    if orphans:
        raise TopicMismatchError('run logs for topics without relevant documents in the qrels', orphans)

    return topics


def recall_table(runs: RunIndex,
                 doc_qrels: QrelsMap,
                 a_values: t.Sequence[float] = (1, 2, 4),
                 b_values: t.Sequence[float] = (0,),
                 models: t.Sequence[EffortModel] = DEFAULT_MODELS,
                 dataset: str = 'collection',
                 ) -> pd.DataFrame:
    """
    Tabulates the recall at the effort levels a * R + b for every topic and strategy under each
    effort model, followed by the mean over the topics.

    The result has the columns "dataset", "topic", "effort", "model" followed by one column per
    strategy, ordered like ALL_STRATEGIES. The mean rows carry the topic "mean".

    :returns: pandas DataFrame
    """
    topics = check_topics(runs, doc_qrels)
    columns = strategy_columns(runs)

    rows = []
    for a in a_values:
        for b in b_values:
            for model in models:
                topic_rows = []
                for topic in topics:
                    effort = effort_level(doc_qrels.num_relevant(topic), a, b)
                    row = {'dataset': dataset, 'topic': topic, 'effort': effort_label(a, b), 'model': model.name}
                    for code in columns:
                        log = runs.get((topic, code))
                        row[code] = recall_at_effort(log, doc_qrels, model, effort) if log else np.nan
                    topic_rows.append(row)

                mean_row = {'dataset': dataset, 'topic': 'mean', 'effort': effort_label(a, b), 'model': model.name}
                for code in columns:
                    mean_row[code] = float(np.nanmean([row[code] for row in topic_rows]))

                rows += topic_rows + [mean_row]

    return pd.DataFrame(rows, columns=list(KEY_COLUMNS) + columns)


def combine_recall_tables(tables: t.Sequence[pd.DataFrame]) -> pd.DataFrame:
    """
    Concatenates the recall tables of several datasets. Strategies that are missing from a dataset
    have empty values in its rows and the strategy columns keep the order of ALL_STRATEGIES.
    """
    frame = pd.concat(tables, ignore_index=True)
    present = set(frame.columns) - set(KEY_COLUMNS)
    return frame[list(KEY_COLUMNS) + [s.code for s in ALL_STRATEGIES if s.code in present]]


def overall_table(tables: t.Sequence[pd.DataFrame]) -> pd.DataFrame:
    """
    Given the recall tables of several datasets, returns the "Overall" rows: the mean over all the
    topics of all the datasets for every (effort, model) combination.
    """
    frame = combine_recall_tables(tables)
    frame = frame[frame['topic'] != 'mean']
    columns = [column for column in frame.columns if column not in KEY_COLUMNS]
    overall = frame.groupby(['effort', 'model'], sort=False)[columns].mean().reset_index()
    overall.insert(0, 'topic', 'mean')
    overall.insert(0, 'dataset', 'Overall')
    return overall


# == STATISTICS ==

@dataclass(frozen=True)
class ComparisonResult:
    """
    The paired comparison of the per-topic recalls of two strategies, where the differences are
    taken as recall B minus recall A.
    """
    topics: t.Tuple[str, ...]
    recalls_a: t.Tuple[float, ...]
    recalls_b: t.Tuple[float, ...]
    mean: float
    ci_low: float
    ci_high: float
    p_value: float
    degenerate: bool = False

    @property
    def significant(self) -> bool:
        return self.p_value < 0.05


def compare_strategies(recalls_a: t.Sequence[float],
                       recalls_b: t.Sequence[float],
                       topics: t.Optional[t.Sequence[str]] = None,
                       confidence: float = 0.95,
                       ) -> ComparisonResult:
    """
    Two-sided paired Student's t-test of the differences recall_b - recall_a together with the
    confidence interval of the mean difference, using the t-distribution with n - 1 degrees of
    freedom.

    If all the differences are equal, the interval collapses onto the mean and the result is flagged
    as degenerate, with a p-value of 1 for a zero mean and 0 otherwise.

    :raises ValueError: If there are fewer than two pairs or the lengths differ
    """
    a = np.asarray(recalls_a, dtype=np.float64)
    b = np.asarray(recalls_b, dtype=np.float64)
    if len(a) != len(b):
        raise ValueError(f'paired comparison of {len(a)} and {len(b)} values')
    if len(a) < 2:
        raise ValueError('the comparison of strategies needs at least two topics')

    topics = tuple(topics) if topics is not None else tuple(str(index) for index in range(len(a)))
    differences = b - a
    n = len(differences)
    mean = float(np.mean(differences))
    standard_error = float(np.std(differences, ddof=1)) / math.sqrt(n)

    if standard_error <= TOLERANCE * max(1.0, abs(mean)):
        return ComparisonResult(topics, tuple(a), tuple(b), mean, mean, mean,
                                p_value=1.0 if abs(mean) <= TOLERANCE else 0.0, degenerate=True)

    statistic = mean / standard_error
    p_value = float(2 * stats.t.sf(abs(statistic), n - 1))
    half_width = float(stats.t.ppf(0.5 + confidence / 2, n - 1)) * standard_error
    return ComparisonResult(topics, tuple(a), tuple(b), mean, mean - half_width, mean + half_width, p_value)


def per_topic_recalls(runs: RunIndex,
                      doc_qrels: QrelsMap,
                      strategy: str,
                      topics: t.Sequence[str],
                      model: EffortModel,
                      a: float,
                      b: float = 0,
                      ) -> t.List[float]:
    recalls = []
    for topic in topics:
        if (topic, strategy) not in runs:
            raise TopicMismatchError(f'no run of strategy "{strategy}" for the topics', [topic])

        effort = effort_level(doc_qrels.num_relevant(topic), a, b)
        recalls.append(recall_at_effort(runs[(topic, strategy)], doc_qrels, model, effort))

    return recalls


def paired_topics(runs: RunIndex, strategy_a: str, strategy_b: str) -> t.List[str]:
    """
    Returns the sorted topics that have runs of both strategies.

    :raises TopicMismatchError: If one of the strategies has runs for topics the other one lacks
    """
    topics_a = {topic for topic, code in runs if code == strategy_a}
    topics_b = {topic for topic, code in runs if code == strategy_b}
    orphans = topics_a ^ topics_b
    if orphans:
        raise TopicMismatchError(f'strategies "{strategy_a}" and "{strategy_b}" were not run on the same topics',
                                 orphans)

    return sorted(topics_a)


def lambda_sweep(runs: RunIndex,
                 doc_qrels: QrelsMap,
                 strategy_a: str,
                 strategy_b: str,
                 a: float,
                 grid: t.Sequence[float],
                 b: float = 0,
                 ) -> t.List[t.Tuple[float, ComparisonResult]]:
    """
    Compares the two strategies at the effort E_lambda = a * R + b for every lambda of the ``grid``.

    :returns: A list of (lambda, ComparisonResult) tuples in grid order
    """
    topics = paired_topics(runs, strategy_a, strategy_b)
    results = []
    for lam in grid:
        model = EffortModel(float(lam))
        recalls_a = per_topic_recalls(runs, doc_qrels, strategy_a, topics, model, a, b)
        recalls_b = per_topic_recalls(runs, doc_qrels, strategy_b, topics, model, a, b)
        results.append((float(lam), compare_strategies(recalls_a, recalls_b, topics)))

    return results


def lambda_invariant(log: RunLog) -> bool:
    """
    Whether the recall of the run is the same for every lambda, which is the case exactly if every
    assessment read a single sentence.
    """
    return all(record.sentences_read == 1 for record in log.records)


def comparison_rows(sweep: t.Sequence[t.Tuple[float, ComparisonResult]],
                    strategy_a: str,
                    strategy_b: str,
                    a: float,
                    b: float = 0,
                    ) -> t.List[dict]:
    return [
        {
            'strategy_a': strategy_a,
            'strategy_b': strategy_b,
            'lambda': lam,
            'a': a,
            'b': b,
            'mean_diff': result.mean,
            'ci_low': result.ci_low,
            'ci_high': result.ci_high,
            'p': result.p_value,
            'significant': result.significant,
            'degenerate': result.degenerate,
        }
        for lam, result in sweep
    ]


def comparison_table(runs: RunIndex,
                     doc_qrels: QrelsMap,
                     pairs: t.Sequence[t.Tuple[str, str]],
                     a_values: t.Sequence[float] = (1, 2, 4),
                     b_values: t.Sequence[float] = (0,),
                     models: t.Sequence[EffortModel] = DEFAULT_MODELS,
                     ) -> pd.DataFrame:
    """
    Confidence intervals and significance marks of the recall difference of every strategy pair at
    every effort level and effort model.
    """
    rows = []
    for strategy_a, strategy_b in pairs:
        for a in a_values:
            for b in b_values:
                sweep = lambda_sweep(runs, doc_qrels, strategy_a, strategy_b, a, [m.lam for m in models], b)
                rows += comparison_rows(sweep, strategy_a, strategy_b, a, b)

    return pd.DataFrame(rows, columns=COMPARISON_COLUMNS)


COMPARISON_COLUMNS = ['strategy_a', 'strategy_b', 'lambda', 'a', 'b', 'mean_diff', 'ci_low', 'ci_high',
                      'p', 'significant', 'degenerate']


# == REPORTS ==

def write_gain_curves(path: str,
                      runs: RunIndex,
                      doc_qrels: QrelsMap,
                      models: t.Sequence[EffortModel] = DEFAULT_MODELS,
                      ) -> t.List[str]:
    """
    Writes one "<topic>.<strategy>.<model>.csv" file with the columns effort, effort_over_R and
    recall into the folder ``path`` for every run and effort model.

    :returns: The list of the written file paths
    """
    os.makedirs(path, exist_ok=True)
    paths = []
    for (topic, code), log in sorted(runs.items()):
        for model in models:
            curve = gain_curve(log, doc_qrels, model)
            file_path = os.path.join(path, f'{topic}.{code}.{model.name}.csv')
            curve.to_frame().to_csv(file_path, index=False)
            paths.append(file_path)

    return paths


def write_csv(frame: pd.DataFrame, path: str) -> None:
    frame.to_csv(path, index=False, float_format='%.6f')
