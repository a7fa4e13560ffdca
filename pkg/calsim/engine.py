"""
The continuous active learning loop with interchangeable sentence and document feedback.

A strategy is described by a three letter code XYZ over {d, s}:

* X (present) - whether the reviewer is shown the whole document or only its best sentence
* Y (train) - whether the label is attached to the document or to the sentence for training
* Z (select) - whether the batch is selected by ranking documents or by ranking sentences

"ddd" is the document-only baseline. Every run starts with the topic statement as the only
relevant training example and a batch size of one, and then repeats the following until the
judgment budget is used up or no unreviewed document is left:

1. add a set of random items as temporary non-relevant examples
2. train the classifier from scratch and drop the temporary examples again
3. select the top B (best sentence, best document) pairs
4. append each document to the system output and simulate the assessment
5. add the assessed item with its label to the training set
6. increase B by ceil(B / 10)
"""
import os
import re
import logging
import typing as t
from dataclasses import dataclass, field

import numpy as np

from calsim.config import Config
from calsim.corpus import QrelsMap
from calsim.corpus import DOCUMENT
from calsim.corpus import SENTENCE
from calsim.features import FeatureSpace
from calsim.features import Vocabulary
from calsim.features import vectorize
from calsim.classifier import LabeledExample
from calsim.classifier import ModelState
from calsim.classifier import TrainParams
from calsim.classifier import RELEVANT
from calsim.classifier import NON_RELEVANT
from calsim.classifier import train
from calsim.classifier import score_all
from calsim.utils import NULL_LOGGER
from calsim.utils import DataError
from calsim.utils import ceil_div

STRATEGY_PATTERN = re.compile(r'^[ds]{3}$')
GRANULARITY_OF = {'d': DOCUMENT, 's': SENTENCE}


@dataclass(frozen=True)
class StrategyCode:
    present: str
    train: str
    select: str

    def __post_init__(self):
        for value in (self.present, self.train, self.select):
            if value not in GRANULARITY_OF:
                raise ValueError(f'strategy letters have to be "d" or "s", not "{value}"')

    @classmethod
    def parse(cls, code: str) -> 'StrategyCode':
        if not STRATEGY_PATTERN.match(code):
            raise ValueError(f'unknown strategy code "{code}", expected three letters out of "d" and "s"')

        return cls(*code)

    @property
    def code(self) -> str:
        return f'{self.present}{self.train}{self.select}'

    @property
    def document_feedback(self) -> bool:
        """
        Whether the reviewer reads whole documents, in which case the sentence effort differs from
        the number of judgments.
        """
        return self.present == 'd'

    def __str__(self) -> str:
        return self.code


ALL_STRATEGIES: t.Tuple[StrategyCode, ...] = tuple(
    StrategyCode.parse(code) for code in ('ddd', 'sdd', 'dsd', 'ssd', 'dds', 'sds', 'dss', 'sss')
)


def batch_sizes(count: int, growth: int = 10, start: int = 1) -> t.List[int]:
    """
    Returns the first ``count`` batch sizes of the sequence B <- B + ceil(B / growth).
    """
    sizes = []
    size = start
    for _ in range(count):
        sizes.append(size)
        size += ceil_div(size, growth)

    return sizes


# == RUN RECORDS ==

@dataclass(frozen=True)
class AssessmentRecord:
    ordinal: int
    batch_index: int
    doc_id: str
    presented_item: str
    label: bool
    sentences_read: int
    cum_e_judge: int
    cum_e_sent: int


RUN_LOG_COLUMNS = ('ordinal', 'batch_index', 'doc_id', 'presented_item', 'label', 'sentences_read',
                   'cum_E_judge', 'cum_E_sent')
RUN_LOG_SUFFIX = '.runlog.tsv'


@dataclass
class RunLog:
    """
    The ordered system output of one (topic, strategy) run together with the effort of every single
    assessment.
    """
    topic_id: str
    strategy: StrategyCode
    records: t.List[AssessmentRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> t.Iterator[AssessmentRecord]:
        return iter(self.records)

    @property
    def doc_ids(self) -> t.List[str]:
        return [record.doc_id for record in self.records]

    @property
    def e_judge(self) -> int:
        return self.records[-1].cum_e_judge if self.records else 0

    @property
    def e_sent(self) -> int:
        return self.records[-1].cum_e_sent if self.records else 0

    @property
    def file_name(self) -> str:
        return f'{self.topic_id}.{self.strategy.code}{RUN_LOG_SUFFIX}'

    def write(self, path: str) -> None:
        with open(path, mode='w', encoding='utf-8') as file:
            file.write('\t'.join(RUN_LOG_COLUMNS) + '\n')
            for r in self.records:
                file.write(f'{r.ordinal}\t{r.batch_index}\t{r.doc_id}\t{r.presented_item}\t{int(r.label)}\t'
                           f'{r.sentences_read}\t{r.cum_e_judge}\t{r.cum_e_sent}\n')

    @classmethod
    def read(cls, path: str) -> 'RunLog':
        """
        Reads a run log file. Topic and strategy are recovered from the file name
        "<topic>.<strategy>.runlog.tsv".
        """
        name = os.path.basename(path)
        if not name.endswith(RUN_LOG_SUFFIX):
            raise DataError(f'{path}: run log file names have to end with "{RUN_LOG_SUFFIX}"')

        topic_id, _, code = name[:-len(RUN_LOG_SUFFIX)].rpartition('.')
        try:
            strategy = StrategyCode.parse(code)
        except ValueError as exc:
            raise DataError(f'{path}: {exc}')

        records = []
        with open(path, encoding='utf-8') as file:
            header = tuple(file.readline().rstrip('\n').split('\t'))
            if header != RUN_LOG_COLUMNS:
                raise DataError(f'{path}:1: unexpected run log header')

            for line_number, line in enumerate(file, start=2):
                columns = line.rstrip('\n').split('\t')
                try:
                    records.append(AssessmentRecord(
                        ordinal=int(columns[0]),
                        batch_index=int(columns[1]),
                        doc_id=columns[2],
                        presented_item=columns[3],
                        label=columns[4] == '1',
                        sentences_read=int(columns[5]),
                        cum_e_judge=int(columns[6]),
                        cum_e_sent=int(columns[7]),
                    ))
                except (IndexError, ValueError):
                    raise DataError(f'{path}:{line_number}: invalid run log record')

        return cls(topic_id=topic_id, strategy=strategy, records=records)


def find_run_logs(path: str) -> t.List[str]:
    """
    Returns the sorted paths of all the run log files in the folder ``path`` and its sub folders.
    """
    paths = []
    for root, _, file_names in os.walk(path):
        paths += [os.path.join(root, name) for name in file_names if name.endswith(RUN_LOG_SUFFIX)]

    return sorted(paths)


@dataclass
class RunState:
    """
    The mutable state of one simulation run.

    ``training_rows`` holds the feature space row of every persistent training example, with None
    for the topic statement pseudo document, so that ``training_set[i]`` belongs to
    ``training_rows[i]``.
    """
    topic_id: str
    strategy: StrategyCode
    training_set: t.List[LabeledExample]
    training_rows: t.List[t.Optional[int]]
    rng: np.random.Generator
    budget: int
    seed: int
    batch_size: int = 1
    batch_index: int = 0
    output: t.List[str] = field(default_factory=list)
    output_set: t.Set[str] = field(default_factory=set)
    records: t.List[AssessmentRecord] = field(default_factory=list)
    cum_e_judge: int = 0
    cum_e_sent: int = 0

    @property
    def remaining_budget(self) -> int:
        return max(self.budget - self.cum_e_judge, 0)

    @property
    def relevant_found(self) -> int:
        return sum(1 for record in self.records if record.label)


# == SIMULATION ==

@dataclass(frozen=True)
class SimulationSettings:
    lam: float = 1e-4
    iterations: int = 200_000
    random_negatives: int = 100
    negative_pool: str = 'unlabeled'
    batch_growth: int = 10
    score_workers: int = 1

    def __post_init__(self):
        if self.negative_pool not in ('unlabeled', 'collection'):
            raise ValueError(f'unknown negative pool "{self.negative_pool}"')
        if self.batch_growth < 1:
            raise ValueError('batch growth has to be at least 1')
        if self.score_workers < 1:
            raise ValueError('the number of score workers has to be at least 1')

    @classmethod
    def from_config(cls, config: Config, **overrides) -> 'SimulationSettings':
        values = {
            'lam': config.get('lambda'),
            'iterations': config.get('iterations'),
            'random_negatives': config.get('random_negatives'),
            'negative_pool': config.get('negative_pool'),
            'batch_growth': config.get('batch_growth'),
            'score_workers': config.get('score_workers'),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


class Simulation:
    """
    Simulates CAL runs on one prepared collection, with the reviewer played by the document and
    sentence qrels.

    .. code-block:: python

        simulation = Simulation(space, vocabulary, doc_qrels, sent_qrels)
        state = simulation.init_run('T1', 'statement of the topic', StrategyCode.parse('sdd'),
                                    seed=1, budget=1000)
        log = simulation.run(state)

    :param space: The union feature space of the collection
    :param vocabulary: The vocabulary the feature space was built with
    :param doc_qrels: Document level relevance labels
    :param sent_qrels: Sentence level relevance labels, after propagation of the non-relevant
        documents
    :param settings: The classifier and loop settings
    :param config: The config instance whose plugin manager receives the simulation hooks
    :param logger: Receives warnings and a summary line per batch at debug level
    """
    def __init__(self,
                 space: FeatureSpace,
                 vocabulary: Vocabulary,
                 doc_qrels: QrelsMap,
                 sent_qrels: QrelsMap,
                 settings: SimulationSettings = SimulationSettings(),
                 config: t.Optional[Config] = None,
                 logger: logging.Logger = NULL_LOGGER,
                 ):
        self.space = space
        self.vocabulary = vocabulary
        self.doc_qrels = doc_qrels
        self.sent_qrels = sent_qrels
        self.settings = settings
        self.config = config or Config()
        self.logger = logger

    def init_run(self,
                 topic_id: str,
                 statement: str,
                 strategy: StrategyCode,
                 seed: int,
                 budget: int,
                 ) -> RunState:
        """
        Creates the initial state of a run: the topic statement as the only (relevant) training
        example, a batch size of one and an empty system output.

        :param budget: The maximum number of judgments
        """
        if not statement.strip():
            raise DataError(f'the statement of topic "{topic_id}" is empty')
        if budget < 0:
            raise ValueError(f'the budget can not be negative, got {budget}')

        pseudo_document = vectorize(statement, self.vocabulary, normalize=True)
        if len(pseudo_document) == 0:
            self.logger.warning(f'the statement of topic "{topic_id}" has no term in the vocabulary')

        return RunState(
            topic_id=topic_id,
            strategy=strategy,
            training_set=[LabeledExample(pseudo_document, RELEVANT)],
            training_rows=[None],
            rng=np.random.Generator(np.random.PCG64(seed)),
            budget=budget,
            seed=seed,
        )

    def augment_random_negatives(self, state: RunState) -> t.List[LabeledExample]:
        """
        Draws the temporary non-relevant examples of one batch: random documents if the strategy
        trains on documents and random sentences otherwise. With the "unlabeled" pool the items that
        are already part of the persistent training set are excluded.

        :returns: A list of LabeledExample which is *not* added to the state
        """
        kind = GRANULARITY_OF[state.strategy.train]
        rows = self.space.rows_of_kind(kind)
        if self.settings.negative_pool == 'unlabeled':
            labeled = np.array([row for row in state.training_rows if row is not None], dtype=np.int64)
            rows = rows[~np.isin(rows, labeled)]

        count = self.settings.random_negatives
        if len(rows) < count:
            self.logger.warning(f'only {len(rows)} {kind}s are available as random negatives for topic '
                                f'"{state.topic_id}", {count} were requested')
            count = len(rows)

        chosen = state.rng.choice(rows, size=count, replace=False) if count else rows[:0]
        return [LabeledExample(self.space.vector(int(row)), NON_RELEVANT) for row in chosen]

    def train_model(self, state: RunState, temporary: t.Sequence[LabeledExample]) -> ModelState:
        params = TrainParams(
            lam=self.settings.lam,
            iterations=self.settings.iterations,
            seed=int(state.rng.integers(0, 2 ** 32)),
        )
        return train(
            list(state.training_set) + list(temporary),
            params,
            num_terms=self.space.num_terms,
            logger=self.logger,
        )

    def select_pairs(self,
                     state: RunState,
                     model: ModelState,
                     batch_size: int,
                     ) -> t.List[t.Tuple[str, str]]:
        """
        Selects up to ``batch_size`` (best sentence, best document) pairs among the documents that
        are not yet part of the system output.

        When selecting by document, the highest scoring documents are chosen and paired with their own
        highest scoring sentence. When selecting by sentence, the sentences are visited in order of
        descending score and each one is emitted together with its document, skipping sentences of
        documents that were already emitted in the same batch. Ties are broken by ascending item id.

        :returns: A list of (sentence id, document id) tuples
        """
        scores = score_all(model, self.space.matrix, self.settings.score_workers)
        available = np.array([doc_id not in state.output_set for doc_id in self.space.doc_ids], dtype=bool)
        pairs: t.List[t.Tuple[str, str]] = []

        if state.strategy.select == 'd':
            rows = self.space.document_rows[available]
            for row in self.rank(rows, scores)[:batch_size]:
                sentence_rows = np.arange(*self.space.sentence_ranges[self.space.parent_index[row]])
                best = self.rank(sentence_rows, scores)[0] if len(sentence_rows) else row
                pairs.append((self.space.item_ids[best], self.space.item_ids[row]))

        else:
            rows = self.space.sentence_rows
            rows = rows[available[self.space.parent_index[rows]]]
            emitted: t.Set[int] = set()
            for row in self.rank(rows, scores):
                if len(pairs) >= batch_size:
                    break

                parent = self.space.parent_row(row)
                if parent in emitted:
                    continue

                emitted.add(parent)
                pairs.append((self.space.item_ids[row], self.space.item_ids[parent]))

        return pairs

    def rank(self, rows: np.ndarray, scores: np.ndarray) -> np.ndarray:
        """
        Sorts the given ``rows`` by descending score and ascending item id.
        """
        order = np.lexsort((self.space.id_rank[rows], -scores[rows]))
        return rows[order]

    def simulate_assessment(self,
                            topic_id: str,
                            pair: t.Tuple[str, str],
                            strategy: StrategyCode,
                            ) -> t.Tuple[bool, str, int]:
        """
        Plays the reviewer for one (best sentence, best document) pair.

        If the sentence is presented, its sentence label is the judgment and exactly one sentence is
        read. If the document is presented, the document label is the judgment and the reviewer reads
        from the beginning up to and including the first relevant sentence, or all of the sentences if
        there is none.

        :returns: A tuple (label, presented item id, sentences read)
        """
        best_sentence, best_document = pair
        if strategy.present == 's':
            return self.sent_qrels.label(topic_id, best_sentence), best_sentence, 1

        label = self.doc_qrels.label(topic_id, best_document)
        sentence_ids = [self.space.item_ids[row] for row in self.space.sentence_rows_of(best_document)]
        sentences_read = len(sentence_ids)
        for position, sentence_id in enumerate(sentence_ids, start=1):
            if self.sent_qrels.label(topic_id, sentence_id):
                sentences_read = position
                break

        return label, best_document, max(sentences_read, 1)

    def step_batch(self, state: RunState) -> t.List[AssessmentRecord]:
        """
        Executes one complete iteration of the loop on the ``state`` and returns the new assessment
        records. The batch is cut short if the remaining budget is smaller than the batch size.
        """
        temporary = self.augment_random_negatives(state)
        model = self.train_model(state, temporary)

        size = min(state.batch_size, state.remaining_budget)
        pairs = self.select_pairs(state, model, size)

        state.batch_index += 1
        records = []
        for best_sentence, best_document in pairs:
            assert best_document not in state.output_set, f'document "{best_document}" selected twice'
            state.output.append(best_document)
            state.output_set.add(best_document)

            label, presented, sentences_read = self.simulate_assessment(
                state.topic_id,
                (best_sentence, best_document),
                state.strategy,
            )
            state.cum_e_judge += 1
            state.cum_e_sent += sentences_read
            record = AssessmentRecord(
                ordinal=len(state.records) + 1,
                batch_index=state.batch_index,
                doc_id=best_document,
                presented_item=presented,
                label=label,
                sentences_read=sentences_read,
                cum_e_judge=state.cum_e_judge,
                cum_e_sent=state.cum_e_sent,
            )
            state.records.append(record)
            records.append(record)

            trained_item = best_document if state.strategy.train == 'd' else best_sentence
            row = self.space.row_of[trained_item]
            state.training_set.append(LabeledExample(
                self.space.vector(row),
                RELEVANT if label else NON_RELEVANT,
            ))
            state.training_rows.append(row)

        state.batch_size += ceil_div(state.batch_size, self.settings.batch_growth)
        self.logger.debug(f'topic {state.topic_id} / {state.strategy}: batch {state.batch_index} '
                          f'with {len(records)} assessments, {state.relevant_found} relevant so far')
        return records

    def has_candidates(self, state: RunState) -> bool:
        return len(state.output_set) < len(self.space.doc_ids)

    def run(self, state: RunState) -> RunLog:
        """
        Repeats ``step_batch`` until the judgment budget is exhausted or every document is part of
        the system output.

        :returns: RunLog
        """
        self.config.pm.apply_hook('simulation_started', state=state)

        while state.remaining_budget > 0 and self.has_candidates(state):
            records = self.step_batch(state)
            self.config.pm.apply_hook('simulation_batch_finished', state=state, records=records)

        log = RunLog(topic_id=state.topic_id, strategy=state.strategy, records=list(state.records))
        self.config.pm.apply_hook('simulation_finished', state=state, log=log)
        return log

    def run_topic(self,
                  topic_id: str,
                  statement: str,
                  strategy: StrategyCode,
                  seed: int,
                  budget: int,
                  ) -> RunLog:
        state = self.init_run(topic_id, statement, strategy, seed, budget)
        return self.run(state)
