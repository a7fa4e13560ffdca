"""Console script for calsim."""
import os
import sys
import typing as t
from dataclasses import dataclass
from concurrent.futures import ProcessPoolExecutor

import rich
import rich.box
import rich.table
import rich_click as click
import pandas as pd

from calsim.config import Config
from calsim.archive import Archive
from calsim.corpus import SegmenterConfig
from calsim.corpus import LabelStatsReport
from calsim.corpus import DOCUMENT
from calsim.corpus import SENTENCE
from calsim.corpus import QrelsMap
from calsim.corpus import corpus_stats
from calsim.corpus import derive_sentence_qrels_from_passages
from calsim.corpus import ingest_documents
from calsim.corpus import load_passages
from calsim.corpus import load_qrels
from calsim.corpus import propagate_nonrelevant
from calsim.corpus import read_documents
from calsim.corpus import read_presegmented
from calsim.corpus import read_topics
from calsim.engine import RunLog
from calsim.engine import Simulation
from calsim.engine import SimulationSettings
from calsim.engine import StrategyCode
from calsim.engine import find_run_logs
from calsim.evaluation import DEFAULT_MODELS
from calsim.evaluation import KEY_COLUMNS
from calsim.evaluation import RunIndex
from calsim.evaluation import combine_recall_tables
from calsim.evaluation import comparison_rows
from calsim.evaluation import comparison_table
from calsim.evaluation import index_runs
from calsim.evaluation import lambda_sweep
from calsim.evaluation import overall_table
from calsim.evaluation import recall_table
from calsim.evaluation import write_gain_curves
from calsim.evaluation import COMPARISON_COLUMNS
from calsim.features import FeatureSpace
from calsim.manifest import RunManifest
from calsim.manifest import derive_run_seeds
from calsim.manifest import parse_budget
from calsim.manifest import parse_lambda_grid
from calsim.manifest import parse_pairs
from calsim.manifest import parse_strategies
from calsim.store import CorpusStore
from calsim.store import DOC_QRELS_FILE
from calsim.store import SENT_QRELS_FILE
from calsim.store import load_store
from calsim.store import save_store
from calsim.store import write_stats
from calsim.synthetic import SyntheticSettings
from calsim.synthetic import generate_corpus
from calsim.utils import DataError
from calsim.utils import TopicMismatchError
from calsim.utils import get_version

click.rich_click.USE_RICH_MARKUP = True

EXIT_SUCCESS = 0
EXIT_USAGE = 1
EXIT_DATA = 2

MANIFEST_FILE = 'calsim_manifest.json'
RUNS_FOLDER = 'runs'
SUMMARY_FILE = 'runs_summary.csv'


# == OPTION VALIDATION ==

def validate_strategies(ctx, param, value):
    if value is None:
        return None
    try:
        return [strategy.code for strategy in parse_strategies(value)]
    except ValueError as exc:
        raise click.BadParameter(str(exc))


def validate_budget(ctx, param, value):
    if value is None:
        return None
    try:
        return str(parse_budget(value))
    except DataError as exc:
        raise click.BadParameter(str(exc))


def validate_lambda_grid(ctx, param, value):
    if value is None:
        return None
    try:
        parse_lambda_grid(value)
        return value
    except ValueError as exc:
        raise click.BadParameter(str(exc))


def validate_pairs(ctx, param, value):
    if value is None:
        return None
    try:
        return [list(pair) for pair in parse_pairs(value)]
    except ValueError as exc:
        raise click.BadParameter(str(exc))


def validate_numbers(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(number) for number in value.split(',') if number.strip()]
    except ValueError:
        raise click.BadParameter(f'"{value}" is not a comma separated list of numbers')


# == RICH RENDERING ==

def stats_table(report: LabelStatsReport) -> rich.table.Table:
    table = rich.table.Table(title='sentence label statistics', box=rich.box.SIMPLE)
    for column in ('topic', '#sent/doc', '#sent/rel doc', '#rel sent/rel doc', 'first rel pos', 'with rel sent'):
        table.add_column(column, justify='right')

    for row in report.rows():
        table.add_row(
            str(row['name']),
            f'{row["sentences_per_document"]:.2f}',
            f'{row["sentences_per_relevant_document"]:.2f}',
            f'{row["relevant_sentences_per_relevant_document"]:.2f}',
            f'{row["first_relevant_position"]:.2f}',
            f'{row["fraction_with_relevant_sentence"]:.1%}',
        )

    return table


def recall_rich_table(frame: pd.DataFrame, title: str = 'mean recall') -> rich.table.Table:
    table = rich.table.Table(title=title, box=rich.box.SIMPLE)
    strategies = [column for column in frame.columns if column not in KEY_COLUMNS]
    table.add_column('effort')
    table.add_column('model')
    for code in strategies:
        table.add_column(code, justify='right')

    for _, row in frame[frame['topic'] == 'mean'].iterrows():
        table.add_row(row['effort'], row['model'], *[f'{row[code]:.3f}' for code in strategies])

    return table


# == RUN EXECUTION ==
# Runs are executed by module level functions so that they can be sent to worker processes. Each
# worker loads the store once in its initializer.

_WORKER: dict = {}


def init_worker(store_path: str,
                doc_qrels_path: str,
                sent_qrels_path: str,
                settings: SimulationSettings,
                ) -> None:
    store = load_store(store_path)
    doc_qrels, sent_qrels = resolve_qrels(store, doc_qrels_path, sent_qrels_path)
    _WORKER['simulation'] = Simulation(store.space, store.vocabulary, doc_qrels, sent_qrels, settings)


def execute_run(task: dict) -> dict:
    """
    Executes one (topic, strategy) run described by the ``task`` dict, writes the run log into the
    runs folder and returns the summary row of the run.
    """
    simulation: Simulation = _WORKER['simulation']
    strategy = StrategyCode.parse(task['strategy'])
    log = simulation.run_topic(task['topic'], task['statement'], strategy, task['seed'], task['budget'])
    log.write(os.path.join(task['runs_path'], log.file_name))
    return {
        'topic': task['topic'],
        'strategy': strategy.code,
        'R': task['R'],
        'budget': task['budget'],
        'judgments': log.e_judge,
        'E_sent': log.e_sent,
        'relevant_found': len(simulation.doc_qrels.relevant(task['topic']) & set(log.doc_ids)),
    }


def resolve_qrels(store: CorpusStore,
                  doc_qrels_path: str = '',
                  sent_qrels_path: str = '',
                  ) -> t.Tuple[QrelsMap, QrelsMap]:
    """
    Returns the document qrels and the propagated sentence qrels of a run, either from the given
    paths or from the store.

    :raises DataError: If either of the qrels is not available
    """
    doc_qrels = load_qrels(doc_qrels_path, DOCUMENT) if doc_qrels_path else store.doc_qrels
    sent_qrels = load_qrels(sent_qrels_path, SENTENCE) if sent_qrels_path else store.sent_qrels
    if doc_qrels is None:
        raise DataError(f'no document qrels: pass --doc-qrels or prepare the store {store.path} with them')
    if sent_qrels is None:
        raise DataError(f'no sentence qrels: pass --sent-qrels or label the store {store.path} with '
                        f'"calsim label-sentences"')

    return doc_qrels, propagate_nonrelevant(doc_qrels, store.collection, sent_qrels)


# == EVALUATION INPUTS ==

@dataclass
class EvalDataset:
    """
    The run logs of one runs folder together with the document qrels they are evaluated against.
    """
    name: str
    runs_path: str
    index: RunIndex
    doc_labels: QrelsMap
    manifest: RunManifest
    # the metadata of the "run" archive, None for plain folders of run logs
    metadata: t.Optional[dict] = None


def load_eval_dataset(runs_path: str,
                      doc_qrels_path: t.Optional[str],
                      name: t.Optional[str],
                      strategies: t.Optional[t.List[str]],
                      config: Config,
                      ) -> EvalDataset:
    """
    Loads the run logs in ``runs_path``. If the folder is the archive of a "run" command, its
    manifest provides the defaults of the evaluation and the store of the manifest provides the
    document qrels unless ``doc_qrels_path`` is given.

    :raises DataError: If the folder is the archive of a failed command or contains no run logs
    """
    metadata = None
    if Archive.is_archive(runs_path):
        metadata = Archive.load_metadata(runs_path)
        if metadata.get('status') == 'failed':
            raise DataError(f'{runs_path} is the archive of a failed "{metadata.get("command")}" command: '
                            f'{metadata.get("error", "unknown error")}')

    manifest_path = os.path.join(runs_path, MANIFEST_FILE)
    run_manifest = RunManifest.load(manifest_path if os.path.exists(manifest_path) else None, config=config)

    store_qrels_path = os.path.join(run_manifest.collection, DOC_QRELS_FILE) if run_manifest.collection else ''
    if doc_qrels_path:
        doc_labels = load_qrels(doc_qrels_path, DOCUMENT)
    elif run_manifest.doc_qrels:
        doc_labels = load_qrels(run_manifest.doc_qrels, DOCUMENT)
    elif store_qrels_path and os.path.exists(store_qrels_path):
        doc_labels = load_qrels(store_qrels_path, DOCUMENT)
    else:
        raise click.UsageError(f'--doc-qrels is required for {runs_path}, its runs do not come with a store')

    logs = [RunLog.read(path) for path in find_run_logs(runs_path)]
    if strategies:
        logs = [log for log in logs if log.strategy.code in strategies]
    if not logs:
        raise DataError(f'no run logs found in {runs_path}')

    return EvalDataset(
        name=name or os.path.basename(os.path.normpath(run_manifest.collection or runs_path)),
        runs_path=runs_path,
        index=index_runs(logs),
        doc_labels=doc_labels,
        manifest=run_manifest,
        metadata=metadata,
    )


def paired_option(values: t.Tuple[str, ...], count: int, name: str) -> t.List[t.Optional[str]]:
    """
    Returns the values of the repeatable option ``name`` paired by position with the ``count``
    runs folders, or a list of None if the option was not given.
    """
    if not values:
        return [None] * count
    if len(values) != count:
        raise click.UsageError(f'{name} was given {len(values)} times for {count} runs folders, '
                               f'either give it once per --runs or not at all')

    return list(values)


class CLI(click.RichGroup):
    """
    The calsim command group. Usage errors exit with code 1 and problems with the content of the
    input data with code 2.
    """
    def __init__(self, *args, **kwargs):
        click.RichGroup.__init__(self, *args, invoke_without_command=True, **kwargs)
        self.config = Config()

        self.add_command(self.prepare_command)
        self.add_command(self.label_sentences_command)
        self.add_command(self.run_command)
        self.add_command(self.eval_command)
        self.add_command(self.synthesize_command)

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            result = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
            code = result if isinstance(result, int) else EXIT_SUCCESS
        except click.ClickException as exc:
            exc.show()
            code = EXIT_USAGE
        except click.Abort:
            click.echo('Aborted!', err=True)
            code = EXIT_USAGE
        except (DataError, OSError) as exc:
            click.secho(f'error: {exc}', fg='red', err=True)
            code = EXIT_DATA

        if standalone_mode:
            sys.exit(code)

        return code

    # ~ prepare

    @click.command('prepare', short_help='segment, tokenize and vectorize a collection into a store.')
    @click.option('--collection', required=True, type=click.Path(exists=True),
                  help='folder of "<id>.txt" files or a JSON-lines file of {"id", "text"} records.')
    @click.option('--presegmented', type=click.Path(exists=True), default=None,
                  help='JSON-lines file of sentence offsets, which replaces the rule based segmentation.')
    @click.option('--doc-qrels', type=click.Path(exists=True), default=None,
                  help='document qrels to store alongside the collection.')
    @click.option('--sent-qrels', type=click.Path(exists=True), default=None,
                  help='sentence qrels to store alongside the collection.')
    @click.option('--passages', type=click.Path(exists=True), default=None,
                  help='relevant passages from which the sentence qrels are derived.')
    @click.option('--out', required=True, type=click.Path(), help='the store folder.')
    @click.pass_obj
    def prepare_command(self,
                        collection: str,
                        presegmented: t.Optional[str],
                        doc_qrels: t.Optional[str],
                        sent_qrels: t.Optional[str],
                        passages: t.Optional[str],
                        out: str,
                        ) -> None:
        """
        Reads the [bold cyan]--collection[/], splits every document into sentences and computes the
        tf-idf vectors of all the documents and sentences. The result is saved as a store into the
        [bold cyan]--out[/] folder, which the [bold]run[/] command reads.
        """
        if sent_qrels and passages:
            raise click.UsageError('--sent-qrels and --passages can not be used together')

        parameters = {'collection': collection, 'presegmented': presegmented, 'doc_qrels': doc_qrels,
                      'sent_qrels': sent_qrels, 'passages': passages}
        with Archive(out, command='prepare', parameters=parameters) as archive:
            segmenter = SegmenterConfig(mode='presegmented' if presegmented else 'rules')
            offsets = read_presegmented(presegmented) if presegmented else None
            corpus = ingest_documents(
                read_documents(collection),
                segmenter,
                presegmented=offsets,
                name=os.path.basename(os.path.normpath(out)),
                logger=archive.logger,
            )
            vocabulary, space = FeatureSpace.build(corpus)
            archive.log(f'vocabulary of {len(vocabulary)} terms over {len(space)} union items')

            doc_labels = load_qrels(doc_qrels, DOCUMENT) if doc_qrels else None
            sent_labels = load_qrels(sent_qrels, SENTENCE) if sent_qrels else None
            if passages:
                sent_labels = derive_sentence_qrels_from_passages(load_passages(passages), corpus,
                                                                  logger=archive.logger)

            stats = None
            if doc_labels is not None and sent_labels is not None:
                sent_labels = propagate_nonrelevant(doc_labels, corpus, sent_labels)
                stats = corpus_stats(corpus, doc_labels, sent_labels)
                rich.print(stats_table(stats))

            save_store(out, corpus, vocabulary, space, doc_labels, sent_labels, stats, logger=archive.logger)
            archive['statistics'] = corpus.statistics()
            archive['statistics/terms'] = len(vocabulary)

    # ~ label-sentences

    @click.command('label-sentences', short_help='derive and propagate sentence qrels of a store.')
    @click.option('--collection', required=True, type=click.Path(exists=True, file_okay=False),
                  help='the store folder created by "prepare".')
    @click.option('--doc-qrels', type=click.Path(exists=True), default=None,
                  help='document qrels, by default the ones of the store.')
    @click.option('--passages', type=click.Path(exists=True), default=None,
                  help='relevant passages "topic doc_id start end".')
    @click.option('--sent-qrels', type=click.Path(exists=True), default=None,
                  help='existing sentence qrels that only need the propagation.')
    @click.option('--out', default=None, type=click.Path(),
                  help='output folder, by default the store itself.')
    @click.pass_obj
    def label_sentences_command(self,
                                collection: str,
                                doc_qrels: t.Optional[str],
                                passages: t.Optional[str],
                                sent_qrels: t.Optional[str],
                                out: t.Optional[str],
                                ) -> None:
        """
        Labels a sentence relevant if it overlaps with a relevant passage of [bold cyan]--passages[/]
        (or takes the labels of [bold cyan]--sent-qrels[/]) and labels all the sentences of
        documents that are not relevant as non-relevant. Writes the sentence qrels together with the
        label statistics and the histogram of the position of the first relevant sentence.
        """
        if bool(passages) == bool(sent_qrels):
            raise click.UsageError('exactly one of --passages and --sent-qrels is required')

        out = out or collection
        parameters = {'collection': collection, 'doc_qrels': doc_qrels, 'passages': passages,
                      'sent_qrels': sent_qrels}
        store = load_store(collection)
        doc_labels = load_qrels(doc_qrels, DOCUMENT) if doc_qrels else store.doc_qrels
        if doc_labels is None:
            raise DataError(f'the store {collection} has no document qrels, pass --doc-qrels')

        with Archive(out, command='label-sentences', parameters=parameters) as archive:
            if passages:
                sent_labels = derive_sentence_qrels_from_passages(load_passages(passages), store.collection,
                                                                  logger=archive.logger)
            else:
                sent_labels = load_qrels(sent_qrels, SENTENCE)

            sent_labels = propagate_nonrelevant(doc_labels, store.collection, sent_labels)
            sent_labels.write(os.path.join(out, SENT_QRELS_FILE))
            if out != collection or doc_qrels:
                doc_labels.write(os.path.join(out, DOC_QRELS_FILE))

            stats = corpus_stats(store.collection, doc_labels, sent_labels)
            write_stats(out, stats)
            rich.print(stats_table(stats))
            archive['statistics/sentence_labels'] = len(sent_labels)

    # ~ run

    @click.command('run', short_help='simulate the feedback strategies on a prepared store.')
    @click.option('--manifest', type=click.Path(exists=True, dir_okay=False), default=None,
                  help='JSON run manifest, the other options override its values.')
    @click.option('--collection', type=click.Path(), default=None, help='the store folder.')
    @click.option('--topics', type=click.Path(), default=None,
                  help='JSON-lines file of {"topic", "statement"} records.')
    @click.option('--topic-ids', default=None, help='comma separated subset of the topics to run.')
    @click.option('--strategies', default=None, callback=validate_strategies,
                  help='comma separated strategy codes or "all".')
    @click.option('--seed', type=click.INT, default=None, help='the base seed of all runs.')
    @click.option('--budget', default=None, callback=validate_budget,
                  help='judgment budget per run such as "4R+1000" or "500".')
    @click.option('--lambda-grid', default=None, callback=validate_lambda_grid,
                  help='lambda grid recorded for the evaluation, such as "0:1:0.05".')
    @click.option('--iterations', type=click.IntRange(min=1), default=None,
                  help='Pegasos iterations per training.')
    @click.option('--doc-qrels', type=click.Path(), default=None, help='overrides the store document qrels.')
    @click.option('--sent-qrels', type=click.Path(), default=None, help='overrides the store sentence qrels.')
    @click.option('--workers', type=click.IntRange(min=1), default=None,
                  help='number of processes for independent runs.')
    @click.option('--out', type=click.Path(), default=None, help='the output folder.')
    @click.pass_obj
    def run_command(self,
                    manifest: t.Optional[str],
                    collection: t.Optional[str],
                    topics: t.Optional[str],
                    topic_ids: t.Optional[str],
                    strategies: t.Optional[t.List[str]],
                    seed: t.Optional[int],
                    budget: t.Optional[str],
                    lambda_grid: t.Optional[str],
                    iterations: t.Optional[int],
                    doc_qrels: t.Optional[str],
                    sent_qrels: t.Optional[str],
                    workers: t.Optional[int],
                    out: t.Optional[str],
                    ) -> None:
        """
        Executes one simulation run for every combination of topic and strategy and writes one run
        log per run into the "runs" sub folder of [bold cyan]--out[/], together with the effective
        manifest and a summary of all runs.
        """
        try:
            run_manifest = RunManifest.load(
                manifest,
                config=self.config,
                collection=collection,
                topics=topics,
                topic_ids=[value.strip() for value in topic_ids.split(',')] if topic_ids else None,
                strategies=strategies,
                seed=seed,
                budget=budget,
                lambda_grid=lambda_grid,
                iterations=iterations,
                doc_qrels=doc_qrels,
                sent_qrels=sent_qrels,
                workers=workers,
                out=out,
            )
        except ValueError as exc:
            if isinstance(exc, DataError):
                raise
            raise click.BadParameter(str(exc))

        for key in ('collection', 'topics', 'out'):
            if not getattr(run_manifest, key):
                raise click.UsageError(f'missing option "--{key}" (neither given nor in the manifest)')
        if not os.path.exists(run_manifest.topics):
            raise DataError(f'topic file {run_manifest.topics} does not exist')

        store = load_store(run_manifest.collection)
        doc_labels, _ = resolve_qrels(store, run_manifest.doc_qrels, run_manifest.sent_qrels)
        statements = read_topics(run_manifest.topics)
        topic_list = run_manifest.topic_ids or list(statements)
        missing = [topic for topic in topic_list if topic not in statements]
        if missing:
            raise TopicMismatchError('topics without a statement in the topic file', missing)

        with Archive(run_manifest.out, command='run', parameters=run_manifest.to_dict()) as archive:
            run_manifest.write(os.path.join(archive.path, MANIFEST_FILE))
            runs_path = os.path.join(archive.path, RUNS_FOLDER)
            os.makedirs(runs_path, exist_ok=True)

            settings = SimulationSettings(
                lam=run_manifest.lam,
                iterations=run_manifest.iterations,
                random_negatives=run_manifest.random_negatives,
                negative_pool=run_manifest.negative_pool,
                batch_growth=run_manifest.batch_growth,
                score_workers=run_manifest.score_workers,
            )
            seeds = derive_run_seeds(run_manifest.seed, topic_list, run_manifest.strategy_codes)
            tasks = []
            for topic in topic_list:
                num_relevant = doc_labels.num_relevant(topic)
                if num_relevant == 0:
                    archive.log(f'topic {topic} has no relevant document, its recall will be undefined')

                for strategy in run_manifest.strategy_codes:
                    tasks.append({
                        'topic': topic,
                        'statement': statements[topic],
                        'strategy': strategy.code,
                        'seed': seeds[(topic, strategy.code)],
                        'budget': run_manifest.budget_expression.evaluate(num_relevant),
                        'R': num_relevant,
                        'runs_path': runs_path,
                    })

            archive.log(f'executing {len(tasks)} runs with {run_manifest.workers} worker(s)')
            initargs = (run_manifest.collection, run_manifest.doc_qrels, run_manifest.sent_qrels, settings)
            if run_manifest.workers > 1:
                with ProcessPoolExecutor(max_workers=run_manifest.workers,
                                         initializer=init_worker, initargs=initargs) as executor:
                    rows = list(executor.map(execute_run, tasks))
            else:
                init_worker(*initargs)
                _WORKER['simulation'].logger = archive.logger
                self.config.data['progress_logger'] = archive.logger
                try:
                    rows = [execute_run(task) for task in tasks]
                finally:
                    self.config.data.pop('progress_logger', None)

            archive.commit_frame(SUMMARY_FILE, pd.DataFrame(rows, columns=[
                'topic', 'strategy', 'R', 'budget', 'judgments', 'E_sent', 'relevant_found',
            ]))
            archive['runs'] = len(rows)

    # ~ eval

    @click.command('eval', short_help='recall tables, gain curves and strategy comparisons of runs.')
    @click.option('--runs', required=True, multiple=True, type=click.Path(exists=True, file_okay=False),
                  help='output folder of "run" or any folder containing run logs. Repeat it to evaluate '
                       'several datasets together.')
    @click.option('--doc-qrels', multiple=True, type=click.Path(exists=True),
                  help='document qrels, once per --runs. By default the ones of the store the runs were made on.')
    @click.option('--strategies', default=None, callback=validate_strategies,
                  help='restrict the evaluation to these strategy codes.')
    @click.option('--lambda-grid', default=None, callback=validate_lambda_grid,
                  help='lambda values of the sweep, such as "0:1:0.05".')
    @click.option('--recall-a', default=None, callback=validate_numbers, help='the values of a in aR+b.')
    @click.option('--recall-b', default=None, callback=validate_numbers, help='the values of b in aR+b.')
    @click.option('--comparisons', default=None, callback=validate_pairs,
                  help='strategy pairs to compare, such as "ddd:sdd,ddd:dsd".')
    @click.option('--dataset', multiple=True, help='the dataset names in the recall table, once per --runs.')
    @click.option('--out', required=True, type=click.Path(), help='the output folder.')
    @click.pass_obj
    def eval_command(self,
                     runs: t.Tuple[str, ...],
                     doc_qrels: t.Tuple[str, ...],
                     strategies: t.Optional[t.List[str]],
                     lambda_grid: t.Optional[str],
                     recall_a: t.Optional[t.List[float]],
                     recall_b: t.Optional[t.List[float]],
                     comparisons: t.Optional[t.List[t.List[str]]],
                     dataset: t.Tuple[str, ...],
                     out: str,
                     ) -> None:
        """
        Evaluates the run logs of every [bold cyan]--runs[/] folder as one dataset: the recall at
        the effort levels aR+b for the effort models E_judge, E_0.5 and E_sent, the gain curves of
        every run, the confidence intervals of the compared strategy pairs and the sweep of lambda
        over the grid. The overall table averages the recall over the topics of all the datasets.
        """
        qrels_paths = paired_option(doc_qrels, len(runs), '--doc-qrels')
        names = paired_option(dataset, len(runs), '--dataset')
        datasets = [load_eval_dataset(runs_path, qrels_path, name, strategies, self.config)
                    for runs_path, qrels_path, name in zip(runs, qrels_paths, names)]

        names = [data.name for data in datasets]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise click.UsageError(f'several runs folders have the dataset name {", ".join(duplicates)}, '
                                   f'name them with --dataset')

        # settings that are not given come from the manifest of the first runs folder
        run_manifest = datasets[0].manifest
        grid = parse_lambda_grid(lambda_grid or run_manifest.lambda_grid)
        a_values = recall_a or run_manifest.recall_a
        b_values = recall_b or run_manifest.recall_b
        pairs = [tuple(pair) for pair in comparisons or run_manifest.comparisons]
        for data in datasets:
            present = {code for _, code in data.index}
            for code in {code for pair in pairs for code in pair} - present:
                raise click.BadParameter(f'no run logs of strategy "{code}" in {data.runs_path} to compare',
                                         param_hint='--comparisons')

        parameters = {'runs': list(runs), 'datasets': names, 'lambda_grid': grid, 'recall_a': a_values,
                      'recall_b': b_values, 'comparisons': [list(pair) for pair in pairs],
                      'strategies': sorted({code for data in datasets for _, code in data.index})}
        with Archive(out, command='eval', parameters=parameters) as archive:
            archive.commit_json('sources.json', {
                data.name: {'runs': os.path.abspath(data.runs_path), 'run_logs': len(data.index),
                            'metadata': data.metadata}
                for data in datasets
            })

            tables, comparison_frames, sweep_frames = [], [], []
            for data in datasets:
                table = recall_table(data.index, data.doc_labels, a_values, b_values, DEFAULT_MODELS,
                                     dataset=data.name)
                tables.append(table)
                rich.print(recall_rich_table(table, title=f'mean recall of {data.name}'))

                write_gain_curves(os.path.join(archive.path, 'gain_curves', data.name), data.index, data.doc_labels)

                # paired comparisons need at least two topics
                data_pairs = pairs
                if len({topic for topic, _ in data.index}) < 2:
                    archive.log(f'only one topic of {data.name} was evaluated, its strategy comparisons are skipped')
                    data_pairs = []

                frame = comparison_table(data.index, data.doc_labels, data_pairs, a_values, b_values, DEFAULT_MODELS)
                frame.insert(0, 'dataset', data.name)
                comparison_frames.append(frame)

                rows = []
                for strategy_a, strategy_b in data_pairs:
                    for a in a_values:
                        sweep = lambda_sweep(data.index, data.doc_labels, strategy_a, strategy_b, a, grid)
                        rows += comparison_rows(sweep, strategy_a, strategy_b, a)
                frame = pd.DataFrame(rows, columns=COMPARISON_COLUMNS)
                frame.insert(0, 'dataset', data.name)
                sweep_frames.append(frame)

                archive[f'evaluated_runs/{data.name}'] = len(data.index)

            archive.commit_frame('recall_table.csv', combine_recall_tables(tables))
            overall = overall_table(tables)
            archive.commit_frame('overall_table.csv', overall)
            if len(datasets) > 1:
                rich.print(recall_rich_table(overall, title='overall mean recall'))

            archive.commit_frame('comparisons.csv', pd.concat(comparison_frames, ignore_index=True))
            archive.commit_frame('lambda_sweep.csv', pd.concat(sweep_frames, ignore_index=True))

    # ~ synthesize

    @click.command('synthesize', short_help='generate a synthetic collection with planted topics.')
    @click.option('--num-documents', type=click.IntRange(min=1), default=2000, show_default=True)
    @click.option('--num-topics', type=click.IntRange(min=1), default=10, show_default=True)
    @click.option('--relevant-fraction', type=click.FloatRange(min=0.0, max=1.0), default=0.1, show_default=True)
    @click.option('--seed', type=click.INT, default=1, show_default=True)
    @click.option('--out', required=True, type=click.Path(), help='the output folder.')
    @click.pass_obj
    def synthesize_command(self,
                           num_documents: int,
                           num_topics: int,
                           relevant_fraction: float,
                           seed: int,
                           out: str,
                           ) -> None:
        """
        Writes a synthetic collection (documents, topics, document and sentence qrels) into
        [bold cyan]--out[/], in the input formats of the [bold]prepare[/] and [bold]run[/] commands.
        """
        settings = SyntheticSettings(
            num_documents=num_documents,
            num_topics=num_topics,
            relevant_fraction=relevant_fraction,
            seed=seed,
        )
        corpus = generate_corpus(settings)
        paths = corpus.write(out)
        click.secho(f'wrote {len(corpus.documents)} documents and {len(corpus.topics)} topics to {out}')
        click.secho(f'mean position of the first relevant sentence: {corpus.mean_first_position:.2f}')
        for kind, path in paths.items():
            click.secho(f'  {kind:<12} {path}', fg='bright_black')


@click.group(cls=CLI)
@click.option("-v", "--version", is_flag=True, help='print the version and exit.')
@click.pass_context
def cli(ctx: click.Context,
        version: bool
        ) -> None:
    """Simulation of continuous active learning with sentence and document feedback."""
    ctx.obj = ctx.command

    if version:
        click.secho(get_version())
        ctx.exit(0)

    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


if __name__ == "__main__":
    cli()  # pragma: no cover
