import logging
import datetime
import typing as t

from calsim.config import Config
from calsim.plugin import Plugin, hook
from calsim.work import NaiveProgressTracker


class ProgressPlugin(Plugin):
    """
    Reports the progress of every simulation run with one log line per batch: the batch index and
    size, the judgments spent out of the budget, the relevant items found so far and an estimate of
    the remaining time.

    The lines go to the logger that is set with the "progress_logger" key of the config data, which
    the "run" command points at the archive logger. Setting ``Config().data['progress'] = False``
    silences the plugin.
    """
    def __init__(self, config: Config):
        super().__init__(config)
        self.trackers: t.Dict[t.Tuple[str, str], NaiveProgressTracker] = {}

    def active(self, config: Config) -> t.Optional[logging.Logger]:
        if not config.data.get('progress', True):
            return None

        return config.data.get('progress_logger')

    @hook('simulation_started', priority=0)
    def simulation_started(self, config: Config, state):
        tracker = NaiveProgressTracker(total_work=state.budget)
        tracker.start()
        self.trackers[(state.topic_id, state.strategy.code)] = tracker

    @hook('simulation_batch_finished', priority=0)
    def simulation_batch_finished(self, config: Config, state, records):
        tracker = self.trackers.get((state.topic_id, state.strategy.code))
        if tracker is None:
            return

        tracker.update(len(records))
        logger = self.active(config)
        if logger is not None:
            logger.info(
                f'{state.topic_id} {state.strategy.code} | batch {state.batch_index:3d} '
                f'B={len(records):<5d} | judged {state.cum_e_judge}/{state.budget} '
                f'({tracker.fraction:.0%}) | relevant {state.relevant_found} | '
                f'eta {datetime.timedelta(seconds=int(tracker.remaining_time))}'
            )

    @hook('simulation_finished', priority=0)
    def simulation_finished(self, config: Config, state, log):
        self.trackers.pop((state.topic_id, state.strategy.code), None)
        logger = self.active(config)
        if logger is not None:
            logger.info(f'{state.topic_id} {state.strategy.code} | finished with {len(log)} judgments, '
                        f'{log.e_sent} sentences read, {state.relevant_found} relevant')
