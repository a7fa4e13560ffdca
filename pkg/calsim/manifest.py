"""
The run manifest: the complete configuration of a set of simulation runs as a JSON file.
"""
import re
import json
import math
import copy
import typing as t
from dataclasses import dataclass, field, asdict

from calsim.config import Config
from calsim.engine import ALL_STRATEGIES
from calsim.engine import StrategyCode
from calsim.utils import BudgetError
from calsim.utils import DataError
from calsim.utils import CustomJsonEncoder
from calsim.utils import derive_seed

BUDGET_PATTERN = re.compile(r'^\s*(?:(?P<a>\d+(?:\.\d+)?)?\s*R\s*(?:\+\s*(?P<b>\d+(?:\.\d+)?))?|(?P<absolute>\d+))\s*$')


@dataclass(frozen=True)
class BudgetExpression:
    """
    A judgment budget of the form a * R + b. A plain integer budget has a = 0.
    """
    a: float
    b: float
    text: str

    def evaluate(self, num_relevant: int) -> int:
        return int(math.ceil(self.a * num_relevant + self.b - 1e-9))

    def __str__(self) -> str:
        return self.text


def parse_budget(text: t.Union[str, int]) -> BudgetExpression:
    """
    Parses the budget expressions "<a>R+<b>", "<a>R", "R+<b>", "R" or a plain integer.

    .. code-block:: python

        parse_budget('4R+1000').evaluate(50)  # 1200

    :raises BudgetError: If the text is not a valid budget expression
    """
    text = str(text)
    match = BUDGET_PATTERN.match(text)
    if not match:
        raise BudgetError(f'invalid budget expression "{text}", expected for example "4R+1000" or "500"')

    if match.group('absolute') is not None:
        return BudgetExpression(0.0, float(match.group('absolute')), text.strip())

    a = float(match.group('a')) if match.group('a') is not None else 1.0
    b = float(match.group('b')) if match.group('b') is not None else 0.0
    return BudgetExpression(a, b, text.strip())


def parse_lambda_grid(text: str) -> t.List[float]:
    """
    Parses either a range "start:stop:step" (stop included if the steps reach it) or a comma separated list of
    lambda values. All values have to be within [0, 1].

    .. code-block:: python

        len(parse_lambda_grid('0:1:0.05'))  # 21

    """
    text = str(text).strip()
    if ':' in text:
        try:
            start, stop, step = (float(value) for value in text.split(':'))
        except ValueError:
            raise ValueError(f'invalid lambda grid "{text}", expected "start:stop:step"')
        if step <= 0 or stop < start:
            raise ValueError(f'invalid lambda grid "{text}"')

        # the stop value is only part of the grid if the step reaches it
        count = math.floor((stop - start) / step + 1e-9) + 1
        grid = [round(start + index * step, 10) for index in range(count)]
    else:
        grid = [float(value) for value in text.split(',') if value.strip()]

    for value in grid:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f'lambda value {value} of the grid is outside of [0, 1]')

    return grid


def parse_strategies(codes: t.Union[str, t.Sequence[str]]) -> t.List[StrategyCode]:
    """
    Parses a comma separated string or a list of strategy codes. The string "all" stands for the
    eight strategies in their canonical order.
    """
    if isinstance(codes, str):
        if codes.strip() == 'all':
            return list(ALL_STRATEGIES)
        codes = [code.strip() for code in codes.split(',') if code.strip()]

    return [StrategyCode.parse(code) for code in codes]


def parse_pairs(text: t.Union[str, t.Sequence[t.Sequence[str]]]) -> t.List[t.Tuple[str, str]]:
    """
    Parses strategy comparison pairs "ddd:sdd,ddd:dsd" into a list of (strategy A, strategy B).
    """
    if isinstance(text, str):
        text = [pair.split(':') for pair in text.split(',') if pair.strip()]

    pairs = []
    for pair in text:
        if len(pair) != 2:
            raise ValueError(f'invalid strategy pair "{":".join(pair)}", expected "<a>:<b>"')
        pairs.append((StrategyCode.parse(pair[0].strip()).code, StrategyCode.parse(pair[1].strip()).code))

    return pairs


@dataclass
class RunManifest:
    """
    All the settings of ``calsim run`` and ``calsim eval``. Values that are not given in the
    manifest file or on the command line are taken from the config defaults, so that the manifest
    written to the output folder is always complete.
    """
    collection: str = ''
    topics: str = ''
    out: str = ''
    # empty qrels paths mean the qrels that were saved into the store by "prepare"
    doc_qrels: str = ''
    sent_qrels: str = ''
    strategies: t.List[str] = field(default_factory=lambda: [s.code for s in ALL_STRATEGIES])
    topic_ids: t.List[str] = field(default_factory=list)
    seed: int = 1
    budget: str = '4R+1000'
    lambda_grid: str = '0:1:0.05'
    lam: float = 1e-4
    iterations: int = 200_000
    random_negatives: int = 100
    negative_pool: str = 'unlabeled'
    batch_growth: int = 10
    recall_a: t.List[float] = field(default_factory=lambda: [1, 2, 4])
    recall_b: t.List[float] = field(default_factory=lambda: [0, 100, 1000])
    comparisons: t.List[t.List[str]] = field(default_factory=lambda: [['ddd', 'sdd']])
    workers: int = 1
    score_workers: int = 1

    def __post_init__(self):
        self.strategies = [strategy.code for strategy in parse_strategies(self.strategies)]
        self.comparisons = [list(pair) for pair in parse_pairs(self.comparisons)]
        parse_budget(self.budget)
        parse_lambda_grid(self.lambda_grid)

    @property
    def strategy_codes(self) -> t.List[StrategyCode]:
        return parse_strategies(self.strategies)

    @property
    def budget_expression(self) -> BudgetExpression:
        return parse_budget(self.budget)

    @property
    def grid(self) -> t.List[float]:
        return parse_lambda_grid(self.lambda_grid)

    @classmethod
    def from_config(cls, config: Config) -> 'RunManifest':
        return cls(
            seed=config.get('seed'),
            budget=config.get('budget'),
            lambda_grid=config.get('lambda_grid'),
            lam=config.get('lambda'),
            iterations=config.get('iterations'),
            random_negatives=config.get('random_negatives'),
            negative_pool=config.get('negative_pool'),
            batch_growth=config.get('batch_growth'),
            score_workers=config.get('score_workers'),
            recall_a=list(config.get('recall_a')),
            recall_b=list(config.get('recall_b')),
        )

    @classmethod
    def load(cls,
             path: t.Optional[str] = None,
             config: t.Optional[Config] = None,
             **overrides,
             ) -> 'RunManifest':
        """
        Creates the manifest from the config defaults, updated with the content of the JSON file
        at ``path`` (if given) and finally with the ``overrides`` that are not None.

        :raises DataError: If the manifest file is not valid JSON or contains unknown keys
        """
        values = asdict(cls.from_config(config or Config()))
        if path is not None:
            try:
                with open(path) as file:
                    content = json.load(file)
            except json.JSONDecodeError as exc:
                raise DataError(f'{path}: invalid manifest JSON ({exc.msg})')

            unknown = set(content) - set(values)
            if unknown:
                raise DataError(f'{path}: unknown manifest keys {", ".join(sorted(unknown))}')
            values.update(content)

        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    def write(self, path: str) -> None:
        with open(path, mode='w') as file:
            json.dump(self.to_dict(), file, indent=4, sort_keys=True, cls=CustomJsonEncoder)


def derive_run_seeds(seed: int, topics: t.Sequence[str], strategies: t.Sequence[StrategyCode]) -> t.Dict[t.Tuple[str, str], int]:
    """
    Returns the derived seed of every (topic, strategy) run, see ``utils.derive_seed``.
    """
    return {
        (topic, strategy.code): derive_seed(seed, topic, strategy.code)
        for topic in topics
        for strategy in strategies
    }
