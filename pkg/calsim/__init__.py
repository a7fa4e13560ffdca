"""Top-level package for calsim."""

__version__ = "0.1.0"

from calsim.engine import Simulation  # noqa
from calsim.engine import StrategyCode  # noqa
from calsim.engine import ALL_STRATEGIES  # noqa
