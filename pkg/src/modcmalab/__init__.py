"""Modular CMA-ES laboratory.

A configurable CMA-ES with eleven module dimensions, a seeded benchmark
suite, fixed-target anytime performance scoring (AOC), an iterated-racing
tuner and CSV reporting, so that the contribution of a new algorithmic
module can be assessed in interplay with the existing ones.
"""

from .benchmarks import FUNCTION_IDS, make_instance
from .config import Configuration, ConfigurationError
from .core import run
from .metrics import RunTrace, aoc, default_targets, ecdf, hitting_time
from .parameters import default_parameters
from .tuner import build_space, iterated_race, race, verify

__all__ = [
    "Configuration", "ConfigurationError", "FUNCTION_IDS", "RunTrace",
    "aoc", "build_space", "default_parameters", "default_targets", "ecdf",
    "hitting_time", "iterated_race", "make_instance", "race", "run", "verify",
]

__version__ = "0.1.0"
