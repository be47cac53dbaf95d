"""Surrogate-based optimization toolkit: optimizers, benchmarks and case studies."""

from ._sbopt import *  # noqa: F401,F403
from ._sbopt import __version__
