"""Delayed-acceptance pseudo-marginal random walk Metropolis toolkit."""

from damh._core import *  # noqa: F401,F403
from damh._core import __doc__  # noqa: F401
