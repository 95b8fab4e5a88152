"""Censored multi-venue exploration: Kaplan-Meier estimation, greedy allocation,
censored MLE venue models and a seeded venue simulator."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
