"""Solver and certifier for relative equilibria of flat and curved n-body problems."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
