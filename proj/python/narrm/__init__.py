"""Interference prediction (NARNN + Levenberg-Marquardt) and finite-blocklength
resource allocation. Thin wrapper over the compiled core."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
