"""Encountered-type haptic display simulator.

Thin wrapper over the C++ library: intention weights, proxy and robot
steps, walker trials, omega sweeps and scenario files.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
