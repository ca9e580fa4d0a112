"""QF-CUSUM change-point testing for high-dimensional linear models."""

from ._qfcusum import *  # noqa: F401,F403
from ._qfcusum import __doc__  # noqa: F401

__version__ = "0.1.0"
