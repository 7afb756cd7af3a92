"""Spin-1 molecular qubit workbench. All quantities are SI (Hz, T, s)."""

from ._core import *  # noqa: F401,F403
from ._core import IoError, NumericalError, ValidationError, __doc__  # noqa: F401

__version__ = "0.1.0"
