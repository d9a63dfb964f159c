"""Filippov geodesics of Lipschitz semi-Riemannian metrics."""

from ._core import *  # noqa: F401,F403
from ._core import LipgeoError, __doc__  # noqa: F401

__version__ = "0.1.0"
