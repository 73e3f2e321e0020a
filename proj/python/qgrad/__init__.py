"""Lattice-sampling gradient and Hessian estimation."""

from ._qgrad import *  # noqa: F401,F403
from ._qgrad import __doc__  # noqa: F401
