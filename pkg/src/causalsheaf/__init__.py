"""Causal functions, history spaces and empirical models with exact arithmetic."""

from .orders import *  # noqa: F401,F403
from .histories import *  # noqa: F401,F403
from .functions import *  # noqa: F401,F403
from .topology import *  # noqa: F401,F403
from .empirical import *  # noqa: F401,F403
from .io import *  # noqa: F401,F403
from .scenarios import *  # noqa: F401,F403
from . import lp  # noqa: F401

__version__ = "0.1.0"
