"""Zero-shot action recognition with attribute-predicted Gaussian class models."""

from ._zsar import *  # noqa: F401,F403
from ._zsar import __doc__  # noqa: F401

__version__ = "0.1.0"
