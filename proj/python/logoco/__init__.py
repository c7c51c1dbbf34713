"""Self-mining and co-learning of logo detectors from weakly labelled web images."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
