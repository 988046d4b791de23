"""Flow-matching lab: CFM pretraining, MLE fine-tuning, solvers, stability and error-bound checks."""

from ._core import *  # noqa: F401,F403
from ._core import ConfigError, DimensionError, NumericError, UnsupportedError  # noqa: F401
