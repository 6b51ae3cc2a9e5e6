"""Differentially private graph generation toolkit.

Train link-reconstruction graph models (variational, optionally
GAN-regularized) under edge-level differential privacy, sample
synthetic graphs from the released generator, and measure both global
structure retention and resistance to link-reconstruction attacks.
"""

__version__ = "0.1.0"

from .graphs import Graph  # noqa: F401
from .training import TrainConfig, train_ggan, train_gvae  # noqa: F401
from .dp import DpConfig  # noqa: F401
