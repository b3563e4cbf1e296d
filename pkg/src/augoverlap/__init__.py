"""augoverlap: contrastive-learning generalization bounds, augmentation-graph
statistics, geometric overlap thresholds and unsupervised representation metrics."""

from . import auggraph, bounds, cli, data, errors, geomsim, losses, metrics, synth, trainer

__version__ = "0.1.0"

__all__ = [
    "auggraph",
    "bounds",
    "cli",
    "data",
    "errors",
    "geomsim",
    "losses",
    "metrics",
    "synth",
    "trainer",
    "__version__",
]
