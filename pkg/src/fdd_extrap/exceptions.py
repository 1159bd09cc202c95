"""Package-wide exception types.

Plain ``ValueError`` is used for bad arguments to individual functions;
these subclasses mark the coarser failure modes that callers (notably the
CLI) want to catch and report with context.
"""

__all__ = ["ConfigError", "ShapeError", "TrainingDivergedError"]


class ConfigError(ValueError):
    """A configuration object or file is inconsistent; the message names the
    offending field."""


class ShapeError(ValueError):
    """A tensor's shape does not match what a network layer expects; the
    message names the layer and both shapes."""


class TrainingDivergedError(RuntimeError):
    """The training loss became non-finite; the message names the epoch,
    batch, and learning rate."""
