"""Exception types for figure rendering.

All three are ``ValueError`` subclasses so callers that do not care about
the distinction can catch the base class; the CLI reports each with the
spec file it came from and exits with status 2.
"""

__all__ = ["DataError", "SchemaError", "SpecError"]


class SpecError(ValueError):
    """A figure-spec JSON object is malformed; the message names the
    offending key."""


class SchemaError(ValueError):
    """A result CSV does not carry the columns the spec references; the
    message lists the expected and the found column names."""


class DataError(ValueError):
    """A result CSV is readable but holds no usable rows for the spec
    (empty body, no rows for the requested metric, or values that do not
    parse as numbers)."""
