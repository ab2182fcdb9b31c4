"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PipelineError):
    """Bad user input: malformed files, out-of-range values, invalid flags."""


class DataError(PipelineError):
    """Data that passed validation but cannot be processed (e.g. too few beats)."""
