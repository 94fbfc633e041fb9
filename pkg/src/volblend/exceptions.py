"""Exception hierarchy shared across the package."""


class VolblendError(Exception):
    """Base class for all package-specific errors."""


class DataError(VolblendError):
    """Malformed, inconsistent, or insufficient input data."""


class ConfigError(VolblendError):
    """Invalid pipeline configuration."""


class ParameterError(VolblendError):
    """Model or distribution parameters violate their constraints."""


class NumericalError(VolblendError):
    """A numerical procedure produced non-finite or degenerate results."""


class ConvergenceError(NumericalError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class PipelineStageError(VolblendError):
    """Failure inside a named pipeline stage; wraps the original error."""

    def __init__(self, stage: str, original: BaseException):
        super().__init__(f"stage '{stage}' failed: {original}")
        self.stage = stage
        self.original = original
