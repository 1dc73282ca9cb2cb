"""Exception types shared across the toolkit."""


class ParameterError(ValueError):
    """An argument or configuration value violates a documented precondition."""


class CorpusError(ValueError):
    """A corpus or embedding file is malformed.

    Carries the 1-based line number of the offending record when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ModelFormatError(ValueError):
    """A model file is truncated, has the wrong version, or is inconsistent."""


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss."""
