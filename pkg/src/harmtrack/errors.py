"""Exception hierarchy shared by every harmtrack module."""


class HarmtrackError(Exception):
    """Base class for all errors raised by harmtrack."""


class EmptyInputError(HarmtrackError, ValueError):
    pass


class InvalidSignalError(HarmtrackError, ValueError):
    pass


class InvalidStructureError(HarmtrackError, ValueError):
    pass


class InvalidParamsError(HarmtrackError, ValueError):
    pass


class FrequencyOutOfRangeError(HarmtrackError, ValueError):
    pass


class UnderdeterminedModelError(HarmtrackError, ValueError):
    pass


class RankDeficiencyError(HarmtrackError, ValueError):
    pass


class InvalidSegmentLengthError(HarmtrackError, ValueError):
    pass


class InvalidFFTSizeError(HarmtrackError, ValueError):
    pass


class InitializationError(HarmtrackError, ValueError):
    pass


class DivergenceError(HarmtrackError, ArithmeticError):
    """Raised when the descent produces a non-finite loss/gradient or leaves
    the admissible frequency domain.

    ``iteration`` is 1-based; ``segment`` is filled in by the tracker.
    """

    def __init__(self, message: str, iteration: int, segment: int | None = None):
        self.iteration = iteration
        self.segment = segment
        self.detail = message
        super().__init__(self._format())

    def _format(self) -> str:
        where = f"iteration {self.iteration}"
        if self.segment is not None:
            where = f"segment {self.segment}, {where}"
        return f"{self.detail} ({where})"

    def at_segment(self, segment: int) -> "DivergenceError":
        return DivergenceError(self.detail, self.iteration, segment)


class ConfigError(HarmtrackError, ValueError):
    """Configuration problem tied to a named key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class CSVFormatError(HarmtrackError, ValueError):
    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")
