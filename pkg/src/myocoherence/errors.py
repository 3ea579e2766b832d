"""Exception hierarchy shared by all pipeline stages.

Every error raised by this package derives from :class:`MyocoherenceError`,
split into configuration/usage problems (:class:`ConfigError`) and problems
with the data itself (:class:`DataError`).  The CLI maps these onto exit
codes 1 and 2 respectively.
"""


class MyocoherenceError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(MyocoherenceError):
    """Invalid configuration value or unusable parameter combination."""


class DataError(MyocoherenceError):
    """Base class for problems with input data."""


class FormatError(DataError):
    """A byte stream or text file does not conform to its declared format."""


class TruncatedFileError(FormatError):
    """A binary read ran past the end of the input.

    Carries the byte offset at which the bounded read failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class MissingFieldError(DataError):
    """A required variable or column is absent from the input."""


class ShapeError(DataError):
    """An array has the wrong number of rows, columns, or dimensions."""


class StructuralError(DataError):
    """Label streams or trial collections violate a structural invariant."""


class MissingTrialsError(StructuralError):
    """One or more (gesture, repetition) combinations are absent.

    ``pairs`` lists the absent combinations.
    """

    def __init__(self, pairs):
        self.pairs = sorted(pairs)
        listed = ", ".join(f"(gesture {g}, repetition {r})" for g, r in self.pairs)
        super().__init__(f"missing {len(self.pairs)} trial(s): {listed}")


class SegmentTooShortError(DataError):
    """A labeled trial span is too short for spectral analysis."""


class SignalLengthError(DataError):
    """A signal is too short, or two signals disagree in length."""


class SampleRateMismatchError(DataError):
    """Two signals that must share a sample rate do not."""


class DegenerateChannelError(DataError):
    """A channel has zero variance, so z-scoring is undefined."""


class FilterDesignError(ConfigError):
    """Filter parameters outside the designable range."""
