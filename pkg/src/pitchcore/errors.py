# pitchcore/errors.py


class PitchCoreError(Exception):
    """Base class for all errors raised by PitchCore."""
    pass


class ConfigError(PitchCoreError):
    """Custom exception raised for configuration-related issues."""
    pass


class EmptyInputError(PitchCoreError):
    """Raised when a signal is empty or shorter than one analysis window."""
    pass


class DomainError(PitchCoreError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""
    pass


class UndefinedMeasureError(PitchCoreError):
    """Raised when a lag measure is undefined (q_k = 0, empty C_k, zero variance)."""
    pass


class InsufficientDataError(PitchCoreError):
    """Raised when fewer than two aligned, voiced pitch pairs remain."""
    pass


class UndefinedCorrelationError(PitchCoreError):
    """Raised when a correlation is requested for a constant sequence."""
    pass


class UnsupportedFormatError(PitchCoreError):
    """Raised for WAV files PitchCore deliberately does not decode."""

    def __init__(self, field: str, value):
        super().__init__(f"Unsupported WAV {field}: {value!r}")
        self.field = field
        self.value = value


class MalformedFileError(PitchCoreError):
    """Raised when a file is truncated or its chunk structure is broken."""
    pass


class ContourParseError(PitchCoreError):
    """Raised for a malformed row in a contour CSV file."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class AlignmentError(PitchCoreError):
    """Raised when contours or lag curves cannot be aligned."""
    pass
