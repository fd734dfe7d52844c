"""Exception types shared across the pipeline."""


class CrecError(Exception):
    """Base class for all pipeline errors."""


class NotARepository(CrecError):
    pass


class EmptyRepository(CrecError):
    pass


class UnknownCommit(CrecError):
    pass


class TooFewSamples(CrecError):
    pass


class WindowUnavailable(CrecError):
    pass


class RangeViolation(CrecError):
    """A computed feature fell outside its documented range (internal bug signal)."""


class DegenerateData(CrecError):
    pass


class InsufficientNegatives(CrecError):
    pass


class TooSmall(CrecError):
    pass


class TooFewProjects(CrecError):
    pass


class MissingInput(CrecError):
    pass


class ConfigError(CrecError):
    pass


class FormatVersionMismatch(CrecError):
    pass


class ParseError(CrecError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number
