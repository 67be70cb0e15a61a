"""Exception hierarchy shared by every module of the engine."""


class EngineError(Exception):
    """Base class for all recoverable engine errors."""


class InsufficientData(EngineError):
    pass


class InvalidPrice(EngineError):
    pass


class DegenerateSeries(EngineError):
    """Series has zero variance or yields a singular regression."""


class AlignmentError(EngineError):
    pass


class NumericalSingularity(EngineError):
    pass


class ParameterDomainError(EngineError):
    """ARMA parameters outside the stationary/invertible region."""


class NonConvergence(EngineError):
    def __init__(self, message, fit=None):
        super().__init__(message)
        self.fit = fit


class SearchFailed(EngineError):
    pass


class SingularDesign(EngineError):
    pass


class NotComputable(EngineError):
    """A table entry could not be computed (empty or degenerate period)."""


class SchemaError(EngineError):
    pass


class ParseError(EngineError):
    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class UnsortedDates(ParseError):
    pass


class DuplicateDate(EngineError):
    pass


class NoOverlap(EngineError):
    pass


class IoError(EngineError):
    pass


class ConfigError(EngineError):
    pass
