"""Exception hierarchy shared by the library and the CLI."""


class FJError(Exception):
    """Base class for every error raised by fjdyn."""


class NetworkError(FJError, ValueError):
    """Invalid influence network input."""


class DimensionMismatch(NetworkError):
    pass


class NonStochasticRow(NetworkError):
    def __init__(self, row, total):
        self.row = row
        self.total = total
        super().__init__(f"row {row} of W sums to {total!r}, not 1")


class OutOfRangeEntry(NetworkError):
    def __init__(self, where, value):
        self.where = where
        self.value = value
        super().__init__(f"{where} = {value!r} lies outside [0, 1]")


class NumericalError(FJError):
    """The requested quantity does not exist or could not be computed."""


class SingularSystem(NumericalError):
    pass


class NonConvergent(NumericalError):
    pass


class EigensolverFailure(NumericalError):
    pass


class GainOutOfRange(FJError, ValueError):
    pass


class PreconditionViolated(FJError):
    pass


class ScenarioError(FJError):
    """Problem with a scenario file; ``field`` is a dotted/indexed path."""

    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class ParseError(ScenarioError):
    pass


class ValidationError(ScenarioError):
    pass
