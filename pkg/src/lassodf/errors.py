"""Exception hierarchy.

Two families matter to callers: configuration problems (bad input, bad flags)
and numerical problems (factorizations failing, degenerate weights).  The CLI
maps them to distinct exit codes.
"""


class LassoDfError(Exception):
    """Base class for all package errors."""


class ConfigError(LassoDfError):
    """Invalid user-supplied configuration."""


class CsvParseError(ConfigError):
    """Input table could not be parsed."""


class NumericalError(LassoDfError):
    """A numerical routine could not produce a trustworthy answer."""


class NotPositiveDefinite(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class Singular(NumericalError):
    pass


class ConstantColumn(NumericalError):
    def __init__(self, column: int):
        super().__init__(f"column {column} is constant")
        self.column = column


class DegenerateWeight(NumericalError):
    def __init__(self, index: int, value: float):
        super().__init__(
            f"least-squares magnitude {value:.3g} at index {index} is too small "
            "to form a weight")
        self.index = index
        self.value = value


class InactiveGroupRequested(NumericalError):
    pass


class NegativeDiscriminant(NumericalError):
    pass


class InsufficientDof(NumericalError):
    pass


class DegenerateQuantiles(NumericalError):
    def __init__(self, column: int, distinct: int, levels: int):
        super().__init__(
            f"column {column} has {distinct} distinct values, need {levels}")
        self.column = column


class DiscontinuityDetected(NumericalError):
    def __init__(self, coordinate: int, gap: float):
        super().__init__(
            f"one-sided derivatives differ by {gap:.3g} at coordinate {coordinate}")
        self.coordinate = coordinate
        self.gap = gap


class FitterFailure(NumericalError):
    def __init__(self, replicate: int, cause: BaseException | None = None):
        super().__init__(f"fitter failed on replicate {replicate}: {cause}")
        self.replicate = replicate
        self.cause = cause
