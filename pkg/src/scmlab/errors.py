"""Exception hierarchy.

Every error raised by the library derives from :class:`LabError`. The CLI
maps the three families (validation, numeric, parse) to distinct exit codes.
"""


class LabError(Exception):
    """Base class for all library errors."""


class ValidationError(LabError, ValueError):
    """A model, scenario or argument violates a structural constraint."""


class CyclicGraph(ValidationError):
    pass


class DuplicateDefinition(ValidationError):
    pass


class NonPsdCovariance(ValidationError):
    pass


class UnknownParent(ValidationError):
    pass


class UnknownVariable(ValidationError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return Exception.__str__(self)


class MissingNoiseDraw(ValidationError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class DescendantInConditioningSet(ValidationError):
    pass


class LatentNotInOutcomeEquation(ValidationError):
    pass


class UnknownPreset(ValidationError):
    pass


class NumericError(LabError, ArithmeticError):
    """A computation is undefined for the given inputs."""


class SingularDesign(NumericError):
    pass


class WeakInstrument(NumericError):
    pass


class InsufficientObservations(NumericError):
    pass


class UnsupportedTransform(NumericError):
    pass


class DegenerateArm(NumericError):
    pass


class EmptySample(NumericError):
    pass


class ReplicationFailure(NumericError):
    """Too many Monte Carlo replications raised numeric errors."""


class ParseError(LabError):
    """A scenario file could not be parsed; carries a line/column location."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)
