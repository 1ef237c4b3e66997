"""Exception hierarchy shared by all gridcast modules.

Two broad groups matter for the CLI exit codes: DataError (exit 2) for
anything wrong with inputs or dataset handling, TrainingError (exit 3)
for failures inside a model fit.
"""


class GridcastError(Exception):
    """Base class for all gridcast errors."""


class DataError(GridcastError):
    """Problems with input data, files or ranges."""


class MalformedRecord(DataError):
    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class UnknownColumn(DataError):
    pass


class AllMissing(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class DegenerateRange(DataError):
    pass


class EmptyRange(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class ShapeMismatch(DimensionMismatch):
    pass


class TooFewForecasts(DataError):
    pass


class InsufficientValidation(DataError):
    pass


class MismatchedEnsembles(DataError):
    pass


class IoError(DataError):
    pass


class TrainingError(GridcastError):
    """Problems during a model fit."""


class SingularNormalEquations(TrainingError):
    pass


class NoFeasibleOrder(TrainingError):
    pass


class InsufficientHistory(TrainingError):
    pass


class EmptyDataset(TrainingError):
    pass


class SingularSystem(TrainingError):
    pass


class NonFiniteObjective(TrainingError):
    """Objective or gradients went non-finite. Carries the loss trace
    collected up to the abort, when the caller recorded one."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []


class NonFiniteGradient(TrainingError):
    pass


class StepTrainingError(TrainingError):
    """A per-horizon-step subproblem failed; wraps the cause with its step."""

    def __init__(self, step, cause):
        super().__init__(f"training failed at horizon step {step}: {cause}")
        self.step = step
        self.cause = cause
