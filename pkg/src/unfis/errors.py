"""Exception hierarchy.

Each error carries a short ``category`` used by the CLI to pick an exit code
and to print a one-line machine-parsable message.
"""


class UnfisError(Exception):
    category = "error"
    exit_code = 1


class InvalidParameterError(UnfisError, ValueError):
    category = "invalid-parameter"
    exit_code = 2


class ShapeError(UnfisError, ValueError):
    category = "shape"
    exit_code = 2


class DegenerateFiringError(UnfisError, ArithmeticError):
    """All rule firing strengths of a sample are zero."""

    category = "degenerate-firing"
    exit_code = 4

    def __init__(self, sample):
        self.sample = sample
        super().__init__(f"all firing strengths vanished for sample {sample}")


class GradientOverflowError(UnfisError, ArithmeticError):
    category = "gradient-overflow"
    exit_code = 4

    def __init__(self, block):
        self.block = block
        super().__init__(f"non-finite Jacobian entries in parameter block '{block}'")


class SolverError(UnfisError, ArithmeticError):
    category = "solver"
    exit_code = 5


class DivergenceError(UnfisError, ArithmeticError):
    category = "divergence"
    exit_code = 4

    def __init__(self, iteration, repetition=None):
        self.iteration = iteration
        self.repetition = repetition
        where = f"iteration {iteration}"
        if repetition is not None:
            where = f"repetition {repetition}, " + where
        super().__init__(f"training loss became non-finite at {where}")


class IngestionError(UnfisError, ValueError):
    category = "ingestion"
    exit_code = 3

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        if row is not None or column is not None:
            message = f"{message} (row={row}, column={column})"
        super().__init__(message)


class InfeasibleClusteringError(UnfisError, ValueError):
    category = "infeasible-clustering"
    exit_code = 3


class EmptyEvaluationError(UnfisError, ValueError):
    category = "empty-evaluation"
    exit_code = 3


class UndefinedMetricError(UnfisError, ValueError):
    category = "undefined-metric"
    exit_code = 3


class PersistenceError(UnfisError, OSError):
    category = "io"
    exit_code = 6
