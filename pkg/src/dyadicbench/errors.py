"""Exception types raised by the workbench."""


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class ConfigError(WorkbenchError, ValueError):
    """Invalid model configuration or mismatched configurations."""


class LevelRangeError(WorkbenchError, ValueError):
    pass


class DepthError(WorkbenchError, ValueError):
    pass


class PositivityError(WorkbenchError, ValueError):
    pass


class IntegrabilityError(WorkbenchError, ValueError):
    pass


class UnsupportedExponentError(WorkbenchError, ValueError):
    pass


class DomainError(WorkbenchError, ValueError):
    pass


class DegenerateMeasureError(WorkbenchError, ValueError):
    pass


class ConsistencyError(WorkbenchError, RuntimeError):
    """An internal invariant failed; indicates a bug rather than bad input."""


class SparsenessError(WorkbenchError, ValueError):
    """A generated family failed sparseness verification."""

    def __init__(self, violation):
        super().__init__(str(violation))
        self.violation = violation
