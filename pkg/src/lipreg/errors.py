"""Exception types shared across the package."""


class DataError(ValueError):
    """Invalid input data: bad labels, broken metric, malformed files."""


class InvalidMetricError(DataError):
    """Distance data violates metric axioms (or is non-finite/negative)."""


class BudgetExhaustedError(RuntimeError):
    """The solver hit its iteration budget without reaching relaxed feasibility."""
