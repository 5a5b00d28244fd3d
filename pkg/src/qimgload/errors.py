"""Error classes shared across the pipeline.

The CLI maps each class to a distinct exit code, so raise the most
specific one that applies.
"""


class InputFormatError(ValueError):
    """Malformed or unsupported input data (bad PGM header, ragged CSV, ...)."""


class ValidationError(ValueError):
    """Structurally valid input that violates a precondition (wrong size, non-unitary gate, ...)."""


class NumericError(ArithmeticError):
    """Numerical failure (zero norm, non-finite environment, SVD breakdown)."""
