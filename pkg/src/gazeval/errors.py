"""Exception hierarchy shared by all modules.

Exit codes follow the CLI contract: 1 validation, 2 data, 3 numeric.
"""


class GazevalError(Exception):
    exit_code = 1


class ValidationError(GazevalError):
    """Bad configuration, arguments, or call contract."""

    exit_code = 1


class DataError(GazevalError):
    """Malformed, inconsistent, or incomplete input data."""

    exit_code = 2


class NumericError(GazevalError):
    """Numerical failure: rank deficiency, non-convergence, degenerate input."""

    exit_code = 3
