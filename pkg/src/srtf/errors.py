"""Exception hierarchy shared by every module.

CLI exit codes hang off these classes: usage problems exit with 1, bad
input data with 2 and numerical breakdowns with 3.
"""


class SrtfError(Exception):
    exit_code = 1


class InvalidArgumentError(SrtfError, ValueError):
    exit_code = 1


class DataFormatError(SrtfError, ValueError):
    """Malformed CSV or model document."""

    exit_code = 2


class UnsupportedVersionError(DataFormatError):
    pass


class NumericalError(SrtfError, ArithmeticError):
    exit_code = 3


class ColumnLimitError(NumericalError):
    """Raised when a least-squares state already has as many columns as rows."""


class RankDeficientError(NumericalError):
    pass


class DegenerateGeometryError(NumericalError):
    """Point configuration admits no shape parameter or no split direction."""
