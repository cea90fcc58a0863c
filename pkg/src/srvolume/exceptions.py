"""Exception hierarchy shared by all modules.

CLI exit codes are attached to the three top-level categories so the
front end can map any failure to a status without inspecting messages.
"""


class SrVolumeError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class ParseError(SrVolumeError, ValueError):
    """Malformed input text (expressions, constants, JSON)."""

    exit_code = 2

    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = f"{source}: " if source else ""
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{prefix}{message}{suffix}")


class ValidationError(SrVolumeError, ValueError):
    """Input parsed fine but violates a precondition."""

    exit_code = 3


class CheckFailure(SrVolumeError):
    """A verification check ran and did not pass."""

    exit_code = 1


# -- algebra
class DegenerateStructure(ValidationError):
    pass


class NotBracketGenerating(ValidationError):
    pass


class UnsupportedDimension(ValidationError):
    pass


class Inconsistent(ValidationError):
    pass


class EigenvalueNotSimple(ValidationError):
    pass


# -- group / geodesics
class DimensionMismatch(ValidationError):
    pass


class WZero(ValidationError):
    pass


class IntegratorFailure(SrVolumeError):
    pass


class NoConvergence(SrVolumeError):
    pass


# -- volume / regularity / oracle
class QuadratureBudgetExceeded(SrVolumeError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class NonTransversal(ValidationError):
    pass


class MemoryBudget(ValidationError):
    pass
