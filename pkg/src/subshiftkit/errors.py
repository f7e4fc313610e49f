"""Error classes shared by every module.

Each class carries the process exit code the command line front end uses
when the error escapes a subcommand.
"""


class SubshiftError(Exception):
    exit_code = 1


class CapacityError(SubshiftError):
    """A computation would exceed a configured size limit."""

    exit_code = 2


class ConstraintViolation(SubshiftError, ValueError):
    """A schedule or parameter breaks a structural inequality."""

    exit_code = 3


class BadInput(SubshiftError, ValueError):
    """Malformed or out-of-range input."""

    exit_code = 4
