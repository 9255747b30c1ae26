"""Exception hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI maps it to:
0 success, 1 usage, 2 input/parse, 3 degeneracy, 4 internal invariant
violation.
"""


class DelripsError(Exception):
    exit_code = 4


class UsageError(DelripsError):
    exit_code = 1


class InputError(DelripsError):
    """Bad input data: parse errors, invalid indices, unsupported sizes."""

    exit_code = 2


class ResourceError(InputError):
    """Requested computation exceeds a configured budget."""


class UnsupportedError(InputError):
    """Valid input, but the requested feature does not cover it."""


class DegeneracyError(DelripsError):
    """Exact geometric degeneracy with symbolic perturbation disabled."""

    exit_code = 3

    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = tuple(points)


class ContractError(DelripsError):
    """An API precondition was violated by the caller."""

    exit_code = 4


class InternalError(DelripsError):
    """An internal invariant failed; indicates a bug or a degeneracy leak."""

    exit_code = 4
