"""Exception hierarchy.

Every error carries a stable ``name`` (its class name) so the command line
front end can report it in machine-readable form. Errors are grouped by the
exit code the CLI maps them to: validation failures (2) and numerical
failures (3).
"""


class TeichError(Exception):
    """Base class for all package errors."""

    exit_code = 1

    @property
    def name(self):
        return type(self).__name__


class ValidationError(TeichError, ValueError):
    exit_code = 2


class NumericalError(TeichError, ArithmeticError):
    exit_code = 3


# flat surfaces
class UnmatchedEdge(ValidationError):
    pass


class VectorMismatch(ValidationError):
    pass


class NonPositiveArea(ValidationError):
    pass


class SimplePoleAngle(ValidationError):
    pass


class InvalidConeAngle(ValidationError):
    """Total angle at a vertex class is not a multiple of pi."""


# deformation
class ChartOverlap(ValidationError):
    pass


class NotATorus(ValidationError):
    pass


# Beltrami calculus
class NotAdmissible(ValidationError):
    pass


class DegenerateJacobian(ValidationError):
    pass


class NotInverse(ValidationError):
    pass


# solver
class NoConvergence(NumericalError):
    pass


class DegenerateDerivative(NumericalError):
    pass


# operator families
class IllConditioned(NumericalError):
    pass


class KernelDimensionJump(ValidationError):
    pass
