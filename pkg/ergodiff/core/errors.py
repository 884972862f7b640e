"""Exception hierarchy and process exit codes"""

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class ErgodiffError(Exception):
    """Base class for toolkit errors"""

    exit_code = EXIT_USAGE


class FieldDefinitionError(ErgodiffError, ValueError):
    """Malformed or unknown drift field definition"""


class ConfigError(ErgodiffError, ValueError):
    """Invalid run configuration"""


class NumericalError(ErgodiffError, ArithmeticError):
    """A numerical procedure could not produce a result"""

    exit_code = EXIT_NUMERICAL


class NumericalExplosionError(NumericalError):
    """A trajectory left the guard radius"""

    def __init__(self, message: str, explosion_time: float | None = None):
        super().__init__(message)
        self.explosion_time = explosion_time


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge"""


class SingularityError(NumericalError, ValueError):
    """A closed-form field was evaluated at its singular point"""
