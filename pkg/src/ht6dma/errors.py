"""Exception types raised across the package."""


class HT6DMAError(Exception):
    """Base class for all package errors."""

    code = "error"


class NonUnitInput(HT6DMAError, ValueError):
    code = "non_unit_input"


class UserInsideSphere(HT6DMAError, ValueError):
    code = "user_inside_sphere"


class NumericalFailure(HT6DMAError, ArithmeticError):
    code = "numerical_failure"


class Infeasible(HT6DMAError, RuntimeError):
    code = "infeasible"


class SolverStall(HT6DMAError, RuntimeError):
    """The SDP solver ran out of iterations before certifying the gap target.

    The best iterate found so far is attached so callers can still use it.
    """

    code = "solver_stall"

    def __init__(self, message, covariance=None, chi=None, gap=None):
        super().__init__(message)
        self.covariance = covariance
        self.chi = chi
        self.gap = gap


class ConfigError(HT6DMAError, ValueError):
    code = "config_error"
