from typing import List, Optional, Sequence


class RedpsError(Exception):
    """Base class for all errors raised by redps."""


class OutOfDomainError(RedpsError, ValueError):
    """A cumulant generating function was evaluated outside its domain."""

    def __init__(self, value, bound, message: Optional[str] = None):
        self.value = value
        self.bound = bound
        super().__init__(message or f"Argument {value} is outside the domain (must exceed {bound})")


class TiltSolveError(RedpsError, ArithmeticError):
    """The tilt equation grad mu(s) = y could not be solved."""

    def __init__(self, last_iterate, residual: float, iterations: int):
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"Tilt solve did not converge after {iterations} iterations "
            f"(last iterate {last_iterate}, residual {residual:.3e})"
        )


class QpIterationError(RedpsError, RuntimeError):
    """The active-set loop ran out of iterations before reaching optimality."""

    def __init__(self, message: str, trace: Sequence):
        self.trace = list(trace)
        super().__init__(f"{message} ({len(self.trace)} iterations recorded)")


class MaxPointsError(RedpsError, RuntimeError):
    def __init__(self, max_points: int):
        self.max_points = max_points
        super().__init__(
            f"Dominating-point search reached max_points={max_points} without exhausting the set; "
            "raise max_points or lower the stopping threshold C"
        )


class QuadratureError(RedpsError, ArithmeticError):
    def __init__(self, message: str, achieved_error: float):
        self.achieved_error = achieved_error
        super().__init__(f"{message} (achieved relative error {achieved_error:.3e})")


class VacuousBoundError(RedpsError, ValueError):
    """The discrepancy bound is undefined because epsilon <= n * p_tilde_2."""

    def __init__(self, epsilon: float, n_p_tilde_2: float):
        self.epsilon = epsilon
        self.n_p_tilde_2 = n_p_tilde_2
        super().__init__(f"Bound vacuous: epsilon={epsilon} <= n*p_tilde_2={n_p_tilde_2:.3e}")


class ConfigError(RedpsError, ValueError):
    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("Invalid configuration: " + "; ".join(self.errors))
