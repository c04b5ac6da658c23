"""Shared exception types."""


class DomainError(ValueError):
    """An argument violates a documented precondition."""


class NonConvergenceError(RuntimeError):
    """Adaptive quadrature exhausted its refinement budget.

    Carries the best available partial result so callers can report it.
    """

    def __init__(self, message, value=float("nan"), error_estimate=float("inf"),
                 evaluations=0):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.evaluations = evaluations
