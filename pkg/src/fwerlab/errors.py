"""Exception types raised by fwerlab."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class MatrixValidationError(ValueError):
    """A correlation matrix failed validation.

    ``check`` names the failed test (``"square"``, ``"symmetry"``,
    ``"diagonal"``, ``"range"``, ``"psd"``) and ``indices`` lists the
    offending entries.
    """

    def __init__(self, check, message, indices=()):
        super().__init__(f"{check}: {message}")
        self.check = check
        self.indices = list(indices)


class SamplerRefusal(ValueError):
    """The configured sampler refuses the problem size."""


class ConvergenceError(ArithmeticError):
    """Adaptive quadrature did not reach tolerance.

    The best available estimate and its error bound are kept on the
    exception so callers can decide whether to use them anyway.
    """

    def __init__(self, message, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
