"""Exception types raised by the package."""


class DegenerateInputError(ValueError):
    """A polygon or map is too degenerate to work with (zero area, singular, ...)."""


class DomainError(ValueError):
    """A formula was evaluated outside the region where it is defined."""


class ConvergenceError(RuntimeError):
    """An iterative search stopped before reaching its tolerance."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


class LemmaViolation(RuntimeError):
    """The centroid of a body was found outside the 4/21-homothet of its inscribed hexagon."""


class ProofViolation(RuntimeError):
    """A containment the construction relies on failed to verify.

    ``failures`` lists ``(check, relative excess)`` pairs and
    ``certified_ratio`` is the best ratio the constructed maps do certify.
    """

    def __init__(self, message: str, trace=None, failures=(), certified_ratio=None):
        super().__init__(message)
        self.trace = trace
        self.failures = list(failures)
        self.certified_ratio = certified_ratio


class CertificationError(RuntimeError):
    """The bound certifier found a sample or critical point contradicting 69/17."""

    def __init__(self, message: str, locations=()):
        super().__init__(message)
        self.locations = list(locations)
