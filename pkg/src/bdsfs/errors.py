"""Exception types raised by the simulators and the verification harness."""


class BdsfsError(Exception):
    """Base class for all package errors."""


class EventCapExceeded(BdsfsError):
    """A simulation performed more events than the configured cap."""


class RejectionBudgetExceeded(BdsfsError):
    """Conditioning on ``N_T >= n`` needed more attempts than allowed."""


class HeightTie(BdsfsError):
    """Two branch heights of a coalescent tree are exactly equal."""


class DuplicateValues(BdsfsError):
    """A vector expected to have distinct entries contains a tie."""


class ConditionViolated(BdsfsError):
    """The (n, T) pair of an experiment violates the growth condition."""


class QuadratureNotConverged(BdsfsError):
    """Adaptive quadrature did not reach the requested tolerance."""
