"""Exceptions raised by the distillation simulator."""

__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"


class DistillationError(Exception):
    """Base class of all errors raised by this package."""

    pass


class DomainError(DistillationError, ValueError):
    """A parameter lies outside of its allowed domain."""

    pass


class InadmissibleStateError(DistillationError):
    """A state or covariance matrix violates the uncertainty relation."""

    pass


class DegenerateDecompositionError(DistillationError):
    """The state has no (r, T) channel decomposition (e.g. C = 1)."""

    pass


class EpsilonUndefinedError(DistillationError, ZeroDivisionError):
    """The epsilon parameter is undefined because its denominator vanishes."""

    pass


class SingularOperationError(DistillationError):
    """The operation and the state form a singular (unphysical) pair."""

    pass


class CutoffTooSmallError(DistillationError):
    """The population of the top Fock level exceeds the configured bound."""

    def __init__(self, leakage: float, bound: float, what: str = "state"):
        super().__init__(
            "Truncation leakage of {} is {:.3e} (bound {:.1e}); increase the"
            " cutoff".format(what, leakage, bound)
        )
        self.leakage = leakage
        self.bound = bound
        self.what = what

    def __reduce__(self):
        return (type(self), (self.leakage, self.bound, self.what))


class CutoffBudgetError(DistillationError):
    """A 4-mode contraction would exceed the configured entry budget."""

    pass


class ZeroWeightError(DistillationError):
    """A conditional operation succeeded with (numerically) zero weight."""

    def __init__(self, weight: float, floor: float, what: str = "operation"):
        super().__init__(
            "Success weight of {} is {:.3e}, below the floor {:.1e}".format(
                what, weight, floor
            )
        )
        self.weight = weight
        self.floor = floor
        self.what = what

    def __reduce__(self):
        return (type(self), (self.weight, self.floor, self.what))


class SymmetryViolationError(DistillationError):
    """The sigma matrix elements break the symmetric zero pattern."""

    def __init__(self, violations: dict):
        super().__init__(
            "Symmetric zero pattern violated: {}".format(
                ", ".join(
                    "{}={:.3e}".format(k, v) for k, v in violations.items()
                )
            )
        )
        self.violations = violations

    def __reduce__(self):
        return (type(self), (self.violations,))


class NoConvergenceError(DistillationError):
    """The asymptotic Gaussian state could not be determined."""

    pass


class NoRootInBracketError(DistillationError):
    """No q in the search bracket reaches the requested squeezing."""

    def __init__(self, message: str, sweep: list):
        super().__init__(message)
        #: list of (q, r_out) pairs, r_out is nan where undefined
        self.sweep = sweep

    def __reduce__(self):
        return (type(self), (str(self), self.sweep))


class UnsupportedFockNumberError(DistillationError, ValueError):
    """The closed-form filter action is only known for n = 0, 1, 2."""

    pass


class InvariantViolationError(DistillationError):
    """A protocol invariant (e.g. the squaring law) does not hold."""

    pass


class UsageError(DistillationError):
    """Invalid command line or configuration file input."""

    pass
