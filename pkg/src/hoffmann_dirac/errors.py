"""Exception hierarchy shared by all modules."""


class HoffmannDiracError(Exception):
    """Base class for every fault raised by the package."""


class DomainError(HoffmannDiracError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ConfigError(HoffmannDiracError, ValueError):
    """A run configuration is malformed or incomplete."""


class InfiniteEnergyError(HoffmannDiracError):
    """A defining integral of the model diverges.

    ``endpoint`` names the offending end of the integration range
    (``"0"`` or ``"infinity"``).
    """

    def __init__(self, message, endpoint=None):
        super().__init__(message)
        self.endpoint = endpoint


class SmallnessError(HoffmannDiracError):
    """The mass-to-charge ratio is too large for the background to exist."""

    def __init__(self, message, lhs=None, rhs=None):
        super().__init__(message)
        self.lhs = lhs
        self.rhs = rhs


class HorizonError(HoffmannDiracError):
    """A closed-form Reissner-Nordstrom profile would contain a horizon."""


class RangeError(HoffmannDiracError, ValueError):
    """A coordinate lies outside the tabulated range of a profile."""


class NotInGapError(HoffmannDiracError, ValueError):
    """A spectral parameter lies outside the open gap (-1, 1)."""


class StiffnessError(HoffmannDiracError):
    """The adaptive integrator could not take an acceptable step."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ProbeInconclusiveError(HoffmannDiracError):
    """A diagnostic fit was too poor to support a conclusion."""


class EigenvalueNotFoundError(HoffmannDiracError):
    """The requested eigenvalue does not lie in the searched part of the gap."""

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class ConvergenceError(HoffmannDiracError):
    """An eigenvalue search produced internally inconsistent counts."""


class SupercriticalError(HoffmannDiracError, ValueError):
    """Coupling too strong for the closed-form Dirac-Coulomb levels."""
