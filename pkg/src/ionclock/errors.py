"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so commands can be scripted
against reliably: validation problems, failed solves, and scan-range
problems are distinguishable without parsing stderr.
"""


class IonClockError(Exception):
    """Base class for all package errors."""


class ValidationError(IonClockError):
    """Bad input: out-of-domain parameter, malformed config or file."""


class NoMagicFrequencyError(ValidationError):
    """The differential scalar polarisability is non-negative, so no RF
    drive frequency cancels the micromotion shifts."""


class CoincidentIonsError(ValidationError):
    """Two ions (nearly) coincide; Coulomb terms are singular."""


class GeometryError(ValidationError):
    """Operation requires a trap geometry the configuration does not have."""


class CompensationSignError(ValidationError):
    """Compensation-beam tensor polarisability has the wrong sign to cancel
    the RF-induced shift."""


class ConvergenceError(IonClockError):
    """Solver did not reach the force tolerance; carries the best state."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ScanRangeError(IonClockError):
    """A scan grid does not bracket the feature it is looking for."""


class OracleInstabilityError(IonClockError):
    """Time-domain integration blew up (unstable drive parameters or step)."""
