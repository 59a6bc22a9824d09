"""Exception taxonomy.

Every error the library raises deliberately derives from StaOpenError so
callers (and the CLI exit-code mapping) can distinguish library failures
from programming errors.
"""


class StaOpenError(Exception):
    """Base class for all library errors."""


class ValidationError(StaOpenError):
    """Malformed or out-of-range user input (configs, parameters)."""


class NotHermitian(StaOpenError):
    """Operator expected to be Hermitian exceeds the defect tolerance."""


class InvalidState(StaOpenError):
    """Density matrix violates positivity, trace, or Hermiticity bounds."""


class DegenerateSpectrum(StaOpenError):
    """Instantaneous eigenvalue gap too small; eigenbasis tracking undefined."""


class OutOfRange(StaOpenError):
    """Time argument outside the trajectory domain."""


class AmbiguousMatching(StaOpenError):
    """Eigenbasis jumped between samples; no overlap above threshold."""


class VanishingEigenvalue(StaOpenError):
    """An occupied eigenvalue fell below the rank tolerance (rates diverge)."""


class NotTracePreserving(StaOpenError):
    """Sum of eigenvalue rates exceeds the trace-preservation tolerance."""


class InvalidProbability(StaOpenError):
    """Eigenvalue schedule produced a nonpositive or nonfinite weight."""


class GapClosure(StaOpenError):
    """Two-level splitting collapsed; closed-form basis undefined."""


class MissingTarget(StaOpenError):
    """Operation needs a target schedule that was not supplied."""


class DegenerateU(StaOpenError):
    """Boltzmann factor u = exp(-beta*hbar*omega) left the open interval (0, 1)."""


class TruncationTooSmall(StaOpenError):
    """Fock cutoff cannot hold the endpoint thermal states' tails."""


class ShapeMismatch(StaOpenError):
    """Operator dimensions disagree."""


class GridMismatch(StaOpenError):
    """Records or trajectories evaluated on different time grids."""
