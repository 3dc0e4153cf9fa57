"""Exception hierarchy shared by the whole package."""


class TomographyError(Exception):
    """Base class for all errors raised by qutrit_tomo."""


class NonHermitianInput(TomographyError):
    """A matrix expected to be Hermitian failed the symmetry check."""


class InvalidSimplexPoint(TomographyError):
    """A probability vector is negative or does not sum to one."""


class DegenerateFrame(TomographyError):
    """The chosen bases do not span the traceless operator space (rank < 8)."""


class InconsistentProbabilities(TomographyError):
    """A per-basis probability triple does not sum to one within tolerance."""


class InfeasibleRegionSuspected(TomographyError):
    """Gradient ascent on the minimum eigenvalue failed to reach feasibility."""


class RegionTooSmall(TomographyError):
    """Both rejection and importance sampling exhausted their proposal budget."""


class DegenerateFutureMeasurement(TomographyError):
    """A future basis carries no new information (det V = 0)."""


class EnsembleTooSmall(TomographyError):
    """More than half of the ensemble draws failed to produce an estimate."""


class ConfigError(TomographyError):
    """Invalid benchmark configuration (bad field, path, or combination)."""
