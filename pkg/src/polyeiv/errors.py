"""Exception types raised by the test pipeline."""


class EIVError(Exception):
    """Base class for failures of the errors-in-variables pipeline."""

    #: bootstrap resample index when raised inside the resampling loop
    resample = None


class DegenerateDesignError(EIVError):
    """The moment matrix of the latent covariate is numerically singular."""


class DegenerateCdfError(EIVError):
    """The deconvolved distribution function is flat on the support."""


class DegenerateVarianceError(EIVError):
    """Estimated latent-covariate variance is not positive."""


class InsufficientReplicationError(EIVError):
    """No replicate group has two or more measurements."""


class UnsupportedOperationError(EIVError):
    """Operation is not available for this noise model."""
