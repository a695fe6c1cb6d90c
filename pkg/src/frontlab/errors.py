"""Exception and warning types shared across the package."""

__all__ = [
    "ConfigError",
    "ExtrapolationWarning",
    "FitOutOfBracket",
    "FlowSingular",
    "FrontTooClose",
    "InterfaceExtinction",
    "MonotonicityViolation",
    "NewtonStall",
    "NoFront",
    "ProjectionAmbiguous",
    "ResolutionWarning",
    "SelfIntersection",
    "StabilityViolation",
    "StepSizeRejected",
]


class StepSizeRejected(RuntimeError):
    """Phase-flow step produced a negative component beyond roundoff."""


class FlowSingular(RuntimeError):
    """Manifold trace is not a graph over the chosen coordinate."""


class NewtonStall(RuntimeError):
    """Damped Newton failed to reduce the residual for too many steps."""


class MonotonicityViolation(RuntimeError):
    """A profile required to be monotone is not."""


class NoFront(RuntimeError):
    """Classifier sign never changes; there is no interface to extract."""


class StabilityViolation(RuntimeError):
    """Field left the invariant box or became non-finite."""


class FrontTooClose(ValueError):
    """Initial front violates the required clearance from the boundary."""


class InterfaceExtinction(RuntimeError):
    """Shrinking interface vanished before the requested end time.

    Carries the partial radius history as ``partial`` (list of (t, R)).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


class SelfIntersection(RuntimeError):
    """Evolving polyline stopped being simple."""


class ProjectionAmbiguous(RuntimeError):
    """Normal ray met the comparison front more than once in the band."""


class FitOutOfBracket(RuntimeError):
    """Optimal translate shift left the allowed search window."""


class ConfigError(ValueError):
    """Experiment configuration is malformed or inconsistent."""


class ExtrapolationWarning(UserWarning):
    """Classifier evaluated outside the sampled span of the curve."""


class ResolutionWarning(UserWarning):
    """Grid spacing too coarse to resolve the requested layer width."""
