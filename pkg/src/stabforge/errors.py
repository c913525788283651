"""Exception types shared across the library."""


class StabforgeError(Exception):
    """Base class for all library errors."""


class NotStable(StabforgeError):
    """Phase data was requested for an object that is not stable."""


class UnsupportedObject(StabforgeError):
    """A formal object lies outside the domain of the requested operation."""


class RearrangementBlocked(StabforgeError):
    """A required phase swap lacks its extension-vanishing certificate."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotAdmissible(StabforgeError):
    """More than one factor of a product tuple is geometric."""


class InvalidPhaseStep(StabforgeError):
    """A phase step below 1 reached a constructive operation."""


class SupportViolated(StabforgeError):
    """|Z| >= C * ||class|| failed for a stable generator."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InconsistentData(StabforgeError):
    """Recovery input is not affine in the multi-index."""


class ZeroClass(StabforgeError):
    """The zero class was passed where a nonzero one is required."""


class QuadratureNotConverged(StabforgeError):
    """Node doubling failed to stabilise a contour integral."""


class FlowSingular(StabforgeError):
    """A descent path approached z = 0 without Re W decreasing."""


class NonMonotone(StabforgeError):
    """Re W failed to decrease along a descent path."""


class TrackingLost(StabforgeError):
    """Continuation steps exceeded the saddle separation."""


class StepCollapse(StabforgeError):
    """The tracer stalled near the essential singularity."""


class ConfigInvalid(StabforgeError):
    """A scenario configuration failed schema validation."""


class IOFailure(StabforgeError):
    """A report or CSV output could not be written."""
