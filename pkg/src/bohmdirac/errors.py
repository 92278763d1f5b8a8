"""Exception and warning types shared across the package."""


class BohmDiracError(Exception):
    """Base class for all package-specific errors."""


class NullLeafPoint(BohmDiracError):
    """Leaf slope |df/dx| too close to 1; the unit normal is undefined there."""


class NoMatch(BohmDiracError):
    """Reparametrization search could not bring the sup-residual under tolerance."""


class DegenerateMode(BohmDiracError):
    """k = m = 0 plane-wave mode; the eigenspinors are not defined."""


class BadQuadrature(BohmDiracError):
    """Mode grid too coarse to represent a packet."""


class ArityMismatch(BohmDiracError):
    """Number of events does not match the particle count of the wave."""


class NodeError(BohmDiracError):
    """Configuration too close to a wave-function node; the velocity is undefined.

    Carries the leaf parameter ``t`` at which the node was hit.
    """

    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"wave-function node at t={t!r}")


class RankError(BohmDiracError):
    """Pulled-back current form numerically zero (node); no kernel direction."""


class EnvelopeError(BohmDiracError):
    """Rejection-sampling envelope repeatedly violated."""


class ScenarioError(BohmDiracError):
    """Unusable scenario file (unknown names, windows out of range, bad types)."""


class QuadratureWarning(UserWarning):
    """Quadrature error estimate exceeded the requested tolerance."""
