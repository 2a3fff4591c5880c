"""Exception hierarchy shared by every qprobe module."""


class QProbeError(ValueError):
    """Base class for all qprobe errors."""


class DimensionError(QProbeError):
    """Operands live in spaces of different dimension."""


class ValidationError(QProbeError):
    """An input violates the invariant of its type."""


class DensityValidationError(ValidationError):
    """A candidate density operator fails one of its defining properties.

    ``prop`` names the first violated property: one of ``"square"``,
    ``"self_adjoint"``, ``"positive"``, ``"unit_trace"``, ``"w2_le_w"``.
    """

    def __init__(self, prop, message):
        super().__init__(f"{prop}: {message}")
        self.prop = prop


class ZeroProbabilityError(QProbeError):
    """Conditioning on an outcome that has probability zero."""


class SingularPropagatorError(QProbeError):
    """Free amplitude requested between coincident points."""


class GeometryError(ValidationError):
    """Invalid slit geometry."""


class StabilityError(QProbeError):
    """Norm drift beyond tolerance during wave-function propagation."""
