"""Finite-dimensional quantum probability toolkit: projector lattices,
density operators, unitary dynamics, amplitude rules, bipartite systems and
a sliced path-integral propagator."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DensityValidationError,
    DimensionError,
    GeometryError,
    QProbeError,
    SingularPropagatorError,
    StabilityError,
    ValidationError,
    ZeroProbabilityError,
)
from .linalg import Projector, commutes, decomposition_identity_holds, join, meet, orthocomplement  # noqa: E402
from .probability import DensityOperator, MaximalTest, born, measure, trace_rule, update  # noqa: E402
from .dynamics import UnitaryPropagator, compose, propagator  # noqa: E402
from .rules import SequenceExperiment, SlitGeometry, rule_a, rule_b, two_slit  # noqa: E402
from .composite import BipartiteVector, esw_experiment, schmidt  # noqa: E402
from .pathint import Grid1D, gaussian_packet, propagate, schrodinger_reference, slice_kernel  # noqa: E402
