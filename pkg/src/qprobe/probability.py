"""Density operators, the trace rule, measurement statistics and state update."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .errors import DensityValidationError, DimensionError, ValidationError, ZeroProbabilityError
from .linalg import (
    EPS_EIG,
    EPS_HERM,
    EPS_IDEM,
    EPS_ORTH,
    Projector,
    as_operator,
    as_projector,
    as_vector,
    check_same_dim,
    dagger,
    eig_hermitian,
    fix_phase,
    frame_is_orthonormal,
    is_normalized,
    max_abs,
)
from .sampling import random_unitary

EPS_TRACE = 1e-10
EPS_PROB = 1e-9


def clamp_probability(p: float, tol: float = EPS_PROB) -> float:
    """Clip float noise in [-tol, 0) and (1, 1+tol] onto [0, 1].

    Anything further outside [0, 1] is a logic error, not rounding.
    """
    p = float(p)
    if p < -tol or p > 1.0 + tol:
        raise ValidationError(f"probability {p!r} outside [0, 1] beyond tolerance {tol}")
    return min(max(p, 0.0), 1.0)


def classical_probability(point, subset: Callable[[object], bool] | set) -> float:
    """Trivial point algorithm: 1 if the state point has the property, else 0."""
    inside = subset(point) if callable(subset) else point in subset
    return 1.0 if inside else 0.0


def density_violation(a) -> str | None:
    """Name of the first density-operator property ``a`` violates, or None."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        return "square"
    if max_abs(m - dagger(m)) > EPS_HERM:
        return "self_adjoint"
    w = np.linalg.eigvalsh(0.5 * (m + dagger(m)))
    if w.min() < -EPS_EIG:
        return "positive"
    if abs(np.trace(m).real - 1.0) > EPS_TRACE:
        return "unit_trace"
    if np.min(w - w**2) < -EPS_EIG:
        return "w2_le_w"
    return None


_MESSAGES = {
    "square": "operator is not a non-empty square matrix",
    "self_adjoint": "operator is not self-adjoint",
    "positive": "operator has a negative eigenvalue",
    "unit_trace": "trace differs from 1",
    "w2_le_w": "W - W^2 has a negative eigenvalue",
}


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, w) -> "DensityOperator":
        w = as_vector(w)
        if not is_normalized(w):
            raise ValidationError("state vector is not normalized")
        return cls(np.outer(w, np.conj(w)))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def from_spectrum(cls, eigenvalues, frame) -> "DensityOperator":
        f = np.asarray(frame, dtype=complex)
        return validate_density((f * np.asarray(eigenvalues)) @ dagger(f))


def validate_density(a) -> DensityOperator:
    """Accept ``a`` as a density operator or raise naming the violated property."""
    prop = density_violation(a)
    if prop is not None:
        raise DensityValidationError(prop, _MESSAGES[prop])
    m = np.array(a, dtype=complex)
    return DensityOperator(0.5 * (m + dagger(m)))


def as_density(w) -> DensityOperator:
    return w if isinstance(w, DensityOperator) else validate_density(w)


@dataclass(frozen=True)
class Pure:
    state: np.ndarray


@dataclass(frozen=True)
class Mixed:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def classify_purity(w) -> Pure | Mixed:
    """Pure (with its phase-fixed state vector) iff W² = W, else the spectrum."""
    m = as_density(w).matrix
    vals, vecs = eig_hermitian(m)
    if max_abs(m @ m - m) <= EPS_IDEM:
        return Pure(fix_phase(vecs[:, 0]))
    return Mixed(vals, vecs)


@dataclass(frozen=True)
class MaximalTest:
    """Complete test: one rank-1 outcome per vector of an orthonormal basis.

    ``basis`` holds the outcome vectors as columns.
    """

    basis: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        b = np.array(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise DimensionError("a maximal test needs a full square basis")
        if not frame_is_orthonormal(b, tol=EPS_ORTH):
            raise ValidationError("maximal-test basis is not orthonormal")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        labels = tuple(self.labels) or tuple(str(i) for i in range(b.shape[0]))
        if len(labels) != b.shape[0]:
            raise ValidationError("one label per outcome required")
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def projectors(self) -> list[Projector]:
        return [Projector(np.outer(c, np.conj(c)), 1) for c in self.basis.T]


@dataclass(frozen=True)
class OutcomeDistribution:
    labels: tuple
    probabilities: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if len(self.labels) != p.size:
            raise ValidationError("labels and probabilities differ in length")
        if abs(p.sum() - 1.0) > EPS_PROB:
            raise ValidationError(f"probabilities sum to {p.sum()!r}, not 1")
        p = np.array([clamp_probability(x) for x in p])
        p.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "probabilities", p)

    def __getitem__(self, label) -> float:
        return float(self.probabilities[self.labels.index(label)])

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.probabilities.tolist()))


def trace_rule(w, p) -> float:
    """Probability Tr(W P) of the outcome represented by projector ``p``."""
    w, p = as_density(w), as_projector(p)
    check_same_dim(w.matrix, p.matrix)
    t = np.trace(w.matrix @ p.matrix)
    if abs(t.imag) > EPS_HERM:
        raise ValidationError(f"Tr(WP) has imaginary part {t.imag!r}")
    return clamp_probability(t.real)


def born(v, w) -> float:
    """|<v|w>|² for normalized vectors."""
    v, w = as_vector(v), as_vector(w)
    check_same_dim(v, w)
    if not (is_normalized(v) and is_normalized(w)):
        raise ValidationError("Born rule needs normalized vectors")
    return clamp_probability(abs(np.vdot(v, w)) ** 2)


def check_complete_test(projectors: Sequence, tol: float = EPS_ORTH) -> list[Projector]:
    ps = [as_projector(p) for p in projectors]
    if not ps:
        raise ValidationError("a test needs at least one outcome")
    dim = check_same_dim(*(p.matrix for p in ps))
    for (i, a), (j, b) in combinations(enumerate(ps), 2):
        if max_abs(a.matrix @ b.matrix) > tol:
            raise ValidationError(f"outcomes {i} and {j} are not orthogonal")
    if max_abs(sum(p.matrix for p in ps) - np.eye(dim)) > tol:
        raise ValidationError("outcome projectors do not sum to the identity")
    return ps


def measure(w, test, labels: Sequence | None = None) -> OutcomeDistribution:
    """Outcome distribution of a complete test (projectors or a MaximalTest)."""
    if isinstance(test, MaximalTest):
        labels = test.labels if labels is None else labels
        test = test.projectors()
    ps = check_complete_test(test)
    w = as_density(w)
    labels = tuple(range(len(ps))) if labels is None else tuple(labels)
    return OutcomeDistribution(labels, np.array([trace_rule(w, p) for p in ps]))


@dataclass(frozen=True)
class FrameFunctionReport:
    trials: int
    max_deviation: float
    min_term: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= EPS_PROB and self.min_term >= -EPS_PROB


def frame_function_check(w, trials: int, seed=0) -> FrameFunctionReport:
    """Sum <a_i|W|a_i> over ``trials`` random orthonormal bases.

    Each sum must equal 1 and each term be non-negative: the probabilities of
    a maximal test add up to one whichever basis is measured. ``seed`` is an
    int or a ``numpy.random.Generator``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    m = as_density(w).matrix
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dev, lo = 0.0, np.inf
    for _ in range(trials):
        u = random_unitary(m.shape[0], rng)
        terms = np.einsum("ij,ik,kj->j", np.conj(u), m, u).real
        dev = max(dev, abs(terms.sum() - 1.0))
        lo = min(lo, terms.min())
    return FrameFunctionReport(trials, dev, float(lo))


def update(w1, p) -> DensityOperator:
    """Condition ``w1`` on the outcome ``p``: P W P / Tr(W P)."""
    w1, p = as_density(w1), as_projector(p)
    check_same_dim(w1.matrix, p.matrix)
    prob = np.trace(w1.matrix @ p.matrix).real
    if prob <= EPS_PROB:
        raise ZeroProbabilityError(f"outcome has probability {prob!r}; cannot condition on it")
    m = p.matrix @ w1.matrix @ p.matrix / prob
    return validate_density(0.5 * (m + dagger(m)))

