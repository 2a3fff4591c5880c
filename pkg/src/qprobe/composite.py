"""Two-factor systems: product vectors, Schmidt decomposition, marginals, and the ESW setup.

A bipartite vector is stored as its coefficient matrix ``c[i, k]`` with
respect to product basis vectors |a_i, b_k>; flattening row-major gives the
component vector on the Kronecker-product space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError
from .linalg import (
    EPS_EIG,
    EPS_NORM,
    EPS_RANK,
    as_operator,
    as_projector,
    as_vector,
    canonical_frame,
    dagger,
    is_normalized,
)
from .probability import DensityOperator, clamp_probability, validate_density
from .rules import ScreenCurve, SlitGeometry, fringe_visibility, free_amplitude, free_amplitudes, two_slit


@dataclass(frozen=True)
class BipartiteVector:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 2 or 0 in c.shape:
            raise DimensionError("bipartite coefficients must be a non-empty 2-D array")
        if abs(np.sum(np.abs(c) ** 2) - 1.0) > EPS_NORM:
            raise ValidationError("bipartite vector is not normalized")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def dims(self) -> tuple[int, int]:
        return self.coeffs.shape

    @property
    def vector(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    @classmethod
    def from_vector(cls, v, dims) -> "BipartiteVector":
        return cls(as_vector(v).reshape(dims))

    def inner(self, other: "BipartiteVector") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.coeffs, other.coeffs))


def tensor_vec(a, b) -> BipartiteVector:
    a, b = as_vector(a), as_vector(b)
    if not (is_normalized(a) and is_normalized(b)):
        raise ValidationError("factors must be normalized")
    return BipartiteVector(np.outer(a, b))


def tensor_op(x, y) -> np.ndarray:
    """Kronecker product; (X⊗Y) acts on the row-major flattening of c[i, k]."""
    return np.kron(as_operator(x), as_operator(y))


@dataclass(frozen=True)
class SchmidtDecomposition:
    """V = Σ C_i |A_i, B_i> with C descending and A, B holding the frames as columns."""

    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.coefficients) @ self.right.T


def schmidt(v: BipartiteVector) -> SchmidtDecomposition:
    """Bi-orthogonal decomposition from the SVD of the coefficient matrix.

    Coefficients below ``EPS_RANK`` are dropped. For a cluster of equal
    coefficients the left frame is replaced by the canonical frame of its
    span and the right partners are recomputed from it, so degenerate
    decompositions come out the same on every platform.
    """
    c = v.coeffs
    u, s, vh = np.linalg.svd(c, full_matrices=False)
    keep = s > EPS_RANK
    s, u, right = s[keep], u[:, keep], vh[keep].T
    start = 0
    while start < s.size:
        stop = start + 1
        while stop < s.size and s[stop - 1] - s[stop] <= EPS_EIG:
            stop += 1
        if stop - start > 1:
            left = canonical_frame(u[:, start:stop])
            u[:, start:stop] = left
            # c = Σ C A B^T  =>  B_i = c^T conj(A_i) / C_i
            right[:, start:stop] = (c.T @ np.conj(left)) / s[start:stop]
        start = stop
    return SchmidtDecomposition(s, u, right)


def joint_probability(v: BipartiteVector, pa, pg) -> float:
    """<V|(Pa⊗Pg)|V>."""
    pa, pg = as_projector(pa), as_projector(pg)
    if (pa.dim, pg.dim) != v.dims:
        raise DimensionError(f"projector dims {(pa.dim, pg.dim)} do not match factors {v.dims}")
    c = v.coeffs
    val = np.einsum("ik,ij,kl,jl->", np.conj(c), pa.matrix, pg.matrix, c)
    return clamp_probability(val.real)


def reduced_density(v: BipartiteVector, keep: str = "left") -> DensityOperator:
    """Partial trace over the discarded factor."""
    c = v.coeffs
    if keep == "left":
        w = c @ dagger(c)
    elif keep == "right":
        w = c.T @ np.conj(c)
    else:
        raise ValueError("keep must be 'left' or 'right'")
    return validate_density(0.5 * (w + dagger(w)))


# -- the ESW which-way experiment --------------------------------------------

ATOM_LABELS = ("L", "R")
CAVITY_LABELS = ("lambda", "rho")


def esw_state(amp_left: complex = 1.0, amp_right: complex = 1.0) -> BipartiteVector:
    """(a_L |L,λ> + a_R |R,ρ>)/norm; the default is (|L,λ> + |R,ρ>)/√2."""
    c = np.array([[amp_left, 0.0], [0.0, amp_right]], dtype=complex)
    return BipartiteVector(c / np.sqrt(np.sum(np.abs(c) ** 2)))


def esw_joint_table(v: BipartiteVector) -> dict:
    """Joint probabilities of slit and cavity outcomes, keyed ``"L,lambda"`` etc."""
    basis = np.eye(2, dtype=complex)
    table = {}
    for i, a in enumerate(ATOM_LABELS):
        for k, g in enumerate(CAVITY_LABELS):
            pa = np.outer(basis[i], basis[i])
            pg = np.outer(basis[k], basis[k])
            table[f"{a},{g}"] = joint_probability(v, pa, pg)
    return table


@dataclass(frozen=True)
class EswReport:
    joint: dict
    schmidt_coefficients: np.ndarray
    atom_state: np.ndarray
    esw_curve: ScreenCurve
    rule_a_curve: ScreenCurve
    rule_b_curve: ScreenCurve
    agreement: float
    visibility_esw: float
    visibility_rule_b: float

    @property
    def visibility_gap(self) -> float:
        return self.visibility_rule_b - self.visibility_esw


def esw_screen_curve(w_atom: DensityOperator, geom: SlitGeometry) -> ScreenCurve:
    """<D|U W U†|D> with <D|U|s> given by the free amplitude from slit s."""
    u = np.stack([free_amplitudes(geom.screen, geom.L, geom.b),
                  free_amplitudes(geom.screen, geom.R, geom.b)], axis=1)
    intensity = np.einsum("dj,jk,dk->d", u, w_atom.matrix, np.conj(u)).real
    return ScreenCurve("ESW", geom.screen_coordinate(), intensity)


def esw_experiment(geom: SlitGeometry, window: float | None = None) -> EswReport:
    """Atom + cavity which-way experiment on a slit geometry.

    The screen distribution is computed from the atom's reduced (mixed)
    state and compared pointwise, after normalization over the screen,
    with the Rule-A two-slit curve; ``agreement`` is the largest difference
    relative to the curve's peak. The Rule-B curve is included for
    contrast. ``window`` is the half-width around the screen centre used for
    the visibility figures (default: 1.5 predicted fringe spacings).
    """
    a_l = free_amplitude(geom.L, geom.G, geom.b)
    a_r = free_amplitude(geom.R, geom.G, geom.b)
    v = esw_state(a_l, a_r)
    w_atom = reduced_density(v, "left")
    esw = esw_screen_curve(w_atom, geom)
    ra = two_slit(geom, "A")
    rb = two_slit(geom, "B")
    agreement = float(np.max(np.abs(esw.probability - ra.probability)) / np.max(ra.probability))
    hw = 1.5 * geom.predicted_fringe_spacing() if window is None else window
    return EswReport(
        joint=esw_joint_table(v),
        schmidt_coefficients=schmidt(v).coefficients,
        atom_state=w_atom.matrix,
        esw_curve=esw,
        rule_a_curve=ra,
        rule_b_curve=rb,
        agreement=agreement,
        visibility_esw=fringe_visibility(esw.x, esw.intensity, 0.0, hw),
        visibility_rule_b=fringe_visibility(rb.x, rb.intensity, 0.0, hw),
    )
