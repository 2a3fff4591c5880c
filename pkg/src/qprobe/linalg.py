"""Finite-dimensional complex vector spaces: frames, projectors and the subspace lattice.

Subspaces are carried around as projector matrices. Frames (matrices whose
columns are orthonormal vectors) are used to build and inspect them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, ValidationError

EPS_HERM = 1e-10
EPS_IDEM = 1e-10
EPS_ORTH = 1e-10
EPS_NORM = 1e-10
EPS_EIG = 1e-8
EPS_RANK = 1e-9
EPS_RECON = 1e-10

# columns of a cluster projector whose residual falls below this are skipped
# when building a canonical frame; see canonical_frame
_CANON_ACCEPT = 1e-3
_PHASE_TOL = 1e-8


def max_abs(a) -> float:
    """Max-entry norm, the norm every tolerance in this package refers to."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def as_operator(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"operator must be a non-empty square matrix, got shape {m.shape}")
    return m


def as_vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex)
    if a.ndim != 1 or a.size < 1:
        raise DimensionError(f"vector must be 1-D and non-empty, got shape {a.shape}")
    return a


def is_normalized(v, tol: float = EPS_NORM) -> bool:
    v = as_vector(v)
    return abs(np.vdot(v, v).real - 1.0) <= tol


def is_hermitian(a, tol: float = EPS_HERM) -> bool:
    m = as_operator(a)
    return max_abs(m - dagger(m)) <= tol


def check_same_dim(*ops) -> int:
    dims = {np.asarray(o).shape[0] for o in ops}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def fix_phase(v: np.ndarray, tol: float = _PHASE_TOL) -> np.ndarray:
    """Rotate ``v`` so its first entry with modulus above ``tol`` is real positive."""
    v = np.array(v, dtype=complex)
    nz = np.flatnonzero(np.abs(v) > tol)
    if nz.size:
        z = v[nz[0]]
        v *= np.conj(z) / abs(z)
        v[nz[0]] = abs(v[nz[0]])
    return v


def _frame_matrix(frame, dim: int | None = None) -> np.ndarray:
    """Normalize the accepted frame spellings to a ``(dim, rank)`` array."""
    if isinstance(frame, np.ndarray) and frame.ndim == 2:
        return frame.astype(complex, copy=False)
    vectors = [np.asarray(v, dtype=complex) for v in frame]
    if not vectors:
        if dim is None:
            raise DimensionError("an empty frame needs an explicit ambient dimension")
        return np.zeros((dim, 0), dtype=complex)
    sizes = {v.shape for v in vectors}
    if len(sizes) != 1 or vectors[0].ndim != 1:
        raise DimensionError(f"frame vectors have mismatched shapes: {sorted(sizes)}")
    return np.stack(vectors, axis=1)


def orthonormalize(vectors: Sequence | np.ndarray, dim: int | None = None) -> np.ndarray:
    """Gram-Schmidt frame spanning the same subspace as ``vectors``.

    ``vectors`` is either a sequence of 1-D arrays or a matrix whose columns
    are the vectors. Vectors whose residual norm after projection falls below
    ``EPS_RANK`` are dropped, so the rank of the frame equals the numerical
    rank of the input. Returns a ``(dim, rank)`` matrix with orthonormal
    columns.
    """
    a = _frame_matrix(vectors, dim)
    n = a.shape[0]
    basis: list[np.ndarray] = []
    for j in range(a.shape[1]):
        r = a[:, j].copy()
        # two passes of modified Gram-Schmidt restore orthogonality to ~eps
        for _ in range(2):
            for q in basis:
                r -= q * np.vdot(q, r)
        nrm = np.linalg.norm(r)
        if nrm >= EPS_RANK:
            basis.append(r / nrm)
    if not basis:
        return np.zeros((n, 0), dtype=complex)
    return np.stack(basis, axis=1)


def frame_is_orthonormal(frame: np.ndarray, tol: float = EPS_ORTH) -> bool:
    g = dagger(frame) @ frame
    return max_abs(g - np.eye(frame.shape[1])) <= tol


def canonical_frame(frame: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the subspace spanned by ``frame``.

    The basis depends only on the subspace, not on the particular frame:
    Gram-Schmidt runs over the columns of the subspace's projector in
    standard-basis order, and each vector gets the first-entry phase
    convention. Used to settle degenerate eigen- and singular spaces.
    """
    rank = frame.shape[1]
    if rank == 0:
        return frame
    p = frame @ dagger(frame)
    basis: list[np.ndarray] = []
    for j in range(p.shape[0]):
        if len(basis) == rank:
            break
        r = p[:, j].copy()
        for _ in range(2):
            for q in basis:
                r -= q * np.vdot(q, r)
        nrm = np.linalg.norm(r)
        # sum of squared residuals over all columns equals the remaining rank,
        # so some column always clears a threshold this small
        if nrm > _CANON_ACCEPT:
            basis.append(fix_phase(r / nrm))
    return np.stack(basis, axis=1)


@dataclass(frozen=True)
class Projector:
    """Self-adjoint idempotent operator, the representative of a measurement outcome."""

    matrix: np.ndarray
    rank: int

    def __post_init__(self):
        self.matrix.setflags(write=False)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_matrix(cls, m, tol: float = EPS_IDEM) -> "Projector":
        """Validate ``m`` as a projector (P = P†, P² = P within ``tol``)."""
        m = np.array(as_operator(m))
        if max_abs(m - dagger(m)) > tol:
            raise ValidationError("projector is not self-adjoint")
        if max_abs(m @ m - m) > tol:
            raise ValidationError("projector is not idempotent")
        return cls(m, int(round(np.trace(m).real)))

    @classmethod
    def zero(cls, dim: int) -> "Projector":
        return cls(np.zeros((dim, dim), dtype=complex), 0)

    @classmethod
    def identity(cls, dim: int) -> "Projector":
        return cls(np.eye(dim, dtype=complex), dim)

    def frame(self) -> np.ndarray:
        """Canonical orthonormal frame of the range."""
        _, vecs = np.linalg.eigh(self.matrix)
        return canonical_frame(vecs[:, self.dim - self.rank:])

    def contains(self, other: "Projector", tol: float = EPS_EIG) -> bool:
        """True iff range(other) is a subspace of range(self)."""
        return max_abs(self.matrix @ other.matrix - other.matrix) <= tol

    def isclose(self, other: "Projector", tol: float = EPS_EIG) -> bool:
        return self.rank == other.rank and max_abs(self.matrix - other.matrix) <= tol


def as_projector(p) -> Projector:
    return p if isinstance(p, Projector) else Projector.from_matrix(p)


def projector_from_frame(frame, dim: int | None = None) -> Projector:
    """Sum of the outer products |b_k><b_k| over an orthonormal frame.

    ``frame`` may be a sequence of vectors or a ``(dim, rank)`` matrix. An
    empty frame gives the zero projector (pass ``dim`` in that case).
    """
    f = _frame_matrix(frame, dim)
    if dim is not None and f.shape[0] != dim:
        raise DimensionError(f"frame vectors have dimension {f.shape[0]}, expected {dim}")
    if f.shape[1] > f.shape[0]:
        raise ValidationError("frame has more vectors than the ambient dimension")
    if not frame_is_orthonormal(f):
        raise ValidationError("frame is not orthonormal")
    m = f @ dagger(f)
    return Projector(0.5 * (m + dagger(m)), f.shape[1])


def orthocomplement(p) -> Projector:
    p = as_projector(p)
    return Projector(np.eye(p.dim) - p.matrix, p.dim - p.rank)


def _eigenspace_projector(a: np.ndarray, target: float) -> Projector:
    w, v = np.linalg.eigh(a)
    sel = v[:, np.abs(w - target) <= EPS_EIG]
    return Projector(sel @ dagger(sel), sel.shape[1])


def meet(p, q) -> Projector:
    """Projector onto range(P) ∩ range(Q).

    A unit vector lies in both ranges iff it is an eigenvector of P + Q with
    eigenvalue 2, so the intersection is read off a single eigendecomposition.
    """
    p, q = as_projector(p), as_projector(q)
    check_same_dim(p.matrix, q.matrix)
    s = p.matrix + q.matrix
    return _eigenspace_projector(0.5 * (s + dagger(s)), 2.0)


def join(p, q) -> Projector:
    """Projector onto the span of range(P) and range(Q), by De Morgan duality."""
    return orthocomplement(meet(orthocomplement(p), orthocomplement(q)))


def commutes(p, q, tol: float = EPS_HERM) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = np.asarray(p), np.asarray(q)
    check_same_dim(a, b)
    return max_abs(a @ b - b @ a) <= tol


def four_meets(p, q) -> tuple[Projector, Projector, Projector, Projector]:
    """The meets M∩N, M∩N⊥, M⊥∩N, M⊥∩N⊥."""
    p, q = as_projector(p), as_projector(q)
    pc, qc = orthocomplement(p), orthocomplement(q)
    return meet(p, q), meet(p, qc), meet(pc, q), meet(pc, qc)


def decomposition_join(p, q) -> Projector:
    """Join of the four meets of ``p``, ``q`` and their orthocomplements."""
    out = None
    for m in four_meets(p, q):
        out = m if out is None else join(out, m)
    return out


def decomposition_identity_holds(p, q, tol: float = EPS_EIG) -> bool:
    """True iff the four meets of P, Q and their complements span the whole space."""
    d = decomposition_join(p, q)
    return d.rank == d.dim and max_abs(d.matrix - np.eye(d.dim)) <= tol


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and an orthonormal eigenframe of a self-adjoint operator.

    Eigenvalues closer than ``EPS_EIG`` are treated as one degenerate cluster
    whose eigenvectors are replaced by the canonical frame of the cluster's
    eigenspace, so the output is reproducible across LAPACK builds. Returned
    eigenvalues inside a cluster are kept as computed.
    """
    m = as_operator(a)
    if not is_hermitian(m):
        raise ValidationError("operator is not self-adjoint")
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    w, v = w[::-1], v[:, ::-1]
    out = np.empty_like(v)
    start = 0
    n = len(w)
    while start < n:
        stop = start + 1
        while stop < n and w[stop - 1] - w[stop] <= EPS_EIG:
            stop += 1
        if stop - start == 1:
            out[:, start] = fix_phase(v[:, start])
        else:
            out[:, start:stop] = canonical_frame(v[:, start:stop])
        start = stop
    return w.copy(), out


def spectral_reconstruct(eigenvalues, frame) -> np.ndarray:
    return (frame * np.asarray(eigenvalues)) @ dagger(frame)
