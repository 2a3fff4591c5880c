"""Unitary time evolution generated by a Hamiltonian (units with hbar = 1)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DimensionError, SingularPropagatorError, ValidationError
from .linalg import (
    EPS_NORM,
    as_operator,
    as_vector,
    check_same_dim,
    dagger,
    eig_hermitian,
    is_hermitian,
    is_normalized,
    max_abs,
)
from .probability import DensityOperator, as_density

EPS_UNIT = 1e-9


def as_hamiltonian(h) -> np.ndarray:
    m = as_operator(h)
    if not is_hermitian(m):
        raise ValidationError("Hamiltonian is not self-adjoint")
    return 0.5 * (m + dagger(m))


@dataclass(frozen=True)
class UnitaryPropagator:
    matrix: np.ndarray
    delta_t: float

    def __post_init__(self):
        m = as_operator(self.matrix)
        if max_abs(dagger(m) @ m - np.eye(m.shape[0])) > EPS_UNIT:
            raise ValidationError("propagator is not unitary")
        m = np.array(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "delta_t", float(self.delta_t))

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def inverse(self) -> "UnitaryPropagator":
        return UnitaryPropagator(dagger(self.matrix), -self.delta_t)


def propagator(h, delta_t: float) -> UnitaryPropagator:
    """U(dt) = exp(-i H dt) by spectral decomposition of H."""
    if not np.isfinite(delta_t):
        raise ValueError("delta_t must be finite")
    vals, vecs = eig_hermitian(as_hamiltonian(h))
    u = (vecs * np.exp(-1j * vals * delta_t)) @ dagger(vecs)
    return UnitaryPropagator(u, delta_t)


def compose(u2: UnitaryPropagator, u1: UnitaryPropagator) -> UnitaryPropagator:
    """U2·U1: evolve by ``u1`` first, then by ``u2``."""
    check_same_dim(u2.matrix, u1.matrix)
    return UnitaryPropagator(u2.matrix @ u1.matrix, u2.delta_t + u1.delta_t)


def evolve_state(v, u: UnitaryPropagator) -> np.ndarray:
    v = as_vector(v)
    check_same_dim(v, u.matrix)
    if not is_normalized(v):
        raise ValidationError("state vector is not normalized")
    return u.matrix @ v


def evolve_density(w, u: UnitaryPropagator) -> DensityOperator:
    w = as_density(w)
    check_same_dim(w.matrix, u.matrix)
    m = u.matrix @ w.matrix @ dagger(u.matrix)
    return DensityOperator(0.5 * (m + dagger(m)))


def schrodinger_ode_step(v, h, dt: float) -> np.ndarray:
    """One Crank-Nicolson step (1 + iH dt/2)^-1 (1 - iH dt/2) v.

    Exactly norm preserving; agrees with ``propagator(h, dt)`` to O(dt^3).
    Keep dt·‖H‖ below about 0.1.
    """
    if not np.isfinite(dt):
        raise ValueError("dt must be finite")
    v = as_vector(v)
    h = as_hamiltonian(h)
    check_same_dim(v, h)
    a = np.eye(h.shape[0]) + 0.5j * dt * h
    if np.linalg.cond(a) > 1e12:
        raise SingularPropagatorError("Crank-Nicolson system is singular")
    return np.linalg.solve(a, v - 0.5j * dt * (h @ v))


@dataclass(frozen=True)
class Segment:
    """Piece of a piecewise-constant Hamiltonian schedule."""

    duration: float
    hamiltonian: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.duration) or self.duration < 0:
            raise ValidationError("segment duration must be finite and non-negative")
        object.__setattr__(self, "hamiltonian", as_hamiltonian(self.hamiltonian))


def schedule_propagator(segments: Iterable[Segment]) -> UnitaryPropagator:
    """Product of segment propagators, later segments acting on the left."""
    total = None
    for seg in segments:
        u = propagator(seg.hamiltonian, seg.duration)
        total = u if total is None else compose(u, total)
    if total is None:
        raise ValidationError("empty schedule")
    return total


def schedule_trajectory(v, segments: Iterable[Segment], samples_per_segment: int):
    """Sample the evolved state along a schedule.

    Yields ``(t, state)`` pairs, starting with ``(0, v)`` and then
    ``samples_per_segment`` equally spaced points inside each segment
    (segment end included). States are computed from the exact segment
    propagators, not by accumulating steps.
    """
    v = as_vector(v)
    if not is_normalized(v, EPS_NORM):
        raise ValidationError("initial state is not normalized")
    if samples_per_segment < 1:
        raise ValueError("samples_per_segment must be >= 1")
    t0, start = 0.0, v
    yield t0, v
    for seg in segments:
        if seg.hamiltonian.shape[0] != v.size:
            raise DimensionError("schedule matrix dimension differs from the state")
        vals, vecs = eig_hermitian(seg.hamiltonian)
        coeffs = dagger(vecs) @ start
        for k in range(1, samples_per_segment + 1):
            tau = seg.duration * k / samples_per_segment
            yield t0 + tau, vecs @ (np.exp(-1j * vals * tau) * coeffs)
        start = vecs @ (np.exp(-1j * vals * seg.duration) * coeffs)
        t0 += seg.duration
