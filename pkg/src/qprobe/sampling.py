"""Seeded random states, operators and bases for property batteries.

Every function takes an explicit ``numpy.random.Generator``; nothing here
touches global random state.
"""

from __future__ import annotations

import numpy as np

from .linalg import dagger


def rng_for(seed, *stream) -> np.random.Generator:
    """Independent generator for ``(seed, *stream)``; lets single cases be replayed."""
    return np.random.default_rng([int(seed), *map(int, stream)])


def random_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary (QR of a Ginibre matrix with phase correction)."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (a + dagger(a))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    w = g @ dagger(g)
    w = 0.5 * (w + dagger(w))
    return w / np.trace(w).real


def random_projector_pair(dim: int, rng: np.random.Generator, commuting: bool):
    """Two projector matrices, built on a shared ONB when ``commuting``.

    Noncommuting pairs use independently rotated frames with ranks strictly
    between 0 and ``dim``, which commute with probability zero.
    """
    u = random_unitary(dim, rng)
    if commuting:
        mask_p = rng.random(dim) < 0.5
        mask_q = rng.random(dim) < 0.5
        fp, fq = u[:, mask_p], u[:, mask_q]
    else:
        v = random_unitary(dim, rng)
        rp = int(rng.integers(1, dim))
        rq = int(rng.integers(1, dim))
        fp, fq = u[:, :rp], v[:, :rq]
    return fp @ dagger(fp), fq @ dagger(fq)
