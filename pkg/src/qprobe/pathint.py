"""Time-sliced propagation of a 1-D wave function, and a finite-difference reference.

Units: hbar = 1. The short-time kernel is the free amplitude
sqrt(m/(2πi dt)) exp(i m (x_j - x_k)²/(2 dt)) dx restricted to the band the
grid can represent, dressed with the potential phase exp(-i V dt). Applying
the dense kernel k times sums the amplitudes of every k-step grid path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import StabilityError, ValidationError
from .linalg import dagger, max_abs

DRIFT_LIMIT = 0.01
EPS_PSI = 1e-6


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValidationError("grid needs at least 16 points")
        if not self.x_max > self.x_min:
            raise ValidationError("grid needs x_max > x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers of the discrete Fourier modes."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)


@dataclass(frozen=True)
class WaveFunction:
    samples: np.ndarray
    grid: Grid1D
    time: float = 0.0

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        if s.shape != (self.grid.n,):
            raise ValidationError("samples do not match the grid")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def norm(self) -> float:
        """Total probability Σ|ψ|² dx."""
        return float(np.sum(self.density) * self.grid.dx)

    def centroid(self) -> float:
        p = self.density
        return float(np.sum(self.grid.x * p) / np.sum(p))

    def width(self) -> float:
        """Standard deviation of |ψ|²."""
        p = self.density
        mu = np.sum(self.grid.x * p) / np.sum(p)
        return float(np.sqrt(np.sum((self.grid.x - mu) ** 2 * p) / np.sum(p)))


def l2_distance(a: WaveFunction, b: WaveFunction) -> float:
    return float(np.sqrt(np.sum(np.abs(a.samples - b.samples) ** 2) * a.grid.dx))


def gaussian_packet(grid: Grid1D, x0: float, sigma0: float, k0: float = 0.0) -> WaveFunction:
    """Normalized ψ ∝ exp(-(x - x0)²/(4σ0²) + i k0 x); |ψ|² has standard deviation σ0."""
    if sigma0 <= 0:
        raise ValidationError("sigma0 must be positive")
    x = grid.x
    psi = np.exp(-((x - x0) ** 2) / (4 * sigma0**2) + 1j * k0 * x)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    if abs(np.sum(np.abs(psi) ** 2) * grid.dx - 1) > EPS_PSI:
        raise ValidationError("packet could not be normalized on this grid")
    return WaveFunction(psi, grid)


def make_potential(grid: Grid1D, kind: str = "free", **params) -> np.ndarray:
    """Sample a potential on the grid.

    ``free``; ``constant`` (``value``); ``harmonic`` (``mass``, ``omega``,
    optional ``center``) giving ½ m ω² (x - center)²; ``tabulated``
    (``x``, ``v`` arrays, linearly interpolated).
    """
    x = grid.x
    if kind == "free":
        return np.zeros_like(x)
    if kind == "constant":
        return np.full_like(x, float(params["value"]))
    if kind == "harmonic":
        c = float(params.get("center", 0.0))
        return 0.5 * float(params["mass"]) * float(params["omega"]) ** 2 * (x - c) ** 2
    if kind == "tabulated":
        xs, vs = np.asarray(params["x"], float), np.asarray(params["v"], float)
        if xs.shape != vs.shape or xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
            raise ValidationError("tabulated potential needs increasing x and matching v")
        return np.interp(x, xs, vs)
    raise ValidationError(f"unknown potential type {kind!r}")


@dataclass(frozen=True)
class ActionParams:
    """Mass, sampled potential and the rest-phase rate (stability demo only)."""

    mass: float
    potential: np.ndarray
    rest_rate: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise ValidationError("mass must be finite and positive")
        v = np.array(self.potential, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValidationError("potential must be a finite 1-D sample array")
        if self.rest_rate < 0:
            raise ValidationError("rest_rate must be non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "potential", v)


def dt_guidance(grid: Grid1D, mass: float) -> float:
    """Largest recommended slice, m·dx²/5: the fastest grid mode turns < π²/10 rad per slice."""
    return mass * grid.dx**2 / 5


def slice_kernel(params: ActionParams, grid: Grid1D, dt: float, z: complex = 0j) -> np.ndarray:
    """Dense n×n one-slice kernel.

    The free part is circulant: its eigenvalues on the grid's Fourier modes
    are exp(-i k² dt/(2m)), the exact free short-time amplitude in momentum
    space, which is the Gaussian kernel above seen through the grid's band
    limit. The potential contributes exp(-i V dt), split as half a slice on
    each side so the action integral is sampled at both ends of the slice.
    ``z`` multiplies the kernel by exp(z dt); a non-zero real part breaks
    conservation of probability (see ``stability_scan``).
    """
    if not dt > 0:
        raise ValidationError("dt must be positive")
    if params.potential.shape != (grid.n,):
        raise ValidationError("potential does not match the grid")
    c = np.fft.ifft(np.exp(-1j * grid.k**2 * dt / (2 * params.mass)))
    idx = (np.arange(grid.n)[:, None] - np.arange(grid.n)[None, :]) % grid.n
    half = np.exp(-0.5j * params.potential * dt)
    k = half[:, None] * c[idx] * half[None, :]
    drift = max_abs(dagger(k) @ k - np.eye(grid.n))
    if drift > DRIFT_LIMIT:
        raise StabilityError(f"kernel normalization off by {drift:.3g}")
    if z != 0:
        k = k * np.exp(z * dt)
    return k


@dataclass
class Trajectory:
    """Result of a propagation run: final state, norm history and density snapshots."""

    final: WaveFunction
    times: np.ndarray
    norms: np.ndarray
    snapshot_times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - self.norms[0])) / self.norms[0])


def _boundary_fraction(psi: np.ndarray, dx: float, edge: float = 0.05) -> float:
    m = max(1, int(edge * psi.size))
    p = np.abs(psi) ** 2
    return float((p[:m].sum() + p[-m:].sum()) / p.sum())


def _run(step, psi: WaveFunction, dt: float, steps: int, snapshot_every: int | None,
         check_drift: bool, label: str) -> Trajectory:
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    dx = psi.grid.dx
    a = psi.samples.copy()
    n0 = float(np.sum(np.abs(a) ** 2) * dx)
    norms = np.empty(steps + 1)
    norms[0] = n0
    snap_t, snaps = [], []
    if snapshot_every:
        snap_t.append(psi.time)
        snaps.append(np.abs(a) ** 2)
    for s in range(1, steps + 1):
        a = step(a)
        norms[s] = np.sum(np.abs(a) ** 2) * dx
        if check_drift and abs(norms[s] - n0) > DRIFT_LIMIT * n0:
            raise StabilityError(
                f"{label}: norm drift {abs(norms[s] - n0) / n0:.3g} after {s} steps "
                f"(t = {psi.time + s * dt:.6g}); boundary mass fraction "
                f"{_boundary_fraction(a, dx):.3g}, dt = {dt:.3g}, dx = {dx:.3g}"
            )
        if snapshot_every and s % snapshot_every == 0:
            snap_t.append(psi.time + s * dt)
            snaps.append(np.abs(a) ** 2)
    times = psi.time + dt * np.arange(steps + 1)
    final = WaveFunction(a, psi.grid, psi.time + steps * dt)
    return Trajectory(final, times, norms, snap_t, snaps)


def propagate(psi: WaveFunction, params: ActionParams, dt: float, steps: int,
              snapshot_every: int | None = None) -> Trajectory:
    """Apply the slice kernel ``steps`` times (ψ_B = Σ_k K_jk ψ_A,k per slice).

    Raises ``StabilityError`` if the total probability drifts by more than 1%.
    """
    k = slice_kernel(params, psi.grid, dt)
    return _run(lambda a: k @ a, psi, dt, steps, snapshot_every, True, "kernel propagation")


def _hamiltonian_bands(params: ActionParams, grid: Grid1D) -> tuple[np.ndarray, float]:
    """Diagonal and off-diagonal of -(1/2m) d²/dx² + V with the 3-point Laplacian."""
    off = -1.0 / (2 * params.mass * grid.dx**2)
    diag = 1.0 / (params.mass * grid.dx**2) + params.potential
    return diag, off


def schrodinger_reference(psi: WaveFunction, params: ActionParams, dt: float, steps: int,
                          snapshot_every: int | None = None) -> Trajectory:
    """Crank-Nicolson integration of i dψ/dt = -(1/2m) ψ'' + V ψ.

    Hard walls just outside the grid (ψ = 0 there) reflect the packet.
    The scheme is a Cayley transform of a Hermitian matrix, so it conserves
    Σ|ψ|² dx to rounding.
    """
    if not dt > 0:
        raise ValidationError("dt must be positive")
    if params.potential.shape != (psi.grid.n,):
        raise ValidationError("potential does not match the grid")
    diag, off = _hamiltonian_bands(params, psi.grid)
    n = psi.grid.n
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = 0.5j * dt * off
    ab[1] = 1 + 0.5j * dt * diag
    ab[2, :-1] = 0.5j * dt * off
    rdiag = 1 - 0.5j * dt * diag
    roff = -0.5j * dt * off

    def step(a):
        rhs = rdiag * a
        rhs[1:] += roff * a[:-1]
        rhs[:-1] += roff * a[1:]
        return solve_banded((1, 1), ab, rhs, check_finite=False)

    return _run(step, psi, dt, steps, snapshot_every, True, "Crank-Nicolson reference")


@dataclass(frozen=True)
class StabilityScan:
    z: complex
    times: np.ndarray
    probabilities: np.ndarray

    @property
    def norms(self) -> np.ndarray:
        """L2 norm ‖ψ‖ (square root of the total probability)."""
        return np.sqrt(self.probabilities)

    def expected_norms(self) -> np.ndarray:
        return np.exp(self.z.real * (self.times - self.times[0]))

    def max_relative_error(self) -> float:
        return float(np.max(np.abs(self.norms / self.expected_norms() - 1)))


def stability_scan(a: float, psi: WaveFunction, params: ActionParams, dt: float,
                   steps: int) -> StabilityScan:
    """Total probability vs time when every slice carries an extra factor exp(z dt).

    z = a + ib with b = ``params.rest_rate``. The norm ‖ψ‖ follows exp(a t):
    it is conserved only for a = 0, when the factor is a pure phase.
    Divergence is the reported result here, so no drift check is applied.
    """
    z = complex(float(a), params.rest_rate)
    k = slice_kernel(params, psi.grid, dt, z=z)
    traj = _run(lambda v: k @ v, psi, dt, steps, None, False, "stability scan")
    return StabilityScan(z, traj.times, traj.norms)


def centroid_period(times, centroids) -> float:
    """Oscillation period from the mean spacing of interpolated zero crossings (about the mean)."""
    t, y = np.asarray(times, float), np.asarray(centroids, float)
    y = y - 0.5 * (y.max() + y.min())
    i = np.flatnonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)
    if i.size < 2:
        raise ValueError("fewer than two zero crossings")
    tc = t[i] - y[i] * (t[i + 1] - t[i]) / (y[i + 1] - y[i])
    return float(2 * np.mean(np.diff(tc)))


# -- energy and momentum from the action of a path segment -------------------


@dataclass(frozen=True)
class ActionObservables:
    energy: float
    momentum: float
    action: float
    homogeneity_deviation: float
    euler_deviation: float


# eighth-order central first-derivative weights, offsets -4..4
_STENCIL = np.array([3, -32, 168, -672, 0, 672, -168, 32, -3]) / 840


def segment_action(dt: float, dx: float, mass: float, c: float, potential: float = 0.0) -> float:
    """dS = -m c² dt sqrt(1 - v²/c²) - V dt for a straight segment with v = dx/dt."""
    if not dt > 0:
        raise ValidationError("dt must be positive")
    v = dx / dt
    if abs(v) >= c:
        raise ValidationError("segment speed must stay below c")
    return -mass * c**2 * dt * np.sqrt(1 - (v / c) ** 2) - potential * dt


def action_observables(mass: float, c: float, dt: float, dx: float, potential: float = 0.0,
                       lam: float = 2.0) -> ActionObservables:
    """E = -∂dS/∂dt and p = ∂dS/∂dx by an eighth-order central difference.

    Also returns the degree-1 homogeneity defect |dS(λdt, λdx) - λ dS| and
    the Euler defect |-E dt + p dx - dS|.
    """
    s = segment_action(dt, dx, mass, c, potential)

    def d(f, x0, h):
        return sum(w * f(x0 + o * h) for o, w in zip(range(-4, 5), _STENCIL)) / h

    # The step is scaled to the distance from the light cone, where dS bends
    # hardest; the wide stencil keeps roundoff well under 1e-9 of dS.
    slack = dt - abs(dx) / c
    step = 0.5 * np.finfo(float).eps ** (1 / 9) * slack
    ds_dt = d(lambda t: segment_action(t, dx, mass, c, potential), dt, step)
    ds_dx = d(lambda x: segment_action(dt, x, mass, c, potential), dx, step * c)
    energy, momentum = -ds_dt, ds_dx
    homog = abs(segment_action(lam * dt, lam * dx, mass, c, potential) - lam * s)
    euler = abs(-energy * dt + momentum * dx - s)
    return ActionObservables(float(energy), float(momentum), float(s), float(homog), float(euler))
