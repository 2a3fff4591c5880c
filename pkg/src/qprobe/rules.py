"""Amplitudes of measurement-outcome sequences, square-then-add vs add-then-square.

Rule A sums |amplitude|² over alternatives (intermediate outcomes knowable);
Rule B squares the summed amplitude (intermediate outcomes unknowable).
The two-slit experiment is the canonical pair of alternatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionError, GeometryError, SingularPropagatorError, ValidationError
from .linalg import as_operator, as_vector, is_normalized
from .probability import MaximalTest, OutcomeDistribution

RULES = ("A", "B")


@dataclass(frozen=True)
class Alternative:
    outcome_labels: tuple
    amplitude: complex

    def __post_init__(self):
        if not self.outcome_labels:
            raise ValidationError("an alternative needs at least one outcome label")
        if not np.isfinite(self.amplitude):
            raise ValidationError("amplitude must be finite")


@dataclass(frozen=True)
class SequenceExperiment:
    """Preparation ``initial``, intermediate maximal tests, final outcome ``final``.

    ``propagators`` has one entry per gap (``len(stages) + 1``); ``None``
    stands for the identity throughout.
    """

    initial: np.ndarray
    final: np.ndarray
    stages: tuple = ()
    propagators: tuple | None = None

    def __post_init__(self):
        u, w = as_vector(self.initial), as_vector(self.final)
        if u.size != w.size:
            raise DimensionError("initial and final vectors differ in dimension")
        if not (is_normalized(u) and is_normalized(w)):
            raise ValidationError("initial and final vectors must be normalized")
        stages = tuple(s if isinstance(s, MaximalTest) else MaximalTest(s) for s in self.stages)
        for s in stages:
            if s.dim != u.size:
                raise DimensionError("stage basis dimension differs from the state")
        if self.propagators is None:
            props = tuple(np.eye(u.size, dtype=complex) for _ in range(len(stages) + 1))
        else:
            props = tuple(as_operator(p) for p in self.propagators)
            if len(props) != len(stages) + 1:
                raise ValidationError("need exactly one propagator per gap between tests")
            for p in props:
                if p.shape[0] != u.size:
                    raise DimensionError("propagator dimension differs from the state")
        object.__setattr__(self, "initial", u)
        object.__setattr__(self, "final", w)
        object.__setattr__(self, "stages", stages)
        object.__setattr__(self, "propagators", props)

    @property
    def dim(self) -> int:
        return self.initial.size

    def total_propagator(self) -> np.ndarray:
        total = self.propagators[0]
        for u in self.propagators[1:]:
            total = u @ total
        return total


def alternative_amplitude(exp: SequenceExperiment, choice: Sequence[int]) -> complex:
    """<w|U_m|v_k(m)> ... <v_k(2)|U_1|v_k(1)> <v_k(1)|U_0|u> for one outcome per stage."""
    if len(choice) != len(exp.stages):
        raise IndexError(f"need {len(exp.stages)} outcome indices, got {len(choice)}")
    state = exp.propagators[0] @ exp.initial
    amp = 1.0 + 0j
    for stage, k, u in zip(exp.stages, choice, exp.propagators[1:]):
        if not 0 <= k < exp.dim:
            raise IndexError(f"outcome index {k} out of range for dimension {exp.dim}")
        v = stage.basis[:, k]
        amp *= np.vdot(v, state)
        state = u @ v
    return complex(amp * np.vdot(exp.final, state))


def alternatives(exp: SequenceExperiment) -> Iterator[Alternative]:
    """Every combination of intermediate outcomes, with its amplitude."""
    for choice in product(range(exp.dim), repeat=len(exp.stages)):
        labels = tuple(s.labels[k] for s, k in zip(exp.stages, choice)) or ("direct",)
        yield Alternative(labels, alternative_amplitude(exp, choice))


def _amplitudes(exp: SequenceExperiment) -> np.ndarray:
    return np.array([a.amplitude for a in alternatives(exp)])


def rule_a(exp: SequenceExperiment) -> float:
    """Square, then add."""
    return float(np.sum(np.abs(_amplitudes(exp)) ** 2))


def rule_b(exp: SequenceExperiment) -> float:
    """Add, then square."""
    return float(abs(np.sum(_amplitudes(exp))) ** 2)


@dataclass(frozen=True)
class RuleBBornReport:
    rule_b: float
    born: float

    @property
    def deviation(self) -> float:
        return abs(self.rule_b - self.born)

    @property
    def passed(self) -> bool:
        return self.deviation < 1e-10


def rule_b_equals_born(exp: SequenceExperiment) -> RuleBBornReport:
    """Compare Rule B with the Born probability |<w|U_total|u>|² of the untested evolution."""
    direct = abs(np.vdot(exp.final, exp.total_propagator() @ exp.initial)) ** 2
    return RuleBBornReport(rule_b(exp), float(direct))


# -- free propagation and the two-slit setup ---------------------------------


def free_amplitude(x, y, b: float) -> complex:
    """Point-to-point amplitude e^{i b d} / d, with d = |x - y|."""
    d = float(np.hypot(*(np.asarray(x, float) - np.asarray(y, float))))
    if d <= 0.0:
        raise SingularPropagatorError("free amplitude between coincident points")
    return complex(np.exp(1j * b * d) / d)


def free_amplitudes(points: np.ndarray, y, b: float) -> np.ndarray:
    """Vectorised ``free_amplitude`` from one point ``y`` to many ``points``."""
    diff = np.asarray(points, float) - np.asarray(y, float)
    d = np.hypot(diff[:, 0], diff[:, 1])
    if np.any(d <= 0.0):
        raise SingularPropagatorError("free amplitude between coincident points")
    return np.exp(1j * b * d) / d


@dataclass(frozen=True)
class SlitGeometry:
    """Source G, slits L and R, detector points on a straight screen; phase rate b.

    All points are 2-D. ``screen`` holds one detector position per row.
    """

    G: tuple
    L: tuple
    R: tuple
    screen: np.ndarray
    b: float

    def __post_init__(self):
        g, l, r = (np.asarray(p, float) for p in (self.G, self.L, self.R))
        scr = np.asarray(self.screen, float)
        if any(p.shape != (2,) for p in (g, l, r)) or scr.ndim != 2 or scr.shape[1] != 2:
            raise GeometryError("points must be 2-D coordinates")
        if scr.shape[0] < 2:
            raise GeometryError("screen needs at least 2 sample points")
        if not np.isfinite(self.b):
            raise GeometryError("phase rate b must be finite")
        if np.allclose(l, r, rtol=0, atol=0):
            raise GeometryError("slits L and R coincide")
        if np.any(np.hypot(*(scr - g).T) <= 0):
            raise GeometryError("screen contains the source")
        for name, p in (("L", l), ("R", r)):
            if np.hypot(*(p - g)) <= 0:
                raise GeometryError(f"slit {name} coincides with the source")
            if np.any(np.hypot(*(scr - p).T) <= 0):
                raise GeometryError(f"screen contains slit {name}")
        scr = scr.copy()
        scr.setflags(write=False)
        object.__setattr__(self, "G", tuple(g))
        object.__setattr__(self, "L", tuple(l))
        object.__setattr__(self, "R", tuple(r))
        object.__setattr__(self, "screen", scr)
        object.__setattr__(self, "b", float(self.b))

    @classmethod
    def from_config(cls, G, L, R, screen_from, screen_to, samples: int, b: float) -> "SlitGeometry":
        if samples < 2:
            raise GeometryError("screen needs at least 2 sample points")
        a, z = np.asarray(screen_from, float), np.asarray(screen_to, float)
        t = np.linspace(0.0, 1.0, int(samples))[:, None]
        return cls(G, L, R, a + t * (z - a), b)

    def slits(self) -> dict:
        return {"L": self.L, "R": self.R}

    def screen_coordinate(self) -> np.ndarray:
        """Signed distance of each detector from the screen midpoint, along the screen."""
        a, z = self.screen[0], self.screen[-1]
        axis = (z - a) / np.hypot(*(z - a))
        return (self.screen - 0.5 * (a + z)) @ axis

    def screen_distance(self) -> float:
        """Perpendicular distance from the slit midpoint to the screen line."""
        a, z = self.screen[0], self.screen[-1]
        axis = (z - a) / np.hypot(*(z - a))
        rel = 0.5 * (np.asarray(self.L) + np.asarray(self.R)) - a
        return float(abs(rel[0] * axis[1] - rel[1] * axis[0]))

    def slit_separation(self) -> float:
        return float(np.hypot(*(np.asarray(self.R) - np.asarray(self.L))))

    def predicted_fringe_spacing(self) -> float:
        """Small-angle fringe period 2π·D/(b·d) on the screen."""
        return 2 * np.pi * self.screen_distance() / (self.b * self.slit_separation())


def slit_amplitudes(geom: SlitGeometry, open_slits: Sequence[str] = ("L", "R")) -> np.ndarray:
    """Amplitudes <D_j|s><s|G> per detector (rows) and open slit (columns)."""
    slits = geom.slits()
    cols = []
    for name in open_slits:
        if name not in slits:
            raise GeometryError(f"unknown slit {name!r}")
        s = slits[name]
        cols.append(free_amplitudes(geom.screen, s, geom.b) * free_amplitude(s, geom.G, geom.b))
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class ScreenCurve:
    """Detection statistics over the sampled screen.

    ``intensity`` is the raw (unnormalized) value; ``probability`` is it
    renormalized over the sampled points.
    """

    rule: str
    x: np.ndarray
    intensity: np.ndarray

    @property
    def probability(self) -> np.ndarray:
        return self.intensity / self.intensity.sum()

    def distribution(self) -> OutcomeDistribution:
        labels = tuple(f"D{j}" for j in range(self.x.size))
        return OutcomeDistribution(labels, self.probability)

    def center_index(self) -> int:
        return int(np.argmin(np.abs(self.x)))


def two_slit(geom: SlitGeometry, rule: str, open_slits: Sequence[str] = ("L", "R")) -> ScreenCurve:
    """Screen curve with Rule A (|A_L|²+|A_R|²) or Rule B (|A_L+A_R|²)."""
    rule = rule.upper()
    if rule not in RULES:
        raise ValueError(f"rule must be 'A' or 'B', got {rule!r}")
    amps = slit_amplitudes(geom, open_slits)
    if rule == "A":
        intensity = np.sum(np.abs(amps) ** 2, axis=1)
    else:
        intensity = np.abs(np.sum(amps, axis=1)) ** 2
    return ScreenCurve(rule, geom.screen_coordinate(), intensity)


# -- fringe metrics ----------------------------------------------------------


def _window(x: np.ndarray, center: float, half_width: float) -> np.ndarray:
    sel = np.abs(x - center) <= half_width
    if sel.sum() < 5:
        raise ValueError("window holds too few samples")
    return sel


def fringe_visibility(x, intensity, center: float = 0.0, half_width: float | None = None) -> float:
    """(Imax - Imin)/(Imax + Imin) over a window around ``center``."""
    x, y = np.asarray(x), np.asarray(intensity)
    sel = _window(x, center, half_width if half_width is not None else np.ptp(x) / 2)
    hi, lo = y[sel].max(), y[sel].min()
    return float((hi - lo) / (hi + lo))


def envelope_residual(x, intensity, center: float = 0.0, half_width: float | None = None,
                      degree: int = 6) -> float:
    """Peak-to-peak residual of a smooth polynomial envelope, relative to the mean.

    A fringe-free curve is captured by a low-degree polynomial and leaves a
    tiny residual; fringes leave a residual of order one.
    """
    x, y = np.asarray(x), np.asarray(intensity)
    sel = _window(x, center, half_width if half_width is not None else np.ptp(x) / 2)
    xs, ys = x[sel], y[sel]
    scale = np.max(np.abs(xs - center)) or 1.0
    coef = np.polynomial.polynomial.polyfit((xs - center) / scale, ys, degree)
    resid = ys - np.polynomial.polynomial.polyval((xs - center) / scale, coef)
    return float(np.ptp(resid) / ys.mean())


def peak_positions(x, intensity) -> np.ndarray:
    """Local maxima, refined by a parabola through each peak and its neighbours."""
    x, y = np.asarray(x), np.asarray(intensity)
    i = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])) + 1
    ym, y0, yp = y[i - 1], y[i], y[i + 1]
    denom = ym - 2 * y0 + yp
    shift = np.where(denom != 0, 0.5 * (ym - yp) / np.where(denom != 0, denom, 1), 0.0)
    step = np.gradient(x)[i]
    return x[i] + shift * step


def fringe_spacing(x, intensity, center: float = 0.0, half_width: float | None = None) -> float:
    """Mean distance between consecutive maxima inside the window."""
    x = np.asarray(x)
    sel = _window(x, center, half_width if half_width is not None else np.ptp(x) / 2)
    peaks = peak_positions(x[sel], np.asarray(intensity)[sel])
    if peaks.size < 2:
        raise ValueError("fewer than two fringe maxima in the window")
    return float(np.mean(np.diff(peaks)))


def cross_terms(amplitudes) -> float:
    """Sum over i<j of 2·Re(A_i* A_j), the interference part of Rule B."""
    a = np.asarray(amplitudes)
    total = 0.0
    for i in range(a.size):
        for j in range(i + 1, a.size):
            total += 2 * (np.conj(a[i]) * a[j]).real
    return float(total)

