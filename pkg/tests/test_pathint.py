import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qprobe import pathint
from qprobe.errors import StabilityError, ValidationError
from qprobe.pathint import (
    ActionParams,
    Grid1D,
    WaveFunction,
    action_observables,
    centroid_period,
    gaussian_packet,
    l2_distance,
    make_potential,
    propagate,
    schrodinger_reference,
    segment_action,
    slice_kernel,
    stability_scan,
)

GRID = Grid1D(-20.0, 20.0, 512)
FREE = ActionParams(1.0, np.zeros(512))


def free_width(t, sigma0=1.0, m=1.0):
    return sigma0 * np.sqrt(1 + (t / (2 * m * sigma0**2)) ** 2)


def test_grid_and_packet():
    with pytest.raises(ValidationError):
        Grid1D(0, 1, 8)
    with pytest.raises(ValidationError):
        Grid1D(1, 0, 32)
    psi = gaussian_packet(GRID, 1.0, 0.8)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    assert psi.centroid() == pytest.approx(1.0, abs=1e-12)
    assert psi.width() == pytest.approx(0.8, abs=1e-10)
    with pytest.raises(ValidationError):
        gaussian_packet(GRID, 0, -1)


def test_potentials():
    assert np.all(make_potential(GRID, "free") == 0)
    assert np.all(make_potential(GRID, "constant", value=0.3) == 0.3)
    v = make_potential(GRID, "harmonic", mass=2.0, omega=0.5, center=1.0)
    assert v[0] == pytest.approx(0.5 * 2 * 0.25 * 21**2)
    t = make_potential(GRID, "tabulated", x=[-20, 20], v=[0, 4])
    assert t[-1] == pytest.approx(4.0) and t[0] == 0
    with pytest.raises(ValidationError):
        make_potential(GRID, "tabulated", x=[1, 0], v=[0, 1])
    with pytest.raises(ValidationError):
        make_potential(GRID, "square")


def test_action_params_validation():
    with pytest.raises(ValidationError):
        ActionParams(0.0, np.zeros(4))
    with pytest.raises(ValidationError):
        ActionParams(1.0, np.array([0, np.inf]))


# -- slice kernel ------------------------------------------------------------------


def test_kernel_errors():
    with pytest.raises(ValidationError):
        slice_kernel(FREE, GRID, 0.0)
    with pytest.raises(ValidationError):
        slice_kernel(FREE, GRID, -1e-3)
    with pytest.raises(ValidationError):
        slice_kernel(ActionParams(1.0, np.zeros(10)), GRID, 1e-3)


def test_step_then_reverse_is_identity():
    k = slice_kernel(FREE, GRID, 1e-3)
    # the reverse slice is the adjoint kernel
    assert np.abs(k.conj().T @ k - np.eye(512)).max() < 1e-10


def test_composed_kernel_equals_single_kernel():
    psi = gaussian_packet(GRID, 0.0, 1.0, 1.0)
    k1 = slice_kernel(FREE, GRID, 1e-3)
    kn = slice_kernel(FREE, GRID, 0.1)
    a = psi.samples
    for _ in range(100):
        a = k1 @ a
    b = kn @ psi.samples
    assert np.sqrt(np.sum(np.abs(a - b) ** 2) * GRID.dx) < 1e-3


def test_constant_potential_is_a_global_phase():
    v0, dt, steps = 0.7, 1e-3, 200
    psi = gaussian_packet(GRID, 0.0, 1.0, 0.5)
    free = propagate(psi, FREE, dt, steps).final.samples
    shifted = propagate(psi, ActionParams(1.0, np.full(512, v0)), dt, steps).final.samples
    assert np.abs(shifted - np.exp(-1j * v0 * dt * steps) * free).max() < 1e-10


# -- propagation and the reference solver -----------------------------------------


@pytest.fixture(scope="module")
def free_runs():
    psi = gaussian_packet(GRID, 0.0, 1.0)
    return psi, propagate(psi, FREE, 1e-3, 1000), schrodinger_reference(psi, FREE, 1e-3, 1000)


def test_free_spreading_law(free_runs):
    _, kern, ref = free_runs
    assert kern.final.width() == pytest.approx(free_width(1.0), rel=0.01)
    assert ref.final.width() == pytest.approx(free_width(1.0), rel=0.005)


def test_cross_method_agreement(free_runs):
    _, kern, ref = free_runs
    assert l2_distance(kern.final, ref.final) < 1e-3
    assert ref.norm_drift < 1e-10
    assert kern.norm_drift < 0.01


def test_dt_halving_reduces_cross_method_distance(free_runs):
    psi, kern, ref = free_runs
    d1 = l2_distance(kern.final, ref.final)
    k2 = propagate(psi, FREE, 5e-4, 2000)
    r2 = schrodinger_reference(psi, FREE, 5e-4, 2000)
    assert l2_distance(k2.final, r2.final) < d1


def test_centroid_moves_at_group_velocity():
    m, k0 = 2.0, 3.0
    psi = gaussian_packet(GRID, -3.0, 1.0, k0)
    params = ActionParams(m, np.zeros(512))
    tr = propagate(psi, params, 1e-3, 1000, snapshot_every=100)
    cents = [np.sum(GRID.x * d) / np.sum(d) for d in tr.snapshots]
    slope = np.polyfit(tr.snapshot_times, cents, 1)[0]
    assert slope == pytest.approx(k0 / m, rel=1e-3)


@pytest.fixture(scope="module")
def harmonic():
    g = Grid1D(-10.0, 10.0, 512)
    params = ActionParams(1.0, make_potential(g, "harmonic", mass=1.0, omega=1.0))
    return g, params


def _centroids(traj, g):
    return [np.sum(g.x * d) / np.sum(d) for d in traj.snapshots]


def test_harmonic_centroid_period(harmonic):
    g, params = harmonic
    psi = gaussian_packet(g, 2.0, np.sqrt(0.5))
    dt, steps = 2e-3, 6000
    for run in (propagate, schrodinger_reference):
        tr = run(psi, params, dt, steps, snapshot_every=5)
        period = centroid_period(tr.snapshot_times, _centroids(tr, g))
        assert period == pytest.approx(2 * np.pi, rel=0.01)


def test_ground_state_is_stationary(harmonic):
    g, params = harmonic
    psi = gaussian_packet(g, 0.0, np.sqrt(0.5))
    steps = int(round(2 * np.pi / 2e-3))
    for run in (propagate, schrodinger_reference):
        final = run(psi, params, 2 * np.pi / steps, steps).final
        assert np.sqrt(np.sum((final.density - psi.density) ** 2) * g.dx) < 1e-4


def test_drift_aborts_with_diagnostics(monkeypatch):
    psi = gaussian_packet(GRID, 0.0, 1.0)
    monkeypatch.setattr(pathint, "slice_kernel", lambda *a, **k: 1.01 * np.eye(512))
    with pytest.raises(StabilityError, match="boundary mass fraction"):
        pathint.propagate(psi, FREE, 1e-3, 10)


def test_run_needs_steps():
    with pytest.raises(ValidationError):
        propagate(gaussian_packet(GRID, 0, 1), FREE, 1e-3, 0)


def test_wavefunction_shape_check():
    with pytest.raises(ValidationError):
        WaveFunction(np.zeros(3), GRID)


# -- stability scan ------------------------------------------------------------


@pytest.mark.parametrize("a", [-0.1, 0.0, 0.1])
def test_stability_scan_norm_law(a):
    psi = gaussian_packet(GRID, 0.0, 1.0)
    scan = stability_scan(a, psi, ActionParams(1.0, np.zeros(512), rest_rate=1.0), 1e-2, 500)
    assert scan.z == complex(a, 1.0)
    assert scan.max_relative_error() < 0.02
    if a == 0:
        assert np.abs(scan.norms - 1).max() < 0.01


def test_negative_rest_rate_rejected():
    with pytest.raises(ValidationError):
        ActionParams(1.0, np.zeros(4), rest_rate=-1.0)


def test_centroid_period_needs_crossings():
    with pytest.raises(ValueError):
        centroid_period([0, 1, 2], [1, 2, 3])


# -- action observables --------------------------------------------------------


def test_rest_segment():
    obs = action_observables(1.5, 2.0, 0.3, 0.0)
    assert obs.energy == pytest.approx(1.5 * 4.0, abs=1e-9)
    assert abs(obs.momentum) < 1e-9


def test_closed_form_energy_momentum():
    obs = action_observables(2.0, 3.0, 1.0, 1.5)
    assert obs.energy == pytest.approx(20.784609690826528, abs=1e-6)
    assert obs.momentum == pytest.approx(3.4641016151377544, abs=1e-6)
    assert obs.euler_deviation < 1e-9


def test_potential_adds_to_energy():
    base = action_observables(1.0, 1.0, 0.5, 0.2)
    shifted = action_observables(1.0, 1.0, 0.5, 0.2, potential=0.4)
    assert shifted.energy - base.energy == pytest.approx(0.4, abs=1e-9)
    assert shifted.momentum == pytest.approx(base.momentum, abs=1e-9)


def test_superluminal_segment_rejected():
    with pytest.raises(ValidationError):
        segment_action(1.0, 2.0, 1.0, 1.0)
    with pytest.raises(ValidationError):
        segment_action(0.0, 0.0, 1.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.5, 3), st.floats(0.05, 3), st.floats(-0.95, 0.95),
       st.floats(-1, 1), st.floats(0.1, 10))
def test_homogeneity_and_euler(m, c, dt, beta, pot, lam):
    obs = action_observables(m, c, dt, beta * c * dt, pot, lam=lam)
    assert obs.homogeneity_deviation < 1e-9
    assert obs.euler_deviation < 1e-9
