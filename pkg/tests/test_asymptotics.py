import itertools

import numpy as np
import pytest

import qtypical as qt
from qtypical.asymptotics import scaled_region
from qtypical.errors import UnsupportedDynamicsError

from helpers import gaussian_density_tail


@pytest.fixture(scope="module")
def moving_packet():
    grid = qt.Grid.centered(1024, 96.0)
    psi = qt.make_gaussian_packet(grid, -10.0, 5.0, 1.0)
    return grid, psi, qt.Hamiltonian("free")


def test_full_velocity_region_is_identity(moving_packet):
    grid, psi, h = moving_packet
    dv = qt.VelocityRegion.full(grid)
    for t in (0.0, 0.3, 2.0, np.inf):
        out = qt.f_projector(dv, t, psi, h)
        assert (out - psi).norm_sq <= 1e-12


def test_asymptotic_projector_positive_velocity(moving_packet):
    grid, psi, h = moving_packet
    dv = qt.VelocityRegion.positive(grid)
    weight = qt.f_projector(dv, np.inf, psi, h).norm_sq
    oracle = 1.0 - gaussian_density_tail(5.0 * np.sqrt(2.0))
    assert weight >= 0.999
    assert abs(weight - oracle) <= 1e-9


def test_time_zero_projector_degenerates(moving_packet):
    grid, psi, h = moving_packet
    with_zero = qt.VelocityRegion.from_interval(grid, -1.0, 1.0)
    assert scaled_region(with_zero, 0.0).mask.all()
    without_zero = qt.VelocityRegion.from_interval(grid, 1.0, 2.0)
    assert scaled_region(without_zero, 0.0).is_empty


def test_asymptotic_needs_free_dynamics(moving_packet):
    grid, psi, h = moving_packet
    dv = qt.VelocityRegion.positive(grid)
    with pytest.raises(UnsupportedDynamicsError):
        qt.f_projector(dv, np.inf, psi, qt.Hamiltonian("harmonic"))
    # the finite-time projector stays available for any Hamiltonian
    grid40 = qt.Grid.centered(512, 40.0)
    psi40 = qt.make_gaussian_packet(grid40, 1.0, 0.0, 1.0)
    out = qt.f_projector(qt.VelocityRegion.positive(grid40), 1.0, psi40,
                         qt.Hamiltonian("harmonic"))
    assert out.norm_sq <= 1.0 + 1e-12


def test_projector_laws(moving_packet):
    grid, psi, h = moving_packet
    dv = qt.VelocityRegion.positive(grid)
    proj = qt.f_projector(dv, np.inf, psi, h)
    again = qt.f_projector(dv, np.inf, proj, h)
    assert (again - proj).norm_sq <= 1e-12
    other = qt.make_gaussian_packet(grid, 3.0, -1.0, 2.0)
    herm = abs(other.inner(proj)
               - qt.f_projector(dv, np.inf, other, h).inner(psi))
    assert herm <= 1e-12
    moved = qt.propagate(qt.f_projector(dv, np.inf, psi, h), h, 1.3)
    swapped = qt.f_projector(dv, np.inf, qt.propagate(psi, h, 1.3), h)
    assert (moved - swapped).norm_sq <= 1e-10


def test_complement_decomposition_exact(moving_packet):
    grid, psi, h = moving_packet
    dv = qt.VelocityRegion.from_interval(grid, 2.0, 7.0)
    for t in (0.0, 0.8, 3.0):
        total = (qt.f_projector(dv, t, psi, h).norm_sq
                 + qt.f_projector(dv.complement(), t, psi, h).norm_sq)
        assert abs(total - psi.norm_sq) <= 1e-12


def test_convergence_profile(moving_packet):
    grid, psi, h = moving_packet
    times = np.linspace(0.1, 5.0, 25)
    dv = qt.VelocityRegion.positive(grid)
    prof = qt.convergence_profile(dv, psi, h, times, threshold=0.05)
    assert prof.converged
    assert prof.t_converged is not None
    assert prof.final_distance <= 0.05
    # identity region: the profile vanishes identically
    full = qt.convergence_profile(qt.VelocityRegion.full(grid), psi, h, times)
    assert full.distances.max() <= 1e-12
    # boundary sitting on the momentum peak: slow, flagged by the caller
    on_peak = qt.VelocityRegion.from_interval(grid, 5.0, np.inf)
    bad = qt.convergence_profile(on_peak, psi, h, times, threshold=0.05)
    assert not bad.converged
    assert bad.final_distance > 0.1


def test_optimal_velocity_region_full_state(moving_packet):
    grid, psi, h = moving_packet
    best = qt.optimal_velocity_region(
        qt.CSet(0.0, qt.Region.full(grid)), psi, h)
    recovered = qt.f_projector(best, np.inf, psi, h)
    assert (recovered - psi).norm_sq <= 1e-9


def test_optimal_velocity_region_zero_sset(moving_packet):
    grid, psi, h = moving_packet
    best = qt.optimal_velocity_region(
        qt.CSet(0.0, qt.Region.empty(grid)), psi, h)
    assert not best.mask.any()


def test_optimal_velocity_region_matches_exhaustive():
    rng = np.random.default_rng(23)
    grid = qt.Grid.centered(8, 8.0)
    h = qt.Hamiltonian("free")
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi = qt.GridState(grid, amps).normalized()
    region = qt.Region(grid, np.array([1, 1, 0, 0, 1, 0, 1, 0], dtype=bool))
    c = qt.CSet(0.6, region)
    best = qt.optimal_velocity_region(c, psi, h)
    target = qt.cset_apply(c, psi, h)
    ours = (target - qt.f_projector(best, np.inf, psi, h)).norm_sq
    best_exhaustive = np.inf
    for bits in itertools.product((False, True), repeat=8):
        dv = qt.VelocityRegion(grid, np.array(bits))
        d = (target - qt.f_projector(dv, np.inf, psi, h)).norm_sq
        best_exhaustive = min(best_exhaustive, d)
    assert ours <= best_exhaustive + 1e-12


def test_overlap_limit_matches_horizon_overlap(crossing_setup):
    grid, h, psi0, s1, times = crossing_setup
    limit = qt.asymptotic_overlap_limit(s1, psi0, h)
    prof = qt.packet_overlap_profile(s1, np.array([times[-1]]), psi0, h)
    assert abs(float(prof.w[0]) - limit) <= 0.02
