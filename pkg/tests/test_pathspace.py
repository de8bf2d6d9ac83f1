import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import qtypical as qt
from qtypical.errors import ConfigError, ContractError, DegenerateInputError
from qtypical.pathspace import branch_window_report, determinism_probe

from helpers import HADAMARD, hadamard_grid_system


# -- classical ensembles ----------------------------------------------------

@pytest.fixture(scope="module")
def harmonic_ensemble():
    system = qt.ClassicalSystem("harmonic", mass=1.0, omega=1.0)
    box = qt.PhaseSpaceBox(-1.0, 1.0, -0.5, 1.5)
    times = np.array([0.0, np.pi / 2.0, np.pi, 2.0 * np.pi])
    return system, qt.classical_ensemble(system, box, 2000, times, seed=41)


def test_classical_period_return(harmonic_ensemble):
    system, ens = harmonic_ensemble
    drift = np.abs(ens.positions[:, -1, :] - ens.positions[:, 0, :]).max()
    assert drift <= 1e-10


def test_classical_time_shift_by_period(harmonic_ensemble):
    system, ens = harmonic_ensemble
    probe = qt.PhaseSpaceBox(-0.6, 0.3, 0.0, 0.9)
    w0 = ens.mask_weight(ens.member_mask(0, probe))
    w_period = ens.mask_weight(ens.member_mask(3, probe))
    sigma = np.sqrt(max(w0 * (1 - w0), 1e-12) / ens.n_paths)
    assert abs(w_period - w0) <= 3.0 * sigma + 1e-12


def test_classical_full_space_weight(harmonic_ensemble):
    system, ens = harmonic_ensemble
    everything = qt.PhaseSpaceBox(-1e6, 1e6, -1e6, 1e6)
    for i in range(ens.times.size):
        assert abs(ens.mask_weight(ens.member_mask(i, everything)) - 1.0) <= 1e-12


def test_classical_liouville_transported_cell(harmonic_ensemble):
    """The analytic rotation transports a cell; its weight is conserved."""
    system, ens = harmonic_ensemble
    cell = qt.PhaseSpaceBox(-0.5, 0.2, 0.1, 0.8)
    w0 = ens.mask_weight(ens.member_mask(0, cell))
    sigma = np.sqrt(max(w0 * (1 - w0), 1e-12) / ens.n_paths)
    quarter = 1   # index of the quarter-period sample
    pts = ens.positions[:, quarter, :]
    rotated_back = system.flow(pts, -float(ens.times[quarter]))
    w_t = ens.mask_weight(cell.contains(rotated_back))
    assert abs(w_t - w0) <= 3.0 * sigma + 1e-12


def test_classical_determinism_probe(harmonic_ensemble):
    system, ens = harmonic_ensemble
    cell = qt.PhaseSpaceBox(-0.5, 0.2, 0.1, 0.8)
    for target in range(ens.times.size):
        assert determinism_probe(ens, (0, cell), target) == 0.0


def test_classical_empty_region_rejected():
    system = qt.ClassicalSystem("harmonic")
    with pytest.raises(ConfigError):
        qt.classical_ensemble(system, qt.PhaseSpaceBox(0, 0, 0, 1), 10,
                              np.array([0.0, 1.0]), seed=1)


# -- guidance velocities and trajectories -----------------------------------

def test_velocity_of_plane_wave_phase(small_grid):
    p0 = 2.0
    x = small_grid.x
    envelope = np.exp(-x ** 2 / 8.0)
    psi = qt.GridState(small_grid, envelope * np.exp(1j * p0 * x)).normalized()
    v = qt.bohmian_velocity(psi, np.array([-1.3, 0.0, 2.1]))
    np.testing.assert_allclose(v, p0, atol=1e-6)


def test_velocity_of_real_state_is_zero(packet):
    v = qt.bohmian_velocity(packet, np.array([-0.7, 0.4]))
    np.testing.assert_allclose(v, 0.0, atol=1e-10)


def test_velocity_of_evolved_gaussian_at_center(small_grid, free_h):
    p0, t = 2.0, 1.5
    psi = qt.make_gaussian_packet(small_grid, -6.0, p0, 1.0)
    moved = qt.propagate(psi, free_h, t)
    center = -6.0 + p0 * t
    # at the moving center the local guidance velocity equals p0/m
    assert abs(qt.bohmian_velocity(moved, center) - p0) <= 1e-3


def test_bohmian_spread_tracks_analytic_width(free_h):
    grid = qt.Grid.centered(1024, 96.0)
    sigma = 1.5
    psi = qt.make_gaussian_packet(grid, -10.0, 2.0, sigma)
    times = np.linspace(0.0, 5.0, 11)
    ens = qt.bohmian_ensemble(psi, free_h, 4096, times, seed=5, dt=0.005)
    xs = ens.positions[:, :, 0]
    for idx in (5, 10):
        t = times[idx]
        expected = sigma * np.sqrt(1 + (t / sigma ** 2) ** 2) / np.sqrt(2.0)
        assert abs(xs[:, idx].std() / expected - 1.0) <= 0.02


def test_bohmian_equivariance(free_h):
    grid = qt.Grid.centered(1024, 96.0)
    psi = qt.make_gaussian_packet(grid, -10.0, 2.0, 1.5)
    times = np.linspace(0.0, 5.0, 6)
    ens = qt.bohmian_ensemble(psi, free_h, 4096, times, seed=11, dt=0.005)
    for idx in (0, 3, 5):
        for cut in (-10.0, -5.0, 0.0):
            rep = qt.equivariance_check(ens, psi, free_h,
                                        qt.Region.left_of(grid, cut), idx)
            assert rep["ok"], rep


def test_bohmian_crossing_trajectories_bounce(crossing_setup):
    grid, h, psi0, s1, times = crossing_setup
    rec = np.linspace(0.0, 8.0, 17)
    ens = qt.bohmian_ensemble(psi0, h, 128, rec, seed=3,
                              init_region=s1.region, dt=0.002)
    xs = ens.positions[:, :, 0]
    assert (xs < 0.0).all()
    order = np.argsort(xs[:, 0])
    assert (np.diff(xs[order], axis=0) >= -1e-6).all()


def test_bohmian_stationary_ground_state():
    grid = qt.Grid.centered(512, 40.0)
    h = qt.Hamiltonian("harmonic", mass=1.0, omega=1.0)
    from qtypical.grid import _eigensystem
    energies, vectors = _eigensystem(h, grid)
    ground = qt.GridState(grid, vectors[:, 0] / np.sqrt(grid.dx))
    assert abs(ground.norm_sq - 1.0) <= 1e-9
    times = np.linspace(0.0, 3.0, 7)
    ens = qt.bohmian_ensemble(ground, h, 64, times, seed=2, dt=0.01)
    drift = np.abs(ens.positions[:, -1, 0] - ens.positions[:, 0, 0]).max()
    assert drift <= 1e-3


# -- product and chain measures ---------------------------------------------

def test_cylinder_query_validation(small_grid):
    full = qt.Region.full(small_grid)
    with pytest.raises(ConfigError):
        qt.CylinderQuery(((0.5, full), (0.5, full)))
    with pytest.raises(ConfigError):
        qt.CylinderQuery(())


def test_everett_bell_single_factor_reduces_to_born(packet, free_h, small_grid):
    region = qt.Region.from_interval(small_grid, -1.0, 3.0)
    q = qt.CylinderQuery(((0.7, region),))
    assert qt.everett_bell_fdd(q, packet, free_h) == pytest.approx(
        qt.born_weight(qt.CSet(0.7, region), packet, free_h), abs=1e-14)


def test_everett_bell_hadamard_product():
    grid, h, psi0 = hadamard_grid_system()
    cell0 = qt.Region(grid, np.array([True, False]))
    q = qt.CylinderQuery(((1.0, cell0), (2.0, cell0)))
    value = qt.everett_bell_fdd(q, psi0, h)
    # dense matrix oracle: |E0 H psi|^2 * |E0 H H psi|^2 = 0.5 * 1.0
    psi = np.array([1.0, 0.0])
    b1 = np.abs((HADAMARD @ psi)[0]) ** 2
    b2 = np.abs((HADAMARD @ HADAMARD @ psi)[0]) ** 2
    assert abs(value - b1 * b2) <= 1e-12
    assert abs(value - 0.5) <= 1e-12


def test_everett_bell_full_grid_factor_drops_out(packet, free_h, small_grid):
    region = qt.Region.from_interval(small_grid, -2.0, 0.5)
    with_full = qt.CylinderQuery(((0.3, region),
                                  (0.9, qt.Region.full(small_grid))))
    without = qt.CylinderQuery(((0.3, region),))
    a = qt.everett_bell_fdd(with_full, packet, free_h)
    b = qt.everett_bell_fdd(without, packet, free_h)
    assert abs(a - b) <= 1e-12


def test_mu_q_single_slot_is_born(packet, free_h, small_grid):
    region = qt.Region.from_interval(small_grid, -1.0, 1.0)
    q = qt.CylinderQuery(((0.4, region),))
    born = qt.born_weight(qt.CSet(0.4, region), packet, free_h)
    assert abs(qt.mu_q_fdd(q, packet, free_h) - born) <= 1e-12
    gap = qt.additivity_gap(q, 0, qt.Region.from_interval(small_grid, -1.0, 0.0),
                            qt.Region.from_interval(small_grid, 0.0, 1.0),
                            packet, free_h)
    assert abs(gap) <= 1e-12


def test_mu_q_requires_ordered_times(packet, free_h, small_grid):
    full = qt.Region.full(small_grid)
    q = qt.CylinderQuery(((1.0, full), (0.5, full)))
    with pytest.raises(ContractError):
        qt.mu_q_fdd(q, packet, free_h)


def test_mu_q_full_grid_chain_is_one(packet, free_h, small_grid):
    full = qt.Region.full(small_grid)
    q = qt.CylinderQuery(((0.3, full), (0.8, full), (1.1, full)))
    assert abs(qt.mu_q_fdd(q, packet, free_h) - 1.0) <= 1e-10
    gap = qt.additivity_gap(q, 1, qt.Region.left_of(small_grid, 0.0),
                            qt.Region.right_of(small_grid, 0.0), packet, free_h)
    # splitting the final-slot-free chain at an intermediate time is where
    # additivity genuinely fails; the full-grid final projector restores it
    assert abs(gap) <= 1e-10


def test_mu_q_hadamard_non_additivity():
    grid, h, psi0 = hadamard_grid_system()
    cell0 = qt.Region(grid, np.array([True, False]))
    cell1 = qt.Region(grid, np.array([False, True]))
    both = qt.Region.full(grid)
    q = qt.CylinderQuery(((1.0, both), (2.0, cell0)))
    whole = qt.mu_q_fdd(q, psi0, h)
    gap = qt.additivity_gap(q, 0, cell0, cell1, psi0, h)
    assert abs(whole - 1.0) <= 1e-12
    assert abs(gap - 0.5) <= 1e-12


def test_mu_q_final_slot_split_is_additive():
    rng = np.random.default_rng(8)
    grid = qt.Grid.centered(16, 12.0)
    h = qt.Hamiltonian("free")
    for _ in range(10):
        amps = rng.normal(size=16) + 1j * rng.normal(size=16)
        psi = qt.GridState(grid, amps).normalized()
        m1 = rng.random(16) < 0.5
        m2 = rng.random(16) < 0.5
        final = qt.Region(grid, m2)
        q = qt.CylinderQuery(((0.2, qt.Region(grid, m1)), (0.9, final)))
        part_a = qt.Region(grid, m2 & (rng.random(16) < 0.5))
        part_b = final ^ part_a
        gap = qt.additivity_gap(q, 1, part_a, part_b, psi, h)
        assert abs(gap) <= 1e-12


# -- diagnostics ------------------------------------------------------------

def test_occupation_all_inside():
    ens = qt.PathEnsemble(np.array([0.0, 1.0, 2.0]),
                          np.full((4, 3), 0.5),
                          np.full(4, 0.25))
    rep = qt.occupation_report(ens, qt.Interval(0.0, 1.0))
    assert rep.pooled_mean == 1.0
    assert rep.pooled_variance == 0.0


@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_occupation_bound_exact_on_weighted_ensembles(data):
    n_paths = data.draw(st.integers(2, 12))
    steps = data.draw(st.integers(1, 5))
    raw = data.draw(st.lists(st.floats(0.001, 1.0),
                             min_size=n_paths, max_size=n_paths))
    w = np.array(raw)
    w /= w.sum()
    bits = data.draw(st.lists(st.lists(st.booleans(), min_size=steps,
                                       max_size=steps),
                              min_size=n_paths, max_size=n_paths))
    inside = np.array(bits)
    pos = np.where(inside, 0.5, 2.0)
    ens = qt.PathEnsemble(np.arange(steps, dtype=float), pos, w)
    rep = qt.occupation_report(ens, qt.Interval(0.0, 1.0))
    eps = max(1.0 - float(w @ inside[:, j]) for j in range(steps))
    assert rep.pooled_mean >= 1.0 - eps - 1e-12
    assert rep.pooled_variance <= eps + 1e-12


def test_memory_three_path_example():
    w = np.array([0.5, 0.4, 0.1])
    pos = np.array([[0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])
    ens = qt.PathEnsemble(np.array([0.0, 1.0]), pos, w)
    r = qt.memory_report(ens, (0, qt.Interval(-0.5, 0.5)),
                         (1, qt.Interval(0.5, 1.5)))
    assert r == pytest.approx(0.4 / 0.9)
    with pytest.raises(DegenerateInputError):
        qt.memory_report(ens, (0, qt.Interval(-0.5, 0.5)),
                         (1, qt.Interval(5.0, 6.0)))


def test_branch_window_report():
    # paths enter the knowledge region late, so later s-sets hold weight
    # that did not come from earlier ones
    w = np.full(4, 0.25)
    pos = np.array([[0, 0, 0], [0, 0, 5], [5, 0, 0], [5, 5, 0]], dtype=float)
    ens = qt.PathEnsemble(np.array([0.0, 1.0, 2.0]), pos, w)
    lower = [qt.Interval(-0.5, 0.5)] * 3
    rep = branch_window_report(ens, lower, eps=0.7)
    assert rep.passed
    assert rep.max_value == pytest.approx(2.0 / 3.0)
    tight = branch_window_report(ens, lower, eps=0.2)
    assert not tight.passed
    assert tight.witnesses
    # restricting the window drops the worst (t0, t2) pair
    windowed = branch_window_report(ens, lower, eps=0.4, window=1.0)
    assert windowed.passed


def test_ensemble_diagnostics_dispatch():
    ens = qt.PathEnsemble(np.array([0.0, 1.0]),
                          np.zeros((3, 2)), np.full(3, 1 / 3))
    rep = qt.ensemble_diagnostics(ens, "occupation",
                                  region=qt.Interval(-1.0, 1.0))
    assert rep.pooled_mean == 1.0
    with pytest.raises(ConfigError):
        qt.ensemble_diagnostics(ens, "nonsense")
