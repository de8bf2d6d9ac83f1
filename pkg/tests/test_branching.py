import numpy as np
import pytest

import qtypical as qt
from qtypical.branching import default_shrinkage_candidates
from qtypical.errors import ContractError


def test_scan_passes_for_separating_packets(separating_setup):
    grid, h, psi0, s1, times = separating_setup
    rep = qt.subtree_support_scan(s1, times, psi0, h, eps=0.01)
    assert rep.passed
    assert not rep.witnesses


def test_scan_fails_mid_crossing(crossing_setup):
    grid, h, psi0, s1, times = crossing_setup
    rep = qt.subtree_support_scan(s1, times, psi0, h, eps=0.01)
    assert not rep.passed
    witness_times = [t for t, _ in rep.witnesses]
    assert any(2.9 <= t <= 3.5 for t in witness_times)


def test_scan_weight_precondition(crossing_setup):
    grid, h, psi0, s1, times = crossing_setup
    fat = qt.CSet(0.0, qt.Region.from_interval(grid, -30.0, 12.0))
    weight = qt.born_weight(fat, psi0, h)
    assert weight > 0.55
    with pytest.raises(ContractError):
        qt.subtree_support_scan(fat, times, psi0, h)


def test_build_subtree_separating(separating_setup):
    grid, h, psi0, s1, times = separating_setup
    tmap, rep = qt.build_subtree(s1, times, psi0, h, eps=0.02)
    assert rep.passed
    assert len(tmap.regions) == times.size
    # the tracked region drifts with the moving packet
    centers = [grid.x[r.mask].mean() for r in (tmap.regions[0], tmap.regions[-1])]
    assert centers[-1] < centers[0] - 5.0
    # a same-time pair contributes a zero entry trivially
    same = qt.quantum_mutual(tmap.cset(3), tmap.cset(3), psi0, h).value
    assert same == 0.0


def test_build_subtree_refused_for_crossing(crossing_setup):
    grid, h, psi0, s1, times = crossing_setup
    with pytest.raises(ContractError):
        qt.build_subtree(s1, times, psi0, h, eps=0.01)


def test_subtree_members_pass_their_own_scan(separating_setup):
    grid, h, psi0, s1, times = separating_setup
    tmap, rep = qt.build_subtree(s1, times, psi0, h, eps=0.02)
    for i in (0, times.size // 2, times.size - 1):
        member = qt.subtree_support_scan(tmap.cset(i), times[i:], psi0, h,
                                         eps=0.02)
        assert member.passed


def test_asymptotic_support_examples(crossing_setup, separating_setup):
    grid, h, psi0, s1, _ = crossing_setup
    assert qt.asymptotic_support_check(s1, psi0, h, eps=0.02)
    grid2, h2, psi2, s2, _ = separating_setup
    assert qt.asymptotic_support_check(s2, psi2, h2, eps=0.02)
    with pytest.raises(ContractError):
        qt.asymptotic_support_check(
            qt.CSet(0.0, qt.Region.full(grid)), psi0, h)


def test_subtree_support_implies_asymptotic(separating_setup):
    grid, h, psi0, s1, times = separating_setup
    scan = qt.subtree_support_scan(s1, times, psi0, h, eps=0.01)
    assert scan.passed
    assert qt.asymptotic_support_check(s1, psi0, h, eps=0.01)


def test_irreducible_self_candidate_never_refutes(separating_setup):
    grid, h, psi0, s1, times = separating_setup
    rep = qt.irreducible_check(s1, [s1.region], psi0, h, eps=0.02)
    assert rep.irreducible
    row = rep.candidates[0]
    assert row["mutual"] == 0.0 and row["lebesgue_ratio"] == 0.0


def test_irreducible_refuted_by_half_width_candidate(separating_setup):
    grid, h, psi0, s1, times = separating_setup
    half = qt.Region.from_interval(grid, -grid.length / 4.0, 0.0)
    rep = qt.irreducible_check(s1, [half], psi0, h, eps=0.02,
                               lebesgue_eps=0.15)
    assert not rep.irreducible
    assert rep.candidates[0]["is_asymptotic_support"]
    assert rep.candidates[0]["lebesgue_ratio"] == pytest.approx(0.5)


def test_irreducible_candidate_containment_checked(separating_setup):
    grid, h, psi0, s1, times = separating_setup
    outside = qt.Region.from_interval(grid, -1.0, 5.0)
    with pytest.raises(ContractError):
        qt.irreducible_check(s1, [outside], psi0, h)


def test_two_slit_region_is_irreducible():
    grid = qt.Grid.centered(2048, 80.0)
    h = qt.Hamiltonian("free")
    slit_l = qt.make_gaussian_packet(grid, -1.0, 0.0, 0.2)
    slit_r = qt.make_gaussian_packet(grid, 1.0, 0.0, 0.2)
    far = qt.make_gaussian_packet(grid, -20.0, -12.0, 1.0)
    psi0 = (0.5 * slit_l + 0.5 * slit_r + (1 / np.sqrt(2)) * far).normalized()
    region = qt.Region.from_interval(grid, -1.6, 1.6)
    s = qt.CSet(0.0, region)
    cands = default_shrinkage_candidates(region,
                                         fractions=(0.02, 0.05, 0.25, 0.5))
    rep = qt.irreducible_check(s, cands, psi0, h, eps=0.02, lebesgue_eps=0.15)
    assert rep.irreducible
    # sub-slit knowledge is not recoverable: the single slit fails the
    # asymptotic-support premise outright
    single = qt.asymptotic_overlap_limit(
        qt.CSet(0.0, qt.Region.from_interval(grid, -1.6, 0.0)), psi0, h)
    assert single > 0.5


def test_branch_verify_constant_map_on_static_state():
    # two very wide packets spread negligibly over the horizon, so the
    # left one is a half-weight packet that simply sits still
    grid = qt.Grid.centered(512, 256.0)
    h = qt.Hamiltonian("free")
    left = qt.make_gaussian_packet(grid, -30.0, 0.0, 8.0)
    right = qt.make_gaussian_packet(grid, 30.0, 0.0, 8.0)
    psi0 = (left + right).normalized()
    region = qt.Region.left_of(grid, 0.0)
    times = np.linspace(0.0, 2.0, 5)
    tmap = qt.TimeRegionMap(times, [region] * times.size)
    rep = qt.branch_verify(tmap, psi0, h, eps=0.01)
    assert rep.passed
    assert rep.max_value <= 1e-4


def test_branch_verify_built_subtree(separating_setup):
    grid, h, psi0, s1, times = separating_setup
    sub = np.linspace(0.0, 10.0, 16)
    tmap, _ = qt.build_subtree(s1, sub, psi0, h, eps=0.02)
    rep = qt.branch_verify(tmap, psi0, h, eps=0.05)
    assert rep.passed


def test_branch_verify_swapped_map_fails(separating_setup):
    grid, h, psi0, s1, times = separating_setup
    sub = np.linspace(0.0, 10.0, 8)
    tmap, _ = qt.build_subtree(s1, sub, psi0, h, eps=0.02)
    swapped = list(tmap.regions)
    # mid-run the map jumps to the other packet's side (weight < 1/2
    # thanks to the small inset)
    swapped[-2:] = [qt.Region.right_of(grid, 0.5)] * 2
    bad = qt.TimeRegionMap(sub, swapped)
    rep = qt.branch_verify(bad, psi0, h, eps=0.05)
    assert not rep.passed
    assert rep.witnesses


def test_branch_verify_weight_precondition(crossing_setup):
    grid, h, psi0, s1, times = crossing_setup
    fat = qt.Region.from_interval(grid, -30.0, 12.0)
    tmap = qt.TimeRegionMap(np.array([0.0, 1.0]), [fat, fat])
    with pytest.raises(ContractError):
        qt.branch_verify(tmap, psi0, h)
