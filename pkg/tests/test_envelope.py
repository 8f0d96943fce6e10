import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axivort import Constants, cell_masses, eval_potential, make_measure, slice_partition
from axivort.constants import flat_profile_level, trapezoid_weights, e_cumulative
from axivort.envelope import active_atom, interval_bounds
from axivort.freeboundary import MonotoneProfile

C = Constants()


def profile_const(level, nz=257):
    z = np.linspace(0.0, C.H, nz)
    return MonotoneProfile(z_nodes=z, values=np.full(nz, float(level)))


def test_eval_potential_single_atom():
    m = make_measure([[1.0, 1.0]], [1.0], C)
    assert eval_potential([0.2], m, 0.5, 0.5, C) == pytest.approx(0.8, abs=1e-15)


def test_eval_potential_two_atoms():
    m = make_measure([[1.0, 0.5], [2.0, 0.5]], [0.5, 0.5], C)
    psi = [0.0, 1.0]
    assert eval_potential(psi, m, 0.5, 0.0, C) == pytest.approx(0.5, abs=1e-15)
    assert eval_potential(psi, m, 1.5, 0.0, C) == pytest.approx(2.0, abs=1e-15)


def test_slice_partition_breakpoint():
    m = make_measure([[1.0, 0.5], [2.0, 0.5]], [0.5, 0.5], C)
    part = slice_partition([0.0, 1.0], m, 0.7, C)
    assert len(part.intervals) == 2
    (a0, b0, i0), (a1, b1, i1) = part.intervals
    assert (i0, i1) == (0, 1)
    assert b0 == pytest.approx(1.0, abs=1e-14)
    assert a1 == b0  # exact tiling
    assert (a0, b1) == (0.0, C.s_max)


def test_slice_partition_equal_slope_tie_lowest_index():
    m = make_measure([[1.0, 0.2], [1.0, 0.8]], [0.5, 0.5], C)
    part = slice_partition([0.0, 0.3], m, 0.5, C)  # intercepts tie at 0.1
    assert len(part.intervals) == 1
    assert part.intervals[0][2] == 0


def test_slice_partition_single_atom():
    m = make_measure([[1.0, 1.0]], [1.0], C)
    part = slice_partition([0.3], m, 0.5, C)
    assert part.intervals == ((0.0, C.s_max, 0),)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_partition_matches_eval_potential(seed):
    rng = np.random.default_rng(seed)
    n = rng.integers(2, 6)
    m = make_measure(np.column_stack([rng.uniform(0, 3, n), rng.uniform(0, 1, n)]),
                     np.full(n, 1.0 / n), C)
    psi = rng.uniform(-0.5, 0.5, m.n_atoms)
    z = float(rng.uniform(0, C.H))
    part = slice_partition(psi, m, z, C)
    s_samples = rng.uniform(0.0, 1.99, 100)
    direct = eval_potential(psi, m, s_samples, np.full(100, z), C)
    via_part = np.empty(100)
    for k, s in enumerate(s_samples):
        for (a, b, idx) in part.intervals:
            if a <= s < b:
                via_part[k] = s * m.atoms[idx, 0] + z * m.atoms[idx, 1] - psi[idx]
                break
    np.testing.assert_allclose(via_part, direct, atol=1e-12)


def test_conjugacy_bound_on_grid():
    rng = np.random.default_rng(5)
    m = make_measure([[0.5, 0.3], [1.5, 0.6], [2.5, 0.9]], [0.3, 0.4, 0.3], C)
    psi = np.array([0.1, -0.2, 0.3])
    s = np.linspace(0, 1.99, 80)
    z = np.linspace(0, C.H, 40)
    S, Z = np.meshgrid(s, z)
    P = eval_potential(psi, m, S.ravel(), Z.ravel(), C)
    for i in range(m.n_atoms):
        dots = S.ravel() * m.atoms[i, 0] + Z.ravel() * m.atoms[i, 1]
        assert np.max(dots - P) <= psi[i] + 1e-9
        # equality where the atom is active
        idx = active_atom(psi, m, S.ravel(), Z.ravel(), C)
        sel = idx == i
        if sel.any():
            assert np.max(dots[sel] - P[sel]) == pytest.approx(psi[i], abs=1e-12)


def test_cell_masses_unit_flat_profile():
    m = make_measure([[1.0, 1.0]], [1.0], C)
    prof = profile_const(flat_profile_level(C))
    masses = cell_masses([0.3], m, prof, C)
    assert masses[0] == pytest.approx(1.0, abs=1e-9)


def test_cell_masses_symmetric_pair():
    # atoms symmetric under swapping coordinates, symmetric flat profile
    m = make_measure([[1.0, 0.5], [1.0000000001, 0.5]], [0.5, 0.5], C)
    prof = profile_const(1.0)
    masses = cell_masses([0.2, 0.2 + 0.00000000005], m, prof, C)
    assert masses.sum() == pytest.approx(cell_masses([0.0], make_measure([[1.0, 0.5]], [1.0], C), prof, C)[0], rel=1e-9)


def test_cell_masses_equal_for_mirror_atoms():
    # equal-slope pair with mirror heights and symmetric profile: equal masses
    m = make_measure([[0.8, 0.4], [0.8, 0.6]], [0.5, 0.5], C)
    prof = profile_const(1.2)
    masses = cell_masses([0.5 * 0.4, 0.5 * 0.6], m, prof, C)  # tie plane at z = 1/2
    assert masses[0] == pytest.approx(masses[1], abs=5e-3)  # node-quantum resolution
    assert masses.sum() == pytest.approx(prof.region_mass(C), abs=1e-12)


def test_cell_masses_zero_profile():
    m = make_measure([[1.0, 0.5], [2.0, 0.7]], [0.5, 0.5], C)
    prof = profile_const(0.0)
    np.testing.assert_array_equal(cell_masses([0.0, 0.0], m, prof, C), [0.0, 0.0])


def test_cell_masses_sum_matches_region_mass():
    rng = np.random.default_rng(11)
    n = 4
    m = make_measure(np.column_stack([rng.uniform(0, 3, n), rng.uniform(0, 1, n)]),
                     np.full(n, 0.25), C)
    psi = rng.uniform(-0.3, 0.3, n)
    z = np.linspace(0, C.H, 257)
    values = np.minimum(np.maximum.accumulate(rng.uniform(0.0, 1.9, 257)), 1.9)
    prof = MonotoneProfile(z_nodes=z, values=values)
    masses = cell_masses(psi, m, prof, C)
    assert masses.sum() == pytest.approx(prof.region_mass(C), abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(0, 10_000))
def test_interval_bounds_tile_every_slice(n, seed):
    rng = np.random.default_rng(seed)
    m = make_measure(np.column_stack([rng.uniform(0, 3.5, n), rng.uniform(0, 1, n)]),
                     np.full(n, 1.0 / n), C)
    psi = rng.uniform(-0.5, 0.5, m.n_atoms)
    z_nodes = np.linspace(0, C.H, 17)
    lo, hi = interval_bounds(m, psi, z_nodes, C)
    widths = np.maximum(hi - lo, 0.0).sum(axis=1)
    np.testing.assert_allclose(widths, C.s_guard, atol=1e-9)
    # nonempty pieces are disjoint: sorted los and his interleave
    for k in range(len(z_nodes)):
        keep = hi[k] > lo[k]
        order = np.argsort(lo[k][keep])
        his = hi[k][keep][order]
        los = lo[k][keep][order]
        assert np.all(los[1:] >= his[:-1] - 1e-12)
