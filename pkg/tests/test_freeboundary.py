import numpy as np
import pytest
from scipy import integrate

from axivort import Constants, ValidationError, argmin_rho, build_profile, j_value, make_measure, pi_value
from axivort.constants import e_density, m_centrifugal
from axivort.envelope import eval_potential
from axivort.exceptions import InternalConsistencyError
from axivort.freeboundary import MonotoneProfile, level_cap

C = Constants()


def const_potential_measure(level):
    """A single origin atom whose negative offset makes the potential constant."""
    return make_measure([[0.0, 0.0]], [1.0], C), np.array([-float(level)])


def pi_const_closed_form(Cval, rho):
    """Per-height cost of a constant potential, from the closed form."""
    r2 = C.r0 ** 2
    return (C.Omega ** 2 * C.r0 ** 6 * (1 - rho * r2) * rho / (2 * (1 - 2 * rho * r2) ** 2)
            - Cval * C.r0 ** 4 * rho / (1 - 2 * rho * r2))


def quad_pi(measure, psi, rho, z):
    def f(s):
        return (m_centrifugal(s, C) - eval_potential(psi, measure, s, z, C)) * e_density(s, C)
    val, _ = integrate.quad(f, 0.0, rho, limit=300)
    return val


def test_pi_zero_level_is_zero():
    m, psi = const_potential_measure(0.25)
    assert pi_value(psi, m, 0.0, 0.4, C) == 0.0


def test_pi_constant_potential_closed_form():
    m, psi = const_potential_measure(0.25)
    got = pi_value(psi, m, 1.0, 0.3, C)
    assert got == pytest.approx(-0.0078125, abs=1e-15)
    assert got == pytest.approx(pi_const_closed_form(0.25, 1.0), abs=1e-15)
    assert got == pytest.approx(quad_pi(m, psi, 1.0, 0.3), abs=1e-11)


def test_pi_positive_when_potential_below_head():
    m, psi = const_potential_measure(0.1)
    got = pi_value(psi, m, 0.5, 0.0, C)
    assert got > 0
    assert got == pytest.approx(quad_pi(m, psi, 0.5, 0.0), abs=1e-11)


def test_pi_domain_error():
    m, psi = const_potential_measure(0.25)
    with pytest.raises(ValidationError):
        pi_value(psi, m, C.s_max, 0.0, C)


def test_argmin_constant_potential():
    m, psi = const_potential_measure(0.25)
    lo_min, hi_min = argmin_rho(psi, m, 0.5, C)
    # m(rho) = C  =>  rho = (1 - Omega^2 r0^2 / (2 C)) / (2 r0^2)
    expect = (1 - C.Omega ** 2 * C.r0 ** 2 / (2 * 0.25)) / (2 * C.r0 ** 2)
    assert lo_min == pytest.approx(expect, abs=1e-12)
    assert hi_min == pytest.approx(expect, abs=1e-12)
    # dense-scan oracle
    cap = level_cap(psi, m, C)
    grid = np.linspace(0.0, cap, 100_001)
    vals = np.array([pi_const_closed_form(0.25, r) for r in grid])
    assert abs(grid[np.argmin(vals)] - lo_min) <= 2 * cap / 100_000


def test_argmin_zero_when_potential_below_head():
    for level in (0.1, 0.125):
        m, psi = const_potential_measure(level)
        assert argmin_rho(psi, m, 0.2, C) == (0.0, 0.0)


def test_level_cap_is_the_exact_threshold():
    m = make_measure([[1.0, 0.5]], [1.0], C)
    psi = np.array([0.3])
    cap = level_cap(psi, m, C)
    r2 = C.r0 ** 2
    cap_c = 0.3 * -1 + C.R0 * (C.s_max + C.H)  # max(-psi) + R0 (s_max + H)
    g = lambda rho: C.Omega ** 2 * r2 * (1 - rho * r2) / (2 * (1 - 2 * rho * r2))
    assert g(cap) == pytest.approx(cap_c, rel=1e-12)
    # any level with nonpositive cost must lie below the cap (scan check)
    grid = np.linspace(0.0, C.s_guard - 1e-6, 20_000)
    cost = np.array([pi_const_closed_form(cap_c, r) for r in grid])
    assert grid[cost <= 0].max() <= cap + 1e-6


def test_build_profile_single_atom_vs_scan():
    m = make_measure([[1.0, 0.45]], [1.0], C)
    psi = np.array([-0.1])
    prof = build_profile(psi, m, C, nz=33)
    cap = prof.level_cap
    for k in (0, 16, 32):
        z = prof.z_nodes[k]
        grid = np.linspace(0.0, cap, 200_001)
        vals = np.array([pi_value(psi, m, r, z, C) for r in
                         np.linspace(0.0, cap, 41)])  # coarse sanity only
        dense = np.linspace(0.0, cap, 200_001)
        # closed-form cost for the affine potential via pi_value on a dense subset
        sub = dense[:: 1000]
        vs = np.array([pi_value(psi, m, r, z, C) for r in sub])
        assert abs(sub[np.argmin(vs)] - prof.values[k]) <= 2 * cap / len(sub) * 1.5
    assert np.all(np.diff(prof.values) >= 0)


def test_build_profile_constant_when_no_height_dependence():
    m, psi = const_potential_measure(0.25)
    prof = build_profile(psi, m, C, nz=65)
    np.testing.assert_allclose(prof.values, prof.values[0], atol=1e-14)


def test_build_profile_two_atom_monotone_and_optimal():
    m = make_measure([[1.0, 0.5], [2.0, 0.5]], [0.5, 0.5], C)
    psi = np.array([0.0, 1.0])
    prof = build_profile(psi, m, C)
    assert np.all(np.diff(prof.values) >= 0)
    # free-boundary optimality where the level is interior
    mask = prof.values > 1e-9
    pot = eval_potential(psi, m, prof.values[mask], prof.z_nodes[mask], C)
    assert np.max(np.abs(pot - m_centrifugal(prof.values[mask], C))) <= 1e-8


def test_global_minimality_on_random_levels():
    rng = np.random.default_rng(9)
    m = make_measure([[0.7, 0.35], [1.3, 0.3]], [0.3, 0.7], C)
    psi = rng.uniform(-0.2, 0.2, 2)
    prof = build_profile(psi, m, C, nz=17)
    cap = prof.level_cap
    for k in range(len(prof.z_nodes)):
        z = prof.z_nodes[k]
        base = pi_value(psi, m, prof.values[k], z, C)
        trial = rng.uniform(0.0, cap, 200)
        vals = np.array([pi_value(psi, m, r, z, C) for r in trial])
        assert np.all(base <= vals + 1e-12)


def test_j_constant_potential():
    m, psi = const_potential_measure(0.25)
    assert j_value(psi, m, C) == pytest.approx(C.H * -0.0078125, abs=1e-12)


def test_j_zero_when_potential_below_head():
    m, psi = const_potential_measure(0.1)
    assert j_value(psi, m, C) == 0.0


def test_j_single_atom_vs_two_dimensional_scan():
    m = make_measure([[0.9, 0.4]], [1.0], C)
    psi = np.array([0.2])
    got = j_value(psi, m, C, nz=257)
    z = np.linspace(0.0, C.H, 257)
    cap = level_cap(psi, m, C)
    grid = np.linspace(0.0, cap, 4001)
    total = 0.0
    w = np.full(257, z[1] - z[0]); w[0] = w[-1] = (z[1] - z[0]) / 2
    for k, zk in enumerate(z):
        vals = np.array([pi_value(psi, m, r, zk, C) for r in grid])
        total += w[k] * vals.min()
    assert got == pytest.approx(total, abs=1e-6)


def test_profile_type_invariants():
    z = np.linspace(0, 1, 5)
    with pytest.raises(ValidationError):
        MonotoneProfile(z_nodes=z, values=np.array([0.0, 0.2, 0.1, 0.3, 0.4]))
    prof = MonotoneProfile(z_nodes=z, values=np.array([0.0, 0.0, 0.1, 0.3, 0.4]))
    assert prof.z_star == pytest.approx(0.25)
    assert prof(0.125) == pytest.approx(0.0)
    prof2 = MonotoneProfile(z_nodes=z, values=np.array([0.1, 0.2, 0.2, 0.3, 0.4]))
    assert prof2.z_star == 0.0
    all_zero = MonotoneProfile(z_nodes=z, values=np.zeros(5))
    assert all_zero.z_star == 1.0


def test_monotonicity_violation_raises():
    # atoms with negative heights are rejected upstream, so force the check
    # through a profile built from a corrupted argmin: simulate by direct call
    z = np.linspace(0, 1, 3)
    with pytest.raises(ValidationError):
        MonotoneProfile(z_nodes=z, values=np.array([0.5, 0.2, 0.1]))


def test_twist_comparison_across_heights():
    m = make_measure([[0.7, 0.35], [1.3, 0.3]], [0.3, 0.7], C)
    psi = np.array([0.05, -0.1])
    lows = []
    highs = []
    for z in np.linspace(0, C.H, 9):
        lo_min, hi_min = argmin_rho(psi, m, z, C)
        lows.append(lo_min)
        highs.append(hi_min)
    lows = np.array(lows); highs = np.array(highs)
    assert np.all(np.diff(lows) >= -1e-12)
    # rho_plus(z1) <= rho_minus(z2) for z1 < z2
    assert np.all(highs[:-1] <= lows[1:] + 1e-12)
