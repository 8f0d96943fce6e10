"""Per-height free-boundary minimization and the monotone boundary profile.

Each height carries a one-dimensional cost: the integral up to a trial
level of (centrifugal head minus potential) against the Jacobian weight.
Its smallest minimizer, found exactly from the quadratic stationarity
equation on each affine piece, is the free boundary at that height; a sign
condition on the heights of the atoms makes the per-height minimizers
nondecreasing, which is enforced and checked here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import (Constants, DEFAULTS, e_cumulative, e_m_moment, e_s_moment,
                        trapezoid_weights)
from .envelope import interval_bounds, _intercepts
from .exceptions import InternalConsistencyError, ValidationError
from .measures import DiscreteMeasure
from .validation import as_float_array

DEFAULT_NZ = 257
ARGMIN_TIE_TOL = 1e-12      # candidate cost values closer than this tie
MONOTONE_HARD_TOL = 1e-6    # larger profile decreases signal a bug


@dataclass(frozen=True)
class MonotoneProfile:
    """Nondecreasing boundary level sampled on a uniform height grid.

    Piecewise linear between nodes; values live in [0, s_max) bounded by the
    a-priori level cap recorded alongside.
    """

    z_nodes: np.ndarray
    values: np.ndarray
    level_cap: float = np.inf

    def __post_init__(self):
        self.z_nodes.setflags(write=False)
        self.values.setflags(write=False)
        if len(self.z_nodes) != len(self.values):
            raise ValidationError("profile nodes and values differ in length")
        if np.any(np.diff(self.values) < 0):
            raise ValidationError("profile values must be nondecreasing")

    def __call__(self, z):
        return np.interp(z, self.z_nodes, self.values)

    @property
    def z_star(self) -> float:
        """Largest height up to which the boundary sits at s = 0."""
        zero = self.values <= 0.0
        if not zero[0]:
            return 0.0
        k = int(np.argmin(zero)) if not zero.all() else len(zero) - 1
        return float(self.z_nodes[k if zero.all() else k - 1])

    def region_mass(self, c: Constants = DEFAULTS) -> float:
        """e-mass of the region below the profile (trapezoid in z)."""
        wz = trapezoid_weights(self.z_nodes)
        return float(wz @ e_cumulative(self.values, c))


def level_cap(psi, measure: DiscreteMeasure, c: Constants = DEFAULTS) -> float:
    """A-priori upper bound for every per-height minimizer.

    The potential is bounded by its value at the origin plus R0 times the
    domain extent; levels with nonpositive cost then satisfy a closed
    inequality whose threshold is the root of a function linear in the
    level after clearing the denominator.
    """
    psi = as_float_array(psi, "psi", ndim=1)
    cap_c = float(np.max(-psi)) + c.R0 * (c.s_max + c.H)
    m_at_origin = c.Omega ** 2 * c.r0 ** 2 / 2.0
    if cap_c <= m_at_origin:
        return 0.0
    r2 = c.r0 ** 2
    root = (2.0 * cap_c - c.Omega ** 2 * r2) / (r2 * (4.0 * cap_c - c.Omega ** 2 * r2))
    return float(min(root, c.s_guard))


def _segment_cost(s0, s1, a, b, c: Constants):
    """Integral of (m - a - b s) e over [s0, s1], clamped to s1 >= s0."""
    s1 = np.maximum(s0, s1)
    return ((e_m_moment(s1, c) - e_m_moment(s0, c))
            - a * (e_cumulative(s1, c) - e_cumulative(s0, c))
            - b * (e_s_moment(s1, c) - e_s_moment(s0, c)))


def _cost_at(levels, lo, hi, a, b, c: Constants):
    """Per-height cost at trial levels; levels has shape (nz, m)."""
    top = np.clip(levels[:, :, None], lo[:, None, :], hi[:, None, :])
    return _segment_cost(lo[:, None, :], top, a[:, None, :], b[None, None, :], c).sum(axis=2)


def _stationary_roots(a, b, c: Constants):
    """Roots of m(s) = a + b s per piece: a quadratic after clearing the pole factor."""
    r2 = c.r0 ** 2
    m_at_origin = c.Omega ** 2 * r2 / 2.0
    c2 = -2.0 * b * r2
    c1 = b - 2.0 * a * r2
    c0 = a - m_at_origin
    disc = c1 * c1 - 4.0 * c2 * c0
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        q = -0.5 * (c1 + np.where(c1 >= 0, 1.0, -1.0) * sq)
        r_a = np.where(ok & (c2 != 0), q / np.where(c2 == 0, 1.0, c2), np.nan)
        r_b = np.where(ok & (q != 0), c0 / np.where(q == 0, 1.0, q), np.nan)
        linear = c2 == 0
        if np.any(linear):
            r_lin = np.where(c1 != 0, -c0 / np.where(c1 == 0, 1.0, c1), np.nan)
            r_a = np.where(linear, r_lin, r_a)
            r_b = np.where(linear, np.nan, r_b)
    return r_a, r_b


def _grid_argmin(measure, psi, z_nodes, lo, hi, c: Constants):
    """Smallest/largest per-height minimizers on [0, level_cap] for all heights.

    Candidates per height: 0, the cap, piece endpoints, and stationarity
    roots inside their own piece; the cost is evaluated in closed form at
    each and ties within ARGMIN_TIE_TOL resolve to the extreme levels.
    """
    cap = level_cap(psi, measure, c)
    nz = len(z_nodes)
    a = _intercepts(measure, psi, z_nodes)
    b = measure.atoms[:, 0]
    r_a, r_b = _stationary_roots(a, np.broadcast_to(b, a.shape), c)
    hic = np.minimum(hi, cap)
    n = measure.n_atoms
    cand = np.concatenate(
        [np.zeros((nz, 1)), np.full((nz, 1), cap),
         np.minimum(lo, cap), hic, r_a, r_b], axis=1)
    valid = np.isfinite(cand) & (cand >= 0.0) & (cand <= cap)
    off = 2 + 2 * n
    for roots in (r_a, r_b):
        with np.errstate(invalid="ignore"):
            valid[:, off:off + n] &= (roots >= lo - 1e-12) & (roots <= hic + 1e-12)
        off += n
    cand = np.where(valid, cand, 0.0)
    cost = np.where(valid, _cost_at(cand, lo, hi, a, b, c), np.inf)
    best = cost.min(axis=1)
    tied = cost <= best[:, None] + ARGMIN_TIE_TOL
    rho_minus = np.where(tied, cand, np.inf).min(axis=1)
    rho_plus = np.where(tied, cand, -np.inf).max(axis=1)
    return rho_minus, rho_plus, cap, a, b


def pi_value(psi, measure: DiscreteMeasure, rho: float, z: float, c: Constants = DEFAULTS) -> float:
    """Exact per-height cost of the trial level rho at height z."""
    if not np.isfinite(rho) or rho < 0 or rho > c.s_guard:
        raise ValidationError(f"level {rho} outside [0, s_max)")
    z_nodes = np.array([float(z)])
    lo, hi = interval_bounds(measure, psi, z_nodes, c)
    psi = as_float_array(psi, "psi", ndim=1)
    a = _intercepts(measure, psi, z_nodes)
    return float(_cost_at(np.array([[float(rho)]]), lo, hi, a, measure.atoms[:, 0], c)[0, 0])


def argmin_rho(psi, measure: DiscreteMeasure, z: float, c: Constants = DEFAULTS):
    """Smallest and largest global minimizers of the per-height cost at z."""
    z_nodes = np.array([float(z)])
    lo, hi = interval_bounds(measure, psi, z_nodes, c)
    psi = as_float_array(psi, "psi", ndim=1)
    rm, rp, _, _, _ = _grid_argmin(measure, psi, z_nodes, lo, hi, c)
    return float(rm[0]), float(rp[0])


def build_profile(psi, measure: DiscreteMeasure, c: Constants = DEFAULTS,
                  nz: int = DEFAULT_NZ) -> MonotoneProfile:
    """Smallest per-height minimizers on a uniform grid, as a monotone profile."""
    z_nodes = np.linspace(0.0, c.H, nz)
    lo, hi = interval_bounds(measure, psi, z_nodes, c)
    psi = as_float_array(psi, "psi", ndim=1)
    rho_minus, _, cap, _, _ = _grid_argmin(measure, psi, z_nodes, lo, hi, c)
    drop = float(np.max(np.maximum(0.0, rho_minus[:-1] - rho_minus[1:]))) if nz > 1 else 0.0
    if drop > MONOTONE_HARD_TOL:
        raise InternalConsistencyError(
            f"per-height minimizers decrease by {drop:.3e}; the monotonicity "
            "guaranteed for nonnegative atom heights failed"
        )
    values = np.maximum.accumulate(rho_minus)
    return MonotoneProfile(z_nodes=z_nodes, values=values, level_cap=cap)


def j_value(psi, measure: DiscreteMeasure, c: Constants = DEFAULTS,
            nz: int = DEFAULT_NZ) -> float:
    """Height integral of the per-height cost at its smallest minimizers."""
    profile = build_profile(psi, measure, c, nz)
    lo, hi = interval_bounds(measure, psi, profile.z_nodes, c)
    psi = as_float_array(psi, "psi", ndim=1)
    a = _intercepts(measure, psi, profile.z_nodes)
    cost = _cost_at(profile.values[:, None], lo, hi, a, measure.atoms[:, 0], c)[:, 0]
    wz = trapezoid_weights(profile.z_nodes)
    return float(wz @ cost)
