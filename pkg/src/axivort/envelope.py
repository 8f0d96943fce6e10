"""Piecewise-affine potential induced by per-atom offsets, and its slice geometry.

At height z the potential is the upper envelope of one affine function of s
per atom (slope = first atom coordinate, intercept = z * second coordinate
minus the atom's offset).  Everything downstream (free-boundary costs, cell
masses, transport moments) reduces to exact integrals over the envelope's
active intervals, so this module computes those intervals for a whole grid
of heights at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import Constants, DEFAULTS, e_cumulative, trapezoid_weights
from .exceptions import ValidationError
from .measures import DiscreteMeasure
from .validation import as_float_array, check_primal_points

# cap on the pairwise work array size; larger grids are processed in chunks
_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True)
class SlicePartition:
    """Ordered active intervals (s_lo, s_hi, atom_index) covering [0, s_max) at height z."""

    z: float
    intervals: tuple


def _intercepts(measure: DiscreteMeasure, psi: np.ndarray, z_nodes: np.ndarray) -> np.ndarray:
    return z_nodes[:, None] * measure.atoms[None, :, 1] - psi[None, :]


def interval_bounds(measure, psi, z_nodes, c: Constants = DEFAULTS):
    """Active interval [lo, hi) of every atom's affine piece at every height.

    Returns (lo, hi) arrays of shape (len(z_nodes), n_atoms); an empty piece
    has lo == hi.  Intervals are clipped to [0, s_guard] and, per height,
    the nonempty ones tile the clipped slice exactly.
    """
    psi = as_float_array(psi, "psi", ndim=1)
    if len(psi) != measure.n_atoms:
        raise ValidationError("psi length does not match the measure's atom count")
    z_nodes = as_float_array(z_nodes, "z_nodes", ndim=1)
    slopes = measure.atoms[:, 0]
    n = measure.n_atoms
    nz = len(z_nodes)
    lo = np.empty((nz, n))
    hi = np.empty((nz, n))
    step = max(1, _CHUNK_CELLS // max(n * n, 1))
    dslope = slopes[None, :] - slopes[:, None]  # (i, j): slope_j - slope_i
    upper = dslope > 0
    lower = dslope < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_dslope = np.where(dslope != 0, 1.0 / np.where(dslope == 0, 1.0, dslope), 0.0)
    for k0 in range(0, nz, step):
        k1 = min(k0 + step, nz)
        cmat = _intercepts(measure, psi, z_nodes[k0:k1])
        # piece i beats j for s <=/>= (c_i - c_j)/(slope_j - slope_i)
        bound = (cmat[:, :, None] - cmat[:, None, :]) * inv_dslope[None, :, :]
        hi[k0:k1] = np.where(upper[None], bound, np.inf).min(axis=2)
        lo[k0:k1] = np.where(lower[None], bound, -np.inf).max(axis=2)
    # among atoms of equal slope only the highest intercept is ever active;
    # ties go to the lowest atom index
    order = np.lexsort((np.arange(n), slopes))
    k = 0
    cmat = _intercepts(measure, psi, z_nodes)
    while k < n:
        j = k
        while j + 1 < n and slopes[order[j + 1]] == slopes[order[k]]:
            j += 1
        if j > k:
            grp = order[k:j + 1]
            winner = np.argmax(cmat[:, grp], axis=1)
            for gi in range(len(grp)):
                hi[winner != gi, grp[gi]] = -np.inf
        k = j + 1
    lo = np.clip(lo, 0.0, c.s_guard)
    hi = np.clip(hi, 0.0, c.s_guard)
    hi = np.maximum(hi, lo)
    return lo, hi


def eval_potential(psi, measure: DiscreteMeasure, s, z, c: Constants = DEFAULTS):
    """Value of the envelope potential at primal points (s, z); broadcasts."""
    psi = as_float_array(psi, "psi", ndim=1)
    s, z = check_primal_points(s, z, c)
    vals = (np.asarray(s)[..., None] * measure.atoms[:, 0]
            + np.asarray(z)[..., None] * measure.atoms[:, 1] - psi)
    return vals.max(axis=-1)


def active_atom(psi, measure: DiscreteMeasure, s, z, c: Constants = DEFAULTS):
    """Index of the atom attaining the envelope at (s, z); lowest index on ties."""
    psi = as_float_array(psi, "psi", ndim=1)
    s, z = check_primal_points(s, z, c)
    vals = (np.asarray(s)[..., None] * measure.atoms[:, 0]
            + np.asarray(z)[..., None] * measure.atoms[:, 1] - psi)
    return np.argmax(vals, axis=-1)  # argmax takes the first maximum


def slice_partition(psi, measure: DiscreteMeasure, z: float, c: Constants = DEFAULTS) -> SlicePartition:
    """Exact decomposition of the slice at height z into active intervals."""
    if not (0.0 <= z <= c.H):
        raise ValidationError(f"height {z} outside [0, {c.H}]")
    lo, hi = interval_bounds(measure, psi, np.array([float(z)]), c)
    lo, hi = lo[0], hi[0]
    keep = np.flatnonzero(hi > lo)
    order = keep[np.argsort(lo[keep], kind="stable")]
    intervals = []
    cursor = 0.0
    for idx in order:
        a = cursor                      # consecutive pieces share breakpoints exactly
        b = hi[idx]
        intervals.append((float(a), float(b), int(idx)))
        cursor = b
    if intervals:
        a, _, idx = intervals[-1]
        intervals[-1] = (a, float(c.s_max), idx)
    return SlicePartition(z=float(z), intervals=tuple(intervals))


def clipped_segments(lo, hi, rho):
    """Intersect per-height active intervals with the region below the profile."""
    top = np.clip(np.asarray(rho)[:, None], lo, hi)
    return lo, top


def cell_masses(psi, measure: DiscreteMeasure, profile, c: Constants = DEFAULTS) -> np.ndarray:
    """Exact e-mass of every atom's active region below the boundary profile.

    The z-integral uses the profile's own node grid (trapezoid weights); the
    s-integrals are closed-form.
    """
    lo, hi = interval_bounds(measure, psi, profile.z_nodes, c)
    seg_lo, seg_hi = clipped_segments(lo, hi, profile.values)
    wz = trapezoid_weights(profile.z_nodes)
    slice_mass = e_cumulative(seg_hi, c) - e_cumulative(seg_lo, c)
    return wz @ slice_mass
