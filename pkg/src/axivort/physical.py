"""Reconstruction of the physical vortex fields and boundary regularity diagnostics.

Inside the vortex the gradient of the dual potential is piecewise constant
(one atom per cell), which pins the azimuthal velocity through the squared
momentum relation, the temperature through the hydrostatic relation, and
the pressure through the potential itself.  The free boundary is the image
of the monotone profile under the inverse radial map; its inverse function
and Lipschitz bounds come from the node-level profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import (Constants, DEFAULTS, e_cumulative, m_centrifugal,
                        m_centrifugal_derivative, radial_of_s, s_of_r,
                        trapezoid_weights)
from .dualsolver import DualSolution
from .envelope import active_atom, eval_potential
from .exceptions import ValidationError
from .freeboundary import MonotoneProfile
from .measures import DiscreteMeasure

U_BRANCH = "+"  # nonnegative square root of the momentum relation (cyclonic branch)


@dataclass(frozen=True)
class PhysicalFields:
    """Vortex fields on an (r, z) grid; entries outside the vortex are NaN."""

    r: np.ndarray
    z: np.ndarray
    inside: np.ndarray        # (nz, nr) bool
    u: np.ndarray             # azimuthal velocity
    theta: np.ndarray         # temperature
    phi: np.ndarray           # pressure
    zeta: np.ndarray          # boundary radius sampled at the field grid heights
    u_branch: str = U_BRANCH


@dataclass(frozen=True)
class BoundaryDiagnostics:
    """Free-boundary regularity report."""

    z_star: float
    a_levels: np.ndarray      # sampled inverse function: levels
    a_heights: np.ndarray     # sampled inverse function: first height reaching each level
    lip_a: float
    c0_boundary: float
    bc_residual: float
    z_lower_bound_ok: bool    # all atom heights >= 1/R0 (the mechanism's hypothesis)


def zeta_of_rho(profile: MonotoneProfile, c: Constants = DEFAULTS) -> np.ndarray:
    """Boundary radius at every profile node."""
    return radial_of_s(profile.values, c)


def reconstruct_fields(sol: DualSolution, measure: DiscreteMeasure,
                       c: Constants = DEFAULTS, *, n_r: int = 65, n_z: int = 65,
                       r_max: float | None = None) -> PhysicalFields:
    """Evaluate the vortex fields on a regular (r, z) grid."""
    profile = sol.profile
    if r_max is None:
        r_max = float(radial_of_s(max(profile.values.max(), 1e-12), c))
    if r_max < c.r0:
        raise ValidationError(f"grid radius bound {r_max} below the inner radius {c.r0}")
    r = np.linspace(c.r0, r_max, n_r)
    z = np.linspace(0.0, c.H, n_z)
    s = s_of_r(r, c)
    rho_at_z = profile(z)
    inside = s[None, :] <= rho_at_z[:, None]
    rr = np.broadcast_to(r[None, :], inside.shape)
    ss = np.broadcast_to(s[None, :], inside.shape)
    zz = np.broadcast_to(z[:, None], inside.shape)
    solved = sol.measure
    idx = active_atom(sol.psi, solved, ss.ravel(), zz.ravel(), c).reshape(inside.shape)
    ups = solved.atoms[idx, 0]
    heights = solved.atoms[idx, 1]
    u = (np.sqrt(ups) - c.Omega * rr ** 2) / rr
    theta = heights / c.beta
    phi = (eval_potential(sol.psi, solved, ss.ravel(), zz.ravel(), c).reshape(inside.shape)
           - c.Omega ** 2 * rr ** 2 / 2.0)
    nan = np.where(inside, 1.0, np.nan)
    zeta = radial_of_s(np.minimum(rho_at_z, c.s_guard), c)
    return PhysicalFields(r=r, z=z, inside=inside, u=u * nan, theta=theta * nan,
                          phi=phi * nan, zeta=zeta)


def boundary_diagnostics(sol: DualSolution, measure: DiscreteMeasure,
                         c: Constants = DEFAULTS) -> BoundaryDiagnostics:
    """z-star, the sampled inverse boundary function, and Lipschitz bounds."""
    profile = sol.profile
    rho = profile.values
    z_nodes = profile.z_nodes
    z_star = profile.z_star
    # left-continuous node-level inversion restricted to heights >= z_star
    start = int(np.searchsorted(z_nodes, z_star))
    levels, first_idx = np.unique(rho[start:], return_index=True)
    heights = z_nodes[start:][first_idx]
    if levels.size == 0 or levels[0] > 0.0:
        levels = np.concatenate([[0.0], levels])
        heights = np.concatenate([[z_star], heights])
    d_lev = np.diff(levels)
    d_hgt = np.diff(heights)
    lip_a = float(np.max(d_hgt / d_lev)) if d_lev.size else 0.0
    c0_boundary = c.R0 * float(m_centrifugal_derivative(sol.M_bound, c))
    mask = rho > 1e-9
    if mask.any():
        pot = eval_potential(sol.psi, sol.measure, rho[mask], z_nodes[mask], c)
        bc_residual = float(np.max(np.abs(pot - m_centrifugal(rho[mask], c))))
    else:
        bc_residual = 0.0
    z_ok = bool(np.min(sol.measure.atoms[:, 1]) >= 1.0 / c.R0)
    return BoundaryDiagnostics(z_star=z_star, a_levels=levels, a_heights=heights,
                               lip_a=lip_a, c0_boundary=c0_boundary,
                               bc_residual=bc_residual, z_lower_bound_ok=z_ok)


def physical_mass(profile: MonotoneProfile, c: Constants = DEFAULTS) -> float:
    """Mass of the vortex region in physical coordinates, r dr dz.

    Equals the e-mass below the profile exactly, node by node, because
    (zeta^2 - r0^2)/2 is the cumulative e-mass at the boundary level.
    """
    zeta = zeta_of_rho(profile, c)
    wz = trapezoid_weights(profile.z_nodes)
    return float(wz @ ((zeta ** 2 - c.r0 ** 2) / 2.0))
