"""Brute-force verifiers: dense scans, difference quotients, exact transport LPs.

Deliberately transparent and single-threaded; these exist so that every
closed-form or optimized path in the library can be checked against an
implementation too simple to be wrong at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .constants import (Constants, DEFAULTS, e_cumulative, e_m_moment, e_s_moment,
                        trapezoid_weights)
from .dualsolver import DualSolution, objective
from .exceptions import ValidationError
from .freeboundary import level_cap, pi_value
from .measures import DiscreteMeasure

MAX_LP_ATOMS = 400
MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class TransportPlan:
    """A coupling matrix with its marginals and transport cost."""

    plan: np.ndarray
    row_weights: np.ndarray
    col_weights: np.ndarray
    cost: float


def scan_argmin(psi, measure: DiscreteMeasure, z: float, n: int,
                c: Constants = DEFAULTS) -> float:
    """Smallest minimizer of the per-height cost on an (n+1)-point level scan."""
    if n < 1_000:
        raise ValidationError("scan_argmin needs n >= 1000 for meaningful resolution")
    cap = level_cap(np.asarray(psi, dtype=float), measure, c)
    levels = np.linspace(0.0, cap, n + 1)
    values = np.array([pi_value(psi, measure, lv, z, c) for lv in levels])
    return float(levels[int(np.argmin(values))])


def fd_gradient(measure: DiscreteMeasure, psi, h: float = 1e-5,
                c: Constants = DEFAULTS, nz: int = 257) -> np.ndarray:
    """Central difference quotients of the dual objective in every offset."""
    if not (1e-7 <= h <= 1e-3):
        raise ValidationError("difference step h must lie in [1e-7, 1e-3]")
    psi = np.asarray(psi, dtype=float)
    out = np.empty(len(psi))
    for i in range(len(psi)):
        e_i = np.zeros(len(psi))
        e_i[i] = h
        out[i] = (objective(measure, psi + e_i, c, nz)
                  - objective(measure, psi - e_i, c, nz)) / (2.0 * h)
    return out


def _transport_lp(points_a, weights_a, points_b, weights_b, cost_matrix):
    """Solve the balanced transportation LP; returns (optimal cost, plan)."""
    n, m = len(weights_a), len(weights_b)
    data_rows = sparse.kron(sparse.eye(n), np.ones((1, m)))
    data_cols = sparse.kron(np.ones((1, n)), sparse.eye(m))
    A_eq = sparse.vstack([data_rows, data_cols]).tocsr()
    b_eq = np.concatenate([weights_a, weights_b])
    res = linprog(cost_matrix.ravel(), A_eq=A_eq, b_eq=b_eq,
                  bounds=(0, None), method="highs")
    if not res.success:
        raise ValidationError(f"transport LP failed: {res.message}")
    plan = res.x.reshape(n, m)
    if (np.max(np.abs(plan.sum(axis=1) - weights_a)) > MARGINAL_TOL
            or np.max(np.abs(plan.sum(axis=0) - weights_b)) > MARGINAL_TOL):
        raise ValidationError("transport plan marginals deviate beyond tolerance")
    return float(res.fun), plan


def w1(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Exact 1-Wasserstein distance between two discrete measures.

    Returns (distance, TransportPlan).  Dense LP; capped at desk scale.
    """
    if mu.n_atoms > MAX_LP_ATOMS or nu.n_atoms > MAX_LP_ATOMS:
        raise ValidationError(f"w1 oracle is capped at {MAX_LP_ATOMS} atoms per side")
    cost = np.linalg.norm(mu.atoms[:, None, :] - nu.atoms[None, :, :], axis=2)
    value, plan = _transport_lp(mu.atoms, mu.weights, nu.atoms, nu.weights, cost)
    return value, TransportPlan(plan=plan, row_weights=mu.weights,
                                col_weights=nu.weights, cost=value)


@dataclass(frozen=True)
class PrimalCertificate:
    """Grid-discretized primal value with its resolution bound."""

    I_lp: float
    gap_cert: float
    delta: float
    lp_value: float
    grid: tuple


def brute_primal(measure: DiscreteMeasure, sol: DualSolution, c: Constants = DEFAULTS,
                 n_s: int = 32, n_z: int = 32) -> PrimalCertificate:
    """Transport-LP lower bound for the primal value at the solution's profile.

    The region below the profile is cut into n_z height bands times n_s
    level columns; each nonempty cell contributes its exact e-mass placed
    at its e-weighted centroid (the cost is linear in the source point, so
    centroid placement loses nothing for pure assignments).  gap_cert is
    the LP-based primal value minus the solution's dual value, certified up
    to delta = max cell half-diagonal times the largest atom norm.
    """
    solved = sol.measure
    if solved.n_atoms > 5:
        raise ValidationError("brute_primal is capped at 5 atoms")
    if not (1 <= n_s <= 64 and 1 <= n_z <= 64):
        raise ValidationError("brute_primal grid is capped at 64x64")
    rho = sol.profile.values
    z_nodes = sol.profile.z_nodes
    wz = trapezoid_weights(z_nodes)
    mass_total = float(wz @ e_cumulative(rho, c))
    if abs(mass_total - 1.0) > 1e-6:
        raise ValidationError(
            f"profile region carries e-mass {mass_total!r}; the transport problem "
            "is infeasible against a probability measure"
        )
    s_top = max(float(rho.max()), 1e-9)
    edges = np.linspace(0.0, s_top, n_s + 1)
    col_lo = np.minimum(edges[:-1][None, :], rho[:, None])
    col_hi = np.maximum(np.minimum(edges[1:][None, :], rho[:, None]), col_lo)
    mass_f = e_cumulative(col_hi, c) - e_cumulative(col_lo, c)       # (nodes, n_s)
    smom_f = e_s_moment(col_hi, c) - e_s_moment(col_lo, c)
    bands = np.minimum((np.arange(len(z_nodes)) * n_z) // len(z_nodes), n_z - 1)
    cell_mass = np.zeros((n_z, n_s))
    cell_smom = np.zeros((n_z, n_s))
    cell_zmom = np.zeros((n_z, n_s))
    for k, band in enumerate(bands):
        cell_mass[band] += wz[k] * mass_f[k]
        cell_smom[band] += wz[k] * smom_f[k]
        cell_zmom[band] += wz[k] * z_nodes[k] * mass_f[k]
    keep = cell_mass > 1e-14
    cm = cell_mass[keep]
    points = np.column_stack([cell_smom[keep] / cm, cell_zmom[keep] / cm])
    cm = cm / cm.sum()                      # absorb quadrature-level mass defect
    cost = -(points @ solved.atoms.T)
    lp_value, _ = _transport_lp(points, cm, solved.atoms, solved.weights, cost)
    ups = solved.atoms[:, 0]
    linear_term = float(solved.weights @ (ups / (2 * c.r0 ** 2) - c.Omega * np.sqrt(ups)))
    m_term = float(wz @ e_m_moment(rho, c))
    I_lp = lp_value + linear_term + m_term
    half_diag = 0.5 * float(np.hypot(s_top / n_s, c.H / n_z))
    delta = half_diag * float(np.max(np.linalg.norm(solved.atoms, axis=1)))
    return PrimalCertificate(I_lp=I_lp, gap_cert=I_lp - sol.J_value, delta=delta,
                             lp_value=lp_value, grid=(n_s, n_z))
