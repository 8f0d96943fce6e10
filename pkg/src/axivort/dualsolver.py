"""Concave maximization of the dual functional over per-atom offsets.

The dual value is the measure's linear statistics minus the offsets, plus
the free-boundary cost integral; its partial derivative in the offset of an
atom is exactly that atom's active-region e-mass minus its weight, so the
maximizer balances every cell mass against its weight.  The ascent uses
Barzilai-Borwein steps with an Armijo backtracking line search on the value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import (Constants, DEFAULTS, e_cumulative, e_m_moment, e_s_moment,
                        trapezoid_weights)
from .envelope import interval_bounds, _intercepts, clipped_segments
from .exceptions import ConvergenceError, InternalConsistencyError, ValidationError
from .freeboundary import (DEFAULT_NZ, MONOTONE_HARD_TOL, MonotoneProfile,
                           _cost_at, _grid_argmin)
from .measures import DiscreteMeasure
from .validation import as_float_array

ARMIJO_C1 = 1e-4
MAX_HALVINGS = 60
GAP_HARD_LIMIT = -1e-6   # a more negative duality gap means a bug


@dataclass
class DualSolution:
    """Converged dual state: offsets, boundary profile, and diagnostics."""

    measure: DiscreteMeasure          # the solved measure (zero-weight atoms dropped)
    psi: np.ndarray
    profile: MonotoneProfile
    J_value: float
    grad_norm: float
    iterations: int
    M_bound: float
    z_star: float
    cell_masses: np.ndarray
    kept_indices: np.ndarray          # positions of the solved atoms in the input measure
    converged: bool = True
    objective_history: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "psi": self.psi.tolist(),
            "z_nodes": self.profile.z_nodes.tolist(),
            "rho": self.profile.values.tolist(),
            "J": self.J_value,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "M_bound": self.M_bound,
            "z_star": self.z_star,
            "converged": self.converged,
        }


class _Evaluation:
    """One full closed-form evaluation of the dual state at given offsets."""

    __slots__ = ("psi", "z_nodes", "rho", "rho_plus", "cap", "j", "masses", "J",
                 "grad", "lo", "hi", "seg_lo", "seg_hi", "monotone_drop")

    def __init__(self, measure, psi, z_nodes, wz, c):
        self.psi = psi
        self.z_nodes = z_nodes
        lo, hi = interval_bounds(measure, psi, z_nodes, c)
        rho_minus, rho_plus, cap, a, b = _grid_argmin(measure, psi, z_nodes, lo, hi, c)
        self.monotone_drop = float(np.max(np.maximum(0.0, rho_minus[:-1] - rho_minus[1:]))) \
            if len(rho_minus) > 1 else 0.0
        rho = np.maximum.accumulate(rho_minus)
        cost = _cost_at(rho[:, None], lo, hi, a, b, c)[:, 0]
        self.j = float(wz @ cost)
        seg_lo, seg_hi = clipped_segments(lo, hi, rho)
        self.masses = wz @ (e_cumulative(seg_hi, c) - e_cumulative(seg_lo, c))
        ups = measure.atoms[:, 0]
        first = float(measure.weights @ (ups / (2 * c.r0 ** 2)
                                         - c.Omega * np.sqrt(ups) - psi))
        self.J = first + self.j
        self.grad = self.masses - measure.weights
        self.rho, self.rho_plus, self.cap = rho, rho_plus, cap
        self.lo, self.hi, self.seg_lo, self.seg_hi = lo, hi, seg_lo, seg_hi


def _evaluate(measure, psi, z_nodes, wz, c) -> _Evaluation:
    ev = _Evaluation(measure, psi, z_nodes, wz, c)
    if ev.monotone_drop > MONOTONE_HARD_TOL:
        raise InternalConsistencyError(
            f"per-height minimizers decrease by {ev.monotone_drop:.3e} during ascent"
        )
    return ev


def objective(measure: DiscreteMeasure, psi, c: Constants = DEFAULTS,
              nz: int = DEFAULT_NZ) -> float:
    """Dual functional value at the given offsets."""
    psi = as_float_array(psi, "psi", ndim=1)
    z_nodes = np.linspace(0.0, c.H, nz)
    return _evaluate(measure, psi, z_nodes, trapezoid_weights(z_nodes), c).J


def gradient(measure: DiscreteMeasure, psi, c: Constants = DEFAULTS,
             nz: int = DEFAULT_NZ) -> np.ndarray:
    """Per-atom derivative of the dual functional: cell mass minus weight."""
    psi = as_float_array(psi, "psi", ndim=1)
    z_nodes = np.linspace(0.0, c.H, nz)
    return _evaluate(measure, psi, z_nodes, trapezoid_weights(z_nodes), c).grad


def _supported_submeasure(measure: DiscreteMeasure):
    """Drop zero-weight atoms; their offsets are undetermined off-support."""
    kept = np.flatnonzero(measure.weights > 0.0)
    if len(kept) == 0:
        raise ValidationError("measure has no atom with positive weight")
    if len(kept) == measure.n_atoms:
        return measure, np.arange(measure.n_atoms)
    sub = DiscreteMeasure(atoms=measure.atoms[kept].copy(),
                          weights=(measure.weights[kept] / measure.weights[kept].sum()).copy())
    return sub, kept


def _package(solved, psi, ev, iterations, kept, history, converged) -> DualSolution:
    profile = MonotoneProfile(z_nodes=ev.z_nodes.copy(), values=ev.rho.copy(),
                              level_cap=ev.cap)
    return DualSolution(
        measure=solved,
        psi=psi.copy(),
        profile=profile,
        J_value=ev.J,
        grad_norm=float(np.max(np.abs(ev.grad))),
        iterations=iterations,
        M_bound=ev.cap,
        z_star=profile.z_star,
        cell_masses=np.asarray(ev.masses).copy(),
        kept_indices=np.asarray(kept),
        converged=converged,
        objective_history=history,
    )


def dual_state(measure: DiscreteMeasure, psi, c: Constants = DEFAULTS,
               nz: int = DEFAULT_NZ, z_nodes=None) -> DualSolution:
    """Package the dual state at given offsets without optimizing.

    Useful for diagnostics on perturbed or externally stored offsets; the
    result is marked converged only if the gradient is at rounding scale.
    """
    solved, kept = _supported_submeasure(measure)
    psi = as_float_array(psi, "psi", ndim=1)
    psi = psi[kept] if len(psi) == measure.n_atoms else psi
    if z_nodes is None:
        z_nodes = np.linspace(0.0, c.H, nz)
    else:
        z_nodes = as_float_array(z_nodes, "z_nodes", ndim=1)
    ev = _evaluate(solved, psi, z_nodes, trapezoid_weights(z_nodes), c)
    converged = bool(np.max(np.abs(ev.grad)) <= 1e-12)
    return _package(solved, psi, ev, 0, kept, [ev.J], converged)


def solve_dual(measure: DiscreteMeasure, c: Constants = DEFAULTS, *,
               tol: float = 1e-7, max_iter: int = 100_000,
               nz: int = DEFAULT_NZ, psi0=None) -> DualSolution:
    """Maximize the dual functional; returns the solution with diagnostics.

    Raises ConvergenceError (carrying the best state) when the gradient
    cannot be pushed below tol.  That happens in particular when the node
    grid quantizes a cell-mass transfer: measures with atoms sharing the
    first coordinate, or whose boundary leaves the inner wall strictly
    inside the domain, admit mass balancing only up to one grid slice.
    """
    solved, kept = _supported_submeasure(measure)
    z_nodes = np.linspace(0.0, c.H, nz)
    wz = trapezoid_weights(z_nodes)
    if psi0 is None:
        psi = np.zeros(solved.n_atoms)
    else:
        psi0 = as_float_array(psi0, "psi0", ndim=1)
        psi = psi0[kept].copy() if len(psi0) == measure.n_atoms else psi0.copy()
    ev = _evaluate(solved, psi, z_nodes, wz, c)
    if not np.isfinite(ev.J):
        raise ValidationError("objective is not finite at the initial offsets")
    history = [ev.J]
    best_norm, best_psi, best_ev = float(np.max(np.abs(ev.grad))), psi.copy(), ev
    prev_step = None
    for iteration in range(1, max_iter + 1):
        g = ev.grad
        gnorm = float(np.max(np.abs(g)))
        if gnorm < best_norm:
            best_norm, best_psi, best_ev = gnorm, psi.copy(), ev
        if gnorm <= tol:
            return _package(solved, psi, ev, iteration - 1, kept, history, True)
        step = 1.0
        if prev_step is not None:
            dpsi, dgrad = prev_step
            denom = -float(dpsi @ dgrad)       # positive curvature along the last step
            if denom > 1e-300:
                step = float(dpsi @ dpsi) / denom
            if not np.isfinite(step) or step <= 0.0:
                step = 1.0
        gg = float(g @ g)
        noise = 1e-14 * (1.0 + abs(ev.J))      # value differences below this are float noise
        accepted = False
        for _ in range(MAX_HALVINGS):
            trial = psi + step * g
            ev_trial = _evaluate(solved, trial, z_nodes, wz, c)
            if not np.isfinite(ev_trial.J):
                step *= 0.5
                continue
            gain = ARMIJO_C1 * step * gg
            if ev_trial.J >= ev.J + gain or (gain < noise and ev_trial.J >= ev.J - noise):
                moved = bool(np.max(np.abs(trial - psi)) > 0.0)
                prev_step = (trial - psi, ev_trial.grad - g)
                psi, ev = trial, ev_trial
                history.append(ev.J)
                accepted = moved
                break
            step *= 0.5
        if not accepted:
            raise ConvergenceError(
                f"dual ascent stalled at gradient norm {best_norm:.3e} (target {tol:.1e}); "
                "cell-mass transfer is quantized at the height-grid scale for this "
                "measure: loosen tol or refine nz",
                best=_package(solved, best_psi, best_ev, iteration, kept, history, False),
                grad_norm=best_norm,
            )
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations; best gradient norm {best_norm:.3e}",
        best=_package(solved, best_psi, best_ev, max_iter, kept, history, False),
        grad_norm=best_norm,
    )


@dataclass(frozen=True)
class GapReport:
    I_value: float
    J_value: float
    gap: float


def duality_gap(measure: DiscreteMeasure, sol: DualSolution,
                c: Constants = DEFAULTS) -> GapReport:
    """Primal value of the plan induced by the solution, against its dual value.

    The plan sends each atom's clipped active region to the atom; all its
    moments are closed-form per slice and share the solution's height grid,
    so at a converged solution the gap reduces to the gradient residual.
    """
    solved = sol.measure
    z_nodes = sol.profile.z_nodes
    wz = trapezoid_weights(z_nodes)
    lo, hi = interval_bounds(solved, sol.psi, z_nodes, c)
    seg_lo, seg_hi = clipped_segments(lo, hi, sol.profile.values)
    e_seg = e_cumulative(seg_hi, c) - e_cumulative(seg_lo, c)
    s_seg = e_s_moment(seg_hi, c) - e_s_moment(seg_lo, c)
    m_seg = e_m_moment(seg_hi, c) - e_m_moment(seg_lo, c)
    ups = solved.atoms[:, 0]
    heights = solved.atoms[:, 1]
    lin = ups / (2 * c.r0 ** 2) - c.Omega * np.sqrt(ups)
    integrand = (-ups[None, :] * s_seg
                 - (z_nodes[:, None] * heights[None, :]) * e_seg
                 + lin[None, :] * e_seg + m_seg)
    I_value = float((wz[:, None] * integrand).sum())
    cost = _cost_at(sol.profile.values[:, None], lo, hi,
                    _intercepts(solved, sol.psi, z_nodes), ups, c)[:, 0]
    J_value = float(solved.weights @ (lin - sol.psi)) + float(wz @ cost)
    gap = I_value - J_value
    if gap < GAP_HARD_LIMIT:
        raise InternalConsistencyError(
            f"duality violated: primal value {I_value} below dual value {J_value} "
            f"by {-gap:.3e}"
        )
    return GapReport(I_value=I_value, J_value=J_value, gap=gap)
