"""Explicit delayed time stepping of the measure under its induced velocity.

Over each time slab the velocity is frozen at the slab's left endpoint:
solve the dual problem for the current measure, average the forcing over
the solved cells, move the atoms, repeat.  Weights never change.  Per-step
diagnostics (duality gap, transport increment, support growth) are checked
against the regime's a-priori bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import Constants, DEFAULTS
from .dualsolver import DualSolution, duality_gap, solve_dual
from .exceptions import SupportViolationError, ValidationError
from .forcing import AtomVelocities, ForcingSpec, velocity_atoms
from .measures import DiscreteMeasure
from .oracles import w1

W1_SLACK = 1e-9


@dataclass(frozen=True)
class EvolutionConfig:
    """Horizon, step count, regime, initial support bound, forcing, solver options."""

    regime: str
    T: float
    N: int
    forcing: ForcingSpec
    L0: float
    tol: float = 1e-7
    max_iter: int = 100_000
    nz: int = 257

    @property
    def tau(self) -> float:
        return self.T / self.N


@dataclass
class Trajectory:
    """Time series produced by the delayed scheme."""

    times: np.ndarray
    measures: list
    solutions: list
    velocities: list
    support_bounds: np.ndarray
    w1_increments: np.ndarray
    gaps: np.ndarray
    grad_norms: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1


def time_lipschitz_bound(M: float, L: float) -> float:
    """Speed bound M * sqrt(4 L + 1) for monotone forcing below M on [0, L]^2."""
    return M * math.sqrt(4.0 * L + 1.0)


def check_hypotheses(cfg: EvolutionConfig, c: Constants = DEFAULTS) -> list[str]:
    """All violated runnability hypotheses of the configured regime (empty = ok)."""
    out = []
    try:
        cfg.forcing.validate(c)
    except ValidationError as err:
        out.append(str(err))
        return out
    if cfg.regime not in ("A", "B"):
        out.append(f"regime must be 'A' or 'B', got {cfg.regime!r}")
        return out
    if cfg.T <= 0 or cfg.N < 1:
        out.append("horizon T must be positive and N >= 1")
    if cfg.regime not in cfg.forcing.regimes:
        out.append(
            f"forcing kind {cfg.forcing.kind!r} is not admissible in regime {cfg.regime}"
        )
    if cfg.regime == "A":
        if cfg.L0 <= 1.0:
            out.append(f"regime A needs L0 > 1, got {cfg.L0}")
        M = cfg.forcing.m_sup(c)
        growth = cfg.L0 * math.exp(6.0 * M * cfg.T)
        if growth > c.R0:
            out.append(
                f"support growth bound violated: L0*exp(6*M*T) = {growth:.6g} > R0 = {c.R0}"
            )
    else:
        if cfg.L0 <= 0.0:
            out.append(f"regime B needs L0 > 0, got {cfg.L0}")
        reach = cfg.L0 + cfg.forcing.c0(c) * cfg.T
        if not reach < c.R0:
            out.append(
                f"support reach bound violated: L0 + C0*T = {reach:.6g} must be < R0 = {c.R0}"
            )
    return out


def _advance(measure: DiscreteMeasure, vel: AtomVelocities, tau: float,
             c: Constants) -> DiscreteMeasure:
    new_atoms = measure.atoms + tau * vel.v
    if np.any(new_atoms < -1e-15) or np.any(new_atoms > c.R0):
        raise SupportViolationError(
            "an atom left the admissible box [0, R0]^2; the support-growth "
            "hypothesis failed or the forcing bound is misdeclared"
        )
    return DiscreteMeasure(atoms=np.maximum(new_atoms, 0.0),
                           weights=measure.weights.copy())


def step(measure: DiscreteMeasure, sol: DualSolution, cfg: EvolutionConfig,
         t: float, c: Constants = DEFAULTS) -> DiscreteMeasure:
    """One delayed step: move atoms with the velocity frozen at time t."""
    vel = velocity_atoms(measure, sol, cfg.forcing, t, c)
    return _advance(measure, vel, cfg.tau, c)


def evolve(measure0: DiscreteMeasure, cfg: EvolutionConfig,
           c: Constants = DEFAULTS) -> Trajectory:
    """Run the delayed scheme for N steps and validate every a-priori bound."""
    bad = check_hypotheses(cfg, c)
    if bad:
        raise ValidationError("; ".join(bad))
    if measure0.support_bound() > cfg.L0 + 1e-12:
        raise ValidationError(
            f"initial support bound {measure0.support_bound():.6g} exceeds L0 = {cfg.L0}"
        )
    tau = cfg.tau
    M = cfg.forcing.m_sup(c)
    c0_reach = cfg.forcing.c0(c)
    times = np.linspace(0.0, cfg.T, cfg.N + 1)
    measures = [measure0]
    solutions, velocities = [], []
    support_bounds = np.empty(cfg.N + 1)
    w1_increments = np.zeros(cfg.N + 1)
    gaps = np.empty(cfg.N + 1)
    grad_norms = np.empty(cfg.N + 1)
    support_bounds[0] = max(measure0.support_bound(), cfg.L0)
    psi_warm = None
    sigma = measure0
    for k in range(cfg.N + 1):
        sol = solve_dual(sigma, c, tol=cfg.tol, max_iter=cfg.max_iter,
                         nz=cfg.nz, psi0=psi_warm)
        psi_warm = sol.psi
        solutions.append(sol)
        gaps[k] = duality_gap(sigma, sol, c).gap
        grad_norms[k] = sol.grad_norm
        vel = velocity_atoms(sigma, sol, cfg.forcing, times[k], c)
        velocities.append(vel)
        if k == cfg.N:
            break
        new_sigma = _advance(sigma, vel, tau, c)
        L_prev = support_bounds[k]
        L_new = max(new_sigma.support_bound(), cfg.L0)
        if cfg.regime == "A" and L_new > L_prev * (1.0 + M * tau) ** 2 * (1 + 1e-12):
            raise SupportViolationError(
                f"step {k}: support bound {L_new:.6g} exceeds the one-step growth "
                f"limit {L_prev * (1 + M * tau) ** 2:.6g}"
            )
        displacement = tau * vel.norms.max() if len(vel.v) else 0.0
        speed_cap = time_lipschitz_bound(M, L_prev) if cfg.regime == "A" else c0_reach
        inc, _ = w1(sigma, new_sigma)
        if inc > speed_cap * tau * (1.0 + W1_SLACK) + 1e-15:
            raise SupportViolationError(
                f"step {k}: transport increment {inc:.6g} exceeds the admissible "
                f"{speed_cap * tau:.6g}"
            )
        if displacement > speed_cap * tau * (1.0 + W1_SLACK) + 1e-15:
            raise SupportViolationError(
                f"step {k}: atom displacement {displacement:.6g} exceeds the "
                f"admissible {speed_cap * tau:.6g}"
            )
        w1_increments[k + 1] = inc
        support_bounds[k + 1] = L_new
        measures.append(new_sigma)
        sigma = new_sigma
    return Trajectory(times=times, measures=measures, solutions=solutions,
                      velocities=velocities, support_bounds=support_bounds,
                      w1_increments=w1_increments, gaps=gaps, grad_norms=grad_norms)
