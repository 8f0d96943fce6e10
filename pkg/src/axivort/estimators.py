"""Scikit-learn style estimators wrapping the dual solver and the time stepper.

X is the (n, 2) array of dual-plane atoms; sample_weight carries the atom
masses (uniform when omitted).  Hyperparameters mirror the functional API;
fitted state lives in trailing-underscore attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .constants import Constants
from .dualsolver import duality_gap, solve_dual
from .envelope import eval_potential
from .forcing import ForcingSpec
from .measures import make_measure
from .stepping import EvolutionConfig, evolve
from .validation import check_weights


class DualPotentialSolver(TransformerMixin, BaseEstimator):
    """Fit the free-boundary dual potential of a weighted point cloud.

    After fit, ``transform`` maps primal points (s, z) to the dual-plane
    point their cell is assigned to (the optimal-transport map), and
    ``potential`` evaluates the fitted convex potential.
    """

    def __init__(self, r0=0.5, H=1.0, Omega=1.0, beta=1.0, R0=4.0,
                 nz=257, tol=1e-7, max_iter=100_000):
        self.r0 = r0
        self.H = H
        self.Omega = Omega
        self.beta = beta
        self.R0 = R0
        self.nz = nz
        self.tol = tol
        self.max_iter = max_iter

    def _constants(self) -> Constants:
        return Constants(r0=self.r0, H=self.H, Omega=self.Omega,
                         beta=self.beta, R0=self.R0)

    def fit(self, X, y=None, sample_weight=None):
        c = self._constants()
        X = np.asarray(X, dtype=float)
        if sample_weight is None:
            sample_weight = np.full(len(X), 1.0 / len(X))
        else:
            sample_weight = check_weights(sample_weight, len(X), "sample_weight")
            sample_weight = sample_weight / sample_weight.sum()
        self.measure_ = make_measure(X, sample_weight, c)
        self.solution_ = solve_dual(self.measure_, c, tol=self.tol,
                                    max_iter=self.max_iter, nz=self.nz)
        gap = duality_gap(self.measure_, self.solution_, c)
        self.psi_ = self.solution_.psi
        self.profile_ = self.solution_.profile
        self.j_dual_ = self.solution_.J_value
        self.i_primal_ = gap.I_value
        self.gap_ = gap.gap
        self.grad_norm_ = self.solution_.grad_norm
        self.n_iter_ = self.solution_.iterations
        return self

    def transform(self, X):
        """Map primal points (s, z) to the dual-plane atom of their cell."""
        check_is_fitted(self, "solution_")
        X = np.asarray(X, dtype=float)
        from .envelope import active_atom
        idx = active_atom(self.psi_, self.solution_.measure,
                          X[:, 0], X[:, 1], self._constants())
        return self.solution_.measure.atoms[idx]

    def potential(self, X):
        """Fitted potential values at primal points (s, z)."""
        check_is_fitted(self, "solution_")
        X = np.asarray(X, dtype=float)
        return eval_potential(self.psi_, self.solution_.measure,
                              X[:, 0], X[:, 1], self._constants())


class DelayedParticleFlow(BaseEstimator):
    """Run the delayed continuity-equation scheme from a weighted point cloud.

    ``forcing`` is a ForcingSpec or its dict form; ``fit`` evolves the cloud
    and exposes the trajectory and its diagnostics.
    """

    def __init__(self, forcing=None, regime="B", horizon=1.0, n_steps=20,
                 L0=None, r0=0.5, H=1.0, Omega=1.0, beta=1.0, R0=4.0,
                 nz=257, tol=1e-7, max_iter=100_000):
        self.forcing = forcing
        self.regime = regime
        self.horizon = horizon
        self.n_steps = n_steps
        self.L0 = L0
        self.r0 = r0
        self.H = H
        self.Omega = Omega
        self.beta = beta
        self.R0 = R0
        self.nz = nz
        self.tol = tol
        self.max_iter = max_iter

    def _constants(self) -> Constants:
        return Constants(r0=self.r0, H=self.H, Omega=self.Omega,
                         beta=self.beta, R0=self.R0)

    def fit(self, X, y=None, sample_weight=None):
        c = self._constants()
        X = np.asarray(X, dtype=float)
        if sample_weight is None:
            sample_weight = np.full(len(X), 1.0 / len(X))
        measure0 = make_measure(X, sample_weight, c)
        forcing = self.forcing
        if forcing is None:
            forcing = ForcingSpec(kind="zero")
        elif isinstance(forcing, dict):
            forcing = ForcingSpec.from_dict(forcing)
        L0 = self.L0
        if L0 is None:
            L0 = measure0.support_bound()
            if self.regime == "A":
                L0 = max(L0, 1.0 + 1e-9)
        cfg = EvolutionConfig(regime=self.regime, T=self.horizon, N=self.n_steps,
                              forcing=forcing, L0=float(L0), tol=self.tol,
                              max_iter=self.max_iter, nz=self.nz)
        self.trajectory_ = evolve(measure0, cfg, c)
        self.final_measure_ = self.trajectory_.measures[-1]
        self.atoms_ = self.final_measure_.atoms
        self.support_bounds_ = self.trajectory_.support_bounds
        self.w1_increments_ = self.trajectory_.w1_increments
        return self

    def predict(self, X=None):
        """Final atom positions of the fitted trajectory."""
        check_is_fitted(self, "trajectory_")
        return self.atoms_
