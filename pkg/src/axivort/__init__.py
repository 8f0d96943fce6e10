"""Free-boundary dual solver and particle time stepper for forced axisymmetric vortices."""

__version__ = "0.1.0"

from .constants import Constants, DEFAULTS, e_density, e_mass, m_centrifugal, s_of_r, d_of_s, validate_constants
from .exceptions import (AxivortError, ConvergenceError, InternalConsistencyError,
                         StaleSolutionError, SupportViolationError, ValidationError)
from .measures import DensitySpec, DiscreteMeasure, make_measure, sample_density
from .envelope import SlicePartition, cell_masses, eval_potential, slice_partition
from .freeboundary import MonotoneProfile, argmin_rho, build_profile, j_value, pi_value
from .dualsolver import (DualSolution, GapReport, dual_state, duality_gap, gradient,
                         objective, solve_dual)
from .forcing import AtomVelocities, ForcingSpec, eval_forcing, velocity_atoms
from .stepping import EvolutionConfig, Trajectory, check_hypotheses, evolve, step
from .physical import (BoundaryDiagnostics, PhysicalFields, boundary_diagnostics,
                       physical_mass, reconstruct_fields, zeta_of_rho)
from .oracles import PrimalCertificate, TransportPlan, brute_primal, fd_gradient, scan_argmin, w1
from .estimators import DelayedParticleFlow, DualPotentialSolver

__all__ = [
    "Constants", "DEFAULTS", "e_density", "e_mass", "m_centrifugal", "s_of_r",
    "d_of_s", "validate_constants",
    "AxivortError", "ConvergenceError", "InternalConsistencyError",
    "StaleSolutionError", "SupportViolationError", "ValidationError",
    "DensitySpec", "DiscreteMeasure", "make_measure", "sample_density",
    "SlicePartition", "cell_masses", "eval_potential", "slice_partition",
    "MonotoneProfile", "argmin_rho", "build_profile", "j_value", "pi_value",
    "DualSolution", "GapReport", "dual_state", "duality_gap", "gradient",
    "objective", "solve_dual",
    "AtomVelocities", "ForcingSpec", "eval_forcing", "velocity_atoms",
    "EvolutionConfig", "Trajectory", "check_hypotheses", "evolve", "step",
    "BoundaryDiagnostics", "PhysicalFields", "boundary_diagnostics",
    "physical_mass", "reconstruct_fields", "zeta_of_rho",
    "PrimalCertificate", "TransportPlan", "brute_primal", "fd_gradient",
    "scan_argmin", "w1",
    "DelayedParticleFlow", "DualPotentialSolver",
]
