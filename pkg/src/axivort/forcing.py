"""Forcing presets and the per-atom velocity operator.

Velocities are cell averages: each atom receives the e-weighted mean of the
forcing over its active region below the boundary, scaled by the azimuthal
prefactor times the square root of the atom's first coordinate (first
component) and the buoyancy ratio (second component).  The averages are
computed with Gauss-Legendre panels in the cumulative e-mass coordinate,
which integrates constant forcing exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import (Constants, DEFAULTS, e_cumulative, e_cumulative_inverse,
                        radial_of_s, s_of_r, trapezoid_weights)
from .dualsolver import DualSolution
from .envelope import interval_bounds, clipped_segments
from .exceptions import InternalConsistencyError, StaleSolutionError, ValidationError
from .measures import DiscreteMeasure

_GL_NODES = np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)])
_GL_WEIGHTS = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
_GL_PANELS = 2
_BOUND_SLACK = 1e-12

KINDS_A = ("linear-A", "saturating-A")
KINDS_B = ("zero", "bounded-B-constant", "bounded-B-tables")


@dataclass(frozen=True)
class ForcingSpec:
    """A forcing preset: azimuthal drive F and heat source S.

    kinds:
      zero                -- F = S = 0
      linear-A            -- F = f0 * min(r - r0, cap), S = s0 * min(z, cap)
      saturating-A        -- F = f0 * (1 - exp(-(r - r0))), S = s0 * (1 - exp(-z))
      bounded-B-constant  -- F = f0, S = s0
      bounded-B-tables    -- piecewise-linear in time through (times, f_values, s_values)
    kappa is the azimuthal velocity prefactor; m_bound optionally declares
    the sup bound of F and beta*S (computed when omitted).
    """

    kind: str
    f0: float = 0.0
    s0: float = 0.0
    cap: float = math.inf
    kappa: float = 2.0
    times: tuple = ()
    f_values: tuple = ()
    s_values: tuple = ()
    m_bound: float | None = None

    def validate(self, c: Constants) -> None:
        if self.kind not in KINDS_A + KINDS_B:
            raise ValidationError(f"unknown forcing kind {self.kind!r}")
        if self.kind == "bounded-B-tables":
            if not (len(self.times) == len(self.f_values) == len(self.s_values) >= 1):
                raise ValidationError("tables need equal-length times/f_values/s_values")
            if any(t1 <= t0 for t0, t1 in zip(self.times, self.times[1:])):
                raise ValidationError("table times must be strictly increasing")
            if min(self.f_values) < 0 or min(self.s_values) < 0:
                raise ValidationError("table forcing values must be nonnegative")
        elif self.f0 < 0 or self.s0 < 0:
            raise ValidationError("forcing amplitudes must be nonnegative")
        if self.kind in KINDS_A:
            if self.f0 <= 0 or self.s0 <= 0:
                raise ValidationError(f"{self.kind} needs strictly positive f0 and s0")
            if self.cap <= 0:
                raise ValidationError("ramp cap must be positive")
        if self.kappa <= 0:
            raise ValidationError("kappa must be positive")

    @property
    def regimes(self) -> tuple:
        # monotone presets satisfy the stronger hypotheses of both regimes
        return ("A", "B") if self.kind in KINDS_A else ("B",)

    def sup_f(self, c: Constants) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "linear-A":
            return self.f0 * self.cap
        if self.kind == "saturating-A":
            return self.f0
        if self.kind == "bounded-B-constant":
            return self.f0
        return float(max(self.f_values))

    def sup_s(self, c: Constants) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "linear-A":
            return self.s0 * min(self.cap, c.H)
        if self.kind == "saturating-A":
            return self.s0 * (1.0 - math.exp(-c.H))
        if self.kind == "bounded-B-constant":
            return self.s0
        return float(max(self.s_values))

    def m_sup(self, c: Constants) -> float:
        """Sup bound of F and beta*S (the declared value when given)."""
        computed = max(self.sup_f(c), c.beta * self.sup_s(c))
        return computed if self.m_bound is None else float(self.m_bound)

    def c0(self, c: Constants) -> float:
        """Velocity bound sqrt(R0) * |(kappa F, beta S)| for supported measures."""
        return math.sqrt(c.R0) * math.hypot(self.kappa * self.sup_f(c),
                                            c.beta * self.sup_s(c))

    def s_breakpoints(self, c: Constants) -> tuple:
        """Kinks of s -> F(r(s)) where quadrature panels must split."""
        if self.kind == "linear-A" and math.isfinite(self.cap):
            r_kink = c.r0 + self.cap
            return (float(s_of_r(r_kink, c)),) if r_kink > c.r0 else ()
        return ()

    @property
    def time_dependent(self) -> bool:
        return self.kind == "bounded-B-tables"

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "kappa": self.kappa}
        if self.kind in ("linear-A", "saturating-A", "bounded-B-constant"):
            d.update(F=self.f0, S=self.s0)
        if self.kind == "linear-A":
            d["cap"] = self.cap
        if self.kind == "bounded-B-tables":
            d.update(times=list(self.times), F=list(self.f_values), S=list(self.s_values))
        if self.m_bound is not None:
            d["M"] = self.m_bound
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ForcingSpec":
        kind = d.get("kind", "zero")
        if kind == "bounded-B-tables":
            return cls(kind=kind, kappa=float(d.get("kappa", 2.0)),
                       times=tuple(d.get("times", ())),
                       f_values=tuple(d.get("F", ())), s_values=tuple(d.get("S", ())),
                       m_bound=d.get("M"))
        return cls(kind=kind, f0=float(d.get("F", 0.0)), s0=float(d.get("S", 0.0)),
                   cap=float(d.get("cap", math.inf)), kappa=float(d.get("kappa", 2.0)),
                   m_bound=d.get("M"))


@dataclass(frozen=True)
class AtomVelocities:
    """Per-atom velocity pairs at one time; both components are nonnegative."""

    v: np.ndarray
    t: float

    def __post_init__(self):
        self.v.setflags(write=False)

    @property
    def norms(self) -> np.ndarray:
        return np.hypot(self.v[:, 0], self.v[:, 1])


def _table_value(spec: ForcingSpec, t: float, values) -> float:
    return float(np.interp(t, np.asarray(spec.times, dtype=float),
                           np.asarray(values, dtype=float)))


def eval_forcing(spec: ForcingSpec, t: float, r, z, c: Constants = DEFAULTS):
    """Evaluate (F, S) at radius r and height z; checks the declared bound."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(r < c.r0 - 1e-12):
        raise ValidationError(f"forcing evaluated below the inner radius {c.r0}")
    if spec.kind == "zero":
        F = np.zeros(np.broadcast(r, z).shape)
        S = np.zeros(np.broadcast(r, z).shape)
    elif spec.kind == "linear-A":
        F = spec.f0 * np.minimum(r - c.r0, spec.cap)
        S = spec.s0 * np.minimum(z, spec.cap)
    elif spec.kind == "saturating-A":
        F = spec.f0 * (1.0 - np.exp(-(r - c.r0)))
        S = spec.s0 * (1.0 - np.exp(-z))
    elif spec.kind == "bounded-B-constant":
        F = np.full(np.broadcast(r, z).shape, spec.f0)
        S = np.full(np.broadcast(r, z).shape, spec.s0)
    elif spec.kind == "bounded-B-tables":
        F = np.full(np.broadcast(r, z).shape, _table_value(spec, t, spec.f_values))
        S = np.full(np.broadcast(r, z).shape, _table_value(spec, t, spec.s_values))
    else:
        raise ValidationError(f"unknown forcing kind {spec.kind!r}")
    m_sup = spec.m_sup(c)
    if np.any(F > m_sup + _BOUND_SLACK) or np.any(c.beta * S > m_sup + _BOUND_SLACK):
        raise ValidationError(
            f"forcing exceeds its declared sup bound {m_sup} (kind {spec.kind!r})"
        )
    return F, S


def _cell_averages(spec: ForcingSpec, t: float, sol: DualSolution, c: Constants):
    """e-weighted means of F and S over every atom's clipped active region.

    Integrates in the cumulative e-mass coordinate with 3-point Gauss
    panels, split at the preset's radial kinks; a constant integrand is
    reproduced exactly, so degenerate presets average without error.
    """
    solved = sol.measure
    z_nodes = sol.profile.z_nodes
    wz = trapezoid_weights(z_nodes)
    lo, hi = interval_bounds(solved, sol.psi, z_nodes, c)
    seg_lo, seg_hi = clipped_segments(lo, hi, sol.profile.values)
    pts = [seg_lo, seg_hi]
    for bk in spec.s_breakpoints(c):
        pts.append(np.clip(np.full_like(seg_lo, bk), seg_lo, seg_hi))
    pts = np.sort(np.stack(pts, axis=-1), axis=-1)
    tpts = e_cumulative(pts, c)
    int_f = np.zeros(seg_lo.shape)
    int_s = np.zeros(seg_lo.shape)
    for seg in range(tpts.shape[-1] - 1):
        t0 = tpts[..., seg]
        t_width = tpts[..., seg + 1] - t0
        for p in range(_GL_PANELS):
            a = t0 + t_width * (p / _GL_PANELS)
            b = t0 + t_width * ((p + 1) / _GL_PANELS)
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            tg = mid[..., None] + half[..., None] * _GL_NODES
            sg = e_cumulative_inverse(tg, c)
            rg = radial_of_s(np.minimum(sg, c.s_guard), c)
            F, S = eval_forcing(spec, t, rg, np.broadcast_to(
                z_nodes[:, None, None], rg.shape), c)
            int_f += half * (F * _GL_WEIGHTS).sum(-1)
            int_s += half * (S * _GL_WEIGHTS).sum(-1)
    cell_f = wz @ int_f
    cell_s = wz @ int_s
    masses = wz @ (e_cumulative(seg_hi, c) - e_cumulative(seg_lo, c))
    return cell_f, cell_s, masses


def velocity_atoms(measure: DiscreteMeasure, sol: DualSolution, spec: ForcingSpec,
                   t: float, c: Constants = DEFAULTS) -> AtomVelocities:
    """Cell-averaged velocity of every atom of the measure at time t.

    Zero-weight atoms (absent from the solution) get zero velocity.
    """
    spec.validate(c)
    solved = sol.measure
    if len(sol.kept_indices) != solved.n_atoms or np.max(sol.kept_indices, initial=-1) >= measure.n_atoms:
        raise StaleSolutionError("solution does not index into the given measure")
    if not np.allclose(measure.atoms[sol.kept_indices], solved.atoms, rtol=0, atol=1e-12):
        raise StaleSolutionError("solution atoms differ from the measure's atoms")
    cell_f, cell_s, masses = _cell_averages(spec, t, sol, c)
    stale = (solved.weights > 1e-7) & (masses < 1e-8)
    if np.any(stale):
        raise StaleSolutionError(
            f"{int(stale.sum())} weighted atoms have empty cells; the solution is stale"
        )
    safe = np.maximum(masses, 1e-300)
    v1 = spec.kappa * np.sqrt(solved.atoms[:, 0]) * cell_f / safe
    v2 = c.beta * cell_s / safe
    v = np.zeros((measure.n_atoms, 2))
    v[sol.kept_indices, 0] = v1
    v[sol.kept_indices, 1] = v2
    if np.any(v < -1e-13):
        raise InternalConsistencyError("velocity component went negative")
    v = np.maximum(v, 0.0)
    c0 = spec.c0(c)
    norms = np.hypot(v[:, 0], v[:, 1])
    if np.any(norms > c0 * (1 + 1e-9) + 1e-15):
        raise InternalConsistencyError(
            f"velocity norm {norms.max():.6e} exceeds the admissible bound {c0:.6e}"
        )
    return AtomVelocities(v=v, t=float(t))
