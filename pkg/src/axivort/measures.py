"""Discrete probability measures on the dual plane and deterministic sampling.

Measures are weighted atom clouds in [0, R0]^2.  Construction merges
coinciding atoms and renormalizes tiny weight defects; sampling of density
specifications is deterministic (quantile grids, no RNG) so that every run
is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .constants import Constants, DEFAULTS
from .exceptions import ValidationError
from .validation import check_atoms, check_weights

MERGE_TOL = 1e-12       # atoms closer than this (max-norm) are one atom
WEIGHT_SUM_TOL = 1e-9   # larger deviations of sum(w) from 1 are rejected


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted atoms in the dual plane; weights sum to one."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.atoms.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_atoms(self) -> int:
        return len(self.weights)

    def support_bound(self) -> float:
        """Smallest L with support contained in [0, L]^2."""
        return float(np.max(self.atoms)) if self.n_atoms else 0.0

    def to_dict(self) -> dict:
        return {"atoms": self.atoms.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, d: dict, c: Constants = DEFAULTS) -> "DiscreteMeasure":
        return make_measure(d["atoms"], d["weights"], c)


def _merge_duplicates(atoms: np.ndarray, weights: np.ndarray):
    """Merge atoms within MERGE_TOL (max-norm); first occurrence wins the position."""
    n = len(weights)
    order = np.lexsort((np.arange(n), atoms[:, 1], atoms[:, 0]))
    owner = np.arange(n)
    sorted_idx = order
    # neighbors in lexicographic order catch coincident atoms; the window is
    # tiny because MERGE_TOL is at rounding scale
    for a, b in zip(sorted_idx[:-1], sorted_idx[1:]):
        if np.max(np.abs(atoms[a] - atoms[b])) <= MERGE_TOL:
            keep, drop = min(a, b), max(a, b)
            while owner[keep] != keep:
                keep = owner[keep]
            owner[drop] = keep
    if np.all(owner == np.arange(n)):
        return atoms, weights
    out_idx = []
    acc = {}
    for i in range(n):
        root = i
        while owner[root] != root:
            root = owner[root]
        if root not in acc:
            acc[root] = 0.0
            out_idx.append(root)
        acc[root] += weights[i]
    new_atoms = atoms[out_idx]
    new_weights = np.array([acc[i] for i in out_idx])
    return new_atoms, new_weights


def make_measure(atoms, weights, c: Constants = DEFAULTS) -> DiscreteMeasure:
    """Validate, merge duplicates, and renormalize a weighted atom cloud."""
    atoms = check_atoms(atoms, c.R0)
    weights = check_weights(weights, len(atoms))
    total = float(weights.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ValidationError(
            f"weights sum to {total!r}, deviating from 1 by more than {WEIGHT_SUM_TOL}"
        )
    atoms, weights = _merge_duplicates(atoms.copy(), weights.copy())
    weights = weights / weights.sum()
    return DiscreteMeasure(atoms=atoms, weights=weights)


@dataclass(frozen=True)
class DensitySpec:
    """Density on a box inside [0, R0]^2: uniform or a product of beta laws.

    kind: "uniform-box" or "product-beta"; box: ((x_lo, x_hi), (y_lo, y_hi));
    shape: (a1, b1, a2, b2) beta parameters per axis (product-beta only).
    """

    kind: str
    box: tuple = ((0.0, 1.0), (0.0, 1.0))
    shape: tuple = (2.0, 2.0, 2.0, 2.0)

    def validate(self, c: Constants) -> None:
        if self.kind not in ("uniform-box", "product-beta"):
            raise ValidationError(f"unknown density kind {self.kind!r}")
        (x0, x1), (y0, y1) = self.box
        if not (0 <= x0 < x1 <= c.R0 and 0 <= y0 < y1 <= c.R0):
            raise ValidationError(
                f"density box {self.box} must have positive area inside [0, {c.R0}]^2"
            )
        if self.kind == "product-beta":
            if len(self.shape) != 4 or any(p <= 0 for p in self.shape):
                raise ValidationError("product-beta needs four positive shape parameters")

    def _axis_positions(self, axis: int, m: int) -> np.ndarray:
        """Representative points of an equal-mass split into m cells along one axis.

        Each cell gets its conditional median, i.e. the quantile at the cell's
        mass midpoint; for the uniform density these are the cell centers.
        """
        lo, hi = self.box[axis]
        mids = (np.arange(m) + 0.5) / m
        if self.kind == "uniform-box":
            q = mids
        else:
            a, b = self.shape[2 * axis], self.shape[2 * axis + 1]
            q = stats.beta.ppf(mids, a, b)
        return lo + (hi - lo) * q


def sample_density(spec: DensitySpec, n: int, c: Constants = DEFAULTS) -> DiscreteMeasure:
    """Deterministic n-atom particle approximation of a density spec.

    Cells come from a ceil(sqrt(n)) x ceil(sqrt(n)) equal-mass grid; the
    first n cells (first axis fastest) each hold one atom of weight 1/n at
    the cell's conditional median.
    """
    if n < 1:
        raise ValidationError("sample_density needs n >= 1")
    spec.validate(c)
    m = int(np.ceil(np.sqrt(n)))
    xs = spec._axis_positions(0, m)
    ys = spec._axis_positions(1, m)
    atoms = np.empty((n, 2))
    k = 0
    for iy in range(m):
        for ix in range(m):
            if k == n:
                break
            atoms[k, 0] = xs[ix]
            atoms[k, 1] = ys[iy]
            k += 1
    weights = np.full(n, 1.0 / n)
    return DiscreteMeasure(atoms=atoms, weights=weights)
