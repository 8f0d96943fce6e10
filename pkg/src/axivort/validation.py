"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

import numpy as np

from .exceptions import ValidationError


def as_float_array(x, name: str, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def check_atoms(X, R0: float, name: str = "atoms") -> np.ndarray:
    """Validate a (n, 2) array of dual-plane points inside [0, R0]^2."""
    atoms = as_float_array(X, name)
    if atoms.ndim == 1 and atoms.size == 2:
        atoms = atoms.reshape(1, 2)
    if atoms.ndim != 2 or atoms.shape[1] != 2:
        raise ValidationError(f"{name} must have shape (n, 2), got {atoms.shape}")
    if atoms.shape[0] == 0:
        raise ValidationError(f"{name} is empty")
    if np.any(atoms < 0) or np.any(atoms > R0):
        worst = atoms[np.argmax(np.max(np.abs(atoms - R0 / 2), axis=1))]
        raise ValidationError(
            f"{name} must lie in [0, {R0}]^2; offending point {tuple(worst)}"
        )
    return atoms


def check_weights(w, n: int, name: str = "weights") -> np.ndarray:
    weights = as_float_array(w, name, ndim=1)
    if len(weights) != n:
        raise ValidationError(f"{name} length {len(weights)} != number of atoms {n}")
    if np.any(weights < 0):
        raise ValidationError(f"{name} must be nonnegative")
    return weights


def check_primal_points(s, z, c) -> tuple[np.ndarray, np.ndarray]:
    """Validate broadcastable primal coordinates in [0, s_max) x [0, H]."""
    s = np.asarray(s, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(s < 0) or np.any(s > c.s_guard):
        raise ValidationError(f"s coordinate outside [0, s_max) with s_max = {c.s_max}")
    if np.any(z < -1e-12) or np.any(z > c.H + 1e-12):
        raise ValidationError(f"z coordinate outside [0, H] with H = {c.H}")
    return s, z
