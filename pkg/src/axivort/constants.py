"""Geometry of the radial change of variables and its closed-form integrals.

The solver works in the strip [0, s_max) x [0, H] of the transformed radial
coordinate s = (r0^-2 - r^-2)/2 and height z.  The Jacobian weight of the
change of variables is e(s) = r0^4 / (1 - 2 s r0^2)^2, which satisfies
e(s) ds = r dr, and every slice integral the solver needs (mass, first
moment, centrifugal head) has an elementary antiderivative in s.  Those
antiderivatives, normalized to vanish at s = 0, live here so that all other
modules integrate exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError

# Reject s closer to the pole of 1/(1 - 2 s r0^2) than this; the optimal
# free boundary is bounded away from the pole, so the guard never binds
# at a solution.
POLE_GUARD = 1e-12


@dataclass(frozen=True)
class Constants:
    """Nondimensional problem parameters.

    r0: inner cylinder radius; H: domain height; Omega: rotation rate;
    beta: buoyancy ratio (gravity over reference temperature); R0: bound of
    the dual-plane box [0, R0]^2 carrying the measure.
    """

    r0: float = 0.5
    H: float = 1.0
    Omega: float = 1.0
    beta: float = 1.0
    R0: float = 4.0

    @property
    def s_max(self) -> float:
        return 1.0 / (2.0 * self.r0 ** 2)

    @property
    def s_guard(self) -> float:
        return self.s_max - POLE_GUARD


DEFAULTS = Constants()


def validate_constants(c: Constants) -> list[str]:
    """Return the list of violated parameter invariants (empty when valid)."""
    checks = [
        (c.r0 > 0, "r0 > 0"),
        (c.H > 0, "H > 0"),
        (c.Omega > 0, "Omega > 0"),
        (c.beta > 0, "beta > 0"),
        (c.R0 > 1, "R0 > 1"),
    ]
    out = [name for ok, name in checks if not ok]
    if not out and abs(c.s_max - 1.0 / (2 * c.r0 ** 2)) > 0:
        out.append("s_max == 1/(2 r0^2)")
    return out


def require_valid_constants(c: Constants) -> Constants:
    bad = validate_constants(c)
    if bad:
        raise ValidationError(f"invalid constants, violated: {', '.join(bad)}")
    return c


def _check_s(s, c: Constants, lower=0.0):
    s = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s)) or np.any(s < lower) or np.any(s > c.s_guard):
        raise ValidationError(
            f"s out of domain [0, s_max): s_max = {c.s_max}, got range "
            f"[{np.min(s)}, {np.max(s)}]"
        )
    return s


def s_of_r(r, c: Constants = DEFAULTS):
    """Map physical radius r >= r0 to the transformed coordinate s."""
    r = np.asarray(r, dtype=float)
    if np.any(r < c.r0):
        raise ValidationError(f"radius below inner cylinder r0 = {c.r0}")
    return 0.5 * (c.r0 ** -2 - r ** -2.0)


def d_of_s(s, z, c: Constants = DEFAULTS):
    """Inverse change of variables: (s, z) -> (r, z)."""
    s = _check_s(s, c)
    r = c.r0 / np.sqrt(1.0 - 2.0 * s * c.r0 ** 2)
    return r, np.asarray(z, dtype=float)


def radial_of_s(s, c: Constants = DEFAULTS):
    """Radial component of the inverse change of variables."""
    s = _check_s(s, c)
    return c.r0 / np.sqrt(1.0 - 2.0 * s * c.r0 ** 2)


def e_density(s, c: Constants = DEFAULTS):
    """Jacobian weight e(s) = r0^4 / (1 - 2 s r0^2)^2; equals r^4 along s = s(r)."""
    s = _check_s(s, c)
    return c.r0 ** 4 / (1.0 - 2.0 * s * c.r0 ** 2) ** 2


def m_centrifugal(s, c: Constants = DEFAULTS):
    """Centrifugal head m(s) = Omega^2 r0^2 / (2 (1 - 2 s r0^2))."""
    s = _check_s(s, c)
    return c.Omega ** 2 * c.r0 ** 2 / (2.0 * (1.0 - 2.0 * s * c.r0 ** 2))


def m_centrifugal_derivative(s, c: Constants = DEFAULTS):
    """m'(s) = Omega^2 r0^4 / (1 - 2 s r0^2)^2."""
    s = _check_s(s, c)
    return c.Omega ** 2 * c.r0 ** 4 / (1.0 - 2.0 * s * c.r0 ** 2) ** 2


# --- antiderivatives on [0, s), all zero at s = 0 -------------------------
#
# With u = 2 r0^2 s:
#   int e          = (r0^2/2) u/(1-u)
#   int s e        = (1/4) (u/(1-u) + log(1-u))
#   int m e        = (Omega^2 r0^4 / 8) (1/(1-u)^2 - 1)


def e_cumulative(s, c: Constants = DEFAULTS):
    """Cumulative e-mass on [0, s]."""
    s = _check_s(s, c)
    u = 2.0 * c.r0 ** 2 * s
    return (c.r0 ** 2 / 2.0) * u / (1.0 - u)


def e_cumulative_inverse(t, c: Constants = DEFAULTS):
    """Inverse of e_cumulative; maps a cumulative mass back to its s."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("cumulative mass must be nonnegative")
    u = t / (t + c.r0 ** 2 / 2.0)
    return u / (2.0 * c.r0 ** 2)


def e_s_moment(s, c: Constants = DEFAULTS):
    """Cumulative first moment: integral of s' e(s') on [0, s]."""
    s = _check_s(s, c)
    u = 2.0 * c.r0 ** 2 * s
    return 0.25 * (u / (1.0 - u) + np.log1p(-u))


def e_m_moment(s, c: Constants = DEFAULTS):
    """Cumulative centrifugal energy: integral of m(s') e(s') on [0, s]."""
    s = _check_s(s, c)
    u = 2.0 * c.r0 ** 2 * s
    return (c.Omega ** 2 * c.r0 ** 4 / 8.0) * (1.0 / (1.0 - u) ** 2 - 1.0)


def e_mass(a, b, c: Constants = DEFAULTS):
    """Exact e-mass of the interval [a, b], 0 <= a <= b < s_max."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(b < a):
        raise ValidationError("reversed interval in e_mass")
    return e_cumulative(b, c) - e_cumulative(a, c)


def flat_profile_level(c: Constants = DEFAULTS) -> float:
    """The constant boundary level whose region carries unit e-mass.

    Solves H * e_mass(0, rho) = 1, i.e. rho = 1 / (H r0^4 + 2 r0^2).
    """
    return 1.0 / (c.H * c.r0 ** 4 + 2.0 * c.r0 ** 2)


def trapezoid_weights(z_nodes: np.ndarray) -> np.ndarray:
    """Composite trapezoid weights for a uniform node set."""
    dz = z_nodes[1] - z_nodes[0] if len(z_nodes) > 1 else 1.0
    w = np.full(len(z_nodes), dz)
    w[0] = w[-1] = dz / 2.0
    return w
