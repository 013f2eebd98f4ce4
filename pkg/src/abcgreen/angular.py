"""
Angular channel weights.

For channel ``(q, k)`` with effective index ``s = |k + beta0|`` the weight is

    (2(q+s)+1)/(4 pi) * Gamma(1+q) Gamma(1+q+2s) / Gamma(1+q+s)^2
    * exp(i k (phi_b - phi_a))
    * (cos(tb/2) sin(tb/2) cos(ta/2) sin(ta/2))^s
    * P_q^{(s,s)}(cos tb) P_q^{(s,s)}(cos ta)

At ``beta0 = 0`` the channels with ``q + |k| = l`` regroup into
``(2l+1)/(4 pi) P_l(cos gamma)`` (addition theorem); a flux shift
``beta0 -> beta0 + n`` is a relabelling ``k -> k - n`` and only multiplies
window sums by ``exp(-i n (phi_b - phi_a))``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

from .errors import DomainError
from .specfun import jacobi_p

__all__ = [
    "SpacePoint",
    "TruncationWarning",
    "angular_weight",
    "log_angular_magnitude",
    "fixed_l_sum",
    "cos_angle_between",
    "window_sum",
    "gauge_shift_check",
]

_LOG_4PI = math.log(4.0 * math.pi)


class TruncationWarning(UserWarning):
    """A truncated channel sum may not have converged."""


@dataclass(frozen=True)
class SpacePoint:
    """Spherical coordinates of an endpoint.

    ``theta`` must avoid the poles 0 and pi, where the half-angle factors
    vanish.  ``phi`` may be any real number; only its value modulo 2 pi
    matters.
    """

    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r > 0):
            raise DomainError(f"radius must be positive and finite, got {self.r}")
        if not (0.0 < self.theta < math.pi):
            raise DomainError(f"theta must lie strictly inside (0, pi), got {self.theta}")
        if not math.isfinite(self.phi):
            raise DomainError(f"phi must be finite, got {self.phi}")

    @property
    def log_half_angles(self) -> float:
        """``ln(cos(theta/2) sin(theta/2))``."""
        return math.log(math.cos(0.5 * self.theta)) + math.log(math.sin(0.5 * self.theta))


def log_bracket(q: int, s: float) -> float:
    """ln of ``(2(q+s)+1)/(4 pi) Gamma(1+q) Gamma(1+q+2s) / Gamma(1+q+s)^2``."""
    return (math.log(2.0 * (q + s) + 1.0) - _LOG_4PI + math.lgamma(1.0 + q)
            + math.lgamma(1.0 + q + 2.0 * s) - 2.0 * math.lgamma(1.0 + q + s))


def log_angular_magnitude(q: int, s: float, b: SpacePoint, a: SpacePoint) -> float:
    """ln of the bracket times the half-angle factors (no Jacobi, no phase)."""
    return log_bracket(q, s) + s * (b.log_half_angles + a.log_half_angles)


def angular_weight(ch, p, b: SpacePoint, a: SpacePoint) -> complex:
    """Complex angular factor of channel ``ch`` for flux ``p.beta0``."""
    _check_points(b, a)
    return _weight(ch.q, ch.k, p.beta0, b, a)


def _check_points(*points):
    for pt in points:
        if not isinstance(pt, SpacePoint):
            raise DomainError(f"expected a SpacePoint, got {type(pt).__name__}")


def _weight(q, k, beta0, b, a):
    s = abs(k + beta0)
    mag = math.exp(log_angular_magnitude(q, s, b, a))
    jac = jacobi_p(q, s, math.cos(b.theta)) * jacobi_p(q, s, math.cos(a.theta))
    return mag * jac * cmath.exp(1j * k * (b.phi - a.phi))


def cos_angle_between(b: SpacePoint, a: SpacePoint) -> float:
    return (math.cos(b.theta) * math.cos(a.theta)
            + math.sin(b.theta) * math.sin(a.theta) * math.cos(b.phi - a.phi))


def fixed_l_sum(l: int, b: SpacePoint, a: SpacePoint) -> complex:
    """Sum of the ``beta0 = 0`` weights over ``q + |k| = l``."""
    total = 0j
    for k in range(-l, l + 1):
        total += _weight(l - abs(k), k, 0.0, b, a)
    return total


def window_sum(beta0: float, b: SpacePoint, a: SpacePoint, q_max: int, k_lo: int, k_hi: int,
               radial=None) -> complex:
    """Sum of weights (optionally times ``radial(q, s)``) over ``q <= q_max``, ``k_lo <= k <= k_hi``.

    Accumulation runs over ``q`` then ``k`` in increasing order.
    """
    total = 0j
    for q in range(q_max + 1):
        for k in range(k_lo, k_hi + 1):
            w = _weight(q, k, beta0, b, a)
            if radial is not None:
                w *= radial(q, abs(k + beta0))
            total += w
    return total


def gauge_shift_check(p, b: SpacePoint, a: SpacePoint, n: int, q_max: int = 20, k_max: int = 25,
                      radial=None, tail_tol: float = 1e-8):
    """Window sums for flux ``beta0`` and ``beta0 + n`` over matched windows.

    The first sum runs over ``|k| <= k_max``; the second over the window
    shifted by ``-n``, so that the relabelling ``k -> k - n`` maps one onto
    the other.  The pair satisfies ``second = first * exp(-i n (phi_b - phi_a))``.
    A :class:`TruncationWarning` is issued when the outermost winding numbers
    still contribute more than ``tail_tol`` of the total.
    """
    _check_points(b, a)
    if int(n) != n:
        raise DomainError(f"flux shift must be an integer, got {n}")
    n = int(n)
    beta0 = p.beta0
    first = window_sum(beta0, b, a, q_max, -k_max, k_max, radial)
    second = window_sum(beta0 + n, b, a, q_max, -k_max - n, k_max - n, radial)
    edge = 0j
    for q in range(q_max + 1):
        for k in (-k_max, k_max):
            w = _weight(q, k, beta0, b, a)
            if radial is not None:
                w *= radial(q, abs(k + beta0))
            edge += abs(w)
    if abs(first) > 0 and abs(edge) > tail_tol * abs(first):
        warnings.warn(
            f"outermost winding numbers |k| = {k_max} contribute {abs(edge) / abs(first):.2e} "
            "of the window sum; widen k_max", TruncationWarning, stacklevel=2)
    return first, second
