"""
Assembly of the full Green's function and the bound-state spectrum.

The Green's function is the double sum over channels ``(q, k)`` of the
closed radial function times the angular weight, multiplied by the overall
constant of :func:`overall_prefactor`.  Bound states are the poles of the
radial Gamma prefactor ``Gamma((1 + lam)/2 - nu)``; they follow in closed
form from ``(1 + lam)/2 - nu(E) = -n_r``:

    E = N / sqrt(N^2 + alpha^2),   N = n_r + (1 + lam)/2.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .angular import SpacePoint, TruncationWarning, _check_points, _weight
from .errors import DomainError, PoleError
from .quad import EvalResult
from .radial import (
    ChannelIndex,
    PhysicalParams,
    channel_order,
    check_pole_distance,
    log_closed_form,
    pole_argument,
)
from .specfun import recip_gamma

__all__ = [
    "TruncationSpec",
    "BoundState",
    "overall_prefactor",
    "greens_function",
    "channel_sum",
    "bound_energies",
    "pole_scan",
    "pole_energy",
    "GridWarning",
]

# Smallest radius accepted by the assembly.
MIN_RADIUS = 1e-8
# Ceiling on adaptive window growth.
_MAX_SHELLS = 100
_EPS = 2.0**-52


class GridWarning(UserWarning):
    """The energy grid of a pole scan is too coarse to separate every pole."""


@dataclass(frozen=True)
class TruncationSpec:
    """Window of the channel double sum.

    ``q`` runs over ``0..q_max`` and ``k`` over ``k_center - k_max .. k_center + k_max``.
    ``k_center`` defaults to the integer nearest ``-beta0``, which keeps the
    window symmetric about the smallest ``|k + beta0|`` and makes windows for
    ``beta0`` and ``beta0 + n`` relabellings of each other.  With ``adaptive``
    the window grows by one L-shaped shell (one more ``q`` and one more ``k``
    on each side) until a shell contributes less than ``tail_tol`` of the total.
    """

    q_max: int = 20
    k_max: int = 25
    tail_tol: float = 1e-10
    adaptive: bool = False
    k_center: int | None = None

    def __post_init__(self):
        if int(self.q_max) != self.q_max or self.q_max < 0:
            raise DomainError(f"q_max must be a non-negative integer, got {self.q_max}")
        if int(self.k_max) != self.k_max or self.k_max < 0:
            raise DomainError(f"k_max must be a non-negative integer, got {self.k_max}")
        if not self.tail_tol > 0:
            raise DomainError(f"tail_tol must be > 0, got {self.tail_tol}")

    def center(self, beta0: float) -> int:
        if self.k_center is not None:
            return int(self.k_center)
        return int(math.floor(-beta0 + 0.5))


@dataclass(frozen=True)
class BoundState:
    """A pole of the radial Gamma prefactor."""

    n_r: int
    q: int
    k: int
    energy: float
    lam: float


def overall_prefactor() -> complex:
    """Constant in front of the channel sum, ``i hbar / (2 m c)`` in natural units."""
    return 0.5j


def _check_radius(pt):
    if pt.r < MIN_RADIUS:
        raise DomainError(f"radius {pt.r:g} is below {MIN_RADIUS:g}; the closed form is unvalidated there")


def _channel_terms(b, a, p, q_values, k_values, cache):
    """Contributions ``R(q, s) * weight`` for the listed channels, in order."""
    out = []
    for q in q_values:
        for k in k_values:
            s = abs(k + p.beta0)
            key = (q, s)
            if key not in cache:
                lam = channel_order(q, s, p.alpha)
                try:
                    check_pole_distance(lam, p.nu, (q, k))
                except PoleError as exc:
                    raise PoleError(str(exc), n_r=exc.n_r, channel=(q, k)) from None
                if not pole_argument(lam, p.nu) > 0:
                    n_r = int(math.floor(-pole_argument(lam, p.nu)))
                    raise PoleError(
                        f"energy {p.energy} lies above bound-state pole n_r={n_r} of channel {(q, k)}; "
                        "the closed form is only available below every pole in the window",
                        n_r=n_r, channel=(q, k))
                cache[key] = math.exp(log_closed_form(lam, p, b.r, a.r, channel=(q, k)))
            out.append(cache[key] * _weight(q, k, p.beta0, b, a))
    return out


def channel_sum(b: SpacePoint, a: SpacePoint, p: PhysicalParams, q_max: int, k_lo: int, k_hi: int) -> complex:
    """Plain channel sum over a fixed window (no prefactor, no error estimate)."""
    cache = {}
    return complex(sum(_channel_terms(b, a, p, range(q_max + 1), range(k_lo, k_hi + 1), cache)))


def greens_function(b: SpacePoint, a: SpacePoint, p: PhysicalParams,
                    trunc: TruncationSpec | None = None) -> EvalResult:
    """Truncated Green's function ``G(x_b, x_a; E)`` (complex value).

    The error estimate bounds the discarded tail by extrapolating the
    trailing q-shells and k-shells geometrically.
    """
    trunc = trunc or TruncationSpec()
    _check_points(b, a)
    _check_radius(b)
    _check_radius(a)
    center = trunc.center(p.beta0)
    state = _Window(b, a, p, center, int(trunc.q_max), int(trunc.k_max))
    shells = 0
    while True:
        total, err = state.total, state.tail_estimate()
        converged = err <= trunc.tail_tol * abs(total)
        if converged or not trunc.adaptive or shells >= _MAX_SHELLS:
            break
        shells += 1
        state.grow()
    if not converged:
        warnings.warn(
            f"channel sum not converged at q_max={state.q_max}, k_max={state.k_max}: "
            f"tail estimate {err:.2e} vs |G| {abs(total):.2e}", TruncationWarning, stacklevel=2)
    pref = overall_prefactor()
    return EvalResult(pref * total, abs(pref) * err, shells, converged)


def _tail(shells, total):
    """Geometric tail bound from the trailing shell magnitudes.

    Adjacent shells are summed in pairs before taking the ratio, which
    smooths the oscillation caused by zeros of the Jacobi factors.  Shells
    already below rounding level of ``total`` count as negligible.
    """
    if len(shells) >= 4:
        last, previous = shells[-1] + shells[-2], shells[-3] + shells[-4]
    elif len(shells) >= 2:
        last, previous = shells[-1], shells[-2]
    else:
        return shells[-1]
    if last == 0.0:
        return 0.0
    if last <= _EPS * abs(total):
        return last
    if previous == 0.0:
        return math.inf
    ratio = last / previous
    if ratio >= 1.0:
        return math.inf
    return last * max(1.0, ratio / (1.0 - ratio))


class _Window:
    """Channel window with running total and per-shell magnitudes.

    ``q_abs[q]`` sums ``|term|`` over the k-window for fixed ``q``;
    ``k_abs[j]`` sums over all ``q`` for the two columns ``center +- j``.
    Growing by one L-shaped shell touches only the new channels.
    """

    def __init__(self, b, a, p, center, q_max, k_max):
        self.b, self.a, self.p, self.center = b, a, p, center
        self.cache = {}
        self.q_max, self.k_max = q_max, k_max
        self.total = 0j
        self.q_abs = [0.0] * (q_max + 1)
        self.k_abs = [0.0] * (k_max + 1)
        self._add(range(q_max + 1), range(center - k_max, center + k_max + 1))

    def _add(self, qs, ks):
        terms = iter(_channel_terms(self.b, self.a, self.p, qs, ks, self.cache))
        for q in qs:
            for k in ks:
                t = next(terms)
                self.total += t
                self.q_abs[q] += abs(t)
                self.k_abs[abs(k - self.center)] += abs(t)

    def grow(self):
        self.q_max += 1
        self.k_max += 1
        self.q_abs.append(0.0)
        self.k_abs.append(0.0)
        c, k_max = self.center, self.k_max
        self._add(range(self.q_max), [c - k_max, c + k_max])
        self._add([self.q_max], range(c - k_max, c + k_max + 1))

    def tail_estimate(self):
        """Tail bound in ``q`` plus tail bound in ``k``."""
        return _tail(self.q_abs, self.total) + _tail(self.k_abs, self.total)


# --------------------------------------------------------------------------
# Spectrum


def pole_energy(n_r: int, lam: float, alpha: float) -> float:
    """Energy of the pole ``(1 + lam)/2 - nu(E) = -n_r``."""
    big_n = n_r + 0.5 * (1.0 + lam)
    return big_n / math.hypot(big_n, alpha)


def _check_couplings(alpha, beta0):
    if not (math.isfinite(alpha) and 0.0 < alpha < 0.5):
        raise DomainError(f"alpha must lie in (0, 1/2) for a bound-state spectrum, got {alpha}")
    if not math.isfinite(beta0):
        raise DomainError("beta0 must be finite")


def bound_energies(ch: ChannelIndex, alpha: float, beta0: float, n_r_max: int) -> list:
    """Bound-state energies ``n_r = 0..n_r_max`` of one channel, from the closed pole condition."""
    _check_couplings(alpha, beta0)
    if int(n_r_max) != n_r_max or n_r_max < 0:
        raise DomainError(f"n_r_max must be a non-negative integer, got {n_r_max}")
    lam = channel_order(ch.q, ch.shifted(beta0), alpha)
    return [BoundState(n, ch.q, ch.k, pole_energy(n, lam, alpha), lam) for n in range(int(n_r_max) + 1)]


def _pole_fn(lam, alpha):
    def f(e):
        kappa = math.sqrt((1.0 - e) * (1.0 + e))
        return recip_gamma(0.5 * (1.0 + lam) - e * alpha / kappa)
    return f


def _bisect(f, lo, hi, flo):
    """Shrink a sign-change bracket to adjacent floats (or width below 1e-15)."""
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo < 1e-15:
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid


def pole_scan(ch: ChannelIndex, alpha: float, beta0: float, e_grid) -> list:
    """Locate the poles of the radial prefactor on an energy grid.

    ``e_grid`` is an increasing sequence of energies in (0, 1).  Sign changes
    of ``E -> 1/Gamma((1+lam)/2 - nu(E))`` are refined by bisection.  Returns
    :class:`BoundState` records in increasing energy.  A :class:`GridWarning`
    is issued when consecutive detected poles skip a radial quantum number.
    """
    if not math.isfinite(beta0):
        raise DomainError("beta0 must be finite")
    if not (math.isfinite(alpha) and 0.0 <= alpha < 0.5):
        raise DomainError(f"alpha must lie in [0, 1/2), got {alpha}")
    grid = np.asarray(e_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError("e_grid needs at least two energies")
    if np.any(~((grid > 0) & (grid < 1))) or np.any(np.diff(grid) <= 0):
        raise DomainError("e_grid must be strictly increasing inside (0, 1)")
    lam = channel_order(ch.q, ch.shifted(beta0), alpha)
    f = _pole_fn(lam, alpha)
    values = [f(e) for e in grid]
    roots = []
    for i in range(grid.size - 1):
        lo, hi = float(grid[i]), float(grid[i + 1])
        flo, fhi = values[i], values[i + 1]
        if flo == 0.0:
            roots.append(lo)
        elif fhi != 0.0 and (flo > 0) != (fhi > 0):
            roots.append(_bisect(f, lo, hi, flo))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))
    states = []
    for e in roots:
        kappa = math.sqrt((1.0 - e) * (1.0 + e))
        n_r = int(round(-(0.5 * (1.0 + lam) - e * alpha / kappa)))
        states.append(BoundState(n_r, ch.q, ch.k, e, lam))
    indices = [s.n_r for s in states]
    if any(b - a != 1 for a, b in zip(indices, indices[1:])) or (indices and indices[0] != 0):
        warnings.warn(f"pole scan skipped radial quantum numbers: found {indices}", GridWarning, stacklevel=2)
    return states
