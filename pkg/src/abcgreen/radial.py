"""
Radial Green's functions of a single (q, k) channel.

Natural units hbar = c = m = 1 throughout: energies in units of the rest
energy, lengths in Compton wavelengths.  With ``E`` the energy,

* ``kappa = sqrt(1 - E^2)`` is the decay constant,
* ``nu = E alpha / kappa`` is the first Whittaker index,
* ``lam = sqrt((2(q + |k + beta0|) + 1)^2 - 4 alpha^2)`` is the channel order.

The free channel kernel g0 has two integral representations (proper time S
and the hyperbolic variable z).  The n-th perturbative term is a z-moment of
the kernel ``h(z)``; summing the series with coupling ``E alpha`` turns the
moments into a single ``exp(2 nu z)``-weighted integral, which in turn has a
closed Whittaker form.  All three routes are exposed so they can be played
against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PoleError
from .quad import EvalResult, QuadSpec, integrate_moment, integrate_semiinf
from .specfun import bessel_i_log, log_whittaker_m, log_whittaker_w

__all__ = [
    "PhysicalParams",
    "ChannelIndex",
    "SeriesTable",
    "h_kernel",
    "g0_proper_time",
    "g0_z_rep",
    "g_n_closed",
    "radial_series",
    "radial_series_converged",
    "radial_integral",
    "radial_closed",
    "log_radial_closed",
    "log_closed_form",
    "pole_argument",
    "check_pole_distance",
    "POLE_EXCLUSION",
]

# Distance to a Gamma pole below which evaluation is refused.
POLE_EXCLUSION = 1e-8
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class PhysicalParams:
    """Couplings and energy of the Aharonov-Bohm-Coulomb problem.

    ``alpha`` is the Coulomb coupling, ``beta0`` the dimensionless flux
    parameter and ``energy`` the energy in units of the rest energy.
    ``alpha = 0`` is accepted so that zero-coupling reductions can be
    evaluated directly.
    """

    alpha: float
    beta0: float
    energy: float

    def __post_init__(self):
        for name in ("alpha", "beta0", "energy"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not 0.0 <= self.alpha < 0.5:
            raise DomainError(
                f"alpha must lie in [0, 1/2) (supercritical coupling gives an imaginary order), got {self.alpha}")
        if not 0.0 < self.energy < 1.0:
            raise DomainError(f"energy must lie in (0, 1) in units of the rest energy, got {self.energy}")

    @property
    def kappa(self) -> float:
        return math.sqrt((1.0 - self.energy) * (1.0 + self.energy))

    @property
    def calE(self) -> float:
        """Pseudo-energy ``(1 - E^2)/2`` conjugate to proper time."""
        return 0.5 * (1.0 - self.energy) * (1.0 + self.energy)

    @property
    def coupling(self) -> float:
        """Expansion parameter ``E alpha`` of the perturbation series."""
        return self.energy * self.alpha

    @property
    def nu(self) -> float:
        return self.energy * self.alpha / self.kappa

    @property
    def flux(self) -> float:
        """Magnetic flux of the tube, ``Omega = 4 pi g`` with ``beta0 = -2 e g`` and ``e = sqrt(alpha)``."""
        if self.alpha == 0:
            raise DomainError("flux is undefined at zero charge (alpha = 0)")
        return -2.0 * math.pi * self.beta0 / math.sqrt(self.alpha)

    def with_energy(self, energy: float) -> "PhysicalParams":
        return PhysicalParams(self.alpha, self.beta0, energy)


@dataclass(frozen=True)
class ChannelIndex:
    """Principal index ``q >= 0`` and winding number ``k``."""

    q: int
    k: int

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 0:
            raise DomainError(f"q must be a non-negative integer, got {self.q}")
        if int(self.k) != self.k:
            raise DomainError(f"k must be an integer, got {self.k}")

    def shifted(self, beta0: float) -> float:
        """Effective azimuthal index ``|k + beta0|``."""
        return abs(self.k + beta0)

    def lam(self, p: PhysicalParams) -> float:
        """Channel order ``sqrt((2(q + |k+beta0|) + 1)^2 - 4 alpha^2)``."""
        return channel_order(self.q, self.shifted(p.beta0), p.alpha)


def channel_order(q, s, alpha):
    l2 = 2.0 * (q + s) + 1.0
    # (l2 - 2a)(l2 + 2a) keeps precision when alpha is tiny
    return math.sqrt((l2 - 2.0 * alpha) * (l2 + 2.0 * alpha))


def pole_argument(lam: float, nu: float) -> float:
    """Argument ``(1 + lam)/2 - nu`` of the Gamma prefactor."""
    return 0.5 * (1.0 + lam) - nu


def check_pole_distance(lam, nu, channel=None):
    """Raise :class:`PoleError` when the Gamma prefactor sits on or next to a pole."""
    arg = pole_argument(lam, nu)
    nearest = round(arg)
    if nearest <= 0 and abs(arg - nearest) < POLE_EXCLUSION:
        raise PoleError(
            f"energy within {POLE_EXCLUSION:g} of bound-state pole n_r={-nearest}"
            + (f" in channel {channel}" if channel is not None else ""),
            n_r=-nearest, channel=channel)


def _require_convergent(lam, nu, channel):
    if not nu < 0.5 * (1.0 + lam):
        raise PoleError(
            f"nu = {nu:.12g} reaches the first pole (1+lam)/2 = {0.5 * (1 + lam):.12g}; "
            "the moment series and its integral diverge", n_r=0, channel=channel)


def _require_radii(rb, ra):
    for name, r in (("rb", rb), ("ra", ra)):
        if not (math.isfinite(r) and r > 0):
            raise DomainError(f"{name} must be a positive finite radius, got {r}")


def _log_sinh(z):
    with np.errstate(over="ignore"):
        return np.where(z > 20.0, z - _LN2 + np.log1p(-np.exp(-2.0 * np.minimum(z, 700.0))),
                        np.log(np.sinh(np.minimum(z, 20.0))))


def _log_bessel_scaled_from_log(order, log_x):
    """ln(exp(-x) I_order(x)) given ln x; survives x underflowing to zero."""
    out = np.empty_like(log_x)
    tiny = log_x < -600.0
    if tiny.any():
        out[tiny] = order * (log_x[tiny] - _LN2) - math.lgamma(order + 1.0)
    if (~tiny).any():
        out[~tiny] = bessel_i_log(order, np.exp(log_x[~tiny]), scaled=True)
    return out


def _log_h(lam, kappa, rb, ra, z):
    z = np.asarray(z, dtype=float)
    log_sh = _log_sinh(z)
    sq = math.sqrt(rb * ra)
    # -kappa (rb + ra) coth z + x, with x the Bessel argument, rearranged to avoid
    # cancelling two O(1/z) terms as z -> 0
    with np.errstate(divide="ignore", over="ignore"):
        expo = (-kappa * (math.sqrt(rb) - math.sqrt(ra)) ** 2 / np.tanh(z)
                - 2.0 * kappa * sq * np.tanh(0.5 * z))
    log_x = math.log(2.0 * kappa * sq) - log_sh
    return -log_sh + expo + _log_bessel_scaled_from_log(lam, log_x)


def h_kernel(ch: ChannelIndex, p: PhysicalParams, rb: float, ra: float, z):
    """``(ln h(z), sign)`` for the moment kernel

    ``h(z) = exp(-kappa (rb + ra) coth z) I_lam(2 kappa sqrt(rb ra) / sinh z) / sinh z``.

    Vectorised over ``z``; the sign is always +1.
    """
    _require_radii(rb, ra)
    za = np.asarray(z, dtype=float)
    if np.any(~(za > 0)) or np.any(~np.isfinite(za)):
        raise DomainError("h_kernel needs finite z > 0")
    logh = _log_h(ch.lam(p), p.kappa, rb, ra, za)
    if np.ndim(z) == 0:
        return float(logh), 1.0
    return logh, np.ones_like(logh)


def _kernel_fn(lam, kappa, rb, ra):
    return lambda z: _log_h(lam, kappa, rb, ra, z)


def g0_proper_time(ch: ChannelIndex, p: PhysicalParams, rb: float, ra: float,
                   spec: QuadSpec | None = None) -> EvalResult:
    """Free channel kernel from the proper-time integral

    ``int_0^inf dS/S exp(-calE S - (rb^2 + ra^2)/(2S)) I_{lam/2}(rb ra / S)``.
    """
    _require_radii(rb, ra)
    order = 0.5 * ch.lam(p)
    cal_e = p.calE
    gap = 0.5 * (rb - ra) ** 2
    prod = rb * ra

    def log_integrand(s):
        # exp(-(rb^2+ra^2)/2S) I(rb ra/S) = exp(-(rb-ra)^2/2S) * [exp(-x) I(x)]
        log_s = np.log(s)
        return (-log_s - cal_e * s - gap / s
                + _log_bessel_scaled_from_log(order, math.log(prod) - log_s))

    return integrate_semiinf(log_integrand, spec, log_form=True)


def g0_z_rep(ch: ChannelIndex, p: PhysicalParams, rb: float, ra: float,
             spec: QuadSpec | None = None) -> EvalResult:
    """Free channel kernel from the hyperbolic representation ``2 int_0^inf h(z) dz``."""
    _require_radii(rb, ra)
    res = integrate_semiinf(_kernel_fn(ch.lam(p), p.kappa, rb, ra), spec, log_form=True)
    return res.scaled(2.0)


def g_n_closed(ch: ChannelIndex, p: PhysicalParams, n: int, rb: float, ra: float,
               spec: QuadSpec | None = None) -> EvalResult:
    """n-th order radial term ``2^(n+1)/n! kappa^-n int_0^inf z^n h(z) dz``."""
    if int(n) != n or n < 0:
        raise DomainError(f"perturbation order must be a non-negative integer, got {n}")
    _require_radii(rb, ra)
    lam = ch.lam(p)
    _require_convergent(lam, p.nu, (ch.q, ch.k))
    res = integrate_moment(_kernel_fn(lam, p.kappa, rb, ra), int(n), spec, log_form=True)
    factor = math.exp((n + 1) * _LN2 - math.lgamma(n + 1.0) - n * math.log(p.kappa))
    return res.scaled(factor)


@dataclass
class SeriesTable:
    """Partial sums of the perturbation series for one channel.

    ``terms[n]`` is ``(E alpha)^n g^(n) / sqrt(rb ra)`` and
    ``partial_sums[n]`` the sum of terms 0..n.  ``remainder`` is the
    magnitude of the last term, used as a truncation proxy.
    """

    terms: list = field(default_factory=list)
    partial_sums: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def remainder(self) -> float:
        return abs(self.terms[-1]) if self.terms else math.inf

    @property
    def value(self) -> float:
        return self.partial_sums[-1]

    @property
    def ratios(self) -> list:
        """``terms[n] / terms[n-1]`` (None where undefined)."""
        out = [None]
        for prev, cur in zip(self.terms, self.terms[1:]):
            out.append(cur / prev if prev != 0 else None)
        return out


def _series_term(ch, p, n, rb, ra, spec):
    if n > 0 and p.coupling == 0.0:
        return 0.0, 0.0
    g = g_n_closed(ch, p, n, rb, ra, spec)
    scale = p.coupling**n / math.sqrt(rb * ra)
    return g.value * scale, g.err_estimate * abs(scale)


def radial_series(ch: ChannelIndex, p: PhysicalParams, rb: float, ra: float, n_max: int,
                  spec: QuadSpec | None = None) -> SeriesTable:
    """Partial sums ``S_0 .. S_{n_max}`` of the channel Green's function."""
    if int(n_max) != n_max or n_max < 0:
        raise DomainError(f"n_max must be a non-negative integer, got {n_max}")
    table = SeriesTable()
    total = 0.0
    for n in range(int(n_max) + 1):
        term, err = _series_term(ch, p, n, rb, ra, spec)
        total += term
        table.terms.append(term)
        table.partial_sums.append(total)
        table.errors.append(err)
    return table


def radial_series_converged(ch: ChannelIndex, p: PhysicalParams, rb: float, ra: float,
                            remainder_tol: float = 1e-8, n_limit: int = 200,
                            spec: QuadSpec | None = None) -> SeriesTable:
    """Extend the series until the last term is below ``remainder_tol`` relative to the sum."""
    table = SeriesTable()
    total = 0.0
    for n in range(n_limit + 1):
        term, err = _series_term(ch, p, n, rb, ra, spec)
        total += term
        table.terms.append(term)
        table.partial_sums.append(total)
        table.errors.append(err)
        if abs(term) <= remainder_tol * abs(total):
            return table
    return table


def radial_integral(ch: ChannelIndex, p: PhysicalParams, rb: float, ra: float,
                    spec: QuadSpec | None = None) -> EvalResult:
    """Resummed channel function ``2/sqrt(rb ra) int_0^inf exp(2 nu z) h(z) dz``.

    Defined only below the first pole, ``nu < (1 + lam)/2``.
    """
    _require_radii(rb, ra)
    lam = ch.lam(p)
    nu = p.nu
    _require_convergent(lam, nu, (ch.q, ch.k))
    kernel = _kernel_fn(lam, p.kappa, rb, ra)
    res = integrate_semiinf(lambda z: 2.0 * nu * z + kernel(z), spec, log_form=True)
    return res.scaled(2.0 / math.sqrt(rb * ra))


def log_radial_closed(ch: ChannelIndex, p: PhysicalParams, rb: float, ra: float) -> float:
    """Natural log of :func:`radial_closed` (the value is positive)."""
    return log_closed_form(ch.lam(p), p, rb, ra, channel=(ch.q, ch.k))


def log_closed_form(lam: float, p: PhysicalParams, rb: float, ra: float, channel=None) -> float:
    """ln of the closed Whittaker form for channel order ``lam``."""
    _require_radii(rb, ra)
    nu = p.nu
    kappa = p.kappa
    check_pole_distance(lam, nu, channel)
    a = pole_argument(lam, nu)
    if not a > 0:
        raise DomainError(
            f"closed form needs (1+lam)/2 - nu > 0 (got {a:.6g}); Whittaker W with a <= 0 is not implemented")
    r_big, r_small = max(rb, ra), min(rb, ra)
    log_w = log_whittaker_w(nu, 0.5 * lam, 2.0 * kappa * r_big)
    log_m, sign_m = log_whittaker_m(nu, 0.5 * lam, 2.0 * kappa * r_small)
    if sign_m <= 0:
        raise DomainError("Whittaker M is not positive; outside the supported domain")
    return (math.lgamma(a) - math.lgamma(1.0 + lam) + log_w + log_m
            - math.log(kappa * rb * ra))


def radial_closed(ch: ChannelIndex, p: PhysicalParams, rb: float, ra: float) -> float:
    """Closed Whittaker form of the channel function

    ``Gamma((1+lam)/2 - nu) / (kappa rb ra Gamma(1+lam)) W_{nu,lam/2}(2 kappa r>) M_{nu,lam/2}(2 kappa r<)``.
    """
    return math.exp(log_radial_closed(ch, p, rb, ra))
