"""Verification batteries: identities and route equalities checked numerically.

Every check returns a :class:`Check` record.  ``error`` is the worst
discrepancy found and ``tol`` the threshold it is compared against; the
metric (absolute, relative or mixed) is named in ``metric``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass

import numpy as np

from .angular import SpacePoint, cos_angle_between, fixed_l_sum
from .greens import TruncationSpec, bound_energies, greens_function, pole_energy, pole_scan
from .quad import QuadSpec, integrate_finite, integrate_semiinf
from .radial import (
    ChannelIndex,
    PhysicalParams,
    _log_h,
    g0_proper_time,
    g0_z_rep,
    radial_closed,
    radial_integral,
    radial_series_converged,
)
from .specfun import (
    assoc_legendre,
    bessel_i_log,
    jacobi_p,
    log_whittaker_m,
    log_whittaker_w,
)

__all__ = ["Check", "SUITES", "run_suite"]


@dataclass
class Check:
    name: str
    identity: str
    metric: str
    error: float
    tol: float
    cases: int

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tol)

    def as_record(self) -> dict:
        rec = asdict(self)
        rec["passed"] = self.passed
        return rec


def _rel(a, b):
    return abs(a - b) / abs(b)


# --------------------------------------------------------------------------
# individual identities


LEGENDRE_THETAS = (0.3, 1.1, 2.0, 2.9)


def legendre_jacobi_errors(l_max=10, thetas=LEGENDRE_THETAS):
    """Worst absolute and worst scaled (by max(1, |P|)) mismatch of the Legendre-Jacobi identity."""
    worst_abs = 0.0
    worst_scaled = 0.0
    cases = 0
    for theta in thetas:
        x = math.cos(theta)
        half = math.cos(0.5 * theta) * math.sin(0.5 * theta)
        for l in range(l_max + 1):
            for k in range(l + 1):
                lhs = assoc_legendre(l, k, x)
                rhs = ((-1) ** k * math.exp(math.lgamma(1 + k + l) - math.lgamma(1 + l))
                       * half**k * jacobi_p(l - k, k, x))
                diff = abs(lhs - rhs)
                worst_abs = max(worst_abs, diff)
                worst_scaled = max(worst_scaled, diff / max(1.0, abs(lhs)))
                cases += 1
    return worst_abs, worst_scaled, cases


def check_legendre_jacobi(tol=1e-12):
    _, scaled, cases = legendre_jacobi_errors()
    return Check("legendre_jacobi", "Legendre function as Jacobi polynomial", "abs/max(1,|P|)", scaled, tol, cases)


def jacobi_norm(n, a):
    """Closed-form ``int (1-x)^a (1+x)^a P_n^{(a,a)}(x)^2 dx`` over [-1, 1]."""
    return math.exp((2 * a + 1) * math.log(2.0) - math.log(2 * a + 2 * n + 1)
                    + 2 * math.lgamma(a + n + 1) - math.lgamma(n + 1) - math.lgamma(2 * a + n + 1))


def jacobi_orthogonality_errors(n_max=8, params=(0.3, 1.7), spec=None):
    spec = spec or QuadSpec(rel_tol=1e-13, abs_tol=1e-15, transform="finite_interval")
    worst_off = 0.0
    worst_diag = 0.0
    for a in params:
        for n in range(n_max + 1):
            for m in range(n, n_max + 1):
                def f(x, n=n, m=m, a=a):
                    return ((1 - x) * (1 + x)) ** a * jacobi_p(n, a, x) * jacobi_p(m, a, x)
                val = integrate_finite(f, -1.0, 1.0, spec).value
                if n == m:
                    worst_diag = max(worst_diag, _rel(val, jacobi_norm(n, a)))
                else:
                    worst_off = max(worst_off, abs(val))
    return worst_off, worst_diag


def check_jacobi_orthogonality(tol=1e-10):
    off, diag = jacobi_orthogonality_errors()
    return Check("jacobi_orthogonality", "Jacobi orthogonality on [-1, 1]", "max(offdiag abs, diag rel)", max(off, diag), tol, 2 * 45)


G0_RADII = ((2.0, 1.0), (5.0, 0.5), (1.2, 1.0))
G0_ENERGIES = (0.5, 0.9)
G0_CHANNELS = ((0, 0), (1, 2))
G0_BETAS = (0.0, 0.3)


def g0_route_error(alpha=1 / 137, spec=None):
    worst = 0.0
    cases = 0
    for rb, ra in G0_RADII:
        for e in G0_ENERGIES:
            for q, k in G0_CHANNELS:
                for beta0 in G0_BETAS:
                    p = PhysicalParams(alpha, beta0, e)
                    ch = ChannelIndex(q, k)
                    s = g0_proper_time(ch, p, rb, ra, spec).value
                    z = g0_z_rep(ch, p, rb, ra, spec).value
                    worst = max(worst, _rel(s, z))
                    cases += 1
    return worst, cases


def check_g0_routes(tol=1e-8):
    err, cases = g0_route_error()
    return Check("g0_routes", "proper-time kernel equals z-representation", "rel", err, tol, cases)


BESSEL_ORDERS = (0.5, 1.7)
BESSEL_WIDTHS = (0.5, 2.0)
BESSEL_PAIRS = ((0.3, 1.2), (1.2, 1.2))


def bessel_integral_lhs(nu, a, c1, c2, spec=None):
    def log_f(r):
        return np.log(r) - r * r / a + bessel_i_log(nu, c1 * r) + bessel_i_log(nu, c2 * r)
    return integrate_semiinf(log_f, spec, log_form=True).value


def bessel_integral_rhs(nu, a, c1, c2):
    return 0.5 * a * math.exp(a * (c1 * c1 + c2 * c2) / 4.0 + bessel_i_log(nu, a * c1 * c2 / 2.0))


def bessel_integral_error(pairs=BESSEL_PAIRS, spec=None):
    worst = 0.0
    cases = 0
    for nu in BESSEL_ORDERS:
        for a in BESSEL_WIDTHS:
            for c1, c2 in pairs:
                lhs = bessel_integral_lhs(nu, a, c1, c2, spec)
                worst = max(worst, _rel(lhs, bessel_integral_rhs(nu, a, c1, c2)))
                cases += 1
    return worst, cases


def check_bessel_integral(tol=1e-9):
    err, cases = bessel_integral_error()
    return Check("bessel_integral", "Gaussian-weighted Bessel product integral", "rel", err, tol, cases)


# (nu, mu, t, zeta_a, zeta_b) with (1 + mu)/2 - nu > 0 and zeta_b > zeta_a
WHITTAKER_SETS = (
    (0.1, 0.8, 1.0, 1.0, 2.0),
    (-0.3, 1.5, 2.0, 0.5, 1.5),
    (0.9, 2.6, 0.7, 0.3, 3.0),
)


def whittaker_integral_lhs(nu, mu, t, za, zb, spec=None):
    return integrate_semiinf(lambda y: 2.0 * nu * y + _log_h(mu, 0.5 * t, zb, za, y),
                             spec, log_form=True).value


def whittaker_integral_rhs(nu, mu, t, za, zb):
    a = 0.5 * (1.0 + mu) - nu
    log_w = log_whittaker_w(nu, 0.5 * mu, t * zb)
    log_m, sign = log_whittaker_m(nu, 0.5 * mu, t * za)
    return sign * math.exp(math.lgamma(a) - math.lgamma(mu + 1.0) + log_w + log_m
                           - math.log(t * math.sqrt(zb * za)))


def whittaker_integral_error(sets=WHITTAKER_SETS, spec=None):
    worst = 0.0
    for s in sets:
        worst = max(worst, _rel(whittaker_integral_lhs(*s, spec=spec), whittaker_integral_rhs(*s)))
    return worst, len(sets)


def check_whittaker_integral(tol=1e-8):
    err, cases = whittaker_integral_error()
    return Check("whittaker_integral", "Laplace integral of h equals W*M product", "rel", err, tol, cases)


# --------------------------------------------------------------------------
# route equalities, spectrum and assembly


def series_closed_error(alphas=(1 / 137, 0.3), energy=0.5, beta0=0.3, rb=2.0, ra=1.0):
    worst = 0.0
    for alpha in alphas:
        p = PhysicalParams(alpha, beta0, energy)
        ch = ChannelIndex(0, 0)
        table = radial_series_converged(ch, p, rb, ra, remainder_tol=1e-8)
        worst = max(worst, _rel(table.value, radial_closed(ch, p, rb, ra)))
    return worst, len(alphas)


def check_series_closed(tol=1e-6):
    err, cases = series_closed_error()
    return Check("series_to_closed", "perturbation series sums to Whittaker form", "rel", err, tol, cases)


INTEGRAL_SETS = (
    ((0, 0), 0.3, 1 / 137, 0.5, 2.0, 1.0),
    ((1, 2), 0.0, 0.3, 0.9, 5.0, 0.5),
    ((0, 1), 0.3, 0.3, 0.5, 1.2, 1.0),
)


def integral_closed_error(sets=INTEGRAL_SETS):
    worst = 0.0
    for (q, k), beta0, alpha, e, rb, ra in sets:
        p = PhysicalParams(alpha, beta0, e)
        ch = ChannelIndex(q, k)
        worst = max(worst, _rel(radial_integral(ch, p, rb, ra).value, radial_closed(ch, p, rb, ra)))
    return worst, len(sets)


def check_integral_closed(tol=1e-8):
    err, cases = integral_closed_error()
    return Check("integral_to_closed", "resummed z-integral equals Whittaker form", "rel", err, tol, cases)


SPECTRUM_CHANNELS = ((0, 0), (1, 0), (0, 1), (2, 3))


def spectrum_error(alpha=0.3, beta0=0.0, n_grid=4000):
    worst = 0.0
    cases = 0
    grid = np.linspace(1e-3, 0.999, n_grid)
    for q, k in SPECTRUM_CHANNELS:
        ch = ChannelIndex(q, k)
        for st in pole_scan(ch, alpha, beta0, grid):
            exact = pole_energy(st.n_r, st.lam, alpha)
            worst = max(worst, abs(st.energy - exact))
            cases += 1
    first = bound_energies(ChannelIndex(0, 0), 0.3, 0.0, 0)[0].energy
    worst = max(worst, abs(first - math.sqrt(0.9)))
    return worst, cases + 1


def check_spectrum(tol=1e-12):
    err, cases = spectrum_error()
    return Check("spectrum_poles", "Gamma-prefactor poles equal closed spectrum", "abs dE", err, tol, cases)


GAUGE_POINTS = (SpacePoint(2.0, 1.0, 0.0), SpacePoint(1.0, 2.0, 1.5))


def gauge_shift_error(alpha=0.0073, beta0=0.3, energy=0.9, shift=1):
    import warnings

    from .angular import TruncationWarning

    b, a = GAUGE_POINTS
    trunc = TruncationSpec(q_max=20, k_max=25)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        g = greens_function(b, a, PhysicalParams(alpha, beta0, energy), trunc).value
        g_shift = greens_function(b, a, PhysicalParams(alpha, beta0 + shift, energy), trunc).value
    expected = g * cmath.exp(-1j * shift * (b.phi - a.phi))
    return _rel(g_shift, expected)


def check_gauge_shift(tol=1e-8):
    return Check("gauge_shift", "flux shift by one is a phase", "rel", gauge_shift_error(), tol, 1)


ADDITION_PAIRS = (
    (SpacePoint(1.0, 0.4, 0.1), SpacePoint(2.0, 2.5, 1.9)),
    (SpacePoint(1.0, 1.0, 0.0), SpacePoint(1.0, 2.0, 1.5)),
    (SpacePoint(1.0, 1.3, 4.0), SpacePoint(1.0, 1.3, 0.2)),
    (SpacePoint(1.0, 2.9, 6.0), SpacePoint(1.0, 0.2, 3.0)),
)


def legendre_p(l, x):
    return assoc_legendre(l, 0, x)


def addition_theorem_error(l_max=5, pairs=ADDITION_PAIRS):
    worst = 0.0
    cases = 0
    for b, a in pairs:
        for l in range(l_max + 1):
            ref = (2 * l + 1) / (4 * math.pi) * legendre_p(l, cos_angle_between(b, a))
            worst = max(worst, abs(fixed_l_sum(l, b, a) - ref) / abs(ref))
            cases += 1
    return worst, cases


def check_addition_theorem(tol=1e-10):
    err, cases = addition_theorem_error()
    return Check("addition_theorem", "beta0=0 channel sum gives Legendre addition theorem", "rel", err, tol, cases)


IDENTITY_CHECKS = (
    check_legendre_jacobi,
    check_jacobi_orthogonality,
    check_g0_routes,
    check_bessel_integral,
    check_whittaker_integral,
)

SUITES = {
    "identities": IDENTITY_CHECKS,
    "routes": (check_g0_routes, check_integral_closed, check_series_closed),
    "spectrum": (check_spectrum,),
    "assembly": (check_addition_theorem, check_gauge_shift),
}
SUITES["all"] = IDENTITY_CHECKS + (
    check_integral_closed, check_series_closed, check_spectrum,
    check_addition_theorem, check_gauge_shift)


def run_suite(name: str, tol: float | None = None) -> list:
    """Run a named suite; ``tol`` overrides every check's default threshold."""
    if name not in SUITES:
        raise KeyError(name)
    out = []
    for fn in SUITES[name]:
        out.append(fn() if tol is None else fn(tol=tol))
    return out
