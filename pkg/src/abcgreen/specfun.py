"""
Special functions of real argument.

Gamma machinery, modified Bessel functions of real order in log form,
Kummer's confluent functions, Whittaker functions, equal-parameter Jacobi
polynomials and associated Legendre functions.  Everything here is real;
complex orders and arguments are out of scope.

The associated Legendre functions carry the Condon-Shortley phase, which is
the convention under which

    P_l^k(cos t) = (-1)^k Gamma(1+k+l)/Gamma(1+l) (cos(t/2) sin(t/2))^k P_{l-k}^{(k,k)}(cos t)

holds for ``0 <= k <= l``.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DomainError, NotConvergedError, PoleError
from .quad import QuadSpec, integrate_finite, integrate_semiinf_log

__all__ = [
    "ln_gamma",
    "gamma_sign",
    "recip_gamma",
    "bessel_i_log",
    "bessel_i",
    "kummer_m",
    "log_kummer_m",
    "kummer_u",
    "log_kummer_u",
    "whittaker_m",
    "whittaker_w",
    "log_whittaker_m",
    "log_whittaker_w",
    "jacobi_p",
    "assoc_legendre",
]

_LOG_2PI = math.log(2.0 * math.pi)
_LN2 = math.log(2.0)


def _is_nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


# --------------------------------------------------------------------------
# Gamma


def ln_gamma(x: float) -> float:
    """``ln|Gamma(x)|``.  The sign is available from :func:`gamma_sign`."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at x = {x:g}", n_r=int(-x))
    return math.lgamma(x)


def gamma_sign(x: float) -> int:
    """Sign of ``Gamma(x)``: +1 for x > 0, alternating between the poles below."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at x = {x:g}", n_r=int(-x))
    if x > 0:
        return 1
    return -1 if math.floor(x) % 2 else 1


def recip_gamma(x: float) -> float:
    """``1/Gamma(x)``, an entire function: exactly 0 at non-positive integers."""
    x = float(x)
    if _is_nonpositive_integer(x):
        return 0.0
    if -170.0 < x < 170.0:
        return 1.0 / math.gamma(x)
    return gamma_sign(x) * math.exp(-math.lgamma(x))


# --------------------------------------------------------------------------
# Modified Bessel I of real order


def _debye_polynomials(count):
    """Coefficients of u_k(t) / t^k as polynomials in w = t^2.

    Built from the recurrence
    u_{k+1} = t^2 (1 - t^2) u_k' / 2 + (1/8) int_0^t (1 - 5 s^2) u_k(s) ds.
    """
    polys = [[Fraction(1)]]  # coefficients in t, index = power
    for _ in range(count - 1):
        u = polys[-1]
        new = [Fraction(0)] * (len(u) + 3)
        for p, c in enumerate(u):
            if c == 0:
                continue
            if p > 0:
                new[p + 1] += Fraction(p, 2) * c
                new[p + 3] -= Fraction(p, 2) * c
            new[p + 1] += c / (8 * (p + 1))
            new[p + 3] -= 5 * c / (8 * (p + 3))
        while new and new[-1] == 0:
            new.pop()
        polys.append(new)
    out = []
    for k, u in enumerate(polys):
        # u_k(t) = t^k * sum_j c_j t^(2j)
        out.append(np.array([float(u[k + 2 * j]) if k + 2 * j < len(u) else 0.0
                             for j in range((len(u) - k + 1) // 2)]))
    return out


_DEBYE_TERMS = 17
_DEBYE = _debye_polynomials(_DEBYE_TERMS)
_SERIES_MAX_X = 30.0


def _log_i_series(order, x):
    """ln I_order(x) by the ascending series (all terms positive)."""
    q = 0.25 * x * x
    term = np.ones_like(x)
    # sum of the terms after the leading 1, so that log1p keeps small x accurate
    tail = np.zeros_like(x)
    k = 0
    while True:
        k += 1
        term = term * q / (k * (order + k))
        tail = tail + term
        if np.all(term <= 1e-17 * (1.0 + tail)):
            break
        if k > 2000:
            raise NotConvergedError("Bessel ascending series did not converge")
    return order * (np.log(x) - _LN2) - math.lgamma(order + 1.0) + np.log1p(tail)


def _log_i_debye_scaled(order, x):
    """ln(exp(-x) I_order(x)) from the uniform asymptotic expansion."""
    r = np.hypot(order, x)
    w = (order / r) ** 2
    total = np.ones_like(x)
    rk = np.ones_like(x)
    for k in range(1, _DEBYE_TERMS):
        rk = rk * r
        total = total + np.polynomial.polynomial.polyval(w, _DEBYE[k]) / rk
    # order*eta - x = (r - x) + order*ln(x / (order + r)); r - x = order^2/(r + x)
    expo = order * order / (r + x)
    if order > 0:
        expo = expo + order * np.log(x / (order + r))
    return expo - 0.5 * _LOG_2PI - 0.5 * np.log(r) + np.log(total)


def bessel_i_log(order: float, x, scaled: bool = False):
    """Natural log of the modified Bessel function ``I_order(x)``.

    ``x`` may be a scalar or an array.  With ``scaled=True`` the result is
    ``ln(exp(-x) I_order(x))``, which stays O(ln x) for huge ``x`` and lets
    callers cancel the exponential growth against their own exponents.

    The ascending series is used for ``x <= 30``, the uniform (Debye)
    asymptotic expansion with 16 correction terms beyond.
    """
    order = float(order)
    if not math.isfinite(order) or order < 0:
        raise DomainError(f"Bessel order must be finite and >= 0, got {order}")
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(xa > 0)) or np.any(~np.isfinite(xa)):
        raise DomainError("bessel_i_log needs finite x > 0")
    out = np.empty_like(xa)
    small = xa <= _SERIES_MAX_X
    if small.any():
        xs = xa[small]
        out[small] = _log_i_series(order, xs) - (xs if scaled else 0.0)
    if (~small).any():
        xl = xa[~small]
        out[~small] = _log_i_debye_scaled(order, xl) + (0.0 if scaled else xl)
    return float(out[0]) if scalar else out


def bessel_i(order: float, x):
    """``I_order(x)`` for x > 0 (overflows to inf beyond x ~ 700)."""
    return np.exp(bessel_i_log(order, x))


# --------------------------------------------------------------------------
# Kummer functions


_RESCALE = 1e200
_LOG_RESCALE = math.log(_RESCALE)


def log_kummer_m(a: float, b: float, z: float):
    """``(ln|M(a, b, z)|, sign)`` of Kummer's confluent hypergeometric function.

    Summed as the ascending series with the running sum and term rescaled
    whenever they grow past 1e200, so large ``z`` does not overflow.  The
    sum stops once three consecutive terms fall below 1e-16 of it.  With
    ``a < 0`` and large positive ``z`` the alternating start of the series
    costs accuracy.
    """
    a, b, z = float(a), float(b), float(z)
    if _is_nonpositive_integer(b):
        raise DomainError(f"Kummer M undefined for b = {b:g} (non-positive integer)")
    term = 1.0
    total = 1.0
    log_scale = 0.0
    small_run = 0
    for k in range(100000):
        term *= (a + k) / (b + k) * z / (k + 1)
        total += term
        if abs(total) > _RESCALE or abs(term) > _RESCALE:
            term /= _RESCALE
            total /= _RESCALE
            log_scale += _LOG_RESCALE
        if abs(term) < 1e-16 * abs(total) or term == 0.0:
            small_run += 1
            if small_run == 3:
                if total == 0.0:
                    return -math.inf, 0.0
                return log_scale + math.log(abs(total)), math.copysign(1.0, total)
        else:
            small_run = 0
    raise NotConvergedError(f"Kummer series did not converge for a={a}, b={b}, z={z}")


def kummer_m(a: float, b: float, z: float) -> float:
    """Kummer's confluent hypergeometric function ``M(a, b, z)`` (see :func:`log_kummer_m`)."""
    log_m, sign = log_kummer_m(a, b, z)
    return sign * math.exp(log_m) if sign else 0.0


_U_QUAD = QuadSpec(rel_tol=1e-13, abs_tol=1e-300)
# Below this a the t**(a-1) endpoint mass is handled analytically.
_U_SPLIT_A = 0.1


def log_kummer_u(a: float, b: float, z: float) -> float:
    """``ln U(a, b, z)`` for a > 0, z > 0 (where U is positive).

    Uses the Laplace integral
    ``U = z**-a / Gamma(a) * int_0^inf s**(a-1) (1 + s/z)**(b-a-1) exp(-s) ds``
    in the scaled variable ``s = z t``.
    """
    a, b, z = float(a), float(b), float(z)
    if not a > 0:
        raise DomainError(f"kummer_u needs a > 0 (integral representation), got a = {a}")
    if not z > 0:
        raise DomainError(f"kummer_u needs z > 0, got z = {z}")
    c = b - a - 1.0

    def phi(s):
        return -s + c * np.log1p(s / z)

    if a >= _U_SPLIT_A:
        res = integrate_semiinf_log(lambda s: (a - 1.0) * np.log(s) + phi(s), _U_QUAD)
        _check_u(res.converged, a, b, z)
        return -a * math.log(z) - math.lgamma(a) + res.log_value

    # int_0^inf s^(a-1) e^phi = z^a/a + int_0^z s^(a-1) (e^phi - 1) + int_z^inf s^(a-1) e^phi
    near = integrate_finite(lambda s: s ** (a - 1.0) * np.expm1(phi(s)), 0.0, z,
                            _U_QUAD.replace(transform="finite_interval", abs_tol=1e-300))
    far = integrate_semiinf_log(lambda u: (a - 1.0) * np.log(z + u) + phi(z + u), _U_QUAD)
    _check_u(near.converged and far.converged, a, b, z)
    # multiply through by a so that Gamma(a) becomes Gamma(a + 1)
    head = z**a + a * near.value
    log_far = math.log(a) + far.log_value
    top = max(log_far, math.log(abs(head)) if head != 0 else -math.inf)
    total = head * math.exp(-top) + math.exp(log_far - top)
    return -a * math.log(z) - math.lgamma(a + 1.0) + top + math.log(total)


def _check_u(ok, a, b, z):
    if not ok:
        raise NotConvergedError(f"Kummer U quadrature did not converge for a={a}, b={b}, z={z}")


def kummer_u(a: float, b: float, z: float) -> float:
    """Tricomi's confluent hypergeometric function ``U(a, b, z)``, a > 0, z > 0."""
    return math.exp(log_kummer_u(a, b, z))


# --------------------------------------------------------------------------
# Whittaker functions


def log_whittaker_m(kappa: float, mu: float, z: float):
    """``(ln|M_{kappa,mu}(z)|, sign)``."""
    z = float(z)
    if not z > 0:
        raise DomainError(f"Whittaker M needs z > 0, got {z}")
    log_m, sign = log_kummer_m(mu - kappa + 0.5, 1.0 + 2.0 * mu, z)
    if sign == 0.0:
        return -math.inf, 0.0
    return -0.5 * z + (mu + 0.5) * math.log(z) + log_m, sign


def whittaker_m(kappa: float, mu: float, z: float) -> float:
    """Whittaker ``M_{kappa,mu}(z) = exp(-z/2) z^(mu+1/2) M(mu-kappa+1/2, 1+2mu, z)``."""
    logm, sign = log_whittaker_m(kappa, mu, z)
    return sign * math.exp(logm)


def log_whittaker_w(kappa: float, mu: float, z: float) -> float:
    """``ln W_{kappa,mu}(z)``; requires ``mu - kappa + 1/2 > 0``."""
    z = float(z)
    if not z > 0:
        raise DomainError(f"Whittaker W needs z > 0, got {z}")
    a = mu - kappa + 0.5
    if not a > 0:
        raise DomainError(f"whittaker_w needs mu - kappa + 1/2 > 0, got {a}")
    return -0.5 * z + (mu + 0.5) * math.log(z) + log_kummer_u(a, 1.0 + 2.0 * mu, z)


def whittaker_w(kappa: float, mu: float, z: float) -> float:
    """Whittaker ``W_{kappa,mu}(z) = exp(-z/2) z^(mu+1/2) U(mu-kappa+1/2, 1+2mu, z)``."""
    return math.exp(log_whittaker_w(kappa, mu, z))


# --------------------------------------------------------------------------
# Orthogonal polynomials


def jacobi_p(q: int, a: float, x):
    """Jacobi polynomial ``P_q^{(a,a)}(x)`` with equal real parameters.

    Three-term recurrence in the degree; ``x`` may be an array.
    """
    if int(q) != q or q < 0:
        raise DomainError(f"Jacobi degree must be a non-negative integer, got {q}")
    a = float(a)
    if not a > -1:
        raise DomainError(f"Jacobi parameter must exceed -1, got {a}")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if q == 0:
        return p_prev if x.ndim else float(p_prev)
    p = (a + 1.0) * x
    for n in range(2, int(q) + 1):
        s = 2.0 * n + 2.0 * a
        lead = 2.0 * n * (n + 2.0 * a) * (s - 2.0)
        p_prev, p = p, ((s - 1.0) * s * (s - 2.0) * x * p - 2.0 * (n + a - 1.0) ** 2 * s * p_prev) / lead
    return p if x.ndim else float(p)


def assoc_legendre(l: int, k: int, x):
    """Associated Legendre function ``P_l^k(x)`` on [-1, 1], Condon-Shortley phase.

    Negative ``k`` uses ``P_l^{-k} = (-1)^k (l-k)!/(l+k)! P_l^k``.
    """
    if int(l) != l or l < 0:
        raise DomainError(f"degree must be a non-negative integer, got {l}")
    if int(k) != k or abs(k) > l:
        raise DomainError(f"order must satisfy |k| <= l, got k={k}, l={l}")
    l, k = int(l), int(k)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise DomainError("assoc_legendre needs x in [-1, 1]")
    m = abs(k)
    sin_t = np.sqrt((1.0 - x) * (1.0 + x))
    pmm = np.ones_like(x)
    for i in range(1, m + 1):
        pmm = -(2.0 * i - 1.0) * sin_t * pmm
    if l == m:
        p = pmm
    else:
        p_prev, p = pmm, x * (2.0 * m + 1.0) * pmm
        for ll in range(m + 2, l + 1):
            p_prev, p = p, ((2.0 * ll - 1.0) * x * p - (ll + m - 1.0) * p_prev) / (ll - m)
    if k < 0:
        p = (-1) ** m * math.exp(math.lgamma(l - m + 1.0) - math.lgamma(l + m + 1.0)) * p
    return p if x.ndim else float(p)
