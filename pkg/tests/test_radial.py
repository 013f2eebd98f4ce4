import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from abcgreen.errors import DomainError, PoleError
from abcgreen.greens import pole_energy
from abcgreen.radial import (
    ChannelIndex,
    PhysicalParams,
    g0_proper_time,
    g0_z_rep,
    g_n_closed,
    h_kernel,
    log_radial_closed,
    radial_closed,
    radial_integral,
    radial_series,
    radial_series_converged,
)

from oracles import channel_lambda, closed_channel_mp, first_order_convolution, free_kernel

FINE = 1 / 137


# ---------------------------------------------------------------- parameter types


@pytest.mark.parametrize("alpha, beta0, energy", [
    (0.5, 0.0, 0.5), (-0.1, 0.0, 0.5), (0.1, 0.0, 1.0), (0.1, 0.0, 0.0), (0.1, math.nan, 0.5),
])
def test_params_rejected(alpha, beta0, energy):
    with pytest.raises(DomainError):
        PhysicalParams(alpha, beta0, energy)


def test_derived_quantities():
    p = PhysicalParams(0.3, 0.25, 0.6)
    assert_allclose(p.kappa, 0.8)
    assert_allclose(p.calE, 0.32)
    assert_allclose(p.coupling, 0.18)
    assert_allclose(p.nu, 0.225)
    assert_allclose(p.flux, -2 * math.pi * 0.25 / math.sqrt(0.3))


@pytest.mark.parametrize("q, k", [(-1, 0), (1.5, 0), (0, 0.5)])
def test_channel_rejected(q, k):
    with pytest.raises(DomainError):
        ChannelIndex(q, k)


@settings(max_examples=60, deadline=None)
@given(q=st.integers(0, 30), k=st.integers(-30, 30), beta0=st.floats(-3, 3), alpha=st.floats(0, 0.499))
def test_channel_order_monotonicity(q, k, beta0, alpha):
    p = PhysicalParams(alpha, beta0, 0.5)
    ch = ChannelIndex(q, k)
    lam = ch.lam(p)
    assert lam > 0
    assert_allclose(lam, channel_lambda(q, abs(k + beta0), alpha), rtol=1e-13)
    assert ChannelIndex(q + 1, k).lam(p) > lam
    assert lam <= ch.lam(PhysicalParams(alpha * 0.5, beta0, 0.5))


# ---------------------------------------------------------------- h kernel


def test_h_kernel_positive_and_finite():
    ln_h, sign = h_kernel(ChannelIndex(0, 0), PhysicalParams(0.0, 0.0, 0.9), 2.0, 1.0, 1.0)
    assert sign == 1 and math.isfinite(ln_h)


def test_h_kernel_large_z_slope():
    p = PhysicalParams(FINE, 0.3, 0.9)
    ch = ChannelIndex(1, 2)
    lam = ch.lam(p)
    a, _ = h_kernel(ch, p, 2.0, 1.0, 40.0)
    b, _ = h_kernel(ch, p, 2.0, 1.0, 41.0)
    assert_allclose(b - a, -(1 + lam), rtol=1e-10)


def test_h_kernel_vanishes_at_small_z():
    p = PhysicalParams(FINE, 0.0, 0.9)
    values = [h_kernel(ChannelIndex(0, 0), p, 2.0, 1.0, z)[0] for z in (1e-1, 1e-2, 1e-3)]
    assert values[0] > values[1] > values[2]
    assert values[2] < -50


def test_h_kernel_domain():
    with pytest.raises(DomainError):
        h_kernel(ChannelIndex(0, 0), PhysicalParams(0.1, 0.0, 0.5), -1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        h_kernel(ChannelIndex(0, 0), PhysicalParams(0.1, 0.0, 0.5), 1.0, 1.0, 0.0)


# ---------------------------------------------------------------- free kernel g0


@pytest.mark.parametrize("q, k, beta0", [(0, 0, 0.3), (1, 2, 0.0), (3, -1, 0.7)])
@pytest.mark.parametrize("rb, ra", [(2.0, 1.0), (5.0, 0.5), (1.2, 1.0)])
def test_g0_against_bessel_product(q, k, beta0, rb, ra):
    p = PhysicalParams(0.3, beta0, 0.7)
    ch = ChannelIndex(q, k)
    ref = free_kernel(ch.lam(p) / 2, p.kappa, rb, ra)
    assert_allclose(g0_z_rep(ch, p, rb, ra).value, ref, rtol=1e-12)
    assert_allclose(g0_proper_time(ch, p, rb, ra).value, ref, rtol=1e-10)


def test_g0_symmetric_in_radii():
    p = PhysicalParams(FINE, 0.3, 0.9)
    ch = ChannelIndex(0, 0)
    assert_allclose(g0_z_rep(ch, p, 2.0, 1.0).value, g0_z_rep(ch, p, 1.0, 2.0).value, rtol=1e-14)


def test_g0_invariant_under_joint_rescaling():
    ch = ChannelIndex(1, 0)
    p = PhysicalParams(0.2, 0.1, 0.6)
    c = 2.0
    kappa_new = p.kappa / c
    p_new = PhysicalParams(0.2, 0.1, math.sqrt(1 - kappa_new**2))
    assert_allclose(g0_z_rep(ch, p, 2.0, 1.0).value, g0_z_rep(ch, p_new, 4.0, 2.0).value, rtol=1e-12)


def test_g0_grows_toward_threshold():
    ch = ChannelIndex(0, 0)
    values = [g0_z_rep(ch, PhysicalParams(FINE, 0.3, e), 2.0, 1.0).value for e in (0.5, 0.9, 0.99)]
    assert values[0] < values[1] < values[2]


def test_g0_zero_coupling_order():
    # alpha = 0: half-order lambda/2 = l + 1/2 with l = q + |k|
    p = PhysicalParams(0.0, 0.0, 0.8)
    for q, k in [(0, 0), (1, 2), (2, -3)]:
        assert_allclose(ChannelIndex(q, k).lam(p) / 2, q + abs(k) + 0.5, rtol=1e-15)


# ---------------------------------------------------------------- perturbation terms


def test_g1_matches_single_convolution():
    p = PhysicalParams(0.3, 0.3, 0.5)
    ch = ChannelIndex(0, 1)
    ref = first_order_convolution(ch.lam(p) / 2, p.kappa, 2.0, 1.0)
    assert_allclose(g_n_closed(ch, p, 1, 2.0, 1.0).value, ref, rtol=1e-9)


def test_g_n_zero_is_g0():
    p = PhysicalParams(0.3, 0.3, 0.5)
    ch = ChannelIndex(1, 0)
    assert_allclose(g_n_closed(ch, p, 0, 1.5, 0.7).value, g0_z_rep(ch, p, 1.5, 0.7).value, rtol=1e-14)


def test_g_n_rejects_negative_order():
    with pytest.raises(DomainError):
        g_n_closed(ChannelIndex(0, 0), PhysicalParams(0.3, 0.0, 0.5), -1, 1.0, 1.0)


# ---------------------------------------------------------------- three routes


@pytest.mark.parametrize("alpha", [FINE, 0.3])
@pytest.mark.parametrize("q, k, beta0", [(0, 0, 0.3), (1, 2, 0.0)])
@pytest.mark.parametrize("rb, ra", [(2.0, 1.0), (0.7, 0.7), (5.0, 0.5)])
def test_closed_form_against_mpmath(alpha, q, k, beta0, rb, ra):
    p = PhysicalParams(alpha, beta0, 0.5)
    ch = ChannelIndex(q, k)
    ref = closed_channel_mp(ch.lam(p), alpha, 0.5, rb, ra)
    assert_allclose(radial_closed(ch, p, rb, ra), ref, rtol=1e-12)


@pytest.mark.parametrize("alpha", [FINE, 0.3])
@pytest.mark.parametrize("energy", [0.2, 0.5, 0.9])
def test_integral_route_equals_closed(alpha, energy):
    p = PhysicalParams(alpha, 0.3, energy)
    ch = ChannelIndex(1, -1)
    assert_allclose(radial_integral(ch, p, 1.7, 0.4).value, radial_closed(ch, p, 1.7, 0.4), rtol=1e-9)


def test_series_route_equals_closed():
    p = PhysicalParams(0.3, 0.0, 0.5)
    ch = ChannelIndex(0, 0)
    table = radial_series_converged(ch, p, 2.0, 1.0, remainder_tol=1e-10)
    assert table.remainder <= 1e-10 * abs(table.value)
    assert_allclose(table.value, radial_closed(ch, p, 2.0, 1.0), rtol=1e-8)


def test_zero_coupling_closed_form_is_free_kernel():
    p = PhysicalParams(0.0, 0.3, 0.7)
    ch = ChannelIndex(1, 2)
    ref = free_kernel(ch.lam(p) / 2, p.kappa, 2.0, 1.0) / math.sqrt(2.0)
    assert_allclose(radial_closed(ch, p, 2.0, 1.0), ref, rtol=1e-12)
    table = radial_series(ch, p, 2.0, 1.0, 3)
    assert table.terms[1:] == [0.0, 0.0, 0.0]
    assert_allclose(table.value, ref, rtol=1e-12)


def test_series_table_bookkeeping():
    p = PhysicalParams(0.3, 0.0, 0.5)
    table = radial_series(ChannelIndex(0, 0), p, 2.0, 1.0, 6)
    assert len(table.terms) == len(table.partial_sums) == 7
    assert_allclose(np.cumsum(table.terms), table.partial_sums, rtol=1e-15)
    assert table.ratios[0] is None
    # below the first pole every term is positive and smaller than the last
    assert all(0 < r < 1 for r in table.ratios[1:])


def test_series_ratio_limit():
    # terms behave like (nu / a)^n with a = (1 + lam)/2: the geometric rate of the Gamma pole
    p = PhysicalParams(0.3, 0.0, 0.5)
    ch = ChannelIndex(0, 0)
    table = radial_series(ch, p, 2.0, 1.0, 30)
    rate = p.nu / (0.5 * (1 + ch.lam(p)))
    assert_allclose(table.ratios[-1], rate, rtol=2e-2)


@settings(max_examples=25, deadline=None)
@given(rb=st.floats(0.05, 8.0), ra=st.floats(0.05, 8.0), energy=st.floats(0.05, 0.95))
def test_closed_form_symmetric_and_positive(rb, ra, energy):
    p = PhysicalParams(0.2, 0.4, energy)
    ch = ChannelIndex(0, 1)
    a = log_radial_closed(ch, p, rb, ra)
    b = log_radial_closed(ch, p, ra, rb)
    assert math.isfinite(a)
    assert_allclose(a, b, rtol=1e-13, atol=1e-13)


@settings(max_examples=15, deadline=None)
@given(rb=st.floats(0.2, 5.0), ra=st.floats(0.2, 5.0), energy=st.floats(0.1, 0.9),
       alpha=st.floats(0.0, 0.45), q=st.integers(0, 3), k=st.integers(-3, 3))
def test_integral_and_closed_agree(rb, ra, energy, alpha, q, k):
    p = PhysicalParams(alpha, 0.3, energy)
    ch = ChannelIndex(q, k)
    assert_allclose(radial_integral(ch, p, rb, ra).value, radial_closed(ch, p, rb, ra), rtol=1e-8)


# ---------------------------------------------------------------- poles


def test_closed_form_refuses_pole_neighbourhood():
    ch = ChannelIndex(0, 0)
    lam = ch.lam(PhysicalParams(0.3, 0.0, 0.5))
    e0 = pole_energy(0, lam, 0.3)
    with pytest.raises(PoleError) as info:
        radial_closed(ch, PhysicalParams(0.3, 0.0, e0), 2.0, 1.0)
    assert info.value.n_r == 0


def test_integral_routes_refuse_above_first_pole():
    ch = ChannelIndex(0, 0)
    lam = ch.lam(PhysicalParams(0.3, 0.0, 0.5))
    above = 0.5 * (pole_energy(0, lam, 0.3) + pole_energy(1, lam, 0.3))
    p = PhysicalParams(0.3, 0.0, above)
    with pytest.raises(PoleError):
        radial_integral(ch, p, 2.0, 1.0)
    with pytest.raises(PoleError):
        g_n_closed(ch, p, 2, 2.0, 1.0)
    with pytest.raises(DomainError):
        radial_closed(ch, p, 2.0, 1.0)
