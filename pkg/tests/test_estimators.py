import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from etes import (Conditioning, Dither, Gains, MapParams, gamma_error, gradient_estimate,
                  hessian_estimate, period_average, riccati_rhs)

amp = st.floats(0.01, 1.0)
omega = st.floats(0.5, 50.0)
h_star = st.floats(-5.0, 5.0).filter(lambda h: abs(h) > 1e-2)
q_star = st.floats(-10.0, 10.0)
offset = st.floats(-5.0, 5.0)


def frozen_output(q, h, tt, a, w):
    # map output with theta_hat frozen at theta* + tt
    return lambda t: q + 0.5 * h * (tt + a * np.sin(w * t)) ** 2


@settings(max_examples=60, deadline=None)
@given(q=q_star, h=h_star, tt=offset, a=amp, w=omega)
def test_gradient_estimate_averages_to_scaled_offset(q, h, tt, a, w):
    d = Dither(a, w)
    y = frozen_output(q, h, tt, a, w)
    avg = period_average(lambda t: a * np.sin(w * t) * y(t), d.period)
    assert avg == pytest.approx(0.5 * a * a * h * tt, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(q=q_star, h=h_star, tt=offset, a=st.floats(0.05, 1.0), w=omega)
def test_hessian_estimate_averages_to_curvature(q, h, tt, a, w):
    d = Dither(a, w)
    y = frozen_output(q, h, tt, a, w)
    avg = period_average(lambda t: -8.0 / (a * a) * np.cos(2 * w * t) * y(t), d.period)
    assert avg == pytest.approx(h, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(q=q_star, h=h_star, tt=offset, a=amp, w=omega, t=st.floats(0.0, 100.0))
def test_gradient_estimate_harmonic_expansion(q, h, tt, a, w, t):
    d = Dither(a, w)
    y = q + 0.5 * h * (tt + a * math.sin(w * t)) ** 2
    s1, s3, c2 = math.sin(w * t), math.sin(3 * w * t), math.cos(2 * w * t)
    expanded = (a * q * s1 + 0.5 * a * h * tt * tt * s1 + 0.5 * a * a * h * tt * (1.0 - c2)
                + a ** 3 * h / 8.0 * (3.0 * s1 - s3))
    assert gradient_estimate(d, t, y) == pytest.approx(expanded, abs=1e-9 * (1 + abs(q) + tt * tt))


@settings(max_examples=100, deadline=None)
@given(q=q_star, h=h_star, tt=offset, a=st.floats(0.05, 1.0), w=omega, t=st.floats(0.0, 100.0))
def test_hessian_estimate_harmonic_expansion(q, h, tt, a, w, t):
    d = Dither(a, w)
    y = q + 0.5 * h * (tt + a * math.sin(w * t)) ** 2
    s1, s3 = math.sin(w * t), math.sin(3 * w * t)
    c2, c4 = math.cos(2 * w * t), math.cos(4 * w * t)
    expanded = (h - (8 * q / a ** 2 + 4 * h * tt * tt / a ** 2 + 2 * h) * c2 + h * c4
                - 4 * h / a * tt * (s3 - s1))
    scale = (abs(q) + abs(h) * tt * tt) / a ** 2 + 1.0
    assert hessian_estimate(d, t, y) == pytest.approx(expanded, abs=1e-11 * scale)


def test_demodulation_at_time_zero():
    d = Dither(0.1, 3.0)
    assert gradient_estimate(d, 0.0, 6.325) == 0.0
    assert hessian_estimate(d, 0.0, 6.325) == pytest.approx(-5060.0)


def test_riccati_equilibria():
    g = Gains(18.0, 1.0)
    assert riccati_rhs(g, -0.15, 0.0) == 0.0
    assert riccati_rhs(g, -0.15, 1.0 / -0.15) == pytest.approx(0.0, abs=1e-15)
    # above and below 1/H the flow points back towards it
    assert riccati_rhs(g, -0.15, -6.0) < 0.0 < riccati_rhs(g, -0.15, -7.0)


def test_gamma_error_uses_true_hessian():
    p = MapParams(7.0, -0.15, 5.0)
    assert gamma_error(-0.1, p) == pytest.approx(-0.1 + 1.0 / 0.15)


def test_period_average_of_constant_and_validation():
    assert period_average(lambda t: np.full_like(t, 3.5), 2.0) == pytest.approx(3.5)
    with pytest.raises(ValueError):
        period_average(lambda t: t, 1.0, panels=7)


def test_gains_and_conditioning_validation():
    with pytest.raises(ValueError):
        Gains(0.0, 1.0)
    with pytest.raises(ValueError):
        Gains(1.0, -1.0)
    with pytest.raises(ValueError):
        Conditioning(washout_ratio=0.0)
    with pytest.raises(ValueError):
        Conditioning(lowpass_order=0)
    raw = Conditioning.raw()
    assert not raw.has_washout and raw.n_lowpass == 0
    assert Conditioning().n_lowpass == 3
