import math

import pytest
from hypothesis import given, strategies as st

from etes import Dither, MapParams, dither_signal, eval_map, plant_input

finite = st.floats(-50, 50, allow_nan=False)
nonzero_h = st.floats(-10, 10).filter(lambda h: abs(h) > 1e-3)


def test_peak_value_at_optimizer():
    p = MapParams(7.0, -0.15, 5.0)
    assert eval_map(p, 5.0) == 7.0
    assert eval_map(p, 2.0) == pytest.approx(7.0 - 0.075 * 9.0)
    assert p.is_maximum and not MapParams(1.0, 2.0, 0.0).is_maximum


@given(q=finite, h=nonzero_h, ts=finite, theta=finite)
def test_distance_to_peak_is_quadratic(q, h, ts, theta):
    p = MapParams(q, h, ts)
    lhs = abs(eval_map(p, theta) - q)
    rhs = abs(h) / 2.0 * (theta - ts) ** 2
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9 * (1.0 + abs(q)))


@pytest.mark.parametrize("bad", [dict(h_star=0.0), dict(q_star=math.nan), dict(theta_star=math.inf)])
def test_map_rejects_degenerate_parameters(bad):
    args = dict(q_star=1.0, h_star=-1.0, theta_star=0.0) | bad
    with pytest.raises(ValueError):
        MapParams(**args)


@pytest.mark.parametrize("a,w", [(0.0, 3.0), (-0.1, 3.0), (0.1, 0.0), (0.1, math.inf)])
def test_dither_rejects_bad_values(a, w):
    with pytest.raises(ValueError):
        Dither(a, w)


def test_dither_waveform_and_period():
    d = Dither(0.1, 3.0)
    assert d.period == pytest.approx(2.0 * math.pi / 3.0)
    assert dither_signal(d, 0.0) == 0.0
    assert dither_signal(d, math.pi / 6.0) == pytest.approx(0.1)
    assert plant_input(2.0, d, math.pi / 6.0) == pytest.approx(2.1)
    assert plant_input(2.0, d, d.period) == pytest.approx(2.0, abs=1e-15)
