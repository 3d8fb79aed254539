import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from salvo_sim.prescribed_time import GAIN_CLAMP, ScalingFunction, consensus_gain, consensus_gain_detail, h, h_dot


def reference_h(t, te):
    return (te / math.pi) * math.sin(math.pi * t / te) + t - te if t < te else 1.0


def test_h_examples():
    assert h(0, 5) == pytest.approx(-5.0, abs=1e-12)
    assert h(2.5, 5) == pytest.approx(5 / math.pi - 2.5, abs=1e-12)
    assert h(2.5, 5) == pytest.approx(-0.90845, abs=5e-6)
    assert h(7, 5) == 1.0
    assert h(5, 5) == 1.0


def test_h_dot_examples():
    assert h_dot(0, 5) == pytest.approx(2.0)
    assert h_dot(2.5, 5) == pytest.approx(1.0)
    assert h_dot(5, 5) == 0.0 and h_dot(9, 5) == 0.0


def test_gain_examples():
    assert consensus_gain(0, 2, 1.2, 5) == pytest.approx(-2.48, abs=1e-12)
    assert consensus_gain(5, 2, 1.2, 5) == -2.0
    assert consensus_gain(11, 2, 1.2, 5) == -2.0
    g, clamped = consensus_gain_detail(ScalingFunction(5), 5 - 1e-9, 2, 1.2)
    assert clamped and g == -2 - GAIN_CLAMP


def test_rejects_nonpositive_te():
    with pytest.raises(ValueError):
        ScalingFunction(0.0)


@settings(max_examples=400, deadline=None)
@given(st.floats(0.1, 100), st.floats(0, 1))
def test_matches_textbook_formula_and_signs(te, frac):
    t = frac * te * 0.999
    s = ScalingFunction(te)
    assert s.h(t) == pytest.approx(reference_h(t, te), rel=1e-12, abs=1e-12 * te)
    assert s.h(t) < 0
    assert 0 <= s.h_dot(t) <= 2
    assert s.h_dot(t) == pytest.approx(math.cos(math.pi * t / te) + 1, abs=1e-12)
    assert s.ratio(t) <= 0
    assert s.consensus_gain(t, 2.0, 1.2) <= -2.0


def test_continuity_and_jump_at_te():
    te = 5.0
    for eps in (1e-3, 1e-6, 1e-9):
        assert abs(h(te - eps, te)) < 10 * eps
        assert h_dot(te - eps, te) == pytest.approx(0.0, abs=1e-4)
    assert h(te, te) == 1.0
    # h is continuous on [0, t_e)
    for t in (1.0, 2.0, 4.0):
        assert h(t + 1e-9, te) == pytest.approx(h(t, te), abs=1e-8)


@pytest.mark.parametrize("u", [1e-2, 1e-3, 1e-4])
@pytest.mark.parametrize("te", [5.0, 10.0])
def test_ratio_asymptote(u, te):
    s = ScalingFunction(te)
    assert s.ratio(te - u) == pytest.approx(-3.0 / u, rel=0.01)


def test_series_branch_is_accurate_near_te():
    # compare against high-precision evaluation with mpmath
    import mpmath

    mpmath.mp.dps = 50
    te = 5.0
    for u in (1e-2, 1e-4, 1e-7):
        t = te - u
        ref = (mpmath.mpf(te) / mpmath.pi) * mpmath.sin(mpmath.pi * mpmath.mpf(t) / te) + mpmath.mpf(t) - te
        assert h(t, te) == pytest.approx(float(ref), rel=1e-12)
