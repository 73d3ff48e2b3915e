import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from timedecay.core import DomainError, Resonance
from timedecay.gamow import gamow_amplitude, gamow_rate, standard_rate, surviving_count


def test_amplitude_examples():
    r = Resonance(0.0, 1.0, 1.0)
    assert gamow_amplitude(r, 0.0) == 1j
    assert abs(gamow_amplitude(r, 2.0)) == pytest.approx(math.exp(-1), rel=1e-15)
    r2 = Resonance(1.0, 0.5, math.sqrt(0.5))
    assert abs(gamow_amplitude(r2, 1.0)) ** 2 == pytest.approx(0.5 * math.exp(-0.5), rel=1e-14)


def test_rate_examples():
    assert gamow_rate(Resonance(3.0, 0.5), 1.0, 0.0) == 0.5
    assert gamow_rate(Resonance(3.0, 1.0), 1000.0, math.log(2)) == pytest.approx(500.0, rel=1e-14)


def test_surviving_count_examples():
    r = Resonance(0.0, 1.0)
    assert surviving_count(r, 100.0, 0.0) == 100.0
    assert surviving_count(r, 100.0, math.log(2)) == pytest.approx(50.0, rel=1e-14)
    assert surviving_count(r, 1.0, 1.0) == pytest.approx(math.exp(-1), rel=1e-15)


def test_negative_time_rejected():
    with pytest.raises(DomainError):
        gamow_rate(Resonance(0.0, 1.0), 1.0, -0.1)
    with pytest.raises(DomainError):
        gamow_amplitude(Resonance(0.0, 1.0), [0.0, -1.0])


@given(st.floats(1e-2, 1e2), st.floats(0.1, 10), st.floats(0, 20))
def test_rate_is_minus_derivative_of_count(gamma, hbar, x):
    r = Resonance(1.0, gamma)
    t = x * hbar / gamma
    h = 1e-6 * hbar / gamma
    fd = -(surviving_count(r, 1.0, t + h, hbar) - surviving_count(r, 1.0, max(t - h, 0), hbar)) / (t + h - max(t - h, 0))
    assert gamow_rate(r, 1.0, t, hbar) == pytest.approx(fd, rel=1e-6, abs=1e-12 * gamma / hbar)


@given(st.floats(1e-3, 1e3), st.floats(0, 50))
def test_modulus_squared_is_single_resonance_rate(gamma, x):
    r = Resonance(5.0, gamma)
    t = x / gamma
    assert abs(gamow_amplitude(r, t)) ** 2 == pytest.approx(gamow_rate(r, 1.0, t), rel=1e-12)
    assert standard_rate(r, t) == pytest.approx(gamow_rate(r, 1.0, t), rel=1e-12)


def test_vectorized_shape():
    t = np.linspace(0, 3, 7)
    assert gamow_rate(Resonance(0.0, 1.0), 2.0, t).shape == (7,)


@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
def test_rate_integrates_to_n0(gamma):
    v, _ = integrate.quad(lambda t: gamow_rate(Resonance(0.0, gamma), 7.0, t), 0, np.inf, epsabs=1e-13)
    assert v == pytest.approx(7.0, abs=1e-9)
