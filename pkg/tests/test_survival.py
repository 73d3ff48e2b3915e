import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from timedecay.core import DomainError, Resonance
from timedecay.spectral import appendix_wave_function
from timedecay.survival import (AppendixExample, QuantumBeatParams, SurvivalModelParams,
                                appendix_pair, quantum_beat_probability, quantum_beat_rate,
                                quantum_beat_rate_expanded, standard_nondecay, survival_amplitude,
                                survival_decay_rate, survival_probability,
                                survival_superposition_rate, survival_superposition_rate_expanded)

HALF = math.sqrt(0.5)


def test_amplitude_phase_examples():
    p = SurvivalModelParams(HALF, HALF, 1.0, 1.0)
    assert p.A == pytest.approx(math.sqrt(2), rel=1e-15)
    assert p.psi == pytest.approx(-math.pi / 4, rel=1e-15)
    p0 = SurvivalModelParams(HALF, HALF, 1.0, 0.0)
    assert (p0.A, p0.psi) == (1.0, 0.0)
    t = np.linspace(0, 5, 6)
    assert np.allclose(survival_superposition_rate(p0, 1.0, t), np.exp(-t), rtol=1e-14)


def test_survival_rate_oracle():
    p = SurvivalModelParams(HALF, HALF, 1.0, 0.9)
    assert survival_superposition_rate(p, 1.0, 3.0) == pytest.approx(0.011963079504202697407, rel=1e-12)


def test_quantum_beat_examples():
    q = QuantumBeatParams(1.0, 0.2, 0.4, 1.0, 1.0)
    assert q.B == pytest.approx(0.2828427124746190, rel=1e-14)
    q = QuantumBeatParams(2.0, 0.0, 0.4, 0.5, 1.0)
    t = np.linspace(0, 4, 5)
    assert np.allclose(quantum_beat_rate(q, 3.0, t), 3.0 * 2.0 * 0.5 * np.exp(-0.5 * t), rtol=1e-14)
    q = QuantumBeatParams(1.0, 0.2, 0.4, 1.0, 0.9)
    assert quantum_beat_rate(q, 1.0, 2.0) == pytest.approx(0.13910154632405691147, rel=1e-12)
    with pytest.raises(DomainError):
        QuantumBeatParams(1.0, 1.2, 0.0, 1.0, 1.0)


def test_standard_nondecay_examples():
    assert standard_nondecay(Resonance(0.0, 1.0), 0.0) == 1.0
    assert standard_nondecay(Resonance(0.0, 1.0), math.log(2)) == pytest.approx(0.5, rel=1e-15)
    assert standard_nondecay(Resonance(0.0, 0.5), 2.0) == pytest.approx(math.exp(-1), rel=1e-15)


def test_appendix_pair_examples():
    r, ps, d = appendix_pair(AppendixExample(1.0), 0.0)
    assert (r, ps, d) == (pytest.approx(1 / math.pi), 1.0, 0.0)
    r, ps, d = appendix_pair(AppendixExample(1.0), 2.0)
    assert r == pytest.approx(1 / (5 * math.pi), rel=1e-15)
    assert ps == pytest.approx(0.5, rel=1e-15) and d == pytest.approx(-0.25, rel=1e-15)
    assert appendix_pair(AppendixExample(2.0), 0.0)[0] == pytest.approx(1 / (2 * math.pi), rel=1e-15)


def test_survival_amplitude_appendix():
    f = appendix_wave_function(1.0)
    a = survival_amplitude(f, 2.0)
    assert a == pytest.approx(2 / (2 + 2j), abs=1e-12)
    assert abs(a) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert survival_amplitude(f, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_survival_decay_rate_appendix():
    f = appendix_wave_function(1.0)
    tau = np.array([0.0, 0.5, 2.0, 6.0])
    got = survival_decay_rate(f, tau)
    assert np.allclose(got, 8 * tau / (4 + tau ** 2) ** 2, rtol=1e-8, atol=1e-14)


sq = st.floats(0.0, 1.0)


@given(sq, st.floats(0.01, 5), st.floats(-10, 10), st.floats(0, 30), st.floats(0.5, 2))
def test_survival_forms_agree(w1, g, de, tau, hbar):
    p = SurvivalModelParams(math.sqrt(w1), math.sqrt(1 - w1), g, de, hbar)
    a = survival_superposition_rate(p, 1.0, tau)
    b = survival_superposition_rate_expanded(p, 1.0, tau)
    env = g / hbar * math.exp(-g * tau / hbar) * p.A
    assert abs(a - b) <= 1e-12 * env


@given(sq, st.floats(0.05, 5), st.floats(-5, 5), st.floats(1e-3, 10))
def test_survival_rate_is_minus_derivative(w1, g, de, tau):
    p = SurvivalModelParams(math.sqrt(w1), math.sqrt(1 - w1), g, de)
    h = 1e-5
    lo = tau - h
    fd = -(survival_probability(p, tau + h) - survival_probability(p, lo)) / (tau + h - lo)
    scale = g * p.A * math.exp(-g * tau) + abs(de)
    assert abs(survival_superposition_rate(p, 1.0, tau) - fd) <= 1e-6 * scale


@given(st.floats(0, 2), sq, st.floats(-math.pi, math.pi), st.floats(0.01, 5), st.floats(-10, 10),
       st.floats(0, 30), st.floats(0.5, 2))
def test_quantum_beat_forms_agree(pbar, b, delta, g, de, tau, hbar):
    q = QuantumBeatParams(pbar, b, delta, g, de, hbar)
    a = quantum_beat_rate(q, 1.0, tau)
    e = quantum_beat_rate_expanded(q, 1.0, tau)
    env = pbar * g / hbar * math.exp(-g * tau / hbar) * (1 + q.B)
    assert abs(a - e) <= 1e-12 * env + 1e-300


@given(sq, st.floats(0.05, 5), st.floats(-5, 5), st.floats(1e-3, 10))
def test_quantum_beat_rate_is_minus_derivative(b, g, de, tau):
    q = QuantumBeatParams(1.0, b, 0.3, g, de)
    h = 1e-5
    lo = tau - h
    fd = -(quantum_beat_probability(q, tau + h) - quantum_beat_probability(q, lo)) / (tau + h - lo)
    assert abs(quantum_beat_rate(q, 1.0, tau) - fd) <= 1e-6 * (g + abs(de) + 1)


def test_negative_tau_rejected():
    with pytest.raises(DomainError):
        survival_probability(SurvivalModelParams(1, 0, 1.0, 0.0), -1.0)
