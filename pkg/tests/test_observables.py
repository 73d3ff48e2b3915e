import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from timedecay.core import DomainError, Resonance
from timedecay.densities import (AppendixSurvivalDensity, CallableDensity, ExpSumDensity,
                                 LorentzianDensity)
from timedecay.observables import MomentReport, empirical_time_of_flight, time_of_flight
from timedecay.simulation import EventSet, sample_decays


@pytest.mark.parametrize("gamma, tau", [(0.5, 2.0), (1.0, 1.0), (0.1, 10.0), (10.0, 0.1)])
def test_gamow_time_of_flight_is_lifetime(gamma, tau):
    rep = time_of_flight(ExpSumDensity.from_resonance(Resonance(0.0, gamma)))
    assert rep.mean_defined and rep.variance_defined
    assert rep.mean == pytest.approx(tau, abs=1e-9)
    assert rep.variance == pytest.approx(tau ** 2, rel=1e-8)
    assert rep.mass == pytest.approx(1.0, abs=1e-10)


@given(st.floats(1e-2, 1e2), st.floats(0.1, 10))
def test_tof_times_gamma_is_hbar(gamma, hbar):
    rep = time_of_flight(ExpSumDensity.exponential(gamma, hbar))
    assert rep.mean * gamma == pytest.approx(hbar, rel=1e-9)


@given(st.floats(0.01, 1), st.floats(0, 1), st.floats(0.05, 3), st.floats(-math.pi, math.pi))
def test_quadrature_matches_closed_form_moments(lam, a, omega, phi):
    d = ExpSumDensity.gsi(lam, a, omega, phi)
    rep = time_of_flight(d)
    assert rep.mean == pytest.approx(d.mean, rel=1e-9)
    assert rep.variance == pytest.approx(d.variance, rel=1e-7)


def test_lorentzian_mean_undefined():
    rep = time_of_flight(LorentzianDensity(1.0))
    assert rep.mean is None and not rep.mean_defined
    assert rep.variance is None and not rep.variance_defined
    assert rep.mass == pytest.approx(0.5, abs=1e-9)
    assert json.loads(rep.to_json())["defined"] == {"mean": False, "variance": False}


def test_appendix_survival_mean_finite_variance_infinite():
    rep = time_of_flight(AppendixSurvivalDensity(1.0))
    # integral of 8 t^2 / (4 + t^2)^2 over [0, inf) is pi
    assert rep.mean == pytest.approx(math.pi, abs=1e-9)
    assert rep.variance is None


def test_unnormalized_density_rejected():
    with pytest.raises(DomainError):
        time_of_flight(CallableDensity(lambda t: 2 * np.exp(-t), ("exp", 1.0)))


def test_moment_report_validation():
    with pytest.raises(DomainError):
        MomentReport(1.0, 1.0, 1.5, True, True)


def test_empirical_examples():
    assert empirical_time_of_flight(np.array([1.0, 3.0])) == 2.0
    assert empirical_time_of_flight(EventSet(np.array([2.5]), 0, "inverse_cdf", 1, 3.0)) == 2.5
    with pytest.raises(DomainError):
        empirical_time_of_flight(np.array([]))


def test_empirical_exponential():
    e = sample_decays(ExpSumDensity.exponential(1.0), 1_000_000, seed=404)
    assert empirical_time_of_flight(e) == pytest.approx(1.0, abs=0.005)


def test_empirical_gsi_over_seeds():
    d = ExpSumDensity.gsi(0.05, 0.2, 2 * math.pi / 7, 0.4)
    n0 = 100_000
    half = 5 * math.sqrt(d.variance / n0)
    hits = sum(abs(empirical_time_of_flight(sample_decays(d, n0, seed=s)) - d.mean) <= half
               for s in range(20))
    assert hits >= 19
