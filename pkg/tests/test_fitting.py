import dataclasses
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, optimize

from conftest import GSI_A, GSI_LAM, GSI_OMEGA, GSI_PHI
from timedecay.core import DomainError
from timedecay.densities import ExpSumDensity
from timedecay.fitting import (FitError, FitOptions, OscillationModel, _model_terms, fit_oscillation,
                               initial_guess, model_compare, zero_time_discriminator)
from timedecay.simulation import Histogram, bin_events, sample_decays
from timedecay.survival import QuantumBeatParams, SurvivalModelParams


@given(st.floats(0.01, 1), st.floats(-1, 1), st.floats(0, 5), st.floats(-3, 3),
       st.floats(0, 20), st.floats(0.01, 2))
def test_bin_integrals_match_quadrature(lam, a, omega, phi, t0, w):
    m = OscillationModel(3.0, lam, a, omega, phi)
    got = m.bin_integrals([t0, t0 + w])[0]
    ref, _ = integrate.quad(lambda t: float(m.rate(t)), t0, t0 + w, epsabs=1e-13, epsrel=1e-13)
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_jacobian_matches_central_differences():
    x = np.array([2.0, 0.07, 0.3, 0.9, 0.4])
    t0 = np.linspace(0, 30, 31)[:-1]
    t1 = t0 + 1.0
    _, jac = _model_terms(*x, t0, t1)
    for j in range(5):
        h = 1e-6 * max(abs(x[j]), 1)
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        fd = (_model_terms(*xp, t0, t1)[0] - _model_terms(*xm, t0, t1)[0]) / (2 * h)
        assert np.allclose(jac[:, j], fd, rtol=1e-6, atol=1e-9)


def test_model_validation():
    with pytest.raises(DomainError):
        OscillationModel(1.0, 0.0, 0.1, 1.0)
    with pytest.raises(DomainError):
        OscillationModel(-1.0, 0.1, 0.1, 1.0)
    with pytest.raises(DomainError):
        FitOptions(model_tag="other")
    assert OscillationModel(1.0, 0.1, 0.2, 2 * math.pi / 7).period == pytest.approx(7.0)


def test_gsi_fit_recovers_truth(gsi_hist):
    r = fit_oscillation(gsi_hist)
    se = r.stderr
    assert r.converged
    assert abs(r.model.a - GSI_A) <= 0.02
    assert abs(r.model.period - 7.0) <= 0.1
    for name, truth in (("lam", GSI_LAM), ("a", GSI_A), ("omega", GSI_OMEGA), ("phi", GSI_PHI)):
        assert abs(getattr(r.model, name) - truth) <= 5 * se[name]
    assert 0.7 < r.chi2_per_dof < 1.4


def test_period_parameterization_agrees(gsi_hist):
    a = fit_oscillation(gsi_hist)
    b = fit_oscillation(gsi_hist, opts=FitOptions(frequency="period"))
    assert b.model.period == pytest.approx(a.model.period, rel=1e-7)
    assert b.stderr["period"] == pytest.approx(a.stderr["period"], rel=1e-4)


def test_midpoint_and_exact_fits_agree(gsi_hist):
    # dt * omega = 0.45 at dt = 0.5; rebinning at 0.25 keeps it below 0.3
    e = sample_decays(ExpSumDensity.gsi(GSI_LAM, GSI_A, GSI_OMEGA, GSI_PHI), 300_000, seed=77)
    h = bin_events(e, 0.25, 100.0)
    exact = fit_oscillation(h)
    m = exact.model

    def mid(t, s, lam, a, w, p):
        return s * np.exp(-lam * t) * (1 + a * np.cos(w * t + p)) * h.dt

    popt, _ = optimize.curve_fit(mid, h.centers, h.counts, p0=[m.scale, m.lam, m.a, m.omega, m.phi],
                                 sigma=np.sqrt(np.maximum(h.counts, 1)))
    se = exact.stderr
    for j, name in enumerate(("lam", "a", "omega")):
        assert abs(popt[j + 1] - getattr(m, name)) <= se[name]


def test_round_trip_twenty_seeds():
    d = ExpSumDensity.gsi(GSI_LAM, GSI_A, GSI_OMEGA, GSI_PHI)
    ok = 0
    for seed in range(20):
        h = bin_events(sample_decays(d, 100_000, seed=1000 + seed), 0.5, 100.0)
        r = fit_oscillation(h)
        se = r.stderr
        ok += all(abs(getattr(r.model, n) - v) <= 5 * se[n]
                  for n, v in (("lam", GSI_LAM), ("a", GSI_A), ("omega", GSI_OMEGA), ("phi", GSI_PHI)))
    assert ok == 20


def test_null_modulation_consistent_with_zero():
    d = ExpSumDensity.exponential(GSI_LAM)
    for seed in range(4):
        h = bin_events(sample_decays(d, 1_000_000, seed=300 + seed), 0.5, 100.0)
        init = dataclasses.replace(initial_guess(h, "quantumbeat"), omega=GSI_OMEGA)
        r = fit_oscillation(h, init, FitOptions(model_tag="quantumbeat", fix_omega=True))
        assert abs(r.model.a) < 3 * r.stderr["a"]
        assert r.stderr["omega"] == 0.0


def test_survival_data_amplitude_enhanced_by_A():
    p = SurvivalModelParams(math.sqrt(0.9), math.sqrt(0.1), 0.3, 0.3)
    e = sample_decays(ExpSumDensity.survival(p), 1_000_000, seed=21)
    h = bin_events(e, 0.1, 25.0)
    r = fit_oscillation(h, opts=FitOptions(model_tag="timerep"))
    predicted = p.mixing_factor
    assert r.model.a / predicted == pytest.approx(math.sqrt(2), rel=0.05)
    assert abs(r.model.a - predicted * p.A) <= 5 * r.stderr["a"]


def test_model_compare_on_gsi_data(gsi_hist):
    c = model_compare(gsi_hist)
    assert c.best == "timerep"
    assert set(c.ranking) == {"timerep", "survival", "quantumbeat"}
    assert c.delta_chi2()["survival"] > 25
    assert c.mappings["timerep"]["m2_over_m1"] == pytest.approx(0.101, abs=0.01)
    json.dumps(c.to_dict())


def test_model_compare_pure_exponential_ties():
    e = sample_decays(ExpSumDensity.exponential(GSI_LAM), 1_000_000, seed=8)
    c = model_compare(bin_events(e, 0.5, 100.0))
    chi = [c.fits[t].chi2 for t in c.ranking]
    assert max(chi) - min(chi) < 15
    for t in c.ranking:
        f = c.fits[t]
        assert abs(f.model.a) < 5 * max(f.stderr["a"], 1e-3)


def test_model_compare_on_beat_data_ties_with_timerep():
    # B = b sqrt(1 + (omega/lam)^2) must stay below 1 for a nonnegative rate
    q = QuantumBeatParams(1.0, 0.04, 0.4, GSI_LAM, GSI_OMEGA)
    e = sample_decays(ExpSumDensity.quantum_beat(q), 1_000_000, seed=12)
    c = model_compare(bin_events(e, 0.5, 100.0))
    assert c.fits["quantumbeat"].chi2 == pytest.approx(c.fits["timerep"].chi2, rel=1e-6)
    assert c.mappings["quantumbeat"]["B"] == pytest.approx(q.B, abs=5 * c.fits["quantumbeat"].stderr["a"])
    assert c.fits["survival"].chi2 > c.fits["quantumbeat"].chi2


def test_zero_time_on_gsi_data(gsi_hist):
    r = fit_oscillation(gsi_hist)
    z = zero_time_discriminator(gsi_hist, {"timerep": r})
    truth = float(ExpSumDensity.gsi(GSI_LAM, GSI_A, GSI_OMEGA, GSI_PHI).density(0.0))
    assert z.favored == "nonzero"
    assert z.n_bins == 3
    assert z.consistent_with(truth)
    assert z.model_rates["timerep"] == pytest.approx(truth, rel=0.02)


def test_zero_time_needs_early_bins():
    h = Histogram(np.arange(0, 11, 5.0), [10, 5], 20)
    with pytest.raises(DomainError):
        zero_time_discriminator(h)


def test_fit_needs_enough_bins():
    h = Histogram(np.arange(6.0), [50, 40, 30, 20, 10], 200)
    with pytest.raises((DomainError, FitError)):
        fit_oscillation(h)


def test_fit_result_serializes(gsi_hist):
    d = json.loads(fit_oscillation(gsi_hist).to_json())
    assert set(d) >= {"params", "stderr", "chi2", "ndof", "converged", "model_tag"}
    assert d["params"]["period"] == pytest.approx(7.0, abs=0.1)
