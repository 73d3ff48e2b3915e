import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from timedecay.core import (DomainError, ExperimentConfig, MixedComponent, MixedState, Resonance,
                            TimeSeries, UnitsContext, ValueKind, experiment_from_dict, lifetime,
                            load_config, mixed_state_from_dict, single_resonance_norm, wrap_phase)

widths = st.floats(1e-6, 1e6)


def test_lifetime_examples():
    assert lifetime(Resonance(0.0, 0.5)) == 2.0
    assert lifetime(Resonance(0.0, 1.0)) == 1.0
    hbar = 6.582e-16
    assert lifetime(Resonance(0.0, hbar), UnitsContext(hbar=hbar, energy_unit="eV", time_unit="s")) == 1.0


def test_single_resonance_norm_examples():
    assert single_resonance_norm(1.0) == 1.0
    assert single_resonance_norm(4.0) == 2.0
    assert single_resonance_norm(0.5) == pytest.approx(0.7071067811865476, rel=1e-15)
    with pytest.raises(DomainError):
        single_resonance_norm(0.0)


@given(widths, st.floats(1e-3, 1e3))
def test_lifetime_times_gamma_is_hbar(gamma, hbar):
    r = Resonance(1.0, gamma)
    assert lifetime(r, UnitsContext(hbar=hbar)) * gamma == pytest.approx(hbar, rel=4e-16)


@given(widths)
def test_norm_squared_is_gamma(gamma):
    assert single_resonance_norm(gamma) ** 2 == pytest.approx(gamma, rel=1e-14)


@pytest.mark.parametrize("kw", [dict(gamma=0.0), dict(gamma=-1.0), dict(gamma=1.0, norm_mag=-0.1),
                                dict(gamma=float("nan"))])
def test_resonance_rejects_invalid(kw):
    with pytest.raises(DomainError):
        Resonance(e_r=1.0, **kw)


def test_resonance_pole_and_default_norm():
    r = Resonance(3.0, 2.0)
    assert r.pole == complex(3.0, -1.0)
    assert r.pole.imag < 0
    assert r.norm_mag == pytest.approx(math.sqrt(2.0))


def test_two_component_state_needs_explicit_norms():
    a = MixedComponent(Resonance(1.0, 1.0))
    b = MixedComponent(Resonance(2.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        MixedState((a, b))
    MixedState((a,))


def test_component_count_bounds():
    c = MixedComponent(Resonance(1.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        MixedState(())
    with pytest.raises(DomainError):
        MixedState((c, c, c))


def test_relative_phase_is_composite_and_wrapped():
    c1 = MixedComponent(Resonance(1.0, 1.0, 1.0, norm_phase=3.0), b_phase=1.0)
    c2 = MixedComponent(Resonance(0.0, 1.0, 1.0, norm_phase=-2.0), b_phase=0.5)
    assert MixedState((c1, c2)).relative_phase() == pytest.approx(wrap_phase(3.0 + 2.0 + 0.5))


@given(st.floats(-100, 100))
def test_wrap_phase_range(x):
    w = wrap_phase(x)
    assert -math.pi < w <= math.pi
    assert math.isclose(math.cos(w), math.cos(x), abs_tol=1e-12)


def test_wrap_phase_boundary():
    assert wrap_phase(math.pi) == math.pi
    assert wrap_phase(-math.pi) == math.pi


def test_experiment_config_validation():
    with pytest.raises(DomainError):
        ExperimentConfig(n0=0)
    with pytest.raises(DomainError):
        UnitsContext(hbar=0.0)
    assert ExperimentConfig(n0=5).units.hbar == 1.0


def test_time_series_invariants():
    ts = TimeSeries([0, 1, 2], [1.0, 0.5, 0.2], ValueKind.PROBABILITY)
    assert ts.points == [(0.0, 1.0), (1.0, 0.5), (2.0, 0.2)]
    with pytest.raises(ValueError):
        ts.values[0] = 3.0
    with pytest.raises(DomainError):
        TimeSeries([0, 0], [1, 1])
    with pytest.raises(DomainError):
        TimeSeries([0, 1], [-1, 1], ValueKind.RATE)
    with pytest.raises(DomainError):
        TimeSeries([0, 1], [0.5, 1.5], ValueKind.PROBABILITY)
    TimeSeries([0, 1], [-1, 1], ValueKind.COUNTS)


def test_time_series_does_not_freeze_caller_array():
    v = np.array([1.0, 2.0])
    TimeSeries([0, 1], v)
    v[0] = 5.0


def test_config_ingestion(tmp_path):
    d = {"components": [{"e_r": 1.0, "gamma": 0.5, "norm_mag": 1.0, "b_mag": 0.5},
                        {"e_r": 0.0, "gamma": 0.5, "norm_mag": 0.2, "b_phase": 0.1}],
         "n0": 10, "seed": 3, "hbar": 2.0}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(d))
    cfg = load_config(p)
    s = mixed_state_from_dict(cfg)
    assert len(s.components) == 2
    assert s.components[0].b_mag == 0.5
    e = experiment_from_dict(cfg)
    assert (e.n0, e.seed, e.units.hbar) == (10, 3, 2.0)


def test_flat_config_defaults():
    s = mixed_state_from_dict({"e_r": 2.0, "gamma": 4.0})
    r = s.components[0].resonance
    assert r.norm_mag == 2.0 and r.norm_phase == 0.0


@pytest.mark.parametrize("bad", [{"e_r": 1.0, "gamma": 1.0, "colour": 1},
                                 {"components": [{"gamma": 1.0, "norm_mag": 1.0, "foo": 2}]},
                                 {"e_r": 1.0}])
def test_config_rejects_unknown_or_missing_keys(bad, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(bad))
    with pytest.raises(DomainError):
        load_config(p)
