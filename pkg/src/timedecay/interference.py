"""Decay rates of two interfering Gamow states in the time representation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, MixedState, Resonance, wrap_phase

__all__ = [
    "InterferenceRateParams",
    "GSIMapping",
    "KaonSystem",
    "interference_params",
    "interference_rate",
    "interference_amplitude",
    "gsi_rate",
    "gsi_mapping",
    "mixing_ratio_for_amplitude",
    "kaon_rates",
    "kaon_amplitude",
]


@dataclass(frozen=True)
class InterferenceRateParams:
    m1: float
    m2: float
    gamma1: float
    gamma2: float
    delta_e: float
    delta: float


@dataclass(frozen=True)
class GSIMapping:
    """Identification of an equal-width two-resonance rate with the fit law
    ``n0 lam_ec exp(-lam t) (1 + a cos(omega t + phi))``."""

    lam: float
    lam_ec: float
    omega: float
    phi: float
    a: float

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega if self.omega else math.inf


def interference_params(state: MixedState, hbar: float = 1.0) -> InterferenceRateParams:
    if len(state.components) != 2:
        raise DomainError(f"interference needs exactly two components, got {len(state.components)}")
    c1, c2 = state.components
    return InterferenceRateParams(
        m1=c1.modulus(hbar), m2=c2.modulus(hbar),
        gamma1=c1.resonance.gamma, gamma2=c2.resonance.gamma,
        delta_e=c1.resonance.e_r - c2.resonance.e_r,
        delta=state.relative_phase(),
    )


def _times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("rates are defined for t >= 0")
    return t


def _out(x):
    return x if np.ndim(x) else x.item()


def interference_rate(state: MixedState, n0: float, t, hbar: float = 1.0):
    """General two-resonance decay rate.

    ``n0 [m1^2 e^{-G1 t} + m2^2 e^{-G2 t}
    + 2 m1 m2 e^{-(G1+G2) t/2} cos(dE t + delta)]`` with ``hbar`` restored.
    """
    t = _times(t)
    p = interference_params(state, hbar)
    out = (p.m1 ** 2 * np.exp(-p.gamma1 * t / hbar)
           + p.m2 ** 2 * np.exp(-p.gamma2 * t / hbar)
           + 2 * p.m1 * p.m2 * np.exp(-0.5 * (p.gamma1 + p.gamma2) * t / hbar)
           * np.cos(p.delta_e * t / hbar + p.delta))
    return _out(n0 * out)


def interference_amplitude(state: MixedState, t, hbar: float = 1.0):
    """``sum_i b_i c_i exp(-i z_i t / hbar)`` evaluated directly."""
    t = _times(t)
    out = 0j
    for comp in state.components:
        out = out + comp.coefficient(hbar) * np.exp(-1j * comp.resonance.pole * t / hbar)
    return _out(out)


def gsi_mapping(state: MixedState, hbar: float = 1.0) -> GSIMapping:
    """Parameters of the oscillation fit law implied by an equal-width state."""
    p = interference_params(state, hbar)
    if not math.isclose(p.gamma1, p.gamma2, rel_tol=1e-12, abs_tol=0.0):
        raise DomainError(
            "widths differ; the undamped reduction needs gamma1 == gamma2 "
            "(use interference_rate for unequal widths)")
    s = p.m1 ** 2 + p.m2 ** 2
    a = 2 * p.m1 * p.m2 / s if s > 0 else 0.0
    omega, phi = p.delta_e / hbar, p.delta
    if omega < 0:
        omega, phi = -omega, wrap_phase(-phi)
    return GSIMapping(lam=p.gamma1 / hbar, lam_ec=s, omega=omega, phi=phi, a=a)


def gsi_rate(state: MixedState, n0: float, t, hbar: float = 1.0):
    """Equal-width rate ``n0 lam_ec e^{-lam t} (1 + a cos(omega t + phi))``."""
    t = _times(t)
    g = gsi_mapping(state, hbar)
    return _out(n0 * g.lam_ec * np.exp(-g.lam * t) * (1 + g.a * np.cos(g.omega * t + g.phi)))


def mixing_ratio_for_amplitude(a: float) -> float:
    """Smaller root ``r = m2/m1`` of ``a = 2 r / (1 + r^2)``."""
    if not 0 <= a <= 1:
        raise DomainError("modulation amplitude must lie in [0, 1]")
    if a == 0:
        return 0.0
    return (1 - math.sqrt(1 - a * a)) / a


@dataclass(frozen=True)
class KaonSystem:
    """Short- and long-lived neutral-kaon Gamow states.

    ``|c_S|``, ``|c_L|`` and their phases come from ``norm_mag`` and
    ``norm_phase`` of each resonance.
    """

    short: Resonance
    long: Resonance

    def __post_init__(self):
        if not self.short.gamma > self.long.gamma:
            raise DomainError("kaon system needs gamma_S > gamma_L")


def kaon_rates(k: KaonSystem, n0: float, t, beam: str = "K0", hbar: float = 1.0):
    """Decay rate of an initially pure K0 (``+``) or K0bar (``-``) beam."""
    if beam not in ("K0", "K0bar"):
        raise DomainError(f"beam must be 'K0' or 'K0bar', got {beam!r}")
    t = _times(t)
    sign = 1.0 if beam == "K0" else -1.0
    cs, cl = k.short.norm_mag / math.sqrt(hbar), k.long.norm_mag / math.sqrt(hbar)
    gs, gl = k.short.gamma, k.long.gamma
    delta_e = k.short.e_r - k.long.e_r
    delta = wrap_phase(k.short.norm_phase - k.long.norm_phase)
    out = (cs ** 2 * np.exp(-gs * t / hbar) + cl ** 2 * np.exp(-gl * t / hbar)
           + sign * 2 * cs * cl * np.exp(-0.5 * (gs + gl) * t / hbar)
           * np.cos(delta_e * t / hbar + delta))
    return _out(0.5 * n0 * out)


def kaon_amplitude(k: KaonSystem, t, beam: str = "K0", hbar: float = 1.0):
    """``(c_S e^{-i z_S t} +/- c_L e^{-i z_L t}) / sqrt(2)`` evaluated directly."""
    t = _times(t)
    sign = 1.0 if beam == "K0" else -1.0

    def term(r):
        c = 1j * r.norm_mag * np.exp(-1j * r.norm_phase) / math.sqrt(hbar)
        return c * np.exp(-1j * r.pole * t / hbar)

    return _out((term(k.short) + sign * term(k.long)) / math.sqrt(2))
