"""Survival-probability and quantum-beat rate laws, and the analytic
exponential-wave-function example that separates them from the
time-representation rate."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, Resonance
from .spectral import EnergyWaveFunction, energy_weighted, half_line_fourier

__all__ = [
    "SurvivalModelParams",
    "QuantumBeatParams",
    "AppendixExample",
    "survival_amplitude",
    "survival_decay_rate",
    "survival_probability",
    "survival_superposition_rate",
    "survival_superposition_rate_expanded",
    "quantum_beat_probability",
    "quantum_beat_rate",
    "quantum_beat_rate_expanded",
    "standard_nondecay",
    "appendix_pair",
]


def _taus(tau):
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise DomainError("tau must be >= 0")
    return tau


def _out(x):
    return x if np.ndim(x) else x.item()


# -- survival amplitude of a general wave function ---------------------------

def survival_amplitude(f: EnergyWaveFunction, tau, tol: float = 1e-10, hbar: float = 1.0):
    """``a_s(tau) = integral_0^inf exp(-i E tau / hbar) |phi(E)|**2 dE``."""
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    d = f.density()
    out = np.array([half_line_fourier(d, x / hbar, tol)[0] for x in taus], dtype=complex)
    return out if np.ndim(tau) else complex(out[0])


def survival_decay_rate(f: EnergyWaveFunction, tau, tol: float = 1e-10, hbar: float = 1.0):
    """``-d p_s / d tau`` with ``p_s = |a_s|**2``.

    The derivative of the amplitude is itself a half-line transform,
    ``-i/hbar integral E |phi|^2 exp(-i E tau/hbar) dE``, so no finite
    differences are involved.
    """
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    d = f.density()
    ed = energy_weighted(d, 1)
    out = np.empty(taus.size)
    for i, x in enumerate(taus):
        a = half_line_fourier(d, x / hbar, tol)[0]
        da = -1j / hbar * half_line_fourier(ed, x / hbar, tol)[0]
        out[i] = -2 * (a.conjugate() * da).real
    return out if np.ndim(tau) else float(out[0])


# -- two Gamow states, survival picture -------------------------------------

@dataclass(frozen=True)
class SurvivalModelParams:
    """Two orthonormal Gamow states of common width with mixings ``b1, b2``."""

    b1: complex
    b2: complex
    gamma: float
    delta_e: float
    hbar: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")

    @property
    def A(self) -> float:
        return math.hypot(1.0, self.delta_e / self.gamma)

    @property
    def psi(self) -> float:
        # A exp(-i psi) = 1 + i dE/Gamma
        return -math.atan2(self.delta_e / self.gamma, 1.0)

    @property
    def weights(self):
        w1, w2 = abs(self.b1) ** 2, abs(self.b2) ** 2
        return w1, w2

    @property
    def mixing_factor(self) -> float:
        w1, w2 = self.weights
        s = w1 ** 2 + w2 ** 2
        return 2 * w1 * w2 / s if s > 0 else 0.0


def survival_probability(p: SurvivalModelParams, tau):
    """``|b1|^4 e^{-G t} + |b2|^4 e^{-G t} + 2|b1|^2|b2|^2 e^{-G t} cos(dE t)``."""
    tau = _taus(tau)
    w1, w2 = p.weights
    x = tau / p.hbar
    env = np.exp(-p.gamma * x)
    return _out(env * (w1 ** 2 + w2 ** 2 + 2 * w1 * w2 * np.cos(p.delta_e * x)))


def survival_superposition_rate(p: SurvivalModelParams, n0: float, tau):
    """Rate ``-n0 dp_s/dtau`` in amplitude-phase form.

    ``n0 (G/hbar) e^{-G tau/hbar} (|b1|^4+|b2|^4) [1 + mix A cos(dE tau/hbar + psi)]``.
    """
    tau = _taus(tau)
    w1, w2 = p.weights
    x = tau / p.hbar
    s = w1 ** 2 + w2 ** 2
    env = n0 * p.gamma / p.hbar * np.exp(-p.gamma * x) * s
    return _out(env * (1 + p.mixing_factor * p.A * np.cos(p.delta_e * x + p.psi)))


def survival_superposition_rate_expanded(p: SurvivalModelParams, n0: float, tau):
    """Same rate written with separate cosine and sine terms."""
    tau = _taus(tau)
    w1, w2 = p.weights
    x = tau / p.hbar
    s = w1 ** 2 + w2 ** 2
    env = n0 * p.gamma / p.hbar * np.exp(-p.gamma * x) * s
    osc = np.cos(p.delta_e * x) + p.delta_e / p.gamma * np.sin(p.delta_e * x)
    return _out(env * (1 + p.mixing_factor * osc))


# -- quantum beats ----------------------------------------------------------

@dataclass(frozen=True)
class QuantumBeatParams:
    p_bar: float
    b: float
    delta: float
    gamma: float
    delta_e: float
    hbar: float = 1.0

    def __post_init__(self):
        if not 0 <= self.b <= 1:
            raise DomainError(f"beat modulation b must lie in [0, 1], got {self.b!r}")
        if self.p_bar < 0:
            raise DomainError("p_bar must be >= 0")
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")

    @property
    def B(self) -> float:
        return self.b * math.hypot(1.0, self.delta_e / self.gamma)

    @property
    def psi(self) -> float:
        # B exp(-i psi) = b + i b dE/Gamma; psi is independent of b
        return -math.atan2(self.delta_e / self.gamma, 1.0)


def quantum_beat_probability(q: QuantumBeatParams, tau):
    tau = _taus(tau)
    x = tau / q.hbar
    return _out(q.p_bar * np.exp(-q.gamma * x) * (1 + q.b * np.cos(q.delta_e * x + q.delta)))


def quantum_beat_rate(q: QuantumBeatParams, n0: float, tau):
    """``n0 P (G/hbar) e^{-G tau/hbar} [1 + B cos(dE tau/hbar + delta + psi)]``."""
    tau = _taus(tau)
    x = tau / q.hbar
    env = n0 * q.p_bar * q.gamma / q.hbar * np.exp(-q.gamma * x)
    return _out(env * (1 + q.B * np.cos(q.delta_e * x + q.delta + q.psi)))


def quantum_beat_rate_expanded(q: QuantumBeatParams, n0: float, tau):
    tau = _taus(tau)
    x = tau / q.hbar
    ph = q.delta_e * x + q.delta
    return _out(n0 * q.p_bar * np.exp(-q.gamma * x)
                * (q.gamma / q.hbar * (1 + q.b * np.cos(ph))
                   + q.b * q.delta_e / q.hbar * np.sin(ph)))


def standard_nondecay(r: Resonance, tau, hbar: float = 1.0):
    """Parametric non-decay probability ``exp(-gamma tau / hbar)``."""
    tau = _taus(tau)
    return _out(np.exp(-r.gamma * tau / hbar))


# -- analytic example ---------------------------------------------------------

@dataclass(frozen=True)
class AppendixExample:
    """``phi(E) = sqrt(2 alpha/hbar) exp(-E alpha/hbar)`` with ``hbar = 1``."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")


def appendix_pair(a: AppendixExample, t):
    """Closed forms for the exponential wave function.

    Returns
    -------
    rate_timerep : ``alpha / (pi (alpha^2 + t^2))``
    p_s : ``4 alpha^2 / (4 alpha^2 + t^2)``
    ps_rate : ``d p_s / dt = -8 alpha^2 t / (4 alpha^2 + t^2)^2``
    """
    t = _taus(t)
    al = a.alpha
    rate = al / (math.pi * (al ** 2 + t ** 2))
    ps = 4 * al ** 2 / (4 * al ** 2 + t ** 2)
    dps = -8 * al ** 2 * t / (4 * al ** 2 + t ** 2) ** 2
    return _out(rate), _out(ps), _out(dps)
