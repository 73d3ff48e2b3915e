"""Single-particle decay-time densities on ``t >= 0``.

A density is any object with ``density(t)``, ``mass_beyond(t)``,
``negative_mass``, ``tail`` and ``time_scale`` attributes.  The sampler, the
moment routines and the fitting tests all consume this interface.

Time-representation densities ``|phi(t)|**2`` are normalized over the whole
real line, so some of them put mass at ``t < 0``; that share is reported in
``negative_mass`` rather than renormalized away.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy import integrate

from .core import DomainError, MixedState, Resonance
from .interference import interference_params
from .survival import QuantumBeatParams, SurvivalModelParams

__all__ = [
    "ExpSumDensity",
    "LorentzianDensity",
    "AppendixSurvivalDensity",
    "CallableDensity",
]


@dataclass(frozen=True, eq=False)
class ExpSumDensity:
    """``f(t) = Re sum_j c_j exp(k_j t)`` with ``Re k_j < 0``, unit normalized.

    Exponential decay, the oscillation fit law and every two-resonance rate
    in the package are of this form, which gives closed-form CDFs and
    moments.
    """

    coeffs: np.ndarray
    rates: np.ndarray
    name: str = "expsum"
    params: dict = field(default_factory=dict)
    negative_mass: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        k = np.asarray(self.rates, dtype=complex)
        if c.shape != k.shape or c.ndim != 1 or c.size == 0:
            raise DomainError("coefficients and rates must be matching 1-D arrays")
        if np.any(k.real >= 0):
            raise DomainError("every exponential must decay (Re k < 0)")
        mass = float(np.real(np.sum(-c / k)))
        if not mass > 0:
            raise DomainError("density has nonpositive total mass")
        object.__setattr__(self, "coeffs", c / mass)
        object.__setattr__(self, "rates", k)

    # -- constructors --------------------------------------------------------
    @classmethod
    def exponential(cls, gamma: float, hbar: float = 1.0):
        lam = gamma / hbar
        return cls(np.array([lam]), np.array([-lam]), "exponential", {"gamma": gamma, "hbar": hbar})

    @classmethod
    def from_resonance(cls, r: Resonance, hbar: float = 1.0):
        return cls.exponential(r.gamma, hbar)

    @classmethod
    def gsi(cls, lam: float, a: float, omega: float, phi: float):
        """``lam_ec exp(-lam t) (1 + a cos(omega t + phi))`` with ``lam_ec`` set by normalization."""
        if not lam > 0:
            raise DomainError("lam must be positive")
        if not 0 <= a <= 1:
            raise DomainError("a must lie in [0, 1] for a nonnegative density")
        return cls(np.array([1.0, a * np.exp(1j * phi)]),
                   np.array([-lam, -lam + 1j * omega]), "gsi",
                   {"lam": lam, "a": a, "omega": omega, "phi": phi})

    @classmethod
    def from_mixed_state(cls, state: MixedState, hbar: float = 1.0):
        """Normalized two-resonance time-representation rate."""
        p = interference_params(state, hbar)
        g1, g2 = p.gamma1 / hbar, p.gamma2 / hbar
        return cls(np.array([p.m1 ** 2, p.m2 ** 2, 2 * p.m1 * p.m2 * np.exp(1j * p.delta)]),
                   np.array([-g1, -g2, -0.5 * (g1 + g2) + 1j * p.delta_e / hbar]),
                   "interference",
                   {"m1": p.m1, "m2": p.m2, "gamma1": p.gamma1, "gamma2": p.gamma2,
                    "delta_e": p.delta_e, "delta": p.delta, "hbar": hbar})

    @classmethod
    def survival(cls, p: SurvivalModelParams):
        lam = p.gamma / p.hbar
        amp = p.mixing_factor * p.A * np.exp(1j * p.psi)
        return cls(np.array([1.0, amp]), np.array([-lam, -lam + 1j * p.delta_e / p.hbar]),
                   "survival", {"mixing_factor": p.mixing_factor, "gamma": p.gamma,
                                "delta_e": p.delta_e, "hbar": p.hbar})

    @classmethod
    def quantum_beat(cls, q: QuantumBeatParams):
        lam = q.gamma / q.hbar
        amp = q.B * np.exp(1j * (q.delta + q.psi))
        return cls(np.array([1.0, amp]), np.array([-lam, -lam + 1j * q.delta_e / q.hbar]),
                   "quantumbeat", {"b": q.b, "delta": q.delta, "gamma": q.gamma,
                                   "delta_e": q.delta_e, "hbar": q.hbar})

    # -- interface -------------------------------------------------------------
    @property
    def tail(self):
        return ("exp", float(np.min(-self.rates.real)))

    @property
    def time_scale(self) -> float:
        return 1.0 / float(np.min(-self.rates.real))

    @property
    def oscillation_scale(self) -> float:
        w = float(np.max(np.abs(self.rates.imag)))
        return 2 * math.pi / w if w > 0 else math.inf

    def density(self, t):
        t = np.asarray(t, dtype=float)
        return np.real(np.exp(np.multiply.outer(t, self.rates)) @ self.coeffs)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.real((np.exp(np.multiply.outer(t, self.rates)) - 1) @ (self.coeffs / self.rates))

    def mass_beyond(self, t):
        return 1.0 - self.cdf(t)

    def moment(self, n: int) -> float:
        """``integral_0^inf t**n f(t) dt`` in closed form."""
        return float(np.real(np.sum(self.coeffs * factorial(n) / (-self.rates) ** (n + 1))))

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def variance(self) -> float:
        return self.moment(2) - self.moment(1) ** 2

    def envelope(self):
        """``(rate, scale)`` with ``f(t) <= scale * rate * exp(-rate t)``."""
        r = float(np.min(-self.rates.real))
        return r, float(np.sum(np.abs(self.coeffs))) / r

    def describe(self) -> dict:
        return {"model": self.name, **self.params}


@dataclass(frozen=True)
class LorentzianDensity:
    """``alpha / (pi (alpha^2 + t^2))``: the time-representation rate of the
    exponential energy wave function.  Half of its mass lies at ``t < 0``."""

    alpha: float
    negative_mass: float = field(default=0.5, init=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")

    tail = ("power", 2.0)

    @property
    def time_scale(self):
        return self.alpha

    def density(self, t):
        t = np.asarray(t, dtype=float)
        return self.alpha / (math.pi * (self.alpha ** 2 + t ** 2))

    def cdf(self, t):
        return np.arctan(np.asarray(t, dtype=float) / self.alpha) / math.pi

    def mass_beyond(self, t):
        return 0.5 - self.cdf(t)

    def describe(self):
        return {"model": "appendix_timerep", "alpha": self.alpha}


@dataclass(frozen=True)
class AppendixSurvivalDensity:
    """``-dp_s/dt = 8 alpha^2 t / (4 alpha^2 + t^2)^2``, vanishing at ``t = 0``."""

    alpha: float
    negative_mass: float = field(default=0.0, init=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")

    tail = ("power", 3.0)

    @property
    def time_scale(self):
        return 2 * self.alpha

    def density(self, t):
        t = np.asarray(t, dtype=float)
        a2 = 4 * self.alpha ** 2
        return 2 * a2 * t / (a2 + t ** 2) ** 2

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return t ** 2 / (4 * self.alpha ** 2 + t ** 2)

    def mass_beyond(self, t):
        return 1.0 - self.cdf(t)

    def describe(self):
        return {"model": "appendix_survival", "alpha": self.alpha}


@dataclass(frozen=True, eq=False)
class CallableDensity:
    """Wrap a vectorized nonnegative callable with a declared tail class.

    ``tail`` is ``("exp", rate)`` or ``("power", p)`` describing how the
    density falls off; it is used to bound masses and to decide whether
    moments exist.
    """

    func: object
    tail: tuple
    time_scale: float = 1.0
    negative_mass: float = 0.0
    name: str = "callable"

    def __post_init__(self):
        kind, val = self.tail
        if kind not in ("exp", "power") or not val > 0:
            raise DomainError("tail must be ('exp', rate>0) or ('power', p>0)")

    def density(self, t):
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float)

    def mass_beyond(self, t):
        val, _ = integrate.quad(lambda x: float(self.density(x)), float(t), np.inf, limit=200)
        return val

    def describe(self):
        return {"model": self.name}
