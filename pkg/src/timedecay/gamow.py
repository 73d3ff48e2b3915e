"""Closed-form time representation of a single Gamow state."""
from __future__ import annotations

import numpy as np

from .core import DomainError, Resonance

__all__ = [
    "gamow_amplitude",
    "gamow_rate",
    "surviving_count",
    "standard_rate",
]


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        # |u(t)|^2 grows without bound for t < 0; the rate is only normalized on [0, inf)
        raise DomainError("Gamow amplitudes are defined for finite t >= 0 only")
    return t


def _out(x):
    return x if np.ndim(x) else x.item()


def gamow_amplitude(r: Resonance, t, hbar: float = 1.0):
    """Time representation ``u(t) = i N exp(-i z t / hbar) / sqrt(hbar)`` of a Gamow state.

    ``N = |N| exp(-i norm_phase)`` and ``z = e_r - i gamma / 2``.
    """
    t = _check_time(t)
    c = 1j * r.norm_mag * np.exp(-1j * r.norm_phase) / np.sqrt(hbar)
    return _out(c * np.exp(-1j * r.pole * t / hbar))


def gamow_rate(r: Resonance, n0: float, t, hbar: float = 1.0):
    """Decay rate of ``n0`` copies of a single-resonance system.

    Uses the lone-pole normalization ``|N|**2 = gamma`` regardless of
    ``r.norm_mag``, giving ``(n0 / tau) exp(-t / tau)``.
    """
    t = _check_time(t)
    tau = hbar / r.gamma
    return _out(n0 / tau * np.exp(-t / tau))


def surviving_count(r: Resonance, n0: float, t, hbar: float = 1.0):
    """Number of undecayed systems, ``n0 exp(-gamma t / hbar)``."""
    t = _check_time(t)
    return _out(n0 * np.exp(-r.gamma * t / hbar))


def standard_rate(r: Resonance, tau, hbar: float = 1.0):
    """Rate ``-dP/dtau`` of the parametric non-decay probability ``exp(-gamma tau / hbar)``.

    It coincides with :func:`gamow_rate` per particle only under the
    single-resonance normalization; with a general ``|N|`` the time
    representation gives ``|N|**2 / hbar * exp(-gamma t / hbar)`` instead.
    """
    tau = _check_time(tau)
    return _out(r.gamma / hbar * np.exp(-r.gamma * tau / hbar))
