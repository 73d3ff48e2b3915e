"""Moments of decay-time densities: time of flight and its spread."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError
from .quadrature import adaptive_panels, panel_edges
from .simulation import EventSet

__all__ = ["MomentReport", "time_of_flight", "empirical_time_of_flight"]


@dataclass(frozen=True)
class MomentReport:
    """Mean and central second moment of a density on ``[0, inf)``.

    A diverging moment is reported as ``None`` with its ``*_defined`` flag
    cleared, never as a number.  ``mass`` is the probability captured on
    ``[0, inf)``.
    """

    mean: float | None
    variance: float | None
    mass: float
    mean_defined: bool
    variance_defined: bool

    def __post_init__(self):
        if not -1e-12 <= self.mass <= 1 + 1e-12:
            raise DomainError(f"captured mass {self.mass} outside [0, 1]")
        if self.variance is not None and self.variance < 0:
            object.__setattr__(self, "variance", 0.0)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "variance": self.variance, "mass": self.mass,
                "defined": {"mean": self.mean_defined, "variance": self.variance_defined}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _moment_exists(tail, n: int) -> bool:
    kind, val = tail
    if kind == "exp":
        return True
    # t^n * t^-p is integrable at infinity iff p - n > 1
    return val - n > 1


def _window_end(density, tol):
    kind, val = density.tail
    if kind == "exp":
        # beyond this point t^2 f(t) carries less than tol of the second moment
        return (math.log(1 / tol) + 3 * math.log(1 + math.log(1 / tol))) / val + 10 * density.time_scale
    return 1e4 * density.time_scale


def _power_tail(density, end, n, p):
    """``integral_end^inf t^n f`` assuming ``f ~ C t^-p`` beyond ``end``."""
    c = float(density.density(end)) * end ** p
    return c * end ** (n + 1 - p) / (p - n - 1)


def time_of_flight(density, tol: float = 1e-10) -> MomentReport:
    """Mean ``integral t f(t) dt`` and variance of a normalized density.

    Moments that diverge for the declared tail class are flagged before any
    quadrature is attempted.  The density must integrate to one (mass on
    ``[0, inf)`` plus any declared ``negative_mass``) within ``tol``.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    end = _window_end(density, tol)
    width = density.time_scale / 4
    osc = getattr(density, "oscillation_scale", math.inf)
    if math.isfinite(osc):
        width = min(width, osc / 8)
    # geometric panels past the linear zone keep long power tails cheap
    lin_end = min(end, 60 * density.time_scale)
    edges = panel_edges(0.0, lin_end, width)
    if end > lin_end:
        edges = np.concatenate([edges, np.geomspace(lin_end, end, 200)[1:]])

    def integral(n):
        # the n-th moment is of order time_scale**n; keep the target relative
        target = 0.01 * tol * density.time_scale ** n
        val, _, _ = adaptive_panels(lambda t: t ** n * density.density(t), edges, target)
        kind, p = density.tail
        if kind == "power":
            val += _power_tail(density, end, n, p)
        return val

    mass = integral(0)
    total = mass + density.negative_mass
    if abs(total - 1.0) > max(tol, 1e-9):
        raise DomainError(f"density integrates to {total:.12g}, not 1 (tol {tol:g})")
    mean_ok = _moment_exists(density.tail, 1)
    var_ok = _moment_exists(density.tail, 2)
    mean = integral(1) if mean_ok else None
    var = integral(2) - mean ** 2 if var_ok else None
    return MomentReport(None if mean is None else float(mean), None if var is None else float(var),
                        float(min(max(mass, 0.0), 1.0)), mean_ok, var_ok)


def empirical_time_of_flight(e: EventSet | np.ndarray) -> float:
    """Sample mean of recorded decay times."""
    t = e.times if isinstance(e, EventSet) else np.asarray(e, dtype=float)
    if t.size == 0:
        raise DomainError("empty event set has no time of flight")
    return float(np.mean(t))
