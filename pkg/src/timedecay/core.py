"""Shared domain types, unit conventions and parameter validation.

Every formula in the package is written with an explicit ``hbar`` keyword
that defaults to 1, so energies and times are in reciprocal units unless a
:class:`UnitsContext` says otherwise.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "QuadratureError",
    "UnitsContext",
    "Resonance",
    "MixedComponent",
    "MixedState",
    "ExperimentConfig",
    "ValueKind",
    "TimeSeries",
    "lifetime",
    "single_resonance_norm",
    "wrap_phase",
    "load_config",
    "resonance_from_dict",
    "mixed_state_from_dict",
    "experiment_from_dict",
]


class DomainError(ValueError):
    """Raised when an input violates a documented invariant or precondition."""


class QuadratureError(RuntimeError):
    """Raised when an adaptive quadrature exhausts its panel budget.

    ``diagnostic`` carries the worst point (time, estimated error, panels).
    """

    def __init__(self, message: str, diagnostic: dict | None = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


def wrap_phase(phi: float) -> float:
    """Reduce an angle to the half-open interval (-pi, pi]."""
    out = math.remainder(phi, 2 * math.pi)
    if out <= -math.pi:
        out += 2 * math.pi
    return out


@dataclass(frozen=True)
class UnitsContext:
    hbar: float = 1.0
    energy_unit: str = ""
    time_unit: str = ""

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise DomainError(f"hbar must be positive and finite, got {self.hbar!r}")


@dataclass(frozen=True)
class Resonance:
    """A resonance pole ``z = e_r - i*gamma/2`` with its normalization data.

    ``norm_mag`` is the modulus of the normalization factor (units of
    sqrt(energy)) and ``norm_phase`` its phase.  Only phase differences
    between resonances are observable.
    """

    e_r: float
    gamma: float
    norm_mag: float | None = None
    norm_phase: float = 0.0
    norm_defaulted: bool = field(default=False, init=False, compare=False, repr=False)

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise DomainError(f"resonance width must be positive, got gamma={self.gamma!r}")
        if not math.isfinite(self.e_r):
            raise DomainError("resonance energy must be finite")
        if self.norm_mag is None:
            object.__setattr__(self, "norm_mag", single_resonance_norm(self.gamma))
            object.__setattr__(self, "norm_defaulted", True)
        elif not (self.norm_mag >= 0 and math.isfinite(self.norm_mag)):
            raise DomainError(f"norm_mag must be >= 0, got {self.norm_mag!r}")

    @property
    def pole(self) -> complex:
        return complex(self.e_r, -0.5 * self.gamma)

    def lifetime(self, hbar: float = 1.0) -> float:
        return hbar / self.gamma


def lifetime(r: Resonance, units: UnitsContext | None = None) -> float:
    """Mean life ``hbar / gamma`` of a resonance."""
    units = units or UnitsContext()
    return units.hbar / r.gamma


def single_resonance_norm(gamma: float) -> float:
    """Normalization modulus of a lone pole of a unitary S matrix.

    For one resonance the residue fixes ``|N|**2 = gamma``.
    """
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma!r}")
    return math.sqrt(gamma)


@dataclass(frozen=True)
class MixedComponent:
    resonance: Resonance
    b_mag: float = 1.0
    b_phase: float = 0.0

    def __post_init__(self):
        if not (self.b_mag >= 0 and math.isfinite(self.b_mag)):
            raise DomainError(f"b_mag must be >= 0, got {self.b_mag!r}")

    def modulus(self, hbar: float = 1.0) -> float:
        """``|b| |c|`` with ``|c| = |N| / sqrt(hbar)``."""
        return self.b_mag * self.resonance.norm_mag / math.sqrt(hbar)

    def coefficient(self, hbar: float = 1.0) -> complex:
        """Complex product ``b * c`` of the mixing and normalization factors.

        ``c = i |N| exp(-i norm_phase) / sqrt(hbar)`` and
        ``b = |b| exp(-i b_phase)``.
        """
        phase = self.resonance.norm_phase + self.b_phase
        return 1j * self.modulus(hbar) * complex(math.cos(phase), -math.sin(phase))


@dataclass(frozen=True)
class MixedState:
    components: tuple[MixedComponent, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not 1 <= len(comps) <= 2:
            raise DomainError(f"a mixed state holds one or two components, got {len(comps)}")
        if len(comps) == 2 and any(c.resonance.norm_defaulted for c in comps):
            # |N|^2 = gamma only holds for a lone pole
            raise DomainError("two-resonance states need explicit norm_mag for each component")

    def relative_phase(self) -> float:
        """Composite phase ``d1 - d2 + d1' - d2'`` wrapped to (-pi, pi]."""
        if len(self.components) != 2:
            raise DomainError("relative phase needs exactly two components")
        c1, c2 = self.components
        delta = (c1.resonance.norm_phase - c2.resonance.norm_phase
                 + c1.b_phase - c2.b_phase)
        return wrap_phase(delta)


@dataclass(frozen=True)
class ExperimentConfig:
    n0: int = 1
    units: UnitsContext = field(default_factory=UnitsContext)
    seed: int = 0

    def __post_init__(self):
        if int(self.n0) != self.n0 or self.n0 < 1:
            raise DomainError(f"n0 must be a positive integer, got {self.n0!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")


class ValueKind(str, Enum):
    RATE = "rate"
    PROBABILITY = "probability"
    AMPLITUDE_SQ = "amplitude_sq"
    COUNTS = "counts"


@dataclass(frozen=True)
class TimeSeries:
    """Tabulated ``(t, value)`` pairs with a declared value kind."""

    t: np.ndarray
    values: np.ndarray
    value_kind: ValueKind = ValueKind.RATE

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise DomainError("time series needs matching one-dimensional t and values")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise DomainError("time series t must be strictly increasing")
        kind = ValueKind(self.value_kind)
        if kind in (ValueKind.RATE, ValueKind.AMPLITUDE_SQ) and np.any(v < 0):
            raise DomainError(f"{kind.value} values must be nonnegative")
        if kind is ValueKind.PROBABILITY and np.any((v < 0) | (v > 1)):
            raise DomainError("probability values must lie in [0, 1]")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "value_kind", kind)

    def __len__(self):
        return self.t.size

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.values.tolist()))


# -- JSON ingestion ---------------------------------------------------------

_RESONANCE_KEYS = {"e_r", "gamma", "norm_mag", "norm_phase"}
_COMPONENT_KEYS = _RESONANCE_KEYS | {"b_mag", "b_phase"}
_EXPERIMENT_KEYS = {"n0", "hbar", "seed"}
CONFIG_KEYS = _COMPONENT_KEYS | _EXPERIMENT_KEYS | {"components"}


def _reject_unknown(d: dict, allowed: Iterable[str], where: str):
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise DomainError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def resonance_from_dict(d: dict) -> Resonance:
    _reject_unknown(d, _COMPONENT_KEYS | _EXPERIMENT_KEYS, "resonance")
    try:
        return Resonance(
            e_r=float(d.get("e_r", 0.0)),
            gamma=float(d["gamma"]),
            norm_mag=None if d.get("norm_mag") is None else float(d["norm_mag"]),
            norm_phase=float(d.get("norm_phase", 0.0)),
        )
    except KeyError as exc:
        raise DomainError(f"missing required key {exc.args[0]!r}") from None


def _component_from_dict(d: dict) -> MixedComponent:
    _reject_unknown(d, _COMPONENT_KEYS, "component")
    return MixedComponent(
        resonance=resonance_from_dict({k: v for k, v in d.items() if k in _RESONANCE_KEYS}),
        b_mag=float(d.get("b_mag", 1.0)),
        b_phase=float(d.get("b_phase", 0.0)),
    )


def mixed_state_from_dict(d: dict) -> MixedState:
    """Build a :class:`MixedState` from a config dict.

    Either a ``components`` list (one or two entries) or a flat single
    resonance is accepted.
    """
    _reject_unknown(d, CONFIG_KEYS, "config")
    if "components" in d:
        comps = d["components"]
        if not isinstance(comps, Sequence) or isinstance(comps, (str, bytes)):
            raise DomainError("components must be a list")
        return MixedState(tuple(_component_from_dict(c) for c in comps))
    flat = {k: v for k, v in d.items() if k in _COMPONENT_KEYS}
    return MixedState((_component_from_dict(flat),))


def experiment_from_dict(d: dict) -> ExperimentConfig:
    _reject_unknown(d, CONFIG_KEYS, "config")
    return ExperimentConfig(
        n0=int(d.get("n0", 1)),
        units=UnitsContext(hbar=float(d.get("hbar", 1.0))),
        seed=int(d.get("seed", 0)),
    )


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a JSON config file and validate its keys."""
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if not isinstance(d, dict):
        raise DomainError("config root must be a JSON object")
    _reject_unknown(d, CONFIG_KEYS, str(path))
    # validate eagerly so bad files fail before any computation
    mixed_state_from_dict(d)
    experiment_from_dict(d)
    return d
