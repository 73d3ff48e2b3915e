"""Monte Carlo decay-time generation, histogramming and count reconstruction.

Random numbers come from numpy's PCG64 bit generator.  Inverse-CDF draws are
produced in fixed-size chunks, each seeded from ``SeedSequence(seed,
spawn_key=(chunk,))``, so an EventSet depends only on ``(model, seed,
generator, n0, t_max)`` and never on how the work is split.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .core import DomainError, TimeSeries, ValueKind

__all__ = [
    "SamplingError",
    "EventSet",
    "Histogram",
    "InverseCDF",
    "default_t_max",
    "sample_decays",
    "bin_events",
    "reconstruct_counts",
]

GENERATORS = ("inverse_cdf", "rejection")
NORM_TOL = 1e-6
COVERAGE_TOL = 1e-6
CHUNK = 1 << 18

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


class SamplingError(RuntimeError):
    """Sampler failure; ``diagnostic`` holds the numbers behind it."""

    def __init__(self, message: str, diagnostic: dict | None = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


def _cell_mass(density, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    x = (0.5 * (a + b))[:, None] + half[:, None] * _GL_X
    return half * (density(x) @ _GL_W)


def default_t_max(model, coverage: float = 0.1 * COVERAGE_TOL) -> float:
    """Smallest power-of-two multiple of the model time scale leaving at most
    ``coverage`` of the mass beyond it."""
    t = float(model.time_scale)
    for _ in range(200):
        if model.mass_beyond(t) <= coverage:
            return t
        t *= 2
    raise DomainError("could not find a window covering the model mass")


def _monotone_inverse(density, F, t):
    """Cubic Hermite ``t(F)`` with slopes ``1/f(t)`` limited to keep it monotone.

    Capping each slope at three times the adjacent secants is the
    Fritsch-Carlson sufficient condition; it also tames ``f(t) = 0`` nodes.
    """
    sec = np.diff(t) / np.diff(F)
    f = density(t)
    with np.errstate(divide="ignore"):
        d = np.where(f > 0, 1.0 / np.where(f > 0, f, 1.0), np.inf)
    cap = np.full(t.size, np.inf)
    cap[:-1] = 3 * sec
    cap[1:] = np.minimum(cap[1:], 3 * sec)
    return CubicHermiteSpline(F, t, np.minimum(d, cap))


class InverseCDF:
    """Monotone inverse of the numerically integrated CDF on ``[0, t_max]``.

    Cells are bisected until the 10-point Gauss-Legendre cell masses are
    self-consistent, then again until the cubic inverse reproduces the CDF to
    ``tol`` at interior probe points of every cell.
    """

    def __init__(self, model, t_max: float, tol: float = 1e-8, max_rounds: int = 60):
        self.model = model
        self.t_max = float(t_max)
        self.tol = tol
        density = model.density
        nodes = self._initial_nodes(model, self.t_max)
        self._check_nonnegative(density, nodes)
        for rounds in range(max_rounds):
            a, b = nodes[:-1], nodes[1:]
            mid = 0.5 * (a + b)
            whole = _cell_mass(density, a, b)
            mass = _cell_mass(density, a, mid) + _cell_mass(density, mid, b)
            bad = np.abs(whole - mass) > 1e-16 + 1e-11 * np.abs(mass)
            if not bad.any():
                F = np.concatenate([[0.0], np.cumsum(mass)])
                # drop nodes that do not raise the running CDF maximum
                keep = np.concatenate([[True], F[1:] > np.maximum.accumulate(F)[:-1]])
                inv = _monotone_inverse(density, F[keep], nodes[keep])
                err = self._inverse_error(inv, density, F[keep], nodes[keep])
                bad_inv = err > tol
                if not bad_inv.any():
                    break
                # map failing cells of the reduced grid back to full cells
                idx = np.flatnonzero(keep)
                bad = np.zeros(a.size, dtype=bool)
                for i in np.flatnonzero(bad_inv):
                    bad[idx[i]:idx[i + 1]] = True
            nodes = np.sort(np.concatenate([nodes, mid[bad]]))
        else:
            raise SamplingError("inverse-CDF grid did not converge",
                                {"rounds": max_rounds, "nodes": int(nodes.size)})
        self._check_nonnegative(density, nodes)
        self.nodes = nodes
        self.cdf_nodes = F
        self.mass = float(F[-1])
        self._inv = inv
        self.rounds = rounds

    @staticmethod
    def _initial_nodes(model, t_max):
        ts = float(model.time_scale)
        h = min(ts, getattr(model, "oscillation_scale", math.inf)) / 8
        lin_end = min(t_max, 30 * ts)
        n = int(min(max(math.ceil(lin_end / h), 16), 20_000))
        nodes = np.linspace(0.0, lin_end, n + 1)
        if t_max > lin_end:
            m = max(int(math.ceil(math.log(t_max / lin_end) / math.log(1.05))), 1)
            nodes = np.concatenate([nodes, np.geomspace(lin_end, t_max, m + 1)[1:]])
        return nodes

    @staticmethod
    def _inverse_error(inv, density, F, t):
        err = np.zeros(t.size - 1)
        for q in (0.25, 0.5, 0.75):
            u = F[:-1] + q * np.diff(F)
            ts = np.clip(inv(u), t[:-1], t[1:])
            exact = F[:-1] + _cell_mass(density, t[:-1], ts)
            err = np.maximum(err, np.abs(exact - u))
        return err

    @staticmethod
    def _check_nonnegative(density, nodes):
        vals = density(nodes)
        mids = density(0.5 * (nodes[:-1] + nodes[1:]))
        lo = min(vals.min(), mids.min())
        if lo < -1e-12 * max(vals.max(), mids.max()):
            raise DomainError(f"model rate must be nonnegative; found {lo:.3g}")

    def __call__(self, u):
        return np.clip(self._inv(u), 0.0, self.t_max)


@dataclass(frozen=True, eq=False)
class EventSet:
    """Decay timestamps inside ``[0, t_max]`` with bookkeeping for the rest.

    ``n_censored`` counts draws beyond ``t_max``; ``n_negative`` counts draws
    from the ``t < 0`` mass of full-line densities.  Neither appears in
    ``times``.
    """

    times: np.ndarray
    seed: int
    generator: str
    n0: int
    t_max: float
    n_censored: int = 0
    n_negative: int = 0
    truth: dict | None = None

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        if t.ndim != 1:
            raise DomainError("times must be one-dimensional")
        if t.size and (t.min() < 0 or not np.all(np.isfinite(t))):
            raise DomainError("event times must be finite and >= 0")
        if self.generator not in GENERATORS:
            raise DomainError(f"generator must be one of {GENERATORS}")
        t.flags.writeable = False
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size

    def sidecar(self) -> dict:
        return {"n0": int(self.n0), "seed": int(self.seed), "generator": self.generator,
                "t_max": self.t_max, "n_censored": int(self.n_censored),
                "n_negative": int(self.n_negative), "truth": self.truth}

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("t\n")
            fh.writelines(f"{x:.17g}\n" for x in self.times.tolist())
        _write_json(path.with_suffix(".json"), self.sidecar())
        return path

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0] != ["t"]:
            raise DomainError(f"{path}: expected a single 't' column header")
        times = np.array([float(r[0]) for r in rows[1:] if r], dtype=float)
        meta = {}
        side = path.with_suffix(".json")
        if side.exists():
            meta = json.loads(side.read_text(encoding="utf-8"))
        return cls(times, seed=int(meta.get("seed", 0)),
                   generator=meta.get("generator", "inverse_cdf"),
                   n0=int(meta.get("n0", times.size)),
                   t_max=float(meta.get("t_max", times.max() if times.size else 0.0)),
                   n_censored=int(meta.get("n_censored", 0)),
                   n_negative=int(meta.get("n_negative", 0)),
                   truth=meta.get("truth"))


@dataclass(frozen=True, eq=False)
class Histogram:
    """Counts in right-open bins ``[k dt, (k+1) dt)``.

    ``overflow`` holds events at or beyond the last edge (including censored
    draws) and ``underflow`` those at negative times, so
    ``counts.sum() + overflow + underflow == n0``.
    """

    edges: np.ndarray
    counts: np.ndarray
    n0: int
    overflow: int = 0
    underflow: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        e = np.array(self.edges, dtype=float)
        c = np.array(self.counts, dtype=np.int64)
        if e.ndim != 1 or c.shape != (e.size - 1,):
            raise DomainError("histogram needs len(counts) == len(edges) - 1")
        if np.any(c < 0):
            raise DomainError("counts must be nonnegative")
        if c.sum() > self.n0:
            raise DomainError("histogram holds more events than n0")
        e.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "counts", c)

    @property
    def dt(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("t_lo,t_hi,count\n")
            for lo, hi, c in zip(self.edges[:-1].tolist(), self.edges[1:].tolist(), self.counts.tolist()):
                fh.write(f"{lo:.17g},{hi:.17g},{c}\n")
        _write_json(path.with_suffix(".json"), {"n0": int(self.n0), "dt": self.dt,
                                                "overflow": int(self.overflow),
                                                "underflow": int(self.underflow), **self.meta})
        return path

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0] != ["t_lo", "t_hi", "count"]:
            raise DomainError(f"{path}: expected header t_lo,t_hi,count")
        body = [r for r in rows[1:] if r]
        edges = [float(body[0][0])] + [float(r[1]) for r in body]
        counts = [int(r[2]) for r in body]
        meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8")) \
            if path.with_suffix(".json").exists() else {}
        n0 = int(meta.pop("n0", sum(counts)))
        meta.pop("dt", None)
        return cls(edges, counts, n0, int(meta.pop("overflow", 0)), int(meta.pop("underflow", 0)), meta)


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _check_model(model, t_max, mass_inside):
    beyond = float(model.mass_beyond(t_max))
    total = mass_inside + beyond + model.negative_mass
    if abs(total - 1.0) > NORM_TOL:
        raise DomainError(
            f"model is not normalized per particle: total mass {total:.9g} (tolerance {NORM_TOL:g})")
    if beyond > COVERAGE_TOL:
        raise DomainError(
            f"t_max={t_max:g} leaves mass {beyond:.3g} beyond the window; need <= {COVERAGE_TOL:g}")


def _chunk_rng(seed, k):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(k,))))


def _sample_inverse(model, n0, seed, t_max):
    inv = InverseCDF(model, t_max)
    _check_model(model, t_max, inv.mass)
    neg = model.negative_mass
    out = []
    n_negative = n_censored = 0
    for k, start in enumerate(range(0, n0, CHUNK)):
        u = _chunk_rng(seed, k).random(min(CHUNK, n0 - start))
        v = u - neg
        is_neg = v < 0
        is_cens = v >= inv.mass
        n_negative += int(is_neg.sum())
        n_censored += int(is_cens.sum())
        out.append(inv(v[~(is_neg | is_cens)]))
    times = np.concatenate(out) if out else np.empty(0)
    return times, n_censored, n_negative


def _sample_rejection(model, n0, seed, t_max, min_acceptance=1e-4):
    env = getattr(model, "envelope", None)
    if env is None:
        raise SamplingError("model provides no exponential envelope for rejection sampling",
                            {"model": type(model).__name__})
    if model.negative_mass:
        raise SamplingError("rejection sampling supports densities supported on t >= 0 only",
                            {"negative_mass": model.negative_mass})
    rate, scale = env()
    mass_inside = 1.0 - float(model.mass_beyond(t_max))
    _check_model(model, t_max, mass_inside)
    rng = np.random.Generator(np.random.PCG64(seed))
    accepted = []
    n_acc = n_tried = 0
    while n_acc < n0:
        batch = max(1024, int(1.2 * (n0 - n_acc) * scale) + 16)
        t = rng.exponential(1.0 / rate, batch)
        u = rng.random(batch)
        bound = scale * rate * np.exp(-rate * t)
        f = model.density(t)
        over = f > bound * (1 + 1e-12)
        if over.any():
            i = int(np.argmax(over))
            raise SamplingError("density exceeds the rejection envelope",
                                {"t": float(t[i]), "density": float(f[i]), "envelope": float(bound[i]),
                                 "acceptance_rate": n_acc / max(n_tried, 1)})
        keep = t[u * bound <= f]
        n_tried += batch
        keep = keep[: n0 - n_acc]
        accepted.append(keep)
        n_acc += keep.size
        if n_tried >= 1_000_000 and n_acc / n_tried < min_acceptance:
            raise SamplingError("rejection acceptance rate too low",
                                {"acceptance_rate": n_acc / n_tried, "expected": 1 / scale})
    times = np.concatenate(accepted)
    cens = times > t_max
    return times[~cens], int(cens.sum()), 0


def sample_decays(model, n0: int, seed: int, t_max: float | None = None,
                  generator: str = "inverse_cdf") -> EventSet:
    """Draw ``n0`` i.i.d. decay times from a single-particle density.

    Parameters
    ----------
    model : density object
        Nonnegative rate curve normalized to one per particle; mass at
        ``t < 0`` must be declared through ``negative_mass``.
    n0 : int
        Number of systems.
    seed : int
        PCG64 seed.
    t_max : float, optional
        Observation window; must leave at most 1e-6 of the mass beyond it.
        Chosen automatically when omitted.
    generator : {"inverse_cdf", "rejection"}

    Draws beyond ``t_max`` are counted in ``n_censored`` rather than
    renormalized away.
    """
    if generator not in GENERATORS:
        raise DomainError(f"generator must be one of {GENERATORS}, got {generator!r}")
    n0 = int(n0)
    if n0 < 0:
        raise DomainError("n0 must be >= 0")
    t_max = default_t_max(model) if t_max is None else float(t_max)
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    if generator == "inverse_cdf":
        times, n_cens, n_neg = _sample_inverse(model, n0, seed, t_max)
    else:
        times, n_cens, n_neg = _sample_rejection(model, n0, seed, t_max)
    describe = getattr(model, "describe", None)
    return EventSet(times, seed=int(seed), generator=generator, n0=n0, t_max=t_max,
                    n_censored=n_cens, n_negative=n_neg,
                    truth=describe() if describe else None)


def bin_events(e: EventSet, dt: float, t_max: float | None = None) -> Histogram:
    """Bin into ``[k dt, (k+1) dt)`` up to ``t_max`` (default: the event window)."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    t_max = e.t_max if t_max is None else float(t_max)
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    nbins = max(int(math.ceil(t_max / dt - 1e-9)), 1)
    edges = dt * np.arange(nbins + 1)
    idx = np.searchsorted(edges, e.times, side="right") - 1
    inside = idx < nbins
    counts = np.bincount(idx[inside], minlength=nbins)
    overflow = int((~inside).sum()) + e.n_censored
    return Histogram(edges, counts, e.n0, overflow, e.n_negative,
                     {"seed": e.seed, "generator": e.generator, "truth": e.truth})


def reconstruct_counts(h: Histogram) -> TimeSeries:
    """Undecayed population ``N(t_k) = n0 - sum of counts below edge k``."""
    n = h.n0 - np.concatenate([[0], np.cumsum(h.counts)])
    return TimeSeries(h.edges, n.astype(float), ValueKind.COUNTS)
