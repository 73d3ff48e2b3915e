"""Binned least-squares fits of the modulated exponential
``S exp(-lam t) (1 + a cos(omega t + phi))`` and discrimination among the
time-representation, survival and quantum-beat readings of the fit.
"""
from __future__ import annotations

import dataclasses
import functools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.special import expit

from .core import DomainError, wrap_phase
from .interference import mixing_ratio_for_amplitude
from .simulation import Histogram

__all__ = [
    "FitError",
    "OscillationModel",
    "FitOptions",
    "FitResult",
    "ZeroTimeReport",
    "ModelComparison",
    "MODEL_TAGS",
    "initial_guess",
    "fit_oscillation",
    "zero_time_discriminator",
    "model_compare",
]

MODEL_TAGS = ("timerep", "survival", "quantumbeat")
PARAM_NAMES = ("scale", "lam", "a", "omega", "phi")
MIN_BINS = 8


class FitError(RuntimeError):
    """Fit failure; ``trace`` records each start's outcome."""

    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace or []


@dataclass(frozen=True)
class OscillationModel:
    """``scale * exp(-lam t) * (1 + a cos(omega t + phi))``.

    ``scale`` is ``n0 * lam_ec`` in counts per unit time.  ``phi`` is stored
    wrapped to ``(-pi, pi]``.
    """

    scale: float
    lam: float
    a: float
    omega: float
    phi: float = 0.0

    def __post_init__(self):
        for name in ("scale", "lam", "a", "omega", "phi"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.lam > 0:
            raise DomainError("lam must be positive")
        if not self.scale > 0:
            raise DomainError("scale must be positive")
        if self.omega < 0:
            raise DomainError("omega must be >= 0 (flip the sign of phi instead)")
        object.__setattr__(self, "phi", wrap_phase(self.phi))

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega if self.omega > 0 else math.inf

    def rate(self, t):
        t = np.asarray(t, dtype=float)
        return self.scale * np.exp(-self.lam * t) * (1 + self.a * np.cos(self.omega * t + self.phi))

    def bin_integrals(self, edges) -> np.ndarray:
        """Exact integrals of :meth:`rate` over consecutive bins."""
        e = np.asarray(edges, dtype=float)
        t0, t1 = e[:-1], e[1:]
        return _model_terms(self.scale, self.lam, self.a, self.omega, self.phi, t0, t1)[0]

    def as_dict(self) -> dict:
        return {"scale": self.scale, "lam": self.lam, "a": self.a, "omega": self.omega,
                "phi": self.phi, "period": self.period}


def _G(k, t0, t1):
    return (np.exp(k * t1) - np.exp(k * t0)) / k


def _H(k, t0, t1):
    # integral of t exp(k t)
    def prim(t):
        return np.exp(k * t) * (t / k - 1 / k ** 2)
    return prim(t1) - prim(t0)


def _model_terms(scale, lam, a, omega, phi, t0, t1):
    """Bin integrals and their derivatives in ``(scale, lam, a, omega, phi)``."""
    k = complex(-lam, omega)
    ep = np.exp(1j * phi)
    g0 = _G(-lam, t0, t1)
    h0 = _H(-lam, t0, t1)
    gk = ep * _G(k, t0, t1)
    hk = ep * _H(k, t0, t1)
    base = g0 + a * gk.real
    val = scale * base
    jac = np.empty((t0.size, 5))
    jac[:, 0] = base
    jac[:, 1] = -scale * (h0 + a * hk.real)
    jac[:, 2] = scale * gk.real
    jac[:, 3] = -scale * a * hk.imag
    jac[:, 4] = -scale * a * gk.imag
    return val, jac


@dataclass(frozen=True)
class FitOptions:
    """Knobs for :func:`fit_oscillation`.

    ``model_tag`` selects the parameter mapping: ``timerep`` keeps ``a`` in
    ``[0, 1]`` through a logistic transform, ``survival`` pins the phase to
    ``-atan2(omega, lam)``, ``quantumbeat`` leaves ``a`` and ``phi`` free.
    ``frequency`` chooses ``omega`` or ``period`` as the free parameter;
    ``fix_omega`` holds it at the initial value instead.
    """

    model_tag: str = "timerep"
    frequency: str = "omega"
    n_starts: int = 8
    max_nfev: int = 2000
    xtol: float = 1e-10
    gtol: float = 1e-12
    ftol: float = 1e-15
    cond_max: float = 1e12
    fix_omega: bool = False

    def __post_init__(self):
        if self.model_tag not in MODEL_TAGS:
            raise DomainError(f"model_tag must be one of {MODEL_TAGS}")
        if self.frequency not in ("omega", "period"):
            raise DomainError("frequency must be 'omega' or 'period'")
        if self.n_starts < 1:
            raise DomainError("n_starts must be >= 1")


@dataclass(frozen=True, eq=False)
class FitResult:
    model: OscillationModel
    covariance: np.ndarray
    chi2: float
    ndof: int
    converged: bool
    model_tag: str
    iterations: int
    grad_norm: float
    n0: int = 0
    trace: list = field(default_factory=list)

    @property
    def stderr(self) -> dict:
        sd = np.sqrt(np.clip(np.diag(self.covariance), 0, None))
        out = dict(zip(PARAM_NAMES, sd.tolist()))
        w = self.model.omega
        out["period"] = 2 * math.pi / w ** 2 * out["omega"] if w > 0 else math.inf
        return out

    @property
    def chi2_per_dof(self) -> float:
        return self.chi2 / self.ndof if self.ndof > 0 else math.inf

    def rate_at_zero(self) -> float:
        """Model rate per particle at ``t = 0``."""
        m = self.model
        return m.scale * (1 + m.a * math.cos(m.phi)) / max(self.n0, 1)

    def to_dict(self) -> dict:
        return {"params": self.model.as_dict(), "stderr": self.stderr, "chi2": self.chi2,
                "ndof": self.ndof, "converged": self.converged, "model_tag": self.model_tag,
                "convergence": {"iterations": self.iterations, "grad_norm": self.grad_norm}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# -- parameter mappings --------------------------------------------------------

def _survival_phase(lam, omega):
    return -math.atan2(omega, lam)


class _Mapping:
    """Translate between the optimizer vector and natural parameters.

    Internal coordinates are ``log scale``, ``log lam``, ``a`` (logit of
    ``a`` for timerep), ``omega`` or the period, and ``phi``; the frequency
    may be held fixed and the survival reading has no free phase.
    """

    def __init__(self, tag, frequency, fixed_omega=None):
        self.tag = tag
        self.period = frequency == "period"
        self.free_phase = tag != "survival"
        self.fixed_omega = fixed_omega
        self.free = [0, 1, 2]
        if fixed_omega is None:
            self.free.append(3)
        if self.free_phase:
            self.free.append(4)

    def to_internal(self, m: OscillationModel):
        if self.tag == "timerep":
            a = min(max(m.a, 1e-6), 1 - 1e-6)
            ya = math.log(a / (1 - a))
        else:
            ya = m.a
        x = [math.log(m.scale), math.log(m.lam), ya]
        if self.fixed_omega is None:
            x.append(m.period if self.period else m.omega)
        if self.free_phase:
            x.append(m.phi)
        return np.array(x, dtype=float)

    def natural(self, x):
        scale, lam = math.exp(x[0]), math.exp(x[1])
        a = float(expit(x[2])) if self.tag == "timerep" else x[2]
        i = 3
        if self.fixed_omega is None:
            omega = 2 * math.pi / x[3] if self.period else x[3]
            i = 4
        else:
            omega = self.fixed_omega
        phi = x[i] if self.free_phase else _survival_phase(lam, omega)
        return scale, lam, a, omega, phi

    def chain(self, x, nat):
        """Diagonal of d(natural)/d(internal) over the free parameters."""
        scale, lam, a, omega, _ = nat
        d = [scale, lam, a * (1 - a) if self.tag == "timerep" else 1.0]
        if self.fixed_omega is None:
            d.append(-2 * math.pi / x[3] ** 2 if self.period else 1.0)
        if self.free_phase:
            d.append(1.0)
        return np.array(d)

    def _phase_grad(self, lam, omega):
        q = lam ** 2 + omega ** 2
        return omega / q, -lam / q

    def reduce(self, jac_nat, lam, omega):
        """Jacobian columns for the free natural parameters, with the pinned
        survival phase folded in through its dependence on ``lam`` and ``omega``."""
        j = jac_nat.copy()
        if not self.free_phase:
            dl, dw = self._phase_grad(lam, omega)
            j[:, 1] += jac_nat[:, 4] * dl
            j[:, 3] += jac_nat[:, 4] * dw
        return j[:, self.free]

    def expand_cov(self, cov, lam, omega):
        """Covariance over all five natural parameters; fixed ones get zero."""
        d = np.zeros((5, len(self.free)))
        for col, idx in enumerate(self.free):
            d[idx, col] = 1.0
        if not self.free_phase:
            dl, dw = self._phase_grad(lam, omega)
            d[4] = dl * d[1] + dw * d[3]
        return d @ cov @ d.T


def _canonical(tag, scale, lam, a, omega, phi):
    if tag == "quantumbeat" and a < 0:
        a, phi = -a, phi + math.pi
    if omega < 0:
        omega, phi = -omega, -phi
    if tag == "survival":
        phi = _survival_phase(lam, omega)
    return OscillationModel(scale, lam, a, omega, wrap_phase(phi))


# -- initial guess ---------------------------------------------------------------

def initial_guess(h: Histogram, model_tag: str = "timerep") -> OscillationModel:
    """Log-linear envelope fit followed by a weighted periodogram of the residual."""
    c = h.counts.astype(float)
    t0, t1 = h.edges[:-1], h.edges[1:]
    tc = 0.5 * (t0 + t1)
    nz = c > 0
    if nz.sum() < 3:
        raise DomainError("need at least three nonempty bins for an initial guess")
    A = np.vstack([np.ones(nz.sum()), -tc[nz]]).T
    w = np.sqrt(c[nz])
    coef, *_ = np.linalg.lstsq(A * w[:, None], np.log(c[nz] / h.dt) * w, rcond=None)
    lam = float(coef[1])
    span = float(h.edges[-1] - h.edges[0])
    if not lam > 0:
        lam = 1.0 / span
    env = _G(-lam, t0, t1)
    scale = float(c.sum() / env.sum())
    pred = scale * env
    r = c / pred - 1
    wts = pred
    wmax = math.pi / h.dt
    wmin = 2 * math.pi / span
    grid = np.linspace(wmin, wmax, int(min(20_000, max(200, 8 * span / h.dt))))
    ph = np.exp(-1j * np.multiply.outer(grid, tc))
    power = np.abs(ph @ (wts * (r - np.average(r, weights=wts)))) ** 2
    omega = float(grid[np.argmax(power)])
    X = np.vstack([np.cos(omega * tc), -np.sin(omega * tc)]).T
    sw = np.sqrt(wts)
    (p, q), *_ = np.linalg.lstsq(X * sw[:, None], r * sw, rcond=None)
    damp = np.sinc(omega * h.dt / (2 * math.pi))
    a = math.hypot(p, q) / max(damp, 0.1)
    phi = math.atan2(q, p)
    if model_tag == "timerep":
        a = min(max(a, 0.02), 0.9)
    return OscillationModel(scale, lam, a, omega, phi)


# -- fitting -------------------------------------------------------------------

def _check_hist(h: Histogram):
    if int((h.counts > 0).sum()) < MIN_BINS:
        raise DomainError(f"need at least {MIN_BINS} nonempty bins")


def _single_fit(h, init, opts, mapping, x0):
    c = h.counts.astype(float)
    sig = np.sqrt(np.maximum(c, 1.0))
    t0, t1 = h.edges[:-1], h.edges[1:]

    def terms(x):
        nat = mapping.natural(x)
        return nat, _model_terms(*nat, t0, t1)

    def fun(x):
        _, (val, _) = terms(x)
        return (c - val) / sig

    def jac(x):
        nat, (_, jn) = terms(x)
        j = mapping.reduce(jn, nat[1], nat[3]) * mapping.chain(x, nat)
        return -j / sig[:, None]

    with np.errstate(over="ignore", invalid="ignore"):
        res = least_squares(fun, x0, jac=jac, method="lm", xtol=opts.xtol, gtol=opts.gtol,
                            ftol=opts.ftol, max_nfev=opts.max_nfev, x_scale="jac")
    return res


def fit_oscillation(h: Histogram, init: OscillationModel | None = None,
                    opts: FitOptions | None = None) -> FitResult:
    """Weighted least-squares fit of exact bin integrals to histogram counts.

    The objective is ``sum_k (count_k - I_k)^2 / max(count_k, 1)`` with
    ``I_k`` the closed-form integral of the model over bin ``k``.  Starts are
    spread over ``opts.n_starts`` equispaced phases; the lowest objective wins
    and ties go to the smallest canonical phase.
    """
    opts = opts or FitOptions()
    _check_hist(h)
    init = init or initial_guess(h, opts.model_tag)
    mapping = _Mapping(opts.model_tag, opts.frequency, init.omega if opts.fix_omega else None)
    if opts.frequency == "period" and not init.omega > 0:
        raise DomainError("period parameterization needs omega > 0 in the initial model")

    n_starts = opts.n_starts if mapping.free_phase else 1
    trace, candidates = [], []
    for k in range(n_starts):
        phi0 = wrap_phase(init.phi + 2 * math.pi * k / n_starts)
        start = OscillationModel(init.scale, init.lam, init.a, init.omega, phi0)
        x0 = mapping.to_internal(start)
        try:
            res = _single_fit(h, init, opts, mapping, x0)
        except (ValueError, FloatingPointError, OverflowError) as exc:
            trace.append({"phi0": phi0, "error": str(exc)})
            continue
        ok = bool(res.success) and res.status > 0 and np.all(np.isfinite(res.x))
        trace.append({"phi0": phi0, "cost": float(2 * res.cost), "status": int(res.status),
                      "nfev": int(res.nfev), "message": res.message})
        if ok:
            nat = mapping.natural(res.x)
            try:
                model = _canonical(opts.model_tag, *nat)
            except DomainError as exc:
                trace[-1]["error"] = str(exc)
                continue
            candidates.append((float(2 * res.cost), model, res))
    if not candidates:
        raise FitError("no start converged within the iteration budget", trace)

    best = min(c[0] for c in candidates)
    tied = [c for c in candidates if c[0] - best <= 1e-9 * max(1.0, best)]
    chi2, model, res = min(tied, key=lambda c: c[1].phi)

    # covariance in natural parameters at the canonical optimum
    c = h.counts.astype(float)
    sig = np.sqrt(np.maximum(c, 1.0))
    val, jn = _model_terms(model.scale, model.lam, model.a, model.omega, model.phi,
                           h.edges[:-1], h.edges[1:])
    jr = mapping.reduce(jn, model.lam, model.omega) / sig[:, None]
    chi2 = float(np.sum(((c - val) / sig) ** 2))
    jtj = jr.T @ jr
    norms = np.sqrt(np.diag(jtj))
    if np.any(norms == 0):
        raise FitError("singular normal equations: a parameter has no influence; "
                       "rescale or fix it", trace)
    corr = jtj / np.outer(norms, norms)
    cond = np.linalg.cond(corr)
    if not cond < opts.cond_max:
        raise FitError(f"singular normal equations (condition {cond:.3g}); "
                       "try rescaling time or fixing degenerate parameters", trace)
    cov = np.linalg.inv(corr) / np.outer(norms, norms)
    cov = 0.5 * (cov + cov.T)
    cov = mapping.expand_cov(cov, model.lam, model.omega)
    grad = float(np.linalg.norm(jr.T @ ((c - val) / sig)))
    nfree = jr.shape[1]
    return FitResult(model=model, covariance=cov, chi2=chi2, ndof=int(h.counts.size - nfree),
                     converged=True, model_tag=opts.model_tag, iterations=int(res.nfev),
                     grad_norm=grad, n0=int(h.n0), trace=trace)


# -- zero-time discrimination ---------------------------------------------------

@dataclass(frozen=True)
class ZeroTimeReport:
    """Early-time evidence on whether the decay rate vanishes at ``t = 0``.

    Rates are per particle.  ``initial_rate`` is a weighted polynomial
    extrapolation of the first ``n_bins`` bin integrals to ``t = 0``.
    """

    initial_rate: float
    initial_rate_err: float
    first_bin_rate: float
    first_bin_err: float
    model_rates: dict
    favored: str
    n_bins: int
    degree: int

    def consistent_with(self, value: float, nsigma: float = 3.0) -> bool:
        return abs(self.initial_rate - value) <= nsigma * self.initial_rate_err

    def excludes(self, value: float, nsigma: float = 5.0) -> bool:
        return abs(self.initial_rate - value) > nsigma * self.initial_rate_err

    def to_dict(self) -> dict:
        return {"initial_rate": self.initial_rate, "initial_rate_err": self.initial_rate_err,
                "first_bin_rate": self.first_bin_rate, "first_bin_err": self.first_bin_err,
                "model_rates": self.model_rates, "favored": self.favored,
                "n_bins": self.n_bins, "degree": self.degree}


def zero_time_discriminator(h: Histogram, fits=None, n_early: int = 8) -> ZeroTimeReport:
    """Extrapolate the observed rate to ``t = 0`` and say which class it favors.

    A polynomial of degree up to 3 is fitted to the first ``n_early`` bins.
    When fits with a frequency are supplied, the window is also kept within
    a quarter of the shortest period (but never below 3 bins) so the
    polynomial does not have to follow the oscillation.

    ``favored`` is ``"nonzero"`` when the extrapolation exceeds zero by more
    than 5 sigma, ``"zero"`` when it is within 3 sigma of zero, otherwise
    ``"inconclusive"``.
    """
    fits = dict(fits or {})
    if h.edges[0] != 0:
        raise DomainError("histogram must start at t = 0")
    nb = h.counts.size
    limit = nb
    periods = [f.model.period for f in fits.values() if f.model.omega > 0]
    if periods:
        limit = int(np.sum(h.edges[1:] <= min(periods) * (1 + 1e-12)))
    if min(nb, limit) < 3:
        raise DomainError("insufficient early-time coverage: need >= 3 bins "
                          "below the first oscillation period")
    k = min(n_early, nb, limit)
    if periods:
        k = min(k, max(3, int(np.sum(h.edges[1:] <= 0.25 * min(periods) * (1 + 1e-12)))))
    n0 = float(h.n0)
    c = h.counts[:k].astype(float)
    t0, t1 = h.edges[:k], h.edges[1:k + 1]
    deg = min(3, k - 1)
    A = np.vstack([(t1 ** (j + 1) - t0 ** (j + 1)) / (j + 1) for j in range(deg + 1)]).T * n0
    w = 1 / np.sqrt(np.maximum(c, 1.0))
    Aw = A * w[:, None]
    coef, *_ = np.linalg.lstsq(Aw, c * w, rcond=None)
    cov = np.linalg.inv(Aw.T @ Aw)
    c0, s0 = float(coef[0]), float(math.sqrt(cov[0, 0]))
    dt = h.dt
    first = float(h.counts[0]) / (n0 * dt)
    first_err = math.sqrt(max(h.counts[0], 1)) / (n0 * dt)
    if c0 > 5 * s0:
        favored = "nonzero"
    elif abs(c0) <= 3 * s0:
        favored = "zero"
    else:
        favored = "inconclusive"
    return ZeroTimeReport(c0, s0, first, first_err,
                          {tag: f.rate_at_zero() for tag, f in fits.items()},
                          favored, k, deg)


# -- model comparison ------------------------------------------------------------

@dataclass(frozen=True)
class ModelComparison:
    """Fits of the three readings ranked by chi-square per degree of freedom."""

    ranking: list
    fits: dict
    mappings: dict

    @property
    def best(self) -> str:
        return self.ranking[0]

    def delta_chi2(self) -> dict:
        b = self.fits[self.best].chi2
        return {t: self.fits[t].chi2 - b for t in self.ranking}

    def to_dict(self) -> dict:
        return {"ranking": self.ranking,
                "chi2_per_dof": {t: self.fits[t].chi2_per_dof for t in self.ranking},
                "fits": {t: self.fits[t].to_dict() for t in self.ranking},
                "mappings": self.mappings}


def _mapping_for(tag, f: FitResult) -> dict:
    m = f.model
    lam_ec = m.scale / max(f.n0, 1)
    if tag == "timerep":
        out = {"lam_ec": lam_ec, "a": m.a, "delta": m.phi}
        if 0 <= m.a <= 1:
            out["m2_over_m1"] = mixing_ratio_for_amplitude(m.a)
        return out
    A = math.hypot(1.0, m.omega / m.lam)
    psi = _survival_phase(m.lam, m.omega)
    if tag == "survival":
        return {"lam_ec": lam_ec, "A": A, "psi": psi, "mixing_factor": m.a / A}
    return {"p_bar": lam_ec / m.lam, "B": m.a, "b": m.a / A, "psi": psi,
            "delta": wrap_phase(m.phi - psi)}


def model_compare(h: Histogram, init: OscillationModel | None = None,
                  opts: FitOptions | None = None) -> ModelComparison:
    """Fit all three readings to one histogram and rank them.

    Ranking is by chi-square per degree of freedom; fits whose chi-square
    agree to 1e-6 relative are ordered timerep, survival, quantumbeat.
    """
    base = opts or FitOptions()
    fits = {}
    for tag in MODEL_TAGS:
        o = dataclasses.replace(base, model_tag=tag)
        fits[tag] = fit_oscillation(h, init or initial_guess(h, tag), o)

    def cmp(t1, t2):
        f1, f2 = fits[t1], fits[t2]
        if abs(f1.chi2 - f2.chi2) <= 1e-6 * max(1.0, f1.chi2, f2.chi2):
            return MODEL_TAGS.index(t1) - MODEL_TAGS.index(t2)
        return -1 if f1.chi2_per_dof < f2.chi2_per_dof else 1

    ranking = sorted(MODEL_TAGS, key=functools.cmp_to_key(cmp))
    return ModelComparison(ranking, fits, {t: _mapping_for(t, fits[t]) for t in MODEL_TAGS})
