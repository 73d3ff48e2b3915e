"""Command-line entry point: ``timedecay <subcommand> [flags]``.

Every run writes its output file, a JSON manifest beside it
(``<out>.manifest.json``) holding the resolved parameters, and a one-line
summary on stdout.  ``--replay manifest.json`` re-runs a manifest.

Exit status is 0 on success, 1 when an input violates a documented
invariant (or a numerical routine fails), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import DomainError, QuadratureError, load_config, mixed_state_from_dict, Resonance
from .densities import AppendixSurvivalDensity, ExpSumDensity, LorentzianDensity
from .fitting import FitError, FitOptions, fit_oscillation, initial_guess, model_compare
from .gamow import gamow_rate, surviving_count
from .interference import KaonSystem, interference_rate, kaon_rates
from .observables import empirical_time_of_flight, time_of_flight
from .simulation import EventSet, Histogram, SamplingError, bin_events, sample_decays
from .spectral import (EnergyWaveFunction, appendix_wave_function, breit_wigner_wave_function,
                       nondecay_rate)
from .survival import AppendixExample, SurvivalModelParams, appendix_pair, survival_superposition_rate

SUBCOMMANDS = ("transform", "gamow", "interfere", "kaon", "compare", "sample", "fit", "tof")
# config keys that shadow flags
_CONFIG_FLAGS = ("e_r", "gamma", "n0", "hbar", "seed")


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_series(path: Path, fmt: str, columns: dict):
    names = list(columns)
    if fmt == "json":
        obj = {k: [float(v) for v in np.asarray(columns[k]).tolist()] for k in names}
        path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
        return
    arrays = [np.asarray(columns[k]) for k in names]
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*(a.tolist() for a in arrays)):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n",
                    encoding="utf-8")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _grid(args, start=0.0):
    if args.t_max is None or args.dt is None:
        raise DomainError("--t-max and --dt are required for series output")
    if not args.dt > 0 or not args.t_max > 0:
        raise DomainError("--t-max and --dt must be positive")
    n = int(math.floor(args.t_max / args.dt + 1e-9))
    t = args.dt * np.arange(n + 1)
    return t[t >= start - 1e-15] if start else t


def _state(args):
    if args.config_data is not None:
        return mixed_state_from_dict(args.config_data)
    if args.gamma is None:
        raise DomainError("give --config or --gamma")
    return mixed_state_from_dict({"e_r": args.e_r or 0.0, "gamma": args.gamma})


def _density(args):
    """Single-particle density selected by --model."""
    if args.model == "appendix-timerep":
        return LorentzianDensity(_need(args.alpha, "--alpha"))
    if args.model == "appendix-survival":
        return AppendixSurvivalDensity(_need(args.alpha, "--alpha"))
    state = _state(args)
    if len(state.components) == 1:
        return ExpSumDensity.exponential(state.components[0].resonance.gamma, args.hbar)
    return ExpSumDensity.from_mixed_state(state, args.hbar)


def _need(value, flag):
    if value is None:
        raise DomainError(f"{flag} is required here")
    return value


# -- subcommands ---------------------------------------------------------------

def cmd_transform(args, out):
    """Time-representation rate of an energy wave function."""
    start = 0.0
    if args.input:
        f = EnergyWaveFunction.from_csv(args.input, args.tail)
        label = f"sampled {args.input}"
    elif args.alpha is not None:
        f = appendix_wave_function(args.alpha, args.hbar)
        label = f"exponential alpha={args.alpha}"
    else:
        # 1/E tail: phi(t) diverges at t = 0
        f = breit_wigner_wave_function(_need(args.e_r, "--e-r"), _need(args.gamma, "--gamma"))
        start = args.dt
        label = f"Breit-Wigner e_r={args.e_r} gamma={args.gamma}"
    t = _grid(args, start)
    ts = nondecay_rate(f, t, tol=args.tol, hbar=args.hbar)
    _write_series(out, args.format, {"t": ts.t, "rate": args.n0 * ts.values})
    return f"transform: {label}, {t.size} points"


def cmd_gamow(args, out):
    r = Resonance(args.e_r or 0.0, _need(args.gamma, "--gamma"))
    t = _grid(args)
    if args.quantity == "survival":
        _write_series(out, args.format, {"t": t, "value": surviving_count(r, 1.0, t, args.hbar)})
    else:
        _write_series(out, args.format, {"t": t, "rate": gamow_rate(r, args.n0, t, args.hbar)})
    return f"gamow: gamma={r.gamma} tau={args.hbar / r.gamma:.6g}, {t.size} points"


def cmd_interfere(args, out):
    state = _state(args)
    t = _grid(args)
    _write_series(out, args.format, {"t": t, "rate": interference_rate(state, args.n0, t, args.hbar)})
    return f"interfere: {len(state.components)} components, {t.size} points"


def cmd_kaon(args, out):
    state = _state(args)
    if len(state.components) != 2:
        raise DomainError("kaon needs a config with two components (short, long)")
    k = KaonSystem(state.components[0].resonance, state.components[1].resonance)
    t = _grid(args)
    _write_series(out, args.format, {"t": t, "rate": kaon_rates(k, args.n0, t, args.beam, args.hbar)})
    return f"kaon: beam={args.beam}, {t.size} points"


def cmd_compare(args, out):
    """Rate laws side by side, or a three-way fit comparison of events."""
    if args.events:
        h = _histogram(args)
        rep = model_compare(h, opts=FitOptions(frequency="omega"))
        _write_json(out, rep.to_dict())
        return f"compare: ranking {', '.join(rep.ranking)}"
    if args.alpha is not None:
        t = _grid(args)
        rate, ps, dps = appendix_pair(AppendixExample(args.alpha), t)
        _write_series(out, args.format, {"t": t, "rate_timerep": args.n0 * rate,
                                         "p_survival": ps, "rate_survival": -args.n0 * dps})
        return f"compare: exponential wave function alpha={args.alpha}, {t.size} points"
    state = _state(args)
    if len(state.components) != 2:
        raise DomainError("compare needs --alpha, --events, or a two-component config")
    c1, c2 = state.components
    if not math.isclose(c1.resonance.gamma, c2.resonance.gamma, rel_tol=1e-12):
        raise DomainError("survival comparison needs equal widths")
    p = SurvivalModelParams(c1.b_mag * np.exp(1j * c1.b_phase), c2.b_mag * np.exp(1j * c2.b_phase),
                            c1.resonance.gamma, c1.resonance.e_r - c2.resonance.e_r, args.hbar)
    t = _grid(args)
    _write_series(out, args.format, {"t": t,
                                     "rate_timerep": interference_rate(state, args.n0, t, args.hbar),
                                     "rate_survival": survival_superposition_rate(p, args.n0, t)})
    return f"compare: A={p.A:.6g} psi={p.psi:.6g}, {t.size} points"


def cmd_sample(args, out):
    d = _density(args)
    e = sample_decays(d, int(args.n0), args.seed, args.t_max, args.generator)
    e.to_csv(out)
    return (f"sample: {len(e)} events (censored {e.n_censored}, negative {e.n_negative}) "
            f"seed={e.seed} generator={e.generator}")


def _histogram(args):
    if args.events:
        e = EventSet.from_csv(args.events)
        return bin_events(e, _need(args.dt, "--dt"), args.t_max)
    return Histogram.from_csv(args.hist)


def cmd_fit(args, out):
    if not (args.events or args.hist):
        raise DomainError("fit needs --events or --hist")
    h = _histogram(args)
    opts = FitOptions(model_tag=args.model_tag, frequency="period" if args.period else "omega")
    res = fit_oscillation(h, initial_guess(h, args.model_tag), opts)
    _write_json(out, res.to_dict())
    m = res.model
    return (f"fit: {args.model_tag} a={m.a:.6g} T={m.period:.6g} lam={m.lam:.6g} "
            f"chi2/ndof={res.chi2:.6g}/{res.ndof}")


def cmd_tof(args, out):
    if args.events:
        e = EventSet.from_csv(args.events)
        val = empirical_time_of_flight(e)
        _write_json(out, {"mean": val, "n": len(e), "source": str(args.events)})
        return f"tof: empirical mean {val:.17g} over {len(e)} events"
    rep = time_of_flight(_density(args), args.tol)
    _write_json(out, rep.to_dict())
    return f"tof: mean={'undefined' if rep.mean is None else format(rep.mean, '.17g')}"


_HANDLERS = {name: globals()[f"cmd_{name}"] for name in SUBCOMMANDS}
_JSON_ONLY = {"fit", "tof"}


# -- argument handling -------------------------------------------------------------

def _common(p):
    p.add_argument("--e-r", type=float, help="resonance energy")
    p.add_argument("--gamma", type=float, help="resonance width")
    p.add_argument("--n0", type=float, default=1.0, help="number of systems (default 1)")
    p.add_argument("--hbar", type=float, default=1.0, help="reduced Planck constant (default 1)")
    p.add_argument("--t-max", type=float, help="end of the time grid / observation window")
    p.add_argument("--dt", type=float, help="grid step or histogram bin width")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--tol", type=float, default=1e-8, help="absolute tolerance (default 1e-8)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output path (default <subcommand>.<format>)")
    p.add_argument("--config", help="JSON config; its values override flags")
    p.add_argument("--replay", help="re-run the given manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timedecay", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.epilog = "timedecay --replay MANIFEST [--out PATH] re-runs a recorded manifest."
    sub = parser.add_subparsers(dest="subcommand", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    helps = {
        "transform": "time-representation rate of an energy wave function",
        "gamow": "single Gamow state rate or surviving fraction",
        "interfere": "two-resonance interference rate",
        "kaon": "neutral-kaon K0 / K0bar decay rate",
        "compare": "time-representation vs survival rates, or a three-way fit comparison",
        "sample": "Monte Carlo decay times",
        "fit": "oscillation fit to binned events",
        "tof": "time of flight (first moment)",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        _common(p)
        if name in ("transform", "compare", "sample", "tof"):
            p.add_argument("--alpha", type=float, help="exponential wave function parameter")
        if name == "transform":
            p.add_argument("--input", help="CSV with columns E,re,im")
            p.add_argument("--tail", help="JSON tail declaration for --input")
        if name == "gamow":
            p.add_argument("--quantity", choices=("rate", "survival"), default="rate")
        if name == "kaon":
            p.add_argument("--beam", choices=("K0", "K0bar"), default="K0")
        if name in ("sample", "tof"):
            p.add_argument("--model", choices=("state", "appendix-timerep", "appendix-survival"),
                           default="state", help="density to use (default: from config/--gamma)")
        if name == "sample":
            p.add_argument("--generator", choices=("inverse_cdf", "rejection"), default="inverse_cdf")
        if name in ("fit", "compare", "tof"):
            p.add_argument("--events", help="event CSV written by 'sample'")
        if name == "fit":
            p.add_argument("--hist", help="histogram CSV with columns t_lo,t_hi,count")
            p.add_argument("--model-tag", choices=("timerep", "survival", "quantumbeat"),
                           default="timerep")
            p.add_argument("--period", action="store_true", help="fit the period instead of omega")
    return parser


def _resolve(args):
    """Apply the config file over flags and record the result."""
    args.config_data = None
    if args.config:
        cfg = load_config(args.config)
        args.config_data = cfg
        for key in _CONFIG_FLAGS:
            if key in cfg:
                setattr(args, key, cfg[key])
    if args.out is None:
        args.out = f"{args.subcommand}.{'json' if args.subcommand in _JSON_ONLY else args.format}"
    return args


def _params(args) -> dict:
    skip = {"replay", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _from_manifest(path, parser):
    m = json.loads(Path(path).read_text(encoding="utf-8"))
    params = dict(m["params"])
    args = parser.parse_args([m["subcommand"]])
    for k, v in params.items():
        setattr(args, k, v)
    args.replay = None
    args.config = None
    return args


def run(args) -> str:
    out = Path(args.out)
    summary = _HANDLERS[args.subcommand](args, out)
    manifest = {"subcommand": args.subcommand, "params": _params(args), "seed": args.seed,
                "version": __version__, "outputs": [str(out)]}
    if args.subcommand == "sample":
        manifest["outputs"].append(str(out.with_suffix(".json")))
    _write_json(Path(str(out) + ".manifest.json"), manifest)
    return summary


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["--replay"] and len(argv) > 1:
        # the manifest names the subcommand; parse the rest under it
        try:
            sub = json.loads(Path(argv[1]).read_text(encoding="utf-8"))["subcommand"]
        except (OSError, ValueError, KeyError) as exc:
            print(f"timedecay: error: cannot read manifest {argv[1]}: {exc}", file=sys.stderr)
            return 1
        argv = [sub] + argv
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        if args.replay:
            override = args.out
            args = _from_manifest(args.replay, parser)
            if override is not None:
                args.out = override
        else:
            args = _resolve(args)
        print(run(args))
    except (DomainError, QuadratureError, SamplingError, FitError) as exc:
        print(f"timedecay {args.subcommand}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"timedecay {args.subcommand}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
