"""Command-line front end.

Usage::

    mgtfourier <subcommand> [--config FILE] [--phi X] [--modes N]
               [--lambda-min X] [--lambda-max X] [--out DIR] [--seed K]

Subcommands: spectrum, sweep, peaks, analytic, probe, gevrey, evolve, report.
Each writes one CSV of series data plus ``summary.json`` into the output
directory.  Wall time goes to a separate ``timing.json`` so that the data
files and the summary are byte-identical across reruns.

Exit codes: 0 success, 1 usage or validation error, 2 numerical defect.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .evolve import energy_balance_defect, evolve, fit_decay_rate, random_initial_state, spectral_abscissa
from .model import (
    ModelParams,
    NumericalDefect,
    ParameterError,
    SpectrumError,
    SpectrumModel,
    build_spectrum,
    validate_params,
)
from .probe import Regime, _flag, predicted_slopes, probe_series, series_slopes
from .sweep import (
    FitError,
    analyticity_index,
    default_window,
    peak_window,
    fit_exponent,
    global_norms,
    resonance_families,
    run_sweep,
    track_peaks,
)
from .blocknum import ModalStack

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "load_config",
    "dump_config",
    "write_outputs",
    "run_command",
    "main",
    "COMMANDS",
]

COMMANDS = ("spectrum", "sweep", "peaks", "analytic", "probe", "gevrey", "evolve", "report")
DEFAULT_PHI_LIST = (0.0, 0.25, 0.5, 0.6, 0.75, 0.9, 1.0)
EVOLVE_TIMES = np.linspace(0.0, 50.0, 501)
DECAY_WINDOW = (5.0, 50.0)


class ConfigError(ValueError):
    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    spectrum: SpectrumModel = field(default_factory=SpectrumModel)
    lambda_grid: tuple = (1.0, 1e6, 64)
    fit_decades: float = 2.0
    phi_list: tuple = DEFAULT_PHI_LIST
    output: str = "./out"
    seed: int = 42


def _float(s):
    return float(s)


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError(f"{s!r} is not an integer")
    return int(v)


def _floats(s):
    return tuple(float(x) for x in s.split(",") if x.strip())


# key -> (parser, default); order is the dump order
_KEYS = {
    "alpha": (_float, None),
    "beta": (_float, None),
    "a": (_float, None),
    "eta": (_float, None),
    "phi": (_float, None),
    "spectrum.kind": (str, "power_law"),
    "spectrum.c": (_float, math.pi**2),
    "spectrum.p": (_float, 2.0),
    "spectrum.n": (_int, 256),
    "spectrum.values": (_floats, ()),
    "lambda.min": (_float, 1.0),
    "lambda.max": (_float, 1e6),
    "lambda.ppd": (_int, 64),
    "fit.decades": (_float, 2.0),
    "phi.list": (_floats, DEFAULT_PHI_LIST),
    "seed": (_int, 42),
    "out": (str, "./out"),
}
_DEFAULT_PARAMS = {"alpha": 1.0, "beta": 2.0, "a": 1.0, "eta": 1.0, "phi": 1.0}


def _build(values: dict) -> RunConfig:
    """Typed key/value map -> validated RunConfig."""
    raw = {k: values.get(k, _DEFAULT_PARAMS[k]) for k in _DEFAULT_PARAMS}
    try:
        params = validate_params(raw)
    except ParameterError as exc:
        raise ConfigError(f"{exc.key}: {exc}", exc.key) from None

    kind = values.get("spectrum.kind", "power_law")
    if kind == "power_law":
        spec = SpectrumModel.power_law(values.get("spectrum.c", math.pi**2), values.get("spectrum.p", 2.0),
                                       values.get("spectrum.n", 256))
        key = "spectrum.c"
    elif kind == "explicit":
        vals = values.get("spectrum.values", ())
        spec = SpectrumModel.explicit(vals, values.get("spectrum.n", len(vals)))
        key = "spectrum.values"
    else:
        raise ConfigError(f"spectrum.kind must be power_law or explicit, got {kind!r}", "spectrum.kind")
    try:
        build_spectrum(spec)
    except SpectrumError as exc:
        k = "spectrum.n" if "count" in str(exc) else key
        raise ConfigError(f"{k}: {exc}", k) from None

    lo, hi, ppd = values.get("lambda.min", 1.0), values.get("lambda.max", 1e6), values.get("lambda.ppd", 64)
    if not lo > 0:
        raise ConfigError("lambda.min must be positive", "lambda.min")
    if not hi > lo:
        raise ConfigError("lambda.max must exceed lambda.min", "lambda.max")
    if ppd < 16:
        raise ConfigError("lambda.ppd must be at least 16", "lambda.ppd")
    dec = values.get("fit.decades", 2.0)
    if not dec > 0:
        raise ConfigError("fit.decades must be positive", "fit.decades")
    phis = tuple(values.get("phi.list", DEFAULT_PHI_LIST))
    if not phis or any(not 0.0 <= p <= 1.0 for p in phis):
        raise ConfigError("phi.list entries must lie in [0, 1]", "phi.list")
    out = values.get("out", "./out")
    if not out:
        raise ConfigError("out must be a non-empty path", "out")
    return RunConfig(params=params, spectrum=spec, lambda_grid=(lo, hi, ppd), fit_decades=dec,
                     phi_list=phis, output=out, seed=values.get("seed", 42))


def _parse_values(text: str) -> dict:
    values, seen = {}, {}
    for k, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {k}: expected 'key = value'", line=k)
        key, val = (s.strip() for s in body.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r} at line {k}", key, k)
        if key in seen:
            raise ConfigError(f"duplicate key at line {k}: {key!r} (first set at line {seen[key]})", key, k)
        seen[key] = k
        try:
            values[key] = _KEYS[key][0](val)
        except ValueError:
            raise ConfigError(f"line {k}: bad value for {key}: {val!r}", key, k) from None
    return values


def parse_config(text: str) -> RunConfig:
    return _build(_parse_values(text))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def _config_values(cfg: RunConfig) -> dict:
    p, s = cfg.params, cfg.spectrum
    vals = {
        "alpha": p.alpha, "beta": p.beta, "a": p.a, "eta": p.eta, "phi": p.phi,
        "spectrum.kind": s.kind, "spectrum.c": s.c, "spectrum.p": s.p, "spectrum.n": s.count,
        "spectrum.values": tuple(s.values),
        "lambda.min": cfg.lambda_grid[0], "lambda.max": cfg.lambda_grid[1], "lambda.ppd": cfg.lambda_grid[2],
        "fit.decades": cfg.fit_decades, "phi.list": tuple(cfg.phi_list), "seed": cfg.seed, "out": cfg.output,
    }
    return vals


def _fmt(v):
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_config(cfg: RunConfig) -> str:
    """Config text that :func:`parse_config` maps back to ``cfg``."""
    vals = _config_values(cfg)
    if cfg.spectrum.kind == "power_law":
        del vals["spectrum.values"]
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in vals.items())


def _git_hash(data: bytes) -> str:
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(x) for x in r])


def write_outputs(results: dict, cfg: RunConfig, command: str, elapsed: float | None = None) -> list:
    """Write ``results['tables']`` as CSV and the rest as ``summary.json``.

    ``results`` holds ``tables`` (name -> (header, rows)) and ``summary``
    (a JSON-able mapping).  Returns the written paths.
    """
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, (header, rows) in results.get("tables", {}).items():
            p = out / f"{name}.csv"
            write_csv(p, header, rows)
            paths.append(p)
        cfg_text = dump_config(cfg)
        summary = {
            "command": command,
            "config": _jsonable(_config_values(cfg)),
            "input_hash": _git_hash(f"{command}\n{cfg_text}".encode()),
            "results": _jsonable(results.get("summary", {})),
        }
        p = out / "summary.json"
        p.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
        paths.append(p)
        if elapsed is not None:
            p = out / "timing.json"
            p.write_text(json.dumps({"command": command, "wall_time_s": elapsed}, sort_keys=True) + "\n")
            paths.append(p)
    except OSError as exc:
        raise OSError(f"cannot write outputs under {out}: {exc.strerror}") from exc
    return paths


# ---------------------------------------------------------------- experiments

def _sigma(cfg):
    return build_spectrum(cfg.spectrum)


def _fit_or_none(lam, values, window):
    try:
        f = fit_exponent(lam, values, window)
    except FitError as exc:
        return {"error": str(exc)}
    return {"slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared,
            "window": list(f.window), "n_points": f.n_points}


def cmd_spectrum(cfg):
    sigma = _sigma(cfg)
    stack = ModalStack(cfg.params, sigma)
    z = np.linalg.eigvals(stack.B)
    fam_a, fam_b = resonance_families(cfg.params, sigma)
    rows = [(n + 1, sigma[n], fam_a[n], fam_b[n], z[n].real.max()) for n in range(len(sigma))]
    return {
        "tables": {"spectrum": (("n", "sigma", "lambda_a", "lambda_b", "max_real_eig"), rows)},
        "summary": {"count": len(sigma), "sigma_min": sigma[0], "sigma_max": sigma[-1],
                    "spectral_abscissa": float(z.real.max())},
    }


def cmd_sweep(cfg):
    lo, hi, ppd = cfg.lambda_grid
    sigma = _sigma(cfg)
    stack = ModalStack(cfg.params, sigma)
    sw = run_sweep(cfg.params, stack, lo, hi, ppd)
    prod = sw.lam * sw.norm
    i, j = int(np.argmax(sw.norm)), int(np.argmax(prod))
    inv0, arg0 = global_norms(stack, [0.0])
    rows = list(zip(sw.lam, sw.norm, prod, sw.argmax_mode))
    return {
        "tables": {"sweep": (("lambda", "norm", "lambda_times_norm", "argmax_mode"), rows)},
        "summary": {"sup_norm": sw.norm[i], "lambda_at_sup": sw.lam[i], "argmax_mode_at_sup": sw.argmax_mode[i],
                    "sup_lambda_times_norm": prod[j], "lambda_at_sup_lambda_times_norm": sw.lam[j],
                    "inverse_norm_at_zero": inv0[0], "inverse_argmax_mode": int(arg0[0]) + 1,
                    "n_samples": len(sw), "n_grid": sw.n_base},
    }


def _peaks(cfg):
    return track_peaks(cfg.params, _sigma(cfg))


def cmd_peaks(cfg):
    pk = _peaks(cfg)
    w = peak_window(pk.lam_peak, cfg.fit_decades)
    rows = list(zip(pk.mode, pk.lam_res, pk.lam_peak, pk.peak, pk.lam_peak * pk.peak))
    return {
        "tables": {"peaks": (("mode", "lambda_res", "lambda_peak", "peak", "lambda_times_peak"), rows)},
        "summary": {"n_peaks": len(pk), "peak_slope": _fit_or_none(pk.lam_peak, pk.peak, w),
                    "lambda_times_peak_slope": _fit_or_none(pk.lam_peak, pk.lam_peak * pk.peak, w)},
    }


def cmd_analytic(cfg):
    pk = _peaks(cfg)
    rows = list(zip(pk.mode, pk.lam_peak, pk.peak, pk.lam_peak * pk.peak))
    summary = {"phi": cfg.params.phi}
    try:
        idx = analyticity_index(pk.lam_peak, pk.peak, decades=cfg.fit_decades)
        summary.update(sup_lambda_times_peak=idx.sup, trend_slope=idx.trend.slope,
                       trend_r_squared=idx.trend.r_squared, trend_window=list(idx.trend.window),
                       bounded=bool(abs(idx.trend.slope) <= 0.05))
    except FitError as exc:
        summary["error"] = str(exc)
    return {"tables": {"analytic": (("mode", "lambda_peak", "peak", "lambda_times_peak"), rows)},
            "summary": summary}


def _probe_lams(cfg):
    lo, hi, ppd = cfg.lambda_grid
    n = int(round(math.log10(hi / lo) * ppd)) + 1
    return np.logspace(math.log10(lo), math.log10(hi), n)


def _probe_window(cfg):
    hi = cfg.lambda_grid[1]
    return (max(cfg.lambda_grid[0], hi / 1e3), hi)


def _slope_table(series, phi, window):
    pred = predicted_slopes(series.regime, phi)
    try:
        fits = series_slopes(series, window)
    except FitError as exc:
        return [], str(exc)
    table = []
    for key, f in fits.items():
        p = pred[key]
        table.append({"quantity": key, "measured": f.slope, "r_squared": f.r_squared,
                      "predicted": None if p is None else p[0], "kind": None if p is None else p[1],
                      "flag": _flag(f.slope, p)})
    return table, None


def cmd_probe(cfg, regime="B"):
    regime = Regime(regime)
    phi = cfg.params.phi
    s = probe_series(cfg.params, regime, _probe_lams(cfg))
    rows = list(zip(s.n, s.lam, s.sigma, s.norm, s.lambda_norm, np.abs(s.mu), np.abs(s.nu), np.abs(s.delta)))
    table, err = _slope_table(s, phi, _probe_window(cfg))
    summary = {"regime": regime.value, "label": regime.label(phi), "phi": phi,
               "claimed_interval": regime.applies(phi), "fit_window": list(_probe_window(cfg)),
               "slopes": table, "forcing_norm": float(np.linalg.norm(ModalStack(cfg.params, s.sigma[:1]).Lh[0]
                                                                    @ regime.forcing(cfg.params))),
               "max_residual": float(s.residual.max())}
    if err:
        summary["error"] = err
    header = ("n", "lambda_n", "sigma_n", "norm_exact", "lambda_norm", "abs_mu", "abs_nu", "abs_delta")
    return {"tables": {"probe": (header, rows)}, "summary": summary}


def psi_targets(phi):
    """Claimed Gevrey exponents, keyed by name, for the phi where each applies."""
    out = {}
    if 0.5 < phi <= 0.75:
        out["psi1"] = 2 - 2 * phi
    if 0.75 <= phi < 1:
        out["psi2"] = 2 * phi - 1
    return out


def gevrey_measure(params, sigma, decades=2.0):
    """Peak series, global norms at the peaks and the fitted decay exponent."""
    stack = ModalStack(params, sigma)
    pk = track_peaks(params, stack)
    g, _ = global_norms(stack, pk.lam_peak)
    w = peak_window(pk.lam_peak, decades)
    fit = fit_exponent(pk.lam_peak, g, w)
    return pk, g, fit


def cmd_gevrey(cfg):
    phi = cfg.params.phi
    pk, g, fit = gevrey_measure(cfg.params, _sigma(cfg), cfg.fit_decades)
    psi_hat = -fit.slope
    flags = {}
    for name, target in (("psi1", 2 - 2 * phi), ("psi2", 2 * phi - 1)):
        applies = name in psi_targets(phi)
        flags[name] = {"value": target, "applies": applies,
                       "flag": ("PASS" if abs(psi_hat - target) <= 0.05 else "DISAGREE") if applies else "n/a"}
    rows = list(zip(pk.mode, pk.lam_peak, pk.peak, g))
    return {
        "tables": {"gevrey": (("mode", "lambda_peak", "block_peak", "global_norm"), rows)},
        "summary": {"phi": phi, "psi_hat": psi_hat, "slope": fit.slope, "r_squared": fit.r_squared,
                    "fit_window": list(fit.window), "n_points": fit.n_points, "claimed": flags},
    }


def cmd_evolve(cfg):
    sigma = _sigma(cfg)
    stack = ModalStack(cfg.params, sigma)
    U0 = random_initial_state(cfg.params, stack, cfg.seed)
    tr = evolve(cfg.params, stack, U0, EVOLVE_TIMES)
    fit = fit_decay_rate(tr, DECAY_WINDOW)
    sa = spectral_abscissa(cfg.params, stack)
    rows = list(zip(tr.times, tr.energy, tr.dissipation))
    return {
        "tables": {"evolve": (("t", "energy", "dissipation"), rows)},
        "summary": {"seed": cfg.seed, "initial_energy": tr.energy[0], "final_energy": tr.energy[-1],
                    "decay_slope": fit.slope, "decay_r_squared": fit.r_squared, "decay_window": list(fit.window),
                    "spectral_abscissa": sa, "abscissa_slope": 2 * sa,
                    "energy_non_increasing": bool(np.all(np.diff(tr.energy) <= 1e-12 * tr.energy[0])),
                    "energy_balance_defect": energy_balance_defect(tr)},
    }


def cmd_report(cfg):
    sigma = _sigma(cfg)
    lo, hi, ppd = cfg.lambda_grid
    lams = _probe_lams(cfg)
    window = _probe_window(cfg)
    rows, per_phi = [], {}
    for phi in cfg.phi_list:
        q = cfg.params.replace(phi=phi)
        stack = ModalStack(q, sigma)
        sw = run_sweep(q, stack, lo, hi, ppd)
        pk = track_peaks(q, stack)
        g, _ = global_norms(stack, pk.lam_peak)
        w = peak_window(pk.lam_peak, cfg.fit_decades)
        entry = {"sup_norm": sw.sup, "spectral_abscissa": spectral_abscissa(q, stack)}
        rows.append((phi, "-", "sup_norm", sw.sup, "", "", "finite" if math.isfinite(sw.sup) else "DISAGREE"))
        try:
            lp = fit_exponent(pk.lam_peak, pk.lam_peak * pk.peak, w).slope
            target = 0.0 if phi == 1 else None
            flag = ("PASS" if abs(lp) <= 0.05 else "DISAGREE") if target is not None else "n/a"
            rows.append((phi, "-", "lambda_times_peak", lp, "" if target is None else target, "approx", flag))
            psi_hat = -fit_exponent(pk.lam_peak, g, w).slope
            entry.update(lambda_times_peak_slope=lp, psi_hat=psi_hat)
            for name, target in psi_targets(phi).items():
                rows.append((phi, "-", name, psi_hat, target, "approx",
                             "PASS" if abs(psi_hat - target) <= 0.05 else "DISAGREE"))
        except FitError as exc:
            entry["peak_fit_error"] = str(exc)
        for regime in (Regime.A, Regime.B):
            table, err = _slope_table(probe_series(q, regime, lams), phi, window)
            for t in table:
                rows.append((phi, regime.label(phi), t["quantity"], t["measured"],
                             "" if t["predicted"] is None else t["predicted"], t["kind"] or "", t["flag"]))
            entry[f"probe_{regime.value}"] = table if not err else {"error": err}
        per_phi[repr(float(phi))] = entry
    flags = [r[-1] for r in rows]
    header = ("phi", "regime", "quantity", "measured", "predicted", "kind", "flag")
    return {"tables": {"report": (header, rows)},
            "summary": {"phi_list": list(cfg.phi_list), "per_phi": per_phi,
                        "n_pass": flags.count("PASS"), "n_disagree": flags.count("DISAGREE")}}


# ---------------------------------------------------------------- entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _make_parser():
    ap = _Parser(prog="mgtfourier", description="Resolvent, probe and decay experiments for the MGT-Fourier system.")
    sub = ap.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)
    sub.required = True
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--phi", type=float)
        sp.add_argument("--modes", type=int, help="number of modes N (spectrum.n)")
        sp.add_argument("--lambda-min", type=float)
        sp.add_argument("--lambda-max", type=float)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int)
        if name == "probe":
            sp.add_argument("--regime", choices=("A", "B"), default="B")
    return ap


def _resolve_config(args) -> RunConfig:
    values = {}
    if args.config:
        try:
            values = _parse_values(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
    overrides = {"phi": args.phi, "spectrum.n": args.modes, "lambda.min": args.lambda_min,
                 "lambda.max": args.lambda_max, "out": args.out, "seed": args.seed}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return _build(values)


_RUNNERS = {
    "spectrum": cmd_spectrum, "sweep": cmd_sweep, "peaks": cmd_peaks, "analytic": cmd_analytic,
    "probe": cmd_probe, "gevrey": cmd_gevrey, "evolve": cmd_evolve, "report": cmd_report,
}


def run_command(argv) -> int:
    try:
        args = _make_parser().parse_args(list(argv))
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        cfg = _resolve_config(args)
        t0 = time.perf_counter()
        if args.command == "probe":
            results = cmd_probe(cfg, args.regime)
        else:
            results = _RUNNERS[args.command](cfg)
        write_outputs(results, cfg, args.command, time.perf_counter() - t0)
    except (ConfigError, ParameterError, SpectrumError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalDefect as exc:
        print(f"numerical defect: {exc}", file=sys.stderr)
        return 2
    except (FitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run_command(sys.argv[1:]))
