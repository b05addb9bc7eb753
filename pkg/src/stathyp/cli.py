"""
Command-line experiment harness.

    stathyp <experiment> --config path.json [--seed u64] [--threads k] [--out dir]

Writes ``results.csv`` (columns: quantity, parameter, value, mean, stderr,
n, failures; floats with 17 significant digits) and ``manifest.json`` to the
output directory.  Exit status: 0 on success, 2 for an invalid config,
3 when an estimator fails.  See README.md for the config schema.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path
from typing import Optional

from . import __version__
from .boundary import NonConvergenceError, VisualMeasure
from .estimators import (EstimatorError, ExceptionConfig, estimate_E_curve, estimate_drift,
                         exception_rates, recurrence_sweep, separation_probability,
                         shadow_decay, thickness_probability)
from .geom import GeometryError, HalfPlanePoint, ModelPoint, to_model
from .lattice import oracle_from_json
from .selftest import run_all
from .walk import DistributionError, RngSpec, config_hash, distribution_from_json

EXPERIMENTS = ("estimate-e", "drift", "recurrence", "separation", "thickness",
               "shadow-decay", "exceptions", "geom-selftest")

COLUMNS = ("quantity", "parameter", "value", "mean", "stderr", "n", "failures")

EXIT_OK, EXIT_CONFIG, EXIT_ESTIMATOR = 0, 2, 3


class ConfigError(ValueError):
    pass


# -- parameter helpers ---------------------------------------------------------------

def _num(cfg, key, diags, default=None, positive=False, integer=False, required=True):
    if key not in cfg:
        if default is None and required:
            diags.append(f"missing parameter '{key}'")
        return default
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        diags.append(f"'{key}' must be a number")
        return None
    if integer and int(v) != v:
        diags.append(f"'{key}' must be an integer")
        return None
    if positive and not v > 0:
        diags.append(f"{key} must be positive")
    return int(v) if integer else float(v)


def _list(cfg, key, diags, alt=None, positive=True, increasing=True, integer=False):
    if key in cfg:
        v = cfg[key]
    elif alt is not None and alt in cfg:
        v = [cfg[alt]]
    else:
        diags.append(f"missing parameter '{key}'" + (f" (or '{alt}')" if alt else ""))
        return None
    if not isinstance(v, list) or not v or not all(
            isinstance(a, (int, float)) and not isinstance(a, bool) for a in v):
        diags.append(f"'{key}' must be a non-empty list of numbers")
        return None
    if integer and any(int(a) != a for a in v):
        diags.append(f"'{key}' entries must be integers")
    if positive and any(not a > 0 for a in v):
        diags.append(f"{key} entries must be positive")
    if increasing and any(b <= a for a, b in zip(v, v[1:])):
        diags.append(f"{key} must be strictly increasing")
    return [int(a) if integer else float(a) for a in v]


SYMBOLS = {"eta": "\u03b7", "theta": "\u03b8"}


def _unit_interval(cfg, key, diags, closed_right=False):
    v = _num(cfg, key, diags)
    if v is not None and not (0 < v < 1 or (closed_right and v == 1)):
        diags.append(f"{SYMBOLS.get(key, key)} must lie in (0,1{']' if closed_right else ')'}"
                     f" (got {key} = {v:g})")
    return v


def _base_point(cfg, diags) -> Optional[ModelPoint]:
    bp = cfg.get("base_point", [0.0, 1.0])
    try:
        if isinstance(bp, dict) and "model" in bp:
            return ModelPoint(bp["model"])
        if isinstance(bp, list) and len(bp) == 2:
            return to_model(HalfPlanePoint(float(bp[0]), float(bp[1])))
        diags.append("base_point must be [re, im] or {\"model\": [...]}")
    except (GeometryError, ValueError, TypeError) as e:
        diags.append(f"base_point: {e}")
    return None


def _measure(cfg, mu, diags):
    kind = cfg.get("measure", "harmonic")
    if kind == "harmonic":
        return mu
    if kind == "visual":
        return VisualMeasure(mu.dim if mu is not None else 2)
    diags.append(f"measure must be 'harmonic' or 'visual', got {kind!r}")
    return mu


# -- per-experiment parsing -------------------------------------------------------------

def _parse(experiment: str, cfg: dict) -> tuple[dict, list]:
    """Validated parameters plus the list of diagnostics."""
    diags: list = []
    if experiment not in EXPERIMENTS:
        return {}, [f"unknown experiment {experiment!r}; valid experiments: {', '.join(EXPERIMENTS)}"]
    if not isinstance(cfg, dict):
        return {}, ["config must be a JSON object"]
    if "experiment" in cfg and cfg["experiment"] != experiment:
        diags.append(f"config is for experiment {cfg['experiment']!r}, not {experiment!r}")
    p: dict = {}
    if "seed" in cfg and not _valid_seed(cfg["seed"]):
        diags.append("seed must be an unsigned 64-bit integer")
    if experiment == "geom-selftest":
        p["scale"] = _num(cfg, "scale", diags, default=1.0, positive=True)
        return p, diags

    try:
        p["mu"] = distribution_from_json(cfg.get("distribution", "psl2z-uniform-TTS"))
    except (DistributionError, GeometryError, ValueError, KeyError, TypeError) as e:
        diags.append(f"distribution: {e}")
        p["mu"] = None
    p["x"] = _base_point(cfg, diags)
    p["tol"] = _num(cfg, "tol", diags, default=1e-9, positive=True)
    p["max_steps"] = _num(cfg, "max_steps", diags, default=100_000, positive=True, integer=True)

    if experiment == "estimate-e":
        p["measure"] = _measure(cfg, p["mu"], diags)
        p["radii"] = _list(cfg, "radii", diags, alt="r")
        p["N"] = _num(cfg, "N", diags, integer=True)
        if p["N"] is not None and p["N"] < 2:
            diags.append("N must be >= 2")
    elif experiment == "drift":
        p["n"] = _list(cfg, "n", diags, integer=True)
        p["N"] = _num(cfg, "N", diags, positive=True, integer=True)
    elif experiment == "recurrence":
        p["R"] = _list(cfg, "R", diags)
        p["n"] = _num(cfg, "n", diags, integer=True)
        if p["n"] is not None and p["n"] < 0:
            diags.append("n must be >= 0")
        p["N"] = _num(cfg, "N", diags, positive=True, integer=True)
    elif experiment == "separation":
        p["measure"] = _measure(cfg, p["mu"], diags)
        p["M"] = _num(cfg, "M", diags)
        if p["M"] is not None and p["M"] < 0:
            diags.append("M must be nonnegative")
        p["eta"] = _unit_interval(cfg, "eta", diags)
        p["radii"] = _list(cfg, "radii", diags, alt="r")
        p["N"] = _num(cfg, "N", diags, positive=True, integer=True)
        p["step"] = _num(cfg, "step", diags, default=0.1, positive=True)
    elif experiment == "thickness":
        p["measure"] = _measure(cfg, p["mu"], diags)
        try:
            p["oracle"] = oracle_from_json(cfg.get("oracle"))
        except ValueError as e:
            diags.append(f"oracle: {e}")
        p["theta"] = _unit_interval(cfg, "theta", diags, closed_right=True)
        p["eta"] = _unit_interval(cfg, "eta", diags)
        p["radii"] = _list(cfg, "radii", diags, alt="r")
        p["N"] = _num(cfg, "N", diags, positive=True, integer=True)
        p["step"] = _num(cfg, "step", diags, default=0.1, positive=True)
        p["grid"] = _num(cfg, "grid", diags, default=0.01, positive=True)
    elif experiment == "shadow-decay":
        p["measure"] = _measure(cfg, p["mu"], diags)
        p["distances"] = _list(cfg, "distances", diags, positive=False)
        if p["distances"] and any(d < 0 for d in p["distances"]):
            diags.append("distances must be nonnegative")
        p["tau"] = _num(cfg, "tau", diags)
        if p["tau"] is not None and p["tau"] < 0:
            diags.append("tau must be nonnegative")
        p["N_dir"] = _num(cfg, "N_dir", diags, positive=True, integer=True)
        p["N_boundary"] = _num(cfg, "N_boundary", diags, positive=True, integer=True)
    elif experiment == "exceptions":
        p["n"] = _list(cfg, "n", diags, integer=True)
        p["N"] = _num(cfg, "N", diags, positive=True, integer=True)
        ex = {k: _num(cfg, k, diags) for k in ("R", "p", "rho", "D", "c", "A_hat", "a")}
        m_max = _num(cfg, "m_max", diags, integer=True, required=False)
        if p["n"] and all(v is not None for v in ex.values()):
            p["cfgs"] = []
            for n in p["n"]:
                try:
                    p["cfgs"].append(ExceptionConfig(n=n, m_max=m_max, **ex))
                except ValueError as e:
                    diags.append(f"exception config (n = {n}): {e}")
                    break
    if p.get("mu") is not None and p.get("x") is not None and p["mu"].dim != p["x"].dim:
        diags.append("base_point and distribution have different dimensions")
    return p, diags


def _valid_seed(seed) -> bool:
    return isinstance(seed, int) and not isinstance(seed, bool) and 0 <= seed < 2 ** 64


def load_config(path) -> dict:
    """Parse a JSON config; raises ConfigError with the location on failure."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None


def validate(config, experiment: Optional[str] = None) -> list:
    """Diagnostics for a config (dict or path); empty iff run would accept it."""
    if not isinstance(config, dict):
        try:
            config = load_config(config)
        except ConfigError as e:
            return [str(e)]
    exp = experiment or (config.get("experiment") if isinstance(config, dict) else None)
    if exp is None:
        return [f"no experiment given; valid experiments: {', '.join(EXPERIMENTS)}"]
    return _parse(exp, config)[1]


# -- running -----------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _row(q, param, value, est):
    return (q, param, value, est.mean, est.stderr, est.n_samples, est.n_failures)


def _execute(experiment: str, p: dict, seed: int, workers: int) -> list:
    rng = RngSpec(seed)
    kw = dict(workers=workers)
    hk = dict(tol=p.get("tol"), max_steps=p.get("max_steps"), **kw)
    rows = []
    if experiment == "geom-selftest":
        for c in run_all(p["scale"]):
            rows.append((c.name, "worst", c.worst, c.n_failed / c.n_checked, 0.0,
                         c.n_checked, c.n_failed))
        return rows
    mu, x = p["mu"], p["x"]
    if experiment == "estimate-e":
        curve = estimate_E_curve(p["measure"], x, p["radii"], p["N"], rng, **hk)
        rows = [_row("E", "r", r, e) for r, e in curve.entries]
    elif experiment == "drift":
        rows = [_row("drift", "n", n, estimate_drift(mu, x, n, p["N"], rng, **kw)) for n in p["n"]]
    elif experiment == "recurrence":
        for R, (freq, lam) in zip(p["R"], recurrence_sweep(mu, x, p["R"], p["n"], p["N"], rng, **hk)):
            rows += [_row("recurrence_frequency", "R", R, freq), _row("h_lambda_R", "R", R, lam)]
    elif experiment == "separation":
        rows = [_row("separation", "r", r, separation_probability(
            p["measure"], x, p["M"], p["eta"], r, p["N"], rng, step=p["step"], **hk))
            for r in p["radii"]]
    elif experiment == "thickness":
        rows = [_row("thickness", "r", r, thickness_probability(
            p["measure"], x, p["oracle"], p["theta"], p["eta"], r, p["N"], rng,
            step=p["step"], grid=p["grid"], **hk)) for r in p["radii"]]
    elif experiment == "shadow-decay":
        rows = [_row("max_shadow_mass", "d", d, e) for d, e in shadow_decay(
            p["measure"], x, p["distances"], p["tau"], p["N_dir"], p["N_boundary"], rng, **hk)]
    elif experiment == "exceptions":
        for cfg in p["cfgs"]:
            for k, e in exception_rates(mu, x, cfg, p["N"], rng, **hk).items():
                rows.append(_row(k, "n", cfg.n, e))
    return rows


def results_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _echo(config: dict, p: dict) -> dict:
    """Config echo with the distribution expanded to explicit matrices."""
    out = dict(config)
    if p.get("mu") is not None:
        out["distribution"] = p["mu"].to_json()
    return out


def run(experiment: str, config: dict, seed: Optional[int] = None, workers: int = 1,
        out: Optional[str] = None) -> int:
    p, diags = _parse(experiment, config)
    if seed is None:
        seed = config.get("seed", 0) if isinstance(config, dict) else 0
    if not _valid_seed(seed):
        diags.append("seed must be an unsigned 64-bit integer")
    if diags:
        for d in diags:
            print(f"error: {d}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        rows = _execute(experiment, p, seed, workers)
    except (EstimatorError, NonConvergenceError) as e:
        print(f"estimator failure: {e}", file=sys.stderr)
        return EXIT_ESTIMATOR
    elapsed = time.perf_counter() - t0
    outdir = Path(out or config.get("out", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    text = results_csv(rows)
    (outdir / "results.csv").write_text(text)
    echo = _echo(config, p)
    manifest = {
        "experiment": experiment,
        "config": echo,
        "seed": seed,
        "config_hash": config_hash({"experiment": experiment, "config": echo, "seed": seed}),
        "version": __version__,
        "duration_seconds": elapsed,
        "failures": int(sum(r[6] for r in rows)),
        "workers": workers,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(text, end="")
    if experiment == "geom-selftest" and any(r[6] for r in rows):
        print("geometry self-test failures", file=sys.stderr)
        return EXIT_ESTIMATOR
    return EXIT_OK


def _workers(flag: Optional[int]) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="stathyp", description=__doc__.split("\n\n")[0].strip(),
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("experiment", help="one of: " + ", ".join(EXPERIMENTS))
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    ap.add_argument("--threads", type=int, help="worker processes (env THREADS otherwise)")
    ap.add_argument("--out", help="output directory (default: current directory)")
    ap.add_argument("--validate", action="store_true", help="only check the config")
    a = ap.parse_args(argv)
    if a.experiment not in EXPERIMENTS:
        print(f"error: unknown experiment {a.experiment!r}; valid experiments: "
              f"{', '.join(EXPERIMENTS)}", file=sys.stderr)
        return EXIT_CONFIG
    if a.config is None:
        config = {}
    else:
        try:
            config = load_config(a.config)
        except ConfigError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_CONFIG
    if a.validate:
        diags = validate(config, a.experiment)
        for d in diags:
            print(f"error: {d}", file=sys.stderr)
        return EXIT_CONFIG if diags else EXIT_OK
    return run(a.experiment, config, a.seed, _workers(a.threads), a.out)


if __name__ == "__main__":
    sys.exit(main())
