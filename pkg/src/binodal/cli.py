"""Command-line front end producing plot-ready tables.

Every subcommand writes its tables (CSV or JSON) plus a ``summary.json``
holding the scalar results and the parameters used. Runs over several
values of mu go into ``mu=<value>`` subdirectories, except for ``nucleus``
and ``pcx`` sweeps, which collapse into a single table indexed by mu.

Exit codes: 0 success, 2 configuration error, 3 numerical or domain failure.
"""
import argparse
import csv
from dataclasses import dataclass, field
import json
import logging
import math
import os
from pathlib import Path
import sys
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from . import jumpset as js
from . import nucleus as nu
from . import pcx
from . import secondary as sc
from .errors import BinodalError, DomainError, IndeterminateVerdict, NoWPoint
from .verdict import PcxStatus
from .material import MaterialParams

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("binodal")

COMMANDS = ("jumpset", "secondary", "nucleus", "qw", "pcx", "binodal")
PRESET = {"d1": 1.0, "d2": 3.0, "mu": 1.0}
# one panel per regime: liquid, polyconvex W-points, non-polyconvex W-points, no W-points
JUMPSET_PANELS = (0.0, 2.5, 7.5, 12.5)
DEFAULT_SAMPLES = {"jumpset": 400, "secondary": 400, "nucleus": 501, "qw": 501, "pcx": 50, "binodal": 501}
CONFIG_KEYS = {"mu", "d1", "d2", "samples", "out", "format", "mu_sweep"}
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
SCHEMA_PATH = Path(__file__).with_name("schemas") / "summary.schema.json"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    material: MaterialParams
    mus: List[float]
    samples: int
    out: Path
    fmt: str = "csv"
    sweep: bool = False


@dataclass
class Run:
    mu: float
    status: str = "ok"
    message: Optional[str] = None
    scalars: Dict[str, Optional[float]] = field(default_factory=dict)
    verdicts: Dict[str, str] = field(default_factory=dict)
    bracket: Optional[List[float]] = None
    files: List[str] = field(default_factory=list)


# ---------------------------------------------------------------- output


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def write_table(directory, name, columns, rows, fmt):
    """Write one table; returns the file name relative to ``directory``."""
    directory.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        fname = f"{name}.csv"
        with open(directory / fname, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_cell(v) for v in r])
    else:
        fname = f"{name}.json"
        doc = {"columns": list(columns), "rows": [[_json_value(v) for v in r] for r in rows]}
        with open(directory / fname, "w") as fh:
            json.dump(doc, fh, indent=1, allow_nan=False)
            fh.write("\n")
    return fname


def _mu_dir(cfg, mu):
    if len(cfg.mus) == 1:
        return cfg.out, ""
    tag = f"mu={mu:.12g}"
    return cfg.out / tag, tag + "/"


# ---------------------------------------------------------------- commands


def _jumpset_tables(p, cfg, directory, prefix, run, stable_only=False):
    lo = max(math.sqrt(p.mu) / (p.d2 - p.d1), 0.5 * math.sqrt(p.d1))
    hi = 2.0 * math.sqrt(p.d2)
    pairs = js.jump_set_curve(p, (lo, hi), cfg.samples)
    rows = []
    for q in pairs:
        if stable_only and not q.weierstrass_ok:
            continue
        ea, em = js.jump_expansion(q.eps0, p)
        rows.append((q.eps0, q.eps_plus, q.eps_minus, q.d_plus, q.d_minus, q.weierstrass_ok, ea, em))
    cols = ("eps0", "eps_plus", "eps_minus", "d_plus", "d_minus", "weierstrass_ok", "eps_plus_asym", "eps_minus_asym")
    run.files.append(prefix + write_table(directory, "jumpset", cols, rows, cfg.fmt))
    run.scalars["n_pairs"] = float(len(rows))
    return pairs


def cmd_jumpset(cfg):
    runs = []
    for mu in cfg.mus:
        p = cfg.material.with_mu(mu)
        directory, prefix = _mu_dir(cfg, mu)
        run = Run(mu)
        _jumpset_tables(p, cfg, directory, prefix, run)
        e1 = np.linspace(0.25 * math.sqrt(p.d1), 2.0 * math.sqrt(p.d2), cfg.samples)
        rows = [(e, p.d1 / e, p.d2 / e) for e in e1]
        run.files.append(prefix + write_table(directory, "hyperbolas", ("eps1", "eps2_d1", "eps2_d2"), rows, cfg.fmt))
        run.scalars["w_point_existence_threshold"] = js.w_point_existence_threshold(p)
        try:
            wp = js.w_point(p)
            wrows = wp.coordinates()
            run.scalars["w_eps0"] = wp.eps0
            run.scalars["w_eps_minus"] = wp.eps_minus
        except NoWPoint as exc:
            log.warning("mu=%g: %s", mu, exc)
            wrows = []
            run.scalars["w_eps0"] = None
            run.scalars["w_eps_minus"] = None
            run.message = str(exc)
        run.files.append(prefix + write_table(directory, "wpoints", ("eps1", "eps2"), wrows, cfg.fmt))
        runs.append(run)
    return runs


def _secondary_tables(p, cfg, directory, prefix, run):
    curve = sc.secondary_curve(p, cfg.samples)
    lo, hi = sc.secondary_eps0_range(p)
    rows = []
    for q in curve.full:
        try:
            xa, ya = sc.asymptotic_secondary(q.eps0, p)
        except BinodalError:
            xa = ya = math.nan
        rows.append((q.eps0, q.eps_bar, q.d0, q.lam, q.x0, q.y0, xa, ya))
    cols = ("eps0", "eps_bar", "d0", "lambda", "x0", "y0", "x0_asym", "y0_asym")
    run.files.append(prefix + write_table(directory, "secondary", cols, rows, cfg.fmt))
    rows = [(q.x0, q.y0) for q in curve.points]
    run.files.append(prefix + write_table(directory, "secondary_branch", ("x0", "y0"), rows, cfg.fmt))
    run.files.append(prefix + write_table(directory, "secondary_mirror", ("x0", "y0"), curve.mirror, cfg.fmt))
    e = np.linspace(lo, hi, cfg.samples)
    rows = [(ei, *sc.asymptotic_secondary(ei, p)) for ei in e]
    run.files.append(prefix + write_table(directory, "secondary_asymptotic", ("eps0", "x0", "y0"), rows, cfg.fmt))
    run.scalars["hydrostatic_intersection"] = curve.hydrostatic_intersection
    run.scalars["eps0_min"] = min(q.eps0 for q in curve.full)
    run.scalars["eps0_max"] = max(q.eps0 for q in curve.full)
    run.scalars["asymptotic_gap"] = sc.asymptotic_gap(curve.full, p)
    return curve


def cmd_secondary(cfg):
    runs = []
    for mu in cfg.mus:
        p = cfg.material.with_mu(mu)
        directory, prefix = _mu_dir(cfg, mu)
        run = Run(mu)
        _guard(run, lambda: _secondary_tables(p, cfg, directory, prefix, run))
        runs.append(run)
    return runs


def _nucleus_scalars(p, run):
    sol = nu.solve_nucleus(p)
    a = nu.eps_inf_asymptotic(p)
    run.scalars["eps_inf"] = sol.eps_inf
    run.scalars["eps_inf_asymptotic"] = a
    run.scalars["eps_inf_relative_gap"] = (sol.eps_inf - a) / sol.eps_inf
    run.scalars["nondegeneracy"] = nu.nondegeneracy(p, sol)
    return sol


def cmd_nucleus(cfg):
    if cfg.sweep:
        runs, rows = [], []
        for mu in cfg.mus:
            run = Run(mu)
            _guard(run, lambda: _nucleus_scalars(cfg.material.with_mu(mu), run))
            s = run.scalars
            rows.append((mu, s.get("eps_inf"), s.get("eps_inf_asymptotic"), s.get("eps_inf_relative_gap"), s.get("nondegeneracy")))
            runs.append(run)
        cols = ("mu", "eps_inf", "eps_inf_asym", "relative_gap", "nondegeneracy")
        runs[0].files.append(write_table(cfg.out, "eps_inf", cols, [_nan(r) for r in rows], cfg.fmt))
        return runs
    runs = []
    for mu in cfg.mus:
        p = cfg.material.with_mu(mu)
        directory, prefix = _mu_dir(cfg, mu)
        run = Run(mu)

        def work():
            sol = _nucleus_scalars(p, run)
            m = sol.x > 0
            r = np.full_like(sol.x, math.inf)
            r[m] = 1.0 / np.sqrt(sol.x[m])
            eta = np.where(m, sol.v * r, math.inf)
            ea, epa = np.full_like(r, math.nan), np.full_like(r, math.nan)
            ea[m], epa[m] = nu.eta_profile_asymptotic(r[m], p)
            rows = zip(sol.x, r, sol.v, sol.v_prime, eta, sol.eta_prime, sol.det, ea, epa)
            cols = ("x", "r", "v", "v_prime", "eta", "eta_prime", "det", "eta_asym", "eta_prime_asym")
            run.files.append(prefix + write_table(directory, "profile", cols, rows, cfg.fmt))

        _guard(run, work)
        runs.append(run)
    return runs


def _qw_tables(p, cfg, directory, prefix, run):
    sol = nu.solve_nucleus(p, max(cfg.samples, 2))
    num = nu.qw_hydrostatic(p, sol)
    asy = nu.qw_hydrostatic_asymptotic(p, max(cfg.samples, 2))
    cols = ("eps", "qw", "w", "d")
    run.files.append(prefix + write_table(directory, "qw", cols, zip(num.eps, num.qw, num.w, num.d), cfg.fmt))
    run.files.append(prefix + write_table(directory, "qw_asymptotic", cols, zip(asy.eps, asy.qw, asy.w, asy.d), cfg.fmt))
    run.scalars["eps_inf"] = sol.eps_inf
    run.scalars["qw_minus_w_max"] = float(np.max(num.qw - num.w))
    run.scalars["qw_asymptotic_gap"] = nu.qw_gap(num, asy)


def cmd_qw(cfg):
    runs = []
    for mu in cfg.mus:
        p = cfg.material.with_mu(mu)
        directory, prefix = _mu_dir(cfg, mu)
        run = Run(mu)
        _guard(run, lambda: _qw_tables(p, cfg, directory, prefix, run))
        runs.append(run)
    return runs


def _pcx_bound(p, run):
    run.scalars["pcx_bound_asymptotic"] = pcx.pcx_bound_hydro_asymptotic(p)
    if p.mu <= 0:
        run.scalars["pcx_bound_numeric"] = math.sqrt(p.d1)
        return
    try:
        run.scalars["pcx_bound_numeric"] = pcx.pcx_bound_hydro_numeric(p)
        run.verdicts["pcx_bound"] = str(PcxStatus.POLYCONVEX)
    except IndeterminateVerdict as exc:
        run.status = "indeterminate"
        run.message = str(exc)
        run.bracket = [exc.lo, exc.hi]
        run.scalars["pcx_bound_numeric"] = None
        run.verdicts["pcx_bound"] = str(PcxStatus.INDETERMINATE)


def cmd_pcx(cfg):
    threshold = js.w_point_pcx_threshold(cfg.material)
    runs, rows = [], []
    for mu in cfg.mus:
        p = cfg.material.with_mu(mu)
        run = Run(mu)
        run.scalars["pcx_threshold"] = threshold
        _guard(run, lambda: _pcx_bound(p, run))
        try:
            run.verdicts["w_point"] = str(js.w_point_pcx_check(p).status)
        except NoWPoint:
            run.verdicts["w_point"] = "NoWPoint"
        rows.append((mu, run.scalars.get("pcx_bound_numeric"), run.scalars.get("pcx_bound_asymptotic"), run.status,
                     *(run.bracket or (None, None))))
        if not cfg.sweep and p.mu > 0:
            directory, prefix = _mu_dir(cfg, mu)
            scan = []
            for e in np.linspace(math.sqrt(p.d1), math.sqrt(p.d2), cfg.samples):
                v = pcx.pcx_classify_hydro(e, p)
                scan.append((e, str(v.status), v.m_star, v.witness_delta, v.gap))
            cols = ("eps", "status", "m_star", "witness_delta", "gap")
            run.files.append(prefix + write_table(directory, "pcx_scan", cols, [_nan(r) for r in scan], cfg.fmt))
        runs.append(run)
    cols = ("mu", "pcx_bound_numeric", "pcx_bound_asym", "status", "bracket_lo", "bracket_hi")
    runs[0].files.append(write_table(cfg.out, "pcx_bounds", cols, [_nan(r) for r in rows], cfg.fmt))
    return runs


def _binodal_tables(p, cfg, directory, prefix, run):
    sol = _nucleus_scalars(p, run)
    curves = nu.binodal_curves(p, sol)
    run.files.append(prefix + write_table(directory, "binodal_curve", ("eps1", "eps2"), curves.curve, cfg.fmt))
    run.files.append(prefix + write_table(directory, "binodal_mirror", ("eps1", "eps2"), curves.mirror, cfg.fmt))
    x = sol.x[sol.x > 0][::-1]
    r = 1.0 / np.sqrt(x)
    eta, etap = nu.eta_profile_asymptotic(r, p)
    rows = zip(eta / r, etap)
    run.files.append(prefix + write_table(directory, "binodal_curve_asymptotic", ("eps1", "eps2"), rows, cfg.fmt))
    _pcx_bound(p, run)
    curve = _secondary_tables(p, cfg, directory, prefix, run)
    _jumpset_tables(p, cfg, directory, prefix, run, stable_only=True)
    run.scalars["n_secondary_points"] = float(len(curve.points))


def cmd_binodal(cfg):
    runs = []
    for mu in cfg.mus:
        p = cfg.material.with_mu(mu)
        directory, prefix = _mu_dir(cfg, mu)
        run = Run(mu)
        if mu <= 0:
            run.status = "error"
            run.message = "the binodal bounds need mu > 0"
        else:
            _guard(run, lambda: _binodal_tables(p, cfg, directory, prefix, run))
        runs.append(run)
    return runs


HANDLERS = {
    "jumpset": cmd_jumpset,
    "secondary": cmd_secondary,
    "nucleus": cmd_nucleus,
    "qw": cmd_qw,
    "pcx": cmd_pcx,
    "binodal": cmd_binodal,
}


def _nan(row):
    return tuple(math.nan if v is None else v for v in row)


def _guard(run, fn):
    try:
        fn()
    except BinodalError as exc:
        log.error("mu=%g: %s: %s", run.mu, type(exc).__name__, exc)
        run.status = "error"
        run.message = f"{type(exc).__name__}: {exc}"


# ---------------------------------------------------------------- config


def parse_sweep(text):
    """Inclusive ``start:stop:step`` range of mu values."""
    try:
        start, stop, step = (float(t) for t in str(text).split(":"))
    except ValueError:
        raise ConfigError(f"--mu-sweep expects start:stop:step, got {text!r}")
    if not (step > 0 and stop >= start):
        raise ConfigError("--mu-sweep needs step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def load_toml(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}")
    flat = dict(data.pop("material", {}))
    flat.update(data)
    unknown = set(flat) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return flat


def build_config(args):
    values = {}
    if args.config:
        values.update(load_toml(args.config))
    for key in ("mu", "d1", "d2", "samples", "out", "format", "mu_sweep"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    if args.mu is not None and args.mu_sweep is None:
        values.pop("mu_sweep", None)
    if args.mu_sweep is not None and args.mu is None:
        values.pop("mu", None)
    if "mu" in values and "mu_sweep" in values:
        raise ConfigError("give either mu or mu_sweep, not both")

    d1 = float(values.get("d1", PRESET["d1"]))
    d2 = float(values.get("d2", PRESET["d2"]))
    sweep = "mu_sweep" in values
    if sweep:
        ms = values["mu_sweep"]
        mus = [float(m) for m in ms] if isinstance(ms, list) else parse_sweep(ms)
        if not mus:
            raise ConfigError("empty mu sweep")
    elif "mu" in values:
        mus = [float(values["mu"])]
    elif args.command == "jumpset":
        mus = list(JUMPSET_PANELS)
    else:
        mus = [PRESET["mu"]]
    try:
        material = MaterialParams(mus[0], d1, d2)
        for m in mus:
            material.with_mu(m)
    except DomainError as exc:
        raise ConfigError(str(exc))
    samples = int(values.get("samples", DEFAULT_SAMPLES[args.command]))
    if samples < 2:
        raise ConfigError("samples must be at least 2")
    fmt = values.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    out = Path(values.get("out", "out"))
    return RunConfig(args.command, material, sorted(mus), samples, out, fmt, sweep)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="binodal",
        description="Jump sets, nucleation and binodal bounds for 2D two-well Hadamard materials.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "jumpset": "primary jump set, convexification hyperbolas and W-points",
        "secondary": "secondary jump set by continuation, with its small-mu limit",
        "nucleus": "circular nucleus profile, eps_inf and its small-mu limit",
        "qw": "quasiconvex envelope along hydrostatic strains",
        "pcx": "polyconvexity bounds on the bisector and the W-point threshold",
        "binodal": "inner and outer bounds on the binodal",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--mu", type=float, help="shear modulus (default 1; jumpset defaults to preset panels)")
        sp.add_argument("--d1", type=float, help="low well (default 1)")
        sp.add_argument("--d2", type=float, help="high well (default 3)")
        sp.add_argument("--samples", type=int, help="sample count")
        sp.add_argument("--out", help="output directory (default ./out)")
        sp.add_argument("--format", choices=("csv", "json"), help="table format")
        sp.add_argument("--config", help="TOML file with any of the above keys")
        sp.add_argument("--mu-sweep", dest="mu_sweep", help="inclusive range start:stop:step")
    return parser


def _setup_logging():
    level = LOG_LEVELS.get(os.environ.get("BINODAL_LOG", "warn").lower(), logging.WARNING)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("binodal")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def summary_document(cfg, runs):
    return _json_value(
        {
            "command": cfg.command,
            "version": __version__,
            "params": {
                "d1": cfg.material.d1,
                "d2": cfg.material.d2,
                "mu": list(cfg.mus),
                "samples": cfg.samples,
                "format": cfg.fmt,
            },
            "runs": [
                {
                    "mu": r.mu,
                    "status": r.status,
                    "message": r.message,
                    "scalars": dict(sorted(r.scalars.items())),
                    "verdicts": dict(sorted(r.verdicts.items())),
                    "bracket": r.bracket,
                    "files": r.files,
                }
                for r in runs
            ],
        }
    )


def run(cfg):
    cfg.out.mkdir(parents=True, exist_ok=True)
    runs = HANDLERS[cfg.command](cfg)
    doc = summary_document(cfg, runs)
    with open(cfg.out / "summary.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return EXIT_NUMERIC if any(r.status == "error" for r in runs) else EXIT_OK


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except BinodalError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
