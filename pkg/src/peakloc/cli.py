"""Command-line entry point.

    peakloc <tradeoff|sweep|bench|elevation|coherence> [--config FILE] [--seed N] [--out DIR]

The config file is INI-style with one section per subcommand; anything
missing takes the defaults below. Each run writes ``<name>.csv``,
``<name>.svg`` and ``<name>.json`` (metadata) into ``--out``. Failures print
a single ``error: <kind>: <message>`` line to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from pathlib import Path

import numpy as np

from .fields import (ProfileSpec, SeparableField, analytic_coherence_exponential,
                     analytic_coherence_powerlaw, coherence_parameter, numeric_coherence,
                     profile_unit_vector)
from .harness import (ExperimentTable, _meta, detection_probability_sweep, emit_table,
                      samples_vs_error, tradeoff_curve, write_metadata)
from .pamcur import Rect
from .sampling import NoiseModel

DEFAULTS = {
    "tradeoff": {"profiles": "laplacian, gaussian, cauchy", "n": "200", "rho_min": "0.5",
                 "rho_max": "0.999", "rho_count": "60", "half_width": "5.0"},
    "sweep": {"profile": "laplacian", "windows": "0.25, 0.5, 1, 2, 4, 8", "spreads": "0.5, 1, 2",
              "trials": "10", "noise_std": "0.1", "algorithm": "mconly", "grid_n": "50",
              "alpha": "0.3", "tolerance": "0.04"},
    "bench": {"kind": "laplacian", "a": "10", "center": "0.1037, -0.0461",
              "algorithms": "pamcur, mconly, mcuni, interp, meanshift",
              "alphas": "0.3, 0.4, 0.5, 0.7", "restarts": "2, 5, 10, 20", "omega": "2",
              "trials": "500", "grid_n": "50", "max_stages": "6", "kappa": "0.5",
              "noise_std": "0.0", "stop_tolerance": "0.001"},
    "elevation": {"path": "", "roi": "", "truth_n": "400", "columns": "1, 2, 3",
                  "algorithms": "pamcur, mconly, mcuni, interp, meanshift",
                  "alphas": "0.3, 0.4, 0.5, 0.7", "restarts": "2, 5, 10, 20", "omega": "2",
                  "trials": "500", "grid_n": "50", "max_stages": "6", "kappa": "0.5",
                  "noise_std": "0.0", "stop_tolerance": "0.001"},
    "coherence": {"n_points": "10000", "half_width": "0.5",
                  "cases": "exponential:20:1, exponential:200:2, powerlaw:0.0001:2"},
}


class CLIError(Exception):
    pass


def _floats(s: str) -> list:
    return [float(x) for x in s.replace(";", ",").split(",") if x.strip()]


def _words(s: str) -> list:
    return [x.strip() for x in s.split(",") if x.strip()]


def load_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp.read_dict(DEFAULTS)
    if path:
        p = Path(path)
        if not p.is_file():
            raise CLIError(f"config file not found: {p}")
        cp.read(p, encoding="utf-8")
    return cp


def _write(table: ExperimentTable, out: Path, name: str, x=None, log_x=False, log_y=False):
    out.mkdir(parents=True, exist_ok=True)
    emit_table(table, out / f"{name}.csv", "csv")
    write_metadata(table, out / f"{name}.json")
    plot = table
    if x is not None:
        plot = ExperimentTable({k: v for k, v in table.columns.items()
                                if k == x or not k.endswith("_se")})
    emit_table(plot, out / f"{name}.svg", "svg", x=x, log_x=log_x, log_y=log_y)


def cmd_tradeoff(sec, seed, out):
    n = sec.getint("n")
    rho = np.linspace(sec.getfloat("rho_min"), sec.getfloat("rho_max"), sec.getint("rho_count"))
    cols = {"rho": rho}
    for kind in _words(sec["profiles"]):
        t = tradeoff_curve(ProfileSpec(kind), n, rho, sec.getfloat("half_width"))
        cols[kind] = t["bound"]
    table = ExperimentTable(cols, _meta(experiment="tradeoff", n=n, seed=seed,
                                        half_width=sec.getfloat("half_width")))
    _write(table, out, "tradeoff", x="rho")
    return table


def cmd_sweep(sec, seed, out):
    table = detection_probability_sweep(
        ProfileSpec(sec["profile"]), _floats(sec["windows"]), _floats(sec["spreads"]),
        trials=sec.getint("trials"), noise=NoiseModel("gaussian", sec.getfloat("noise_std")),
        algorithm=sec["algorithm"], grid_n=sec.getint("grid_n"), alpha=sec.getfloat("alpha"),
        tolerance=sec.getfloat("tolerance"), seed=seed)
    _write(table, out, "sweep", x="window")
    return table


def _params(sec, algorithms):
    alphas = _floats(sec["alphas"])
    restarts = [int(m) for m in _floats(sec["restarts"])]
    omega = sec.getint("omega")
    out = []
    for alg in algorithms:
        if alg.lower() == "meanshift":
            out.append((alg, [{"M": m, "omega": omega} for m in restarts]))
        else:
            out.append((alg, [{"alpha": a} for a in alphas]))
    return out


def _bench(sec, oracle, truth, roi, seed, out, name):
    tables = []
    for alg, params in _params(sec, _words(sec["algorithms"])):
        t = samples_vs_error(oracle, truth, [alg], params, trials=sec.getint("trials"),
                             grid_n=sec.getint("grid_n"), roi=roi,
                             max_stages=sec.getint("max_stages"), kappa=sec.getfloat("kappa"),
                             stop_tolerance=sec.getfloat("stop_tolerance"),
                             noise=NoiseModel("gaussian", sec.getfloat("noise_std")), seed=seed)
        tables.append((alg, t))
    names = [a for a, _ in tables]
    cols = {}
    for i, (_, t) in enumerate(tables):
        t.columns["algorithm_id"] = np.full(len(t), float(i))
        for k, v in t.columns.items():
            cols.setdefault(k, []).extend(v.tolist())
    table = ExperimentTable(cols, _meta(experiment=name, algorithms=names, seed=seed,
                                        config=dict(sec), truth=list(truth)))
    _write(table, out, name)
    # error against samples, one series per algorithm
    for i, alg in enumerate(names):
        sel = table["algorithm_id"] == i
        sub = ExperimentTable({"samples_norm": table["samples_norm"][sel],
                               "mean_error": table["mean_error"][sel]})
        emit_table(sub, out / f"{name}_{alg}.svg", "svg", x="samples_norm", log_y=True)
    return table


def cmd_bench(sec, seed, out):
    c = tuple(_floats(sec["center"]))
    prof = ProfileSpec(sec["kind"], a=sec.getfloat("a"))
    f = SeparableField(prof, prof, 1.0, c)
    return _bench(sec, f, c, Rect(-0.5, 0.5, -0.5, 0.5), seed, out, "bench")


def cmd_elevation(sec, seed, out):
    from .elevation import ground_truth_peak, load_elevation, raster_coords, rasterize

    if not sec["path"]:
        raise CLIError("elevation: set 'path' to the dataset file in the [elevation] section")
    cols = tuple(int(x) for x in _floats(sec["columns"]))
    cloud = load_elevation(sec["path"], columns=cols)
    roi_t = tuple(_floats(sec["roi"])) if sec["roi"].strip() else cloud.bounds
    if len(roi_t) != 4:
        raise CLIError("elevation: roi must be lon_lo, lon_hi, lat_lo, lat_hi")
    n_t = sec.getint("truth_n")
    raster = rasterize(cloud, roi_t, n_t)
    r, c = ground_truth_peak(raster)
    lat, lon = raster_coords(roi_t, n_t)
    truth = (float(lon[c - 1]), float(lat[r - 1]))
    return _bench(sec, cloud.oracle(), truth, Rect(*roi_t), seed, out, "elevation")


def cmd_coherence(sec, seed, out):
    n_pts = sec.getint("n_points")
    hw = sec.getfloat("half_width")
    n = n_pts * n_pts  # matrix entries of the square discretization
    names = ("case", "a", "p", "mu_numeric", "mu_analytic", "nu_numeric", "nu_analytic", "rel_gap")
    rows = {k: [] for k in names}
    for i, case in enumerate(_words(sec["cases"])):
        parts = case.split(":")
        kind, a, p = parts[0], float(parts[1]), float(parts[2])
        u = profile_unit_vector(ProfileSpec(kind, a=a, p=p, r=1.0), n_pts, half_width=hw)
        if kind == "exponential":
            mu = analytic_coherence_exponential(a, p, n)
        elif kind == "powerlaw":
            mu = analytic_coherence_powerlaw(a, p, n)
        else:
            raise CLIError(f"coherence: no closed form for kind {kind!r}")
        nu_num = numeric_coherence(u, u)
        nu_ana = coherence_parameter(mu, mu, n)
        vals = (i, a, p, float(np.max(u ** 2)), mu, nu_num, nu_ana, (nu_num - nu_ana) / nu_ana)
        for k, v in zip(names, vals):
            rows[k].append(v)
    table = ExperimentTable(rows, _meta(experiment="coherence", n_points=n_pts, half_width=hw,
                                        cases=_words(sec["cases"]), seed=seed))
    _write(table, out, "coherence")
    return table


COMMANDS = {"tradeoff": cmd_tradeoff, "sweep": cmd_sweep, "bench": cmd_bench,
            "elevation": cmd_elevation, "coherence": cmd_coherence}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="peakloc", description="Peak localization experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="INI file with a [%s] section" % name)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default="results", help="output directory")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cp = load_config(args.config)
        table = COMMANDS[args.command](cp[args.command], args.seed, Path(args.out))
    except Exception as e:  # noqa: BLE001 - single-line error contract
        msg = " ".join(str(e).split()) or "no message"
        print(f"error: {type(e).__name__}: {msg}", file=sys.stderr)
        return 1 if not isinstance(e, CLIError) else 2
    print(f"{args.command}: {len(table)} rows -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
