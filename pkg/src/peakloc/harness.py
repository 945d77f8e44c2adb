"""Experiment drivers: localization trade-off curves, detection sweeps and
sample-versus-error benchmarks, plus CSV/SVG output.

Every driver is reproducible from ``(arguments, seed)``; trial ``t`` uses a
seed derived from ``(seed, t)`` so results do not depend on worker count.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .baselines import ALGORITHMS as BASELINES, run_baseline_multistage
from .fields import ProfileSpec, SeparableField, profile_unit_vector
from .localize import axis_supports, localize_axis
from .pamcur import FieldOracle, Rect, RunConfig, run_pamcur
from .sampling import NoiseModel

ALL_ALGORITHMS = ("pamcur",) + BASELINES
WORKERS_ENV = "PEAKLOC_WORKERS"
# half-width of the 1-D window for trade-off curves (profiles at unit scale)
TRADEOFF_HALF_WIDTH = 5.0


@dataclass
class ExperimentTable:
    """Named real-valued columns of equal length plus a metadata echo."""

    columns: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = {str(k): np.asarray(v, dtype=float).ravel() for k, v in self.columns.items()}
        lengths = {v.size for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns differ in length: {sorted(lengths)}")

    @property
    def names(self) -> list:
        return list(self.columns)

    def __len__(self) -> int:
        return next(iter(self.columns.values())).size if self.columns else 0

    def __getitem__(self, name) -> np.ndarray:
        return self.columns[name]


def run_id(metadata: dict) -> str:
    """Short content hash of the config echo."""
    blob = json.dumps(metadata, sort_keys=True, default=str).encode()
    return hashlib.sha1(blob).hexdigest()[:12]


def _meta(**kw) -> dict:
    kw["run_id"] = run_id(kw)
    return kw


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1)[0])


def worker_count(requested: Optional[int] = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _se(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0


# --- single-shot localization ------------------------------------------------


def locate(algorithm: str, oracle, roi: Rect, grid_n: int, alpha: float, noise: NoiseModel,
           seed: int, max_stages: int = 1, kappa: float = 0.5, stop_tolerance: float = 1e-3,
           omega: int = 2, M: int = 5, smooth_window: int = 3, zeta_mode: str = "empirical"):
    """Run one algorithm; returns ``(estimate, total_samples, per-stage area fractions)``.

    Area fractions are box (or next-ROI) areas relative to the initial ROI.
    """
    algorithm = algorithm.lower()
    if algorithm == "pamcur":
        cfg = RunConfig(grid_n=grid_n, alpha=alpha, noise=noise, max_stages=max_stages,
                        stop_tolerance=stop_tolerance, seed=seed, zeta_mode=zeta_mode, roi=roi)
        res = run_pamcur(oracle, cfg)
        areas, a = [], roi.area
        for st in res.stages:
            a = st.roi.area * st.area_ratio if not st.low_snr else a
            areas.append(a / roi.area)
        return res.peak_estimate, res.total_samples, areas
    if algorithm not in BASELINES:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    res = run_baseline_multistage(algorithm, oracle, roi=roi, grid_n=grid_n, alpha=alpha,
                                  omega=omega, M=M, kappa=kappa, max_stages=max_stages,
                                  stop_tolerance=stop_tolerance, seed=seed, noise=noise,
                                  smooth_window=smooth_window)
    areas = [r.area / roi.area for r in res.rois[1:]] + [
        (kappa ** 2) * res.rois[-1].area / roi.area]
    return res.peak_estimate, res.samples_used, areas


# --- trade-off curve ---------------------------------------------------------


def tradeoff_curve(profile: ProfileSpec, n: int, rho_grid: Sequence[float],
                   half_width: float = TRADEOFF_HALF_WIDTH) -> ExperimentTable:
    """Normalized one-step localization bound ``(lR - lL) / n`` against ``rho``.

    The profile is sampled at ``n`` cell centres over ``[-half_width, half_width]``.
    """
    if n < 10:
        raise ValueError("n must be at least 10")
    rho = np.asarray(rho_grid, dtype=float)
    if np.any((rho <= 0) | (rho >= 1)):
        raise ValueError("rho values must lie in (0, 1)")
    u = profile_unit_vector(profile, n, half_width=half_width)
    sup = axis_supports(u)
    bound = []
    for r in rho:
        lL, lR = localize_axis(u, float(r), sup)
        bound.append((lR - lL) / n)
    return ExperimentTable({"rho": rho, "bound": bound},
                           _meta(experiment="tradeoff", profile=profile.to_dict(), n=n,
                                 half_width=half_width))


# --- detection probability sweep ---------------------------------------------


def unit_peak_field(profile: ProfileSpec, spread: float, center=(0.0, 0.0)) -> SeparableField:
    """Field with both axes ``profile`` stretched by ``spread`` and peak value 1."""
    p = replace(profile, a=profile.a / spread) if profile.kind != "product" else profile
    peak = float(p(0.0))
    return SeparableField(p, p, 1.0 / (peak * peak), tuple(center))


def _detect_trial(args):
    (profile, W, spread, t, seed, noise, algorithm, grid_n, alpha, tol, max_stages) = args
    rng = np.random.default_rng(trial_seed(seed, t))
    c = tuple(rng.uniform(-0.25 * W, 0.25 * W, size=2))
    f = unit_peak_field(profile, spread, c)
    roi = Rect(-0.5 * W, 0.5 * W, -0.5 * W, 0.5 * W)
    est, _, _ = locate(algorithm, FieldOracle(f), roi, grid_n, alpha, noise,
                       trial_seed(seed + 1, t), max_stages=max_stages)
    return math.dist(est, c) <= tol * W


def detection_probability_sweep(profile: ProfileSpec, window_sizes, spreads, trials: int = 10,
                                noise: NoiseModel = NoiseModel(), algorithm: str = "mconly",
                                grid_n: int = 50, alpha: float = 0.3, tolerance: float = 0.04,
                                max_stages: int = 1, seed: int = 0,
                                workers: Optional[int] = None) -> ExperimentTable:
    """Fraction of trials locating the peak within ``tolerance`` of the window side.

    Each trial draws a target centre uniformly in the middle half of a
    ``W x W`` window, scales the profile by ``spread`` and normalizes the
    peak to 1 (so ``noise.std`` is relative to the peak).
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    jobs, keys = [], []
    for W in window_sizes:
        for s in spreads:
            keys.append((float(W), float(s)))
            jobs += [(profile, float(W), float(s), t, seed, noise, algorithm, grid_n, alpha,
                      tolerance, max_stages) for t in range(trials)]
    hits = np.array(_map(_detect_trial, jobs, worker_count(workers)), dtype=float)
    hits = hits.reshape(len(keys), trials)
    p = hits.mean(axis=1)
    se = np.sqrt(p * (1 - p) / trials)
    return ExperimentTable(
        {"window": [k[0] for k in keys], "spread": [k[1] for k in keys],
         "probability": p, "probability_se": se},
        _meta(experiment="sweep", profile=profile.to_dict(), trials=trials, noise_std=noise.eps,
              algorithm=algorithm, grid_n=grid_n, alpha=alpha, tolerance=tolerance,
              max_stages=max_stages, seed=seed))


# --- samples versus error ----------------------------------------------------


def _bench_trial(args):
    (algorithm, oracle, roi, truth, grid_n, alpha, noise, seed, t, max_stages, kappa,
     stop_tolerance, omega, M) = args
    est, used, areas = locate(algorithm, oracle, roi, grid_n, alpha, noise, trial_seed(seed, t),
                              max_stages=max_stages, kappa=kappa,
                              stop_tolerance=stop_tolerance, omega=omega, M=M)
    return math.dist(est, truth), used, areas


def samples_vs_error(oracle, truth, algorithms: Sequence[str], params: Sequence[dict],
                     trials: int = 500, grid_n: int = 50, roi: Optional[Rect] = None,
                     max_stages: int = 6, kappa: float = 0.5, stop_tolerance: float = 1e-3,
                     noise: NoiseModel = NoiseModel(), seed: int = 0,
                     workers: Optional[int] = None) -> ExperimentTable:
    """Localization error against samples used, per algorithm and parameter.

    ``params`` holds one dict per sweep point: ``{"alpha": ...}`` for the
    sampling algorithms and ``{"M": ..., "omega": ...}`` for mean shift
    (missing keys take defaults). Each (algorithm, params) row reports the
    mean distance to ``truth``, its standard error, ``log10`` of the mean
    squared distance, mean samples normalized by ``grid_n^2`` with its
    standard error, and for every stage the mean box area relative to the
    initial ROI.
    """
    if isinstance(oracle, SeparableField):
        oracle = FieldOracle(oracle)
    roi = roi or Rect(-0.5, 0.5, -0.5, 0.5)
    rows = []
    names = []
    for a_i, alg in enumerate(algorithms):
        if alg.lower() not in ALL_ALGORITHMS:
            raise ValueError(f"unknown algorithm {alg!r}")
        names.append(alg)
        for prm in params:
            alpha = float(prm.get("alpha", 0.5))
            omega = int(prm.get("omega", 2))
            M = int(prm.get("M", 5))
            jobs = [(alg, oracle, roi, tuple(truth), grid_n, alpha, noise, seed, t, max_stages,
                     kappa, stop_tolerance, omega, M) for t in range(trials)]
            out = _map(_bench_trial, jobs, worker_count(workers))
            err = np.array([o[0] for o in out])
            used = np.array([o[1] for o in out], dtype=float) / grid_n ** 2
            areas = np.full((trials, max_stages), np.nan)
            for t, o in enumerate(out):
                k = min(len(o[2]), max_stages)
                areas[t, :k] = o[2][:k]
            row = {"algorithm_id": a_i, "alpha": alpha, "omega": omega, "M": M,
                   "mean_error": err.mean(), "error_se": _se(err),
                   "log_mse": math.log10(max(float(np.mean(err ** 2)), 1e-300)),
                   "samples_norm": used.mean(), "samples_se": _se(used)}
            with np.errstate(all="ignore"):
                for k in range(max_stages):
                    col = areas[:, k]
                    row[f"area_stage{k + 1}"] = float(np.nanmean(col)) if np.any(~np.isnan(col)) else math.nan
            rows.append(row)
    cols = {k: [r[k] for r in rows] for k in rows[0]}
    return ExperimentTable(cols, _meta(experiment="bench", algorithms=names, params=list(params),
                                       trials=trials, grid_n=grid_n, roi=list(roi.as_tuple()),
                                       truth=list(truth), max_stages=max_stages, kappa=kappa,
                                       noise_std=noise.eps, seed=seed))


# --- output ------------------------------------------------------------------


def emit_table(table: ExperimentTable, path, fmt: str = "csv", x: Optional[str] = None,
               log_x: bool = False, log_y: bool = False) -> Path:
    """Write ``table`` as CSV or as an SVG line plot (one polyline per column)."""
    if not table.columns or len(table) == 0:
        raise ValueError("cannot emit an empty table")
    path = Path(path)
    if fmt == "csv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table.names)
            for i in range(len(table)):
                w.writerow([repr(float(table[c][i])) for c in table.names])
        return path
    if fmt in ("svg", "svg-lineplot"):
        path.write_text(_svg_lineplot(table, x, log_x, log_y), encoding="utf-8")
        return path
    raise ValueError(f"unknown format {fmt!r}")


def read_table_csv(path) -> ExperimentTable:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    return ExperimentTable({h: [float(r[i]) for r in body] for i, h in enumerate(head)})


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _svg_lineplot(table, x, log_x, log_y, width=640, height=420, pad=56) -> str:
    xname = x or table.names[0]
    xs = table[xname]
    series = [n for n in table.names if n != xname]
    if not series:
        raise ValueError("need at least one y column besides the x column")

    def tf(v, log):
        v = np.asarray(v, dtype=float)
        if log:
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(v > 0, np.log10(v), np.nan)
        return v

    X = tf(xs, log_x)
    Ys = [tf(table[s], log_y) for s in series]
    allY = np.concatenate(Ys)
    fx = X[np.isfinite(X)]
    fy = allY[np.isfinite(allY)]
    if fx.size == 0 or fy.size == 0:
        raise ValueError("no finite values to plot")
    x0, x1 = float(fx.min()), float(fx.max())
    y0, y1 = float(fy.min()), float(fy.max())
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def px(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>']
    for v, anchor in ((x0, "start"), (x1, "end")):
        lab = f"1e{v:.2g}" if log_x else f"{v:.3g}"
        out.append(f'<text x="{px(v):.1f}" y="{height - pad + 18}" font-size="11" '
                   f'text-anchor="{anchor}">{lab}</text>')
    for v in (y0, y1):
        lab = f"1e{v:.2g}" if log_y else f"{v:.3g}"
        out.append(f'<text x="{pad - 6}" y="{py(v) + 4:.1f}" font-size="11" '
                   f'text-anchor="end">{lab}</text>')
    out.append(f'<text x="{width / 2}" y="{height - 12}" font-size="12" '
               f'text-anchor="middle">{xname}</text>')
    for k, (name, Y) in enumerate(zip(series, Ys)):
        ok = np.isfinite(X) & np.isfinite(Y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(X[ok], Y[ok]))
        color = _COLORS[k % len(_COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}">'
                   f'<title>{name}</title></polyline>')
        out.append(f'<text x="{width - pad + 4}" y="{pad + 14 * k}" font-size="11" '
                   f'fill="{color}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_metadata(table: ExperimentTable, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(table.metadata, indent=2, sort_keys=True, default=str) + "\n",
                    encoding="utf-8")
    return path
