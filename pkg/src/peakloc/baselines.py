"""Comparison algorithms: completion with peak picking, nearest-neighbour
interpolation, and a mean-shift style gradient ascent.

Single-stage functions return 1-based ``(row, col)`` index pairs; ties in
any argmax go to the smallest row, then the smallest column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.ndimage import uniform_filter
from scipy.spatial import cKDTree

from .completion import complete_rank_r
from .fields import SeparableField
from .pamcur import Rect, cell_coordinate, field_oracle
from .sampling import NoiseModel, SampleSet, observe, sample_uniform
from .unimodal import best_unimodal_fit

ALGORITHMS = ("mconly", "mcuni", "interp", "meanshift")

# compass steps (d_row, d_col), counter-clockwise from +col
_STEPS = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))


@dataclass
class BaselineResult:
    peak_estimate: tuple
    samples_used: int
    stages: int = 1
    stage_peaks: list = field(default_factory=list)
    rois: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.samples_used < 1:
            raise ValueError("samples_used must be positive")


def _argmax1(w) -> int:
    return int(np.argmax(w)) + 1


def mc_only_stage(samples: SampleSet, n_r: int, n_c: int) -> tuple[int, int]:
    """Rank-1 completion, then the largest entry of ``|u|`` and ``|v|``."""
    res = complete_rank_r(samples, n_r, n_c, r=1)
    return _argmax1(np.abs(res.u)), _argmax1(np.abs(res.v))


def mc_uni_stage(samples: SampleSet, n_r: int, n_c: int) -> tuple[int, int]:
    """As :func:`mc_only_stage` but the peak is the mode of the best unimodal fit."""
    res = complete_rank_r(samples, n_r, n_c, r=1)
    return best_unimodal_fit(np.abs(res.u)).mode, best_unimodal_fit(np.abs(res.v)).mode


def nearest_fill(samples: SampleSet, n_r: int, n_c: int, k: int = 16) -> np.ndarray:
    """Give every cell the value of its nearest observed cell.

    Distance is Euclidean on indices; ties go to the smaller row, then the
    smaller column. Candidates come from a k-d tree; squared distances are
    compared as exact integers.
    """
    flat = samples.rows.astype(np.int64) * n_c + samples.cols.astype(np.int64)
    # duplicate cells keep the first recorded value; unique() sorts by (row, col)
    uflat, first = np.unique(flat, return_index=True)
    sv = samples.values[first]
    pts = np.stack([uflat // n_c, uflat % n_c], axis=1)
    cells = np.indices((n_r, n_c)).reshape(2, -1).T
    k = min(k, len(uflat))
    _, idx = cKDTree(pts).query(cells, k=k)
    idx = idx.reshape(len(cells), k)
    d2 = ((pts[idx] - cells[:, None, :]) ** 2).sum(axis=2)
    best = d2.min(axis=1)
    # candidates are in tree order; among exact ties take the smallest flat index
    cand = np.where(d2 == best[:, None], idx, np.iinfo(np.int64).max)
    choice = cand.min(axis=1)
    if k < len(uflat):
        # all k candidates tied: more equidistant points may exist
        crowded = np.flatnonzero(d2[:, -1] == best)
        if crowded.size:
            tree = cKDTree(pts)
            for c in crowded:
                near = tree.query_ball_point(cells[c], np.sqrt(best[c]) + 1e-9)
                near = [j for j in near if ((pts[j] - cells[c]) ** 2).sum() == best[c]]
                choice[c] = min(near)
    return sv[choice].reshape(n_r, n_c)


def moving_average(A: np.ndarray, window: int) -> np.ndarray:
    """Box average; cells near the edge average over the in-bounds part only."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    if window == 1:
        return A.copy()
    s = uniform_filter(A, size=window, mode="constant", cval=0.0)
    c = uniform_filter(np.ones_like(A), size=window, mode="constant", cval=0.0)
    return s / c


def interp_stage(samples: SampleSet, n_r: int, n_c: int, smooth_window: int = 3) -> tuple[int, int]:
    """Nearest-neighbour imputation, moving-average smoothing, then argmax."""
    A = moving_average(nearest_fill(samples, n_r, n_c), smooth_window)
    k = int(np.argmax(A))
    return k // n_c + 1, k % n_c + 1


def _quantized_step(d_row: float, d_col: float) -> tuple[int, int]:
    # displacement is in index units; anything this small is a fixed point
    if math.hypot(d_row, d_col) <= 1e-12:
        return 0, 0
    k = int(round(math.atan2(d_row, d_col) / (math.pi / 4))) % 8
    return _STEPS[k]


def mean_shift_run(H, n_r: int, n_c: int, omega: int = 2, M: int = 5, seed=0,
                   starts: Optional[list] = None) -> BaselineResult:
    """Gradient ascent by windowed centre of mass with random restarts.

    ``H`` is the grid of (possibly noisy) values, read only where the walk
    looks. Each trail moves to one of the 8 neighbours in the quantized
    direction of the centre of mass of the ``(2 omega + 1)^2`` window, with
    cell ``p`` weighted by ``max(H(p) - H(X), 0)``; a zero displacement or a
    step onto a visited cell ends the trail. ``starts`` (1-based cells)
    overrides the random starting points.

    Returns the highest endpoint found; ``extra`` carries every new-cluster
    endpoint, the cluster map and the trails.
    """
    if omega < 1 or M < 1:
        raise ValueError("need omega >= 1 and M >= 1")
    H = np.asarray(H, dtype=float)
    if H.shape != (n_r, n_c):
        raise ValueError("H shape does not match (n_r, n_c)")
    rng = np.random.default_rng(seed)
    cluster = np.zeros((n_r, n_c), dtype=int)  # 0 = unvisited
    read = np.zeros((n_r, n_c), dtype=bool)
    peaks: list[tuple[int, int]] = []
    trails = []
    K = 1
    for it in range(M):
        if starts is not None and it < len(starts):
            x = (starts[it][0] - 1, starts[it][1] - 1)
        else:
            free = np.flatnonzero(cluster.ravel() == 0)
            if free.size == 0:
                break
            f = int(rng.choice(free))
            x = (f // n_c, f % n_c)
        trail = []
        while cluster[x] == 0:
            cluster[x] = K
            trail.append(x)
            r0, r1 = max(x[0] - omega, 0), min(x[0] + omega, n_r - 1)
            c0, c1 = max(x[1] - omega, 0), min(x[1] + omega, n_c - 1)
            read[r0:r1 + 1, c0:c1 + 1] = True
            win = H[r0:r1 + 1, c0:c1 + 1]
            w = np.maximum(win - H[x], 0.0)
            tot = w.sum()
            if tot <= 0:
                break
            rr, cc = np.mgrid[r0:r1 + 1, c0:c1 + 1]
            dr = float((w * rr).sum() / tot - x[0])
            dc = float((w * cc).sum() / tot - x[1])
            step = _quantized_step(dr, dc)
            if step == (0, 0):
                break
            x = (min(max(x[0] + step[0], 0), n_r - 1), min(max(x[1] + step[1], 0), n_c - 1))
        # the trail joins whichever cluster its endpoint belongs to
        end_cluster = cluster[x]
        for p in trail:
            cluster[p] = end_cluster
        trails.append([(p[0] + 1, p[1] + 1) for p in trail])
        if end_cluster == K:
            peaks.append((x[0] + 1, x[1] + 1))
            K += 1
    best = max(peaks, key=lambda p: (H[p[0] - 1, p[1] - 1], -p[0], -p[1]))
    return BaselineResult(best, int(read.sum()), 1, [best],
                          extra={"peaks": peaks, "cluster": cluster, "trails": trails})


def _stage_samples(H, budget, noise, seed):
    n_r, n_c = H.shape
    pick, noise_seed = seed.spawn(2)
    rows, cols = sample_uniform(n_r, n_c, budget, pick)
    return observe(H, rows, cols, noise, noise_seed)


def next_roi(roi: Rect, center: tuple, kappa: float) -> Rect:
    """``kappa``-scaled copy of ``roi`` centred at ``center``, slid to fit inside ``roi``."""
    w, h = kappa * roi.width, kappa * roi.height
    c_lo = min(max(center[0] - 0.5 * w, roi.c_lo), roi.c_hi - w)
    r_lo = min(max(center[1] - 0.5 * h, roi.r_lo), roi.r_hi - h)
    return Rect(c_lo, c_lo + w, r_lo, r_lo + h)


def run_baseline_multistage(algorithm: str, oracle, roi: Rect = Rect(-0.5, 0.5, -0.5, 0.5),
                            grid_n: int = 50, alpha: float = 0.5, omega: int = 2, M: int = 5,
                            kappa: float = 0.5, max_stages: int = 6, stop_tolerance: float = 1e-3,
                            seed: int = 0, noise: NoiseModel = NoiseModel(),
                            smooth_window: int = 3) -> BaselineResult:
    """Run a baseline by stages on a ROI shrunk by a fixed factor ``kappa``.

    Each stage re-grids the ROI to ``grid_n x grid_n`` cell centres, locates
    a peak cell, and takes the ``kappa``-scaled rectangle around that cell
    (kept inside the current ROI) as the next ROI. The run stops after
    ``max_stages`` or once the estimate moves less than ``stop_tolerance``
    times the initial ROI diameter.
    """
    algorithm = algorithm.lower()
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if not 0 < kappa <= 1:
        raise ValueError("kappa must lie in (0, 1]")
    if isinstance(oracle, SeparableField):
        oracle = field_oracle(oracle)
    n = grid_n
    budget = min(n * n, math.ceil(alpha * n * n))
    if budget < 1:
        raise ValueError("alpha * grid_n^2 must be at least 1")
    diam0 = roi.diameter
    seeds = np.random.SeedSequence(seed).spawn(max_stages)
    total = 0
    estimate = None
    peaks, rois = [], []
    for k in range(max_stages):
        g = roi.grid(n)
        H = np.asarray(oracle(g.row_coords, g.col_coords), dtype=float)
        rois.append(roi)
        if algorithm == "meanshift":
            noise_seed, walk_seed = seeds[k].spawn(2)
            Hn = H + noise.draw(np.random.default_rng(noise_seed), H.shape)
            res = mean_shift_run(Hn, n, n, omega, M, walk_seed)
            cell, used = res.peak_estimate, res.samples_used
        else:
            samples = _stage_samples(H, budget, noise, seeds[k])
            if algorithm == "mconly":
                cell = mc_only_stage(samples, n, n)
            elif algorithm == "mcuni":
                cell = mc_uni_stage(samples, n, n)
            else:
                cell = interp_stage(samples, n, n, smooth_window)
            used = len(samples)
        total += used
        new_est = cell_coordinate(cell[0], cell[1], roi, n, n)
        peaks.append(new_est)
        moved = math.inf if estimate is None else math.dist(new_est, estimate)
        estimate = new_est
        if moved < stop_tolerance * diam0:
            break
        roi = next_roi(roi, estimate, kappa)
    return BaselineResult(tuple(estimate), total, len(peaks), peaks, rois)
