"""Multi-stage localization: repeat a single stage on a shrinking region.

A *sample oracle* here is any callable ``oracle(row_coords, col_coords)``
returning the ``len(row_coords) x len(col_coords)`` matrix of field values
at those physical coordinates. :func:`field_oracle` wraps a
:class:`~peakloc.fields.SeparableField`; the elevation module provides one
for point clouds.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .fields import GridSpec, SeparableField, discretize
from .localize import LocalizationBox, ZETA_MODES, pamcur_stage
from .sampling import NoiseModel

Oracle = Callable[[np.ndarray, np.ndarray], np.ndarray]

STALL_LIMIT = 2


@dataclass(frozen=True)
class Rect:
    """Axis-aligned physical rectangle; ``c`` is the column axis, ``r`` the row axis."""

    c_lo: float
    c_hi: float
    r_lo: float
    r_hi: float

    def __post_init__(self):
        if not (self.c_lo < self.c_hi and self.r_lo < self.r_hi):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def center(self) -> tuple[float, float]:
        """``(y_c, y_r)`` of the centre."""
        return (0.5 * (self.c_lo + self.c_hi), 0.5 * (self.r_lo + self.r_hi))

    @property
    def width(self) -> float:
        return self.c_hi - self.c_lo

    @property
    def height(self) -> float:
        return self.r_hi - self.r_lo

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, other: "Rect", tol: float = 0.0) -> bool:
        return (other.c_lo >= self.c_lo - tol and other.c_hi <= self.c_hi + tol
                and other.r_lo >= self.r_lo - tol and other.r_hi <= self.r_hi + tol)

    def grid(self, n: int) -> GridSpec:
        return GridSpec.uniform(n, n, row_range=(self.r_lo, self.r_hi),
                                col_range=(self.c_lo, self.c_hi))

    def as_tuple(self) -> tuple:
        return (self.c_lo, self.c_hi, self.r_lo, self.r_hi)


@dataclass(frozen=True)
class FieldOracle:
    """Noise-free sample oracle for a separable field."""

    field: SeparableField

    def __call__(self, row_coords, col_coords) -> np.ndarray:
        return discretize(self.field, GridSpec(row_coords, col_coords))


def field_oracle(f: SeparableField) -> Oracle:
    return FieldOracle(f)


def box_to_rect(box: LocalizationBox, roi: Rect, n_r: int, n_c: int) -> Rect:
    """Physical cover of ``box``: outer edges of its boundary cells."""
    hc = roi.width / n_c
    hr = roi.height / n_r
    return Rect(roi.c_lo + (box.lL_c - 1) * hc, roi.c_lo + box.lR_c * hc,
                roi.r_lo + (box.lL_r - 1) * hr, roi.r_lo + box.lR_r * hr)


def peak_estimate_from_box(box: LocalizationBox, roi: Rect, n_r: int, n_c: int) -> tuple[float, float]:
    """Physical centre ``(y_c, y_r)`` of the box's cell cover inside ``roi``."""
    return box_to_rect(box, roi, n_r, n_c).center


def cell_coordinate(row: int, col: int, roi: Rect, n_r: int, n_c: int) -> tuple[float, float]:
    """Physical ``(y_c, y_r)`` of the centre of 1-based cell ``(row, col)``."""
    return (roi.c_lo + (col - 0.5) * roi.width / n_c, roi.r_lo + (row - 0.5) * roi.height / n_r)


@dataclass
class RunConfig:
    grid_n: int = 50
    alpha: float = 0.5
    noise: NoiseModel = field(default_factory=NoiseModel)
    max_stages: int = 5
    stop_tolerance: float = 1e-3
    seed: int = 0
    zeta_mode: str = "empirical"
    zeta: Optional[float] = None
    completion: str = "als"
    roi: Rect = field(default_factory=lambda: Rect(-0.5, 0.5, -0.5, 0.5))

    def __post_init__(self):
        if self.grid_n < 2:
            raise ValueError("grid_n must be at least 2")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.alpha * self.grid_n ** 2 < 1:
            raise ValueError("alpha * grid_n^2 must be at least 1")
        if self.max_stages < 1:
            raise ValueError("max_stages must be positive")
        if self.stop_tolerance < 0:
            raise ValueError("stop_tolerance must be nonnegative")
        if self.zeta_mode not in ZETA_MODES:
            raise ValueError(f"unknown zeta_mode {self.zeta_mode!r}")

    @property
    def budget(self) -> int:
        return min(self.grid_n ** 2, math.ceil(self.alpha * self.grid_n ** 2))


@dataclass
class StageTrace:
    roi: Rect
    box: LocalizationBox
    samples: int
    rho: float
    sigma: float
    zeta: float
    low_snr: bool = False
    converged: bool = True
    grid_n: int = 0

    @property
    def area_ratio(self) -> float:
        """Area of the box cover over the area of the ROI it came from."""
        return self.box.area / self.grid_n ** 2 if self.grid_n else math.nan


@dataclass
class RunResult:
    stages: list
    final_box_physical: Rect
    peak_estimate: tuple
    total_samples: int
    stalled: bool = False
    stop_reason: str = ""

    def to_dict(self) -> dict:
        return {
            "peak_estimate": list(self.peak_estimate),
            "final_box_physical": list(self.final_box_physical.as_tuple()),
            "total_samples": self.total_samples,
            "stalled": self.stalled,
            "stop_reason": self.stop_reason,
            "stages": [
                {"roi": list(s.roi.as_tuple()), "box": asdict(s.box), "samples": s.samples,
                 "rho": s.rho, "sigma": s.sigma, "zeta": s.zeta, "low_snr": s.low_snr}
                for s in self.stages
            ],
        }


def run_pamcur(oracle, config: RunConfig) -> RunResult:
    """Localize the peak by stages, each on the box found by the previous one.

    ``oracle`` is a sample oracle or a :class:`SeparableField`. Each stage
    re-grids the ROI to ``grid_n x grid_n`` cell centres and draws fresh
    samples. The run stops after ``max_stages``, when the peak estimate
    moves less than ``stop_tolerance`` times the initial ROI diameter, when
    the box covers the whole grid, or after two low-SNR stages.
    """
    if isinstance(oracle, SeparableField):
        oracle = field_oracle(oracle)
    n = config.grid_n
    roi = config.roi
    diam0 = roi.diameter
    seeds = np.random.SeedSequence(config.seed).spawn(config.max_stages)
    traces: list[StageTrace] = []
    total = 0
    stalls = 0
    estimate = None
    stop_reason = "max_stages"
    for k in range(config.max_stages):
        g = roi.grid(n)
        H = np.asarray(oracle(g.row_coords, g.col_coords), dtype=float)
        st = pamcur_stage(H, config.budget, config.noise, seed=seeds[k],
                          zeta_mode=config.zeta_mode, zeta=config.zeta,
                          completion=config.completion)
        total += st.samples_used
        tr = StageTrace(roi, st.box, st.samples_used, st.rho, st.completion.sigma,
                        st.zeta_used, st.low_snr, st.completion.converged, n)
        traces.append(tr)
        if st.low_snr:
            stalls += 1
            if stalls >= STALL_LIMIT:
                stop_reason = "stalled"
                break
            continue
        new_roi = box_to_rect(st.box, roi, n, n)
        new_est = new_roi.center
        moved = math.inf if estimate is None else math.dist(new_est, estimate)
        estimate = new_est
        if st.box == LocalizationBox.full(n, n):
            stop_reason = "no_shrink"
            break
        roi = new_roi
        if moved < config.stop_tolerance * diam0:
            stop_reason = "converged"
            break
    if estimate is None:
        estimate = roi.center
    return RunResult(traces, roi, tuple(estimate), total, stop_reason == "stalled", stop_reason)
