"""Random sample selection, noisy observation and sample budgets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseModel:
    """Additive observation noise: ``none`` or zero-mean ``gaussian``."""

    kind: str = "none"
    std: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.std < 0:
            raise ValueError("noise std must be nonnegative")

    @property
    def eps(self) -> float:
        """Per-sample RMS noise bound."""
        return self.std if self.kind == "gaussian" else 0.0

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "none" or self.std == 0:
            return np.zeros(size)
        return rng.normal(0.0, self.std, size=size)


@dataclass(frozen=True)
class SampleSet:
    """Observed entries of an ``n_r x n_c`` matrix.

    ``rows`` and ``cols`` are 0-based array indices aligned with ``values``.
    """

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    noise_eps: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (self.rows.shape == self.cols.shape == self.values.shape):
            raise ValueError("rows, cols and values must align")
        if self.rows.size < 1:
            raise ValueError("a SampleSet needs at least one sample")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample values must be finite")

    def __len__(self) -> int:
        return int(self.rows.size)

    @property
    def indices(self) -> np.ndarray:
        return np.stack([self.rows, self.cols], axis=1)

    def zero_filled(self, n_r: int, n_c: int) -> np.ndarray:
        M = np.zeros((n_r, n_c))
        M[self.rows, self.cols] = self.values
        return M

    def mask(self, n_r: int, n_c: int) -> np.ndarray:
        W = np.zeros((n_r, n_c), dtype=bool)
        W[self.rows, self.cols] = True
        return W


def sample_uniform(n_r: int, n_c: int, m: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``m`` distinct cells uniformly without replacement.

    Returns 0-based ``(rows, cols)`` index arrays.
    """
    total = n_r * n_c
    if not 1 <= m <= total:
        raise ValueError(f"m={m} outside [1, {total}]")
    rng = np.random.default_rng(seed)
    flat = rng.choice(total, size=m, replace=False)
    return flat // n_c, flat % n_c


def observe(H: np.ndarray, rows, cols, noise: NoiseModel = NoiseModel(), seed=0) -> SampleSet:
    """Record ``H`` at the given cells plus an independent noise draw each."""
    H = np.asarray(H, dtype=float)
    rows = np.asarray(rows, dtype=int)
    cols = np.asarray(cols, dtype=int)
    if (rows.min(initial=0) < 0 or cols.min(initial=0) < 0
            or rows.max(initial=0) >= H.shape[0] or cols.max(initial=0) >= H.shape[1]):
        raise IndexError("sample index outside the matrix")
    rng = np.random.default_rng(seed)
    values = H[rows, cols] + noise.draw(rng, rows.size)
    s = seed if isinstance(seed, (int, np.integer)) else 0
    return SampleSet(rows, cols, values, noise_eps=noise.eps, seed=int(s))


def sample_budget(n: int, nu: float = 1.0, c0: float = 0.1) -> int:
    """``min(n^2, ceil(c0 * nu * n * ln(n)^2))`` samples for an ``n x n`` stage."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if nu < 1 or c0 <= 0:
        raise ValueError("need nu >= 1 and c0 > 0")
    return int(min(n * n, math.ceil(c0 * nu * n * math.log(n) ** 2)))
