"""Single-stage peak localization and its accuracy bounds.

One stage samples a grid at random, completes the matrix, takes the dominant
singular pair and, along each axis, keeps every peak index whose unimodal
cone can still hold a unit vector correlated with the singular vector by at
least ``rho = sqrt(1 - zeta^2 / sigma^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .completion import CompletionResult, complete_nuclear, complete_rank_r, zeta_bound
from .sampling import NoiseModel, observe, sample_uniform
from .unimodal import cone_supports

# Slack when comparing a cone support against rho; both are O(1) quantities.
SUPPORT_SLACK = 1e-12

ZETA_MODES = ("empirical", "formula", "user")


@dataclass(frozen=True)
class LocalizationBox:
    """Inclusive 1-based index bounds; rows first, then columns."""

    lL_r: int
    lR_r: int
    lL_c: int
    lR_c: int

    def __post_init__(self):
        if not (1 <= self.lL_r <= self.lR_r and 1 <= self.lL_c <= self.lR_c):
            raise ValueError(f"malformed box {self}")

    def contains(self, row: int, col: int) -> bool:
        return self.lL_r <= row <= self.lR_r and self.lL_c <= col <= self.lR_c

    @property
    def area(self) -> int:
        return (self.lR_r - self.lL_r + 1) * (self.lR_c - self.lL_c + 1)

    @classmethod
    def full(cls, n_r: int, n_c: int) -> "LocalizationBox":
        return cls(1, n_r, 1, n_c)


@dataclass
class StageResult:
    box: LocalizationBox
    completion: CompletionResult
    zeta_used: float
    rho: float
    samples_used: int
    low_snr: bool
    infeasible_axes: tuple = ()


def eta(sigma: float, sigma0: float, zeta: float) -> float:
    """Lower bound on ``<u0, u><v0, v>`` given the reconstruction error ``zeta``.

    Valid whenever ``0 <= zeta <= sigma``; ``sigma`` may exceed ``sigma0``
    (the square root argument stays nonnegative on that whole range).
    """
    if not 0 <= zeta <= sigma or sigma0 <= 0:
        raise ValueError("need 0 <= zeta <= sigma, sigma0 > 0")
    s = sigma / sigma0
    disc = (1.0 - s) ** 2 + s * s - (zeta / sigma0) ** 2
    return (1.0 - s) + math.sqrt(max(disc, 0.0))


def eta_floor(sigma: float, zeta: float) -> float:
    """``sqrt(1 - zeta^2 / sigma^2)``: the part of ``eta`` known at run time."""
    if not 0 <= zeta <= sigma or sigma <= 0:
        raise ValueError("need 0 <= zeta <= sigma, sigma > 0")
    return math.sqrt(max(1.0 - (zeta / sigma) ** 2, 0.0))


def axis_supports(u) -> np.ndarray:
    """Cone support of ``|u| / ||u||`` for every peak index ``1..n``."""
    w = np.abs(np.asarray(u, dtype=float))
    norm = np.linalg.norm(w)
    if norm == 0:
        raise ValueError("u must be nonzero")
    return cone_supports(w / norm)


def feasible_peaks(u, rho: float, supports: Optional[np.ndarray] = None) -> np.ndarray:
    """1-based peak indices whose cone reaches correlation ``rho`` with ``|u|``."""
    sup = axis_supports(u) if supports is None else supports
    return np.flatnonzero(sup >= rho - SUPPORT_SLACK) + 1


def localize_axis(u, rho: float, supports: Optional[np.ndarray] = None) -> tuple[int, int]:
    """Smallest and largest feasible peak index along one axis.

    Works on ``|u|`` so either sign of a singular vector is accepted. If
    no index is feasible the whole axis ``(1, n)`` is returned; use
    :func:`feasible_peaks` to tell the two situations apart.
    """
    if not 0 <= rho <= 1:
        raise ValueError("rho must lie in [0, 1]")
    n = np.asarray(u).size
    ls = feasible_peaks(u, rho, supports)
    if ls.size == 0:
        return 1, n
    return int(ls[0]), int(ls[-1])


def empirical_zeta(residual: float, n_r: int, n_c: int, m: int) -> float:
    """Observed-entry misfit extrapolated to the full grid."""
    return residual * math.sqrt(n_r * n_c / m)


def pamcur_stage(H: np.ndarray, budget: int, noise: NoiseModel = NoiseModel(), seed=0,
                 zeta_mode: str = "empirical", zeta: Optional[float] = None,
                 completion: str = "als", rank: int = 1,
                 completer: Optional[Callable] = None) -> StageResult:
    """Run one localization stage on the grid values ``H``.

    ``H`` stands in for the sample oracle: only the ``budget`` randomly
    chosen entries are read (with ``noise`` added). ``zeta_mode`` picks the
    reconstruction-error bound: ``"empirical"`` scales the observed misfit
    to the full grid, ``"formula"`` uses the worst-case completion bound,
    ``"user"`` takes ``zeta`` as given.
    """
    if zeta_mode not in ZETA_MODES:
        raise ValueError(f"unknown zeta_mode {zeta_mode!r}")
    if zeta_mode == "user" and zeta is None:
        raise ValueError("zeta_mode='user' needs a zeta value")
    H = np.asarray(H, dtype=float)
    n_r, n_c = H.shape
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    pick_seed, noise_seed = ss.spawn(2)
    rows, cols = sample_uniform(n_r, n_c, budget, pick_seed)
    samples = observe(H, rows, cols, noise, noise_seed)
    if completer is not None:
        res = completer(samples, n_r, n_c)
    elif completion == "als":
        res = complete_rank_r(samples, n_r, n_c, r=rank)
    elif completion == "nuclear":
        res = complete_nuclear(samples, n_r, n_c, eps_total=noise.eps * budget)
    else:
        raise ValueError(f"unknown completion {completion!r}")

    m = len(samples)
    if zeta_mode == "empirical":
        z = empirical_zeta(res.residual, n_r, n_c, m)
    elif zeta_mode == "formula":
        n = max(n_r, n_c)
        z = zeta_bound(m / n ** 2, n, noise.eps, m)
    else:
        z = float(zeta)

    sigma = res.sigma
    if sigma <= 0 or z >= sigma:
        return StageResult(LocalizationBox.full(n_r, n_c), res, z, 0.0, m, True)
    rho = eta_floor(sigma, z)
    infeasible = []
    bounds = []
    for axis, vec in (("row", res.u), ("col", res.v)):
        sup = axis_supports(vec)
        if feasible_peaks(vec, rho, sup).size == 0:
            infeasible.append(axis)
        bounds.append(localize_axis(vec, rho, sup))
    (lr, rr), (lc, rc) = bounds
    return StageResult(LocalizationBox(lr, rr, lc, rc), res, z, rho, m, False, tuple(infeasible))


def zeta_prime(zeta: float, sigma: float) -> float:
    """``4 sqrt(1 - zeta^2/sigma^2) - 3``; geometric shrinkage needs it positive."""
    zp = 4.0 * eta_floor(sigma, zeta) - 3.0
    if zp <= 0:
        raise ValueError(f"zeta'={zp:.4g} is not positive (need zeta^2/sigma^2 < 7/16)")
    return zp


def theorem2_thresholds(u0, zeta_prime: float) -> tuple[int, int]:
    """Inner indices beyond which the tails of ``u0`` carry at most ``zeta'/sqrt(2)`` of l1 mass.

    Returns 1-based ``(lBL, lBR)``: the last ``j`` whose prefix ``u0[1:j]``
    has l1 norm ``<= zeta'/sqrt(2)`` (0 if none) and the first ``j`` whose
    suffix ``u0[j:n]`` does (``n + 1`` if none).
    """
    if zeta_prime <= 0:
        raise ValueError("zeta_prime must be positive")
    u0 = np.asarray(u0, dtype=float)
    n = u0.size
    thr = zeta_prime / math.sqrt(2.0)
    prefix = np.cumsum(np.abs(u0))
    suffix = np.cumsum(np.abs(u0)[::-1])[::-1]
    ok_l = np.flatnonzero(prefix <= thr)
    ok_r = np.flatnonzero(suffix <= thr)
    lBL = int(ok_l[-1]) + 1 if ok_l.size else 0
    lBR = int(ok_r[0]) + 1 if ok_r.size else n + 1
    return lBL, lBR


def theorem2_region_bound(rho_u: float, rho_v: float, n: int, zeta_prime: float) -> float:
    """Upper bound ``16 rho_u^2 rho_v^2 n^2 / zeta'^4`` on the localized area."""
    if min(rho_u, rho_v, n, zeta_prime) <= 0:
        raise ValueError("inputs must be positive")
    return 16.0 * rho_u ** 2 * rho_v ** 2 * n ** 2 / zeta_prime ** 4
