"""Low-rank matrix completion, dominant singular triplets and error bounds."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .sampling import SampleSet

log = logging.getLogger(__name__)


@dataclass
class CompletionResult:
    """Completed matrix with its dominant singular triplet.

    ``residual`` is the Frobenius misfit on the observed entries only;
    ``history`` holds that misfit after every iteration.
    """

    H_hat: np.ndarray
    u: np.ndarray
    sigma: float
    v: np.ndarray
    residual: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def dominant_svd(M, seed=0, tol: float = 1e-12, max_iter: int = 100_000):
    """Largest singular value and vectors of ``M`` by power iteration.

    Iterates ``v <- M^T M v`` from a seeded random start until
    ``||M^T u - sigma v|| <= tol * sigma``. The returned ``u`` has its
    largest-magnitude entry nonnegative.

    Returns
    -------
    (u, sigma, v)
    """
    M = np.asarray(M, dtype=float)
    n_r, n_c = M.shape
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix must be finite")
    if not np.any(M):
        return np.eye(n_r)[0], 0.0, np.eye(n_c)[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n_c)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = M @ v
        sigma = np.linalg.norm(w)
        if sigma == 0.0:  # started in the null space
            v = rng.standard_normal(n_c)
            v /= np.linalg.norm(v)
            continue
        u = w / sigma
        z = M.T @ u
        res = np.linalg.norm(z - sigma * v)
        v = z / np.linalg.norm(z)
        if res <= tol * sigma:
            break
    else:
        log.warning("dominant_svd: no convergence in %d iterations", max_iter)
    w = M @ v
    sigma = float(np.linalg.norm(w))
    u = w / sigma
    k = int(np.argmax(np.abs(u)))
    if u[k] < 0:
        u, v = -u, -v
    return u, sigma, v


def _result_from(H_hat, residual, iterations, converged, history, seed=0):
    u, sigma, v = dominant_svd(H_hat, seed=seed)
    return CompletionResult(H_hat, u, sigma, v, float(residual), iterations, converged, history)


def complete_rank_r(samples: SampleSet, n_r: int, n_c: int, r: int = 1,
                    max_iters: int = 500, tol: float = 1e-10) -> CompletionResult:
    """Fit ``H_hat = X Y^T`` (rank ``r``) to the observed entries by alternating least squares.

    Initialization is spectral (top-``r`` SVD of the zero-filled, rescaled
    observations). Iteration stops when the observed-entry residual changes
    by less than ``tol`` relative to the norm of the observations.
    A row or column with no observations leaves the fit undetermined there;
    the result is then flagged as not converged.
    """
    if r < 1 or r > min(n_r, n_c):
        raise ValueError(f"rank {r} outside [1, {min(n_r, n_c)}]")
    m = len(samples)
    if m < r * (n_r + n_c):
        warnings.warn(f"{m} samples is below r*(n_r+n_c)={r * (n_r + n_c)}; completion may fail",
                      stacklevel=2)
    W = samples.mask(n_r, n_c).astype(float)
    M = samples.zero_filled(n_r, n_c)
    scale = float(np.linalg.norm(samples.values))
    if scale == 0.0:
        return _result_from(np.zeros((n_r, n_c)), 0.0, 0, True, [0.0])
    degenerate = bool(np.any(W.sum(axis=1) == 0) or np.any(W.sum(axis=0) == 0))

    q = m / (n_r * n_c)
    if r == 1:
        u, s, v = dominant_svd(M / q)
        U, S, Vt = u[:, None], np.array([s]), v[None, :]
    else:
        U, S, Vt = np.linalg.svd(M / q, full_matrices=False)
    X = U[:, :r] * np.sqrt(S[:r])
    Y = Vt[:r].T * np.sqrt(S[:r])

    def solve(W_, M_, F):
        # per-row normal equations G_i x_i = b_i over observed entries
        G = np.einsum("ij,jk,jl->ikl", W_, F, F)
        b = (W_ * M_) @ F
        return np.einsum("ikl,il->ik", np.linalg.pinv(G), b)

    history = []
    prev = math.inf
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        X = solve(W, M, Y)
        Y = solve(W.T, M.T, X)
        res = float(np.linalg.norm(W * (X @ Y.T - M)))
        history.append(res)
        if abs(prev - res) <= tol * scale:
            converged = True
            break
        prev = res
    H_hat = X @ Y.T
    return _result_from(H_hat, history[-1], it, converged and not degenerate, history)


def complete_nuclear(samples: SampleSet, n_r: int, n_c: int, eps_total: float = 0.0,
                     max_iters: int = 20_000, tol: float = 1e-6,
                     shrink: float = 0.9) -> CompletionResult:
    """Approximate minimum-nuclear-norm completion under an observed-entry misfit budget.

    Solves ``min ||Q||_* s.t. ||P(Q) - P(H)||_F <= eps_total`` by singular
    value soft-thresholding with a geometrically decreasing threshold
    (factor ``shrink``), warm-started at every level. Once a threshold is
    feasible it is refined by bisection against the previous infeasible
    one. With ``eps_total == 0`` the target misfit is ``tol * ||P(H)||``.
    """
    if eps_total < 0:
        raise ValueError("eps_total must be nonnegative")
    W = samples.mask(n_r, n_c)
    M = samples.zero_filled(n_r, n_c)
    obs_norm = float(np.linalg.norm(samples.values))
    target = max(eps_total, tol * obs_norm)
    if obs_norm <= eps_total:
        return _result_from(np.zeros((n_r, n_c)), obs_norm, 0, True, [obs_norm])

    budget = [max_iters]

    def prox_solve(Q, mu, inner_tol=1e-10, cap=5000):
        for _ in range(cap):
            if budget[0] <= 0:
                break
            budget[0] -= 1
            G = Q + W * (M - Q)
            U, s, Vt = np.linalg.svd(G, full_matrices=False)
            s = np.maximum(s - mu, 0.0)
            k = int(np.count_nonzero(s))
            Q_new = (U[:, :k] * s[:k]) @ Vt[:k]
            step = np.linalg.norm(Q_new - Q)
            Q = Q_new
            if step <= inner_tol * max(1.0, np.linalg.norm(Q)):
                break
        return Q

    def misfit(Q):
        return float(np.linalg.norm(W * (Q - M)))

    mu = float(np.linalg.norm(M, 2))
    mu_floor = 1e-12 * mu
    Q_hi = np.zeros((n_r, n_c))  # last infeasible iterate
    mu_hi = mu
    history = [misfit(Q_hi)]
    found = False
    Q = Q_hi
    while mu > mu_floor and budget[0] > 0:
        mu *= shrink
        Q = prox_solve(Q, mu)
        history.append(misfit(Q))
        if history[-1] <= target:
            found = True
            break
        Q_hi, mu_hi = Q, mu
    if found and eps_total > 0:
        Q_lo, mu_lo = Q, mu
        for _ in range(12):
            mid = math.sqrt(mu_hi * mu_lo)
            Q_mid = prox_solve(Q_lo, mid)
            if misfit(Q_mid) <= target:
                Q_lo, mu_lo = Q_mid, mid
            else:
                mu_hi = mid
            history.append(misfit(Q_lo))
        Q = Q_lo
    return _result_from(Q, misfit(Q), max_iters - budget[0], found, history)


def nuclear_norm(M) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)))


def c_qn(q: float, n: int) -> float:
    """``C(q, n) = 2 + 4 sqrt(n (1 + 2/q))``."""
    return 2.0 + 4.0 * math.sqrt(n * (1.0 + 2.0 / q))


def zeta_bound(q: float, n: int, eps: float, m: int) -> float:
    """Worst-case Frobenius reconstruction error ``C(q, n) * eps * m``."""
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    if abs(q - m / n ** 2) > 1e-9:
        raise ValueError(f"q={q} inconsistent with m/n^2={m / n ** 2}")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return c_qn(q, n) * eps * m


def snr(sigma0: float, eps: float, m: int) -> float:
    """Signal-to-noise ratio ``sigma0^2 / (eps m)^2`` over the observed entries."""
    denom = eps * m
    if denom <= 0:
        raise ZeroDivisionError("eps * m must be positive")
    return sigma0 ** 2 / denom ** 2
