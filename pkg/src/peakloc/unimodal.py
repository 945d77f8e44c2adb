"""Isotonic and unimodal least-squares fits.

All routines here are exact pool-adjacent-violators (PAVA) variants with
uniform weights. Mode indices are 1-based, matching the localization box
convention used throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UnimodalFit:
    """A unimodal vector ``z`` with its peak index and squared fit error."""

    z: np.ndarray
    mode: int
    sq_error: float


def _pava_blocks(y: np.ndarray) -> list[list[float]]:
    # Blocks as [sum, count], means nondecreasing left to right.
    blocks: list[list[float]] = []
    for value in y:
        s, c = float(value), 1
        while blocks and blocks[-1][0] * c >= s * blocks[-1][1]:
            ps, pc = blocks.pop()
            s += ps
            c += pc
        blocks.append([s, c])
    return blocks


def _expand(blocks, n: int) -> np.ndarray:
    out = np.empty(n)
    pos = 0
    for s, c in blocks:
        out[pos:pos + int(c)] = s / c
        pos += int(c)
    return out


def isotonic_fit(y, direction: str = "increasing") -> np.ndarray:
    """Euclidean projection of ``y`` onto the monotone cone.

    Parameters
    ----------
    y : array_like
        Finite values, at least one.
    direction : {"increasing", "decreasing"}

    Returns
    -------
    numpy.ndarray
        The unique least-squares monotone fit.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("isotonic_fit expects a nonempty 1-D vector")
    if direction == "increasing":
        return _expand(_pava_blocks(y), y.size)
    if direction == "decreasing":
        return -_expand(_pava_blocks(-y), y.size)
    raise ValueError(f"unknown direction {direction!r}")


def prefix_isotonic_errors(y) -> np.ndarray:
    """Squared error of the increasing fit to every prefix of ``y``.

    ``out[k]`` is the error for ``y[:k]``; ``out[0] == 0``.
    """
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.size + 1)
    blocks: list[list[float]] = []
    sum_sq = 0.0
    pooled = 0.0  # sum over blocks of sum**2 / count
    for k, value in enumerate(y):
        sum_sq += value * value
        s, c = float(value), 1
        while blocks and blocks[-1][0] * c >= s * blocks[-1][1]:
            ps, pc = blocks.pop()
            pooled -= ps * ps / pc
            s += ps
            c += pc
        blocks.append([s, c])
        pooled += s * s / c
        out[k + 1] = max(sum_sq - pooled, 0.0)
    return out


def project_unimodal_peak(v, l_star: int) -> UnimodalFit:
    """Project ``v`` onto the cone of vectors unimodal with peak at ``l_star``.

    The cone holds every ``z`` with ``z[0] <= ... <= z[l_star-1]`` and
    ``z[l_star-1] >= ... >= z[-1]`` (``l_star`` is 1-based). The two sides
    are fitted by PAVA independently, then the blocks adjacent to the peak
    are pooled into it while they sit above it, largest first.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if not 1 <= l_star <= n:
        raise ValueError(f"l_star={l_star} outside [1, {n}]")
    p = l_star - 1
    left = _pava_blocks(v[:p])
    # decreasing fit of the right side == reversed increasing fit of its mirror
    right = _pava_blocks(v[p + 1:][::-1])
    top_s, top_c = float(v[p]), 1
    while True:
        lm = left[-1][0] / left[-1][1] if left else -np.inf
        rm = right[-1][0] / right[-1][1] if right else -np.inf
        tm = top_s / top_c
        if lm <= tm and rm <= tm:
            break
        s, c = left.pop() if lm >= rm else right.pop()
        top_s += s
        top_c += c
    z = np.empty(n)
    pos = 0
    for s, c in left:
        z[pos:pos + int(c)] = s / c
        pos += int(c)
    z[pos:pos + top_c] = top_s / top_c
    pos = n
    for s, c in right:  # right blocks run from the last entry inward
        z[pos - int(c):pos] = s / c
        pos -= int(c)
    return UnimodalFit(z=z, mode=l_star, sq_error=float(np.sum((v - z) ** 2)))


def cone_support(v, l_star: int) -> float:
    """Largest ``<z, v>`` over unit-norm members of the peak-``l_star`` cone.

    By the Moreau decomposition this is the norm of the projection of ``v``
    onto the cone (zero when the projection vanishes).
    """
    return float(np.linalg.norm(project_unimodal_peak(v, l_star).z))


def cone_supports(v) -> np.ndarray:
    """``cone_support(v, l)`` for every ``l = 1..n`` at once."""
    v = np.asarray(v, dtype=float)
    return np.array([cone_support(v, l) for l in range(1, v.size + 1)])


def best_unimodal_fit(v) -> UnimodalFit:
    """Least-squares unimodal fit over all peak positions.

    Every unimodal vector splits into an increasing head and a decreasing
    tail, so the optimum is the best split of prefix/suffix isotonic fits.
    Among equal-error fits the one with the smallest mode wins.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if n == 0:
        raise ValueError("best_unimodal_fit expects a nonempty vector")
    head = prefix_isotonic_errors(v)
    # tail[k] = error of decreasing fit on v[k:]
    tail = prefix_isotonic_errors(v[::-1])[::-1]
    total = head + tail
    best = total.min()
    tol = 1e-12 * max(1.0, float(np.dot(v, v)))
    candidates = []
    for k in np.flatnonzero(total <= best + tol):
        z = np.concatenate([isotonic_fit(v[:k]) if k else np.empty(0),
                            isotonic_fit(v[k:], "decreasing") if k < n else np.empty(0)])
        mode = int(np.argmax(z)) + 1
        candidates.append((mode, float(np.sum((v - z) ** 2)), z))
    mode, err, z = min(candidates, key=lambda c: (c[0], c[1]))
    return UnimodalFit(z=z, mode=mode, sq_error=err)


def lemma2_rhs(v, kL: int, kR: int, delta: float) -> float:
    """Right-hand side of the necessary condition on the attainable ``rho**2``."""
    if kL < 0 or kR < 0 or delta < 0:
        raise ValueError("kL, kR and delta must be nonnegative")
    s = float(np.sum(v))
    k = kR + kL + 1
    return s * s + (delta * delta - 2.0 * delta * s) * k + delta * delta * k * k


def lemma2_delta_cap(v, l0: int, kL: int, kR: int) -> float:
    """Largest admissible ``delta``: the minimum suffix sum per remaining width.

    Returns ``min_j sum(v[j+1:n]) / (l0 + kR - j)`` over 1-based
    ``j = l0-kL-1 .. l0+kR-1``.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    lo, hi = l0 - kL - 1, l0 + kR - 1
    if kL < 0 or kR < 0 or lo < 0 or hi > n - 1 or not 1 <= l0 <= n:
        raise ValueError(f"invalid index range l0={l0}, kL={kL}, kR={kR} for n={n}")
    suffix = np.concatenate([np.cumsum(v[::-1])[::-1], [0.0]])  # suffix[j] = sum v[j:]
    j = np.arange(lo, hi + 1)
    # 1-based v(j+1:n) is 0-based v[j:]
    return float(np.min(suffix[j] / (l0 + kR - j)))


def lemma2_ranges(n: int, l0: int, l_star: int) -> tuple[range, range]:
    """Admissible ``(kL, kR)`` values for the necessary condition.

    ``kL`` stops one short of ``l0 - l_star``: at ``kL = l0 - l_star`` the
    shifted window would cover ``l_star`` itself and the bound no longer
    holds (e.g. ``v = (0, 1, 0)``, ``l_star = l0 = 2``).
    """
    if not 1 <= l_star <= l0 <= n:
        raise ValueError("need 1 <= l_star <= l0 <= n")
    return range(0, l0 - l_star), range(0, n - l0 + 1)
