"""Separable target fields, sampling grids and coherence calculators.

Coordinates are ``(y_c, y_r)`` pairs: ``y_c`` runs along matrix columns and
``y_r`` along matrix rows. A field discretized on a :class:`GridSpec` is the
``n_r x n_c`` matrix ``H[i, j] = G(row_coords[i]) * F(col_coords[j])``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

PROFILE_KINDS = ("laplacian", "gaussian", "cauchy", "exponential", "powerlaw", "product")


@dataclass(frozen=True)
class ProfileSpec:
    """A 1-D decaying profile centred at the origin.

    ``laplacian``   ``0.5 a exp(-a|x|)``
    ``gaussian``    ``a / sqrt(2 pi) exp(-(a x)^2 / 2)``
    ``cauchy``      ``a / (pi (1 + (a x)^2))``
    ``exponential`` ``exp(-a |x|^p)``
    ``powerlaw``    ``(a + |x|^p)^(-r)``
    ``product``     pointwise product of ``factors``

    With ``a = 1`` the first three are the standard Laplacian, Gaussian and
    Cauchy densities. ``shift`` moves the profile's own centre; it is only
    needed when multiplying fields with different centres.
    """

    kind: str = "laplacian"
    a: float = 1.0
    p: float = 1.0
    r: float = 1.0
    factors: tuple = field(default_factory=tuple)
    shift: float = 0.0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "product":
            if len(self.factors) < 2:
                raise ValueError("product profile needs at least two factors")
        elif not (self.a > 0 and self.p > 0 and self.r > 0):
            raise ValueError("profile parameters a, p, r must be positive")

    def __call__(self, x):
        a, p, r = self.a, self.p, self.r
        if self.kind == "product":
            x = np.asarray(x, dtype=float) - self.shift  # factors see signed coordinates
            out = np.ones_like(x)
            for f in self.factors:
                out = out * f(x)
            return out
        x = np.abs(np.asarray(x, dtype=float) - self.shift)
        if self.kind == "laplacian":
            return 0.5 * a * np.exp(-a * x)
        if self.kind == "gaussian":
            return a / math.sqrt(2.0 * math.pi) * np.exp(-0.5 * (a * x) ** 2)
        if self.kind == "cauchy":
            return a / (math.pi * (1.0 + (a * x) ** 2))
        if self.kind == "exponential":
            return np.exp(-a * x ** p)
        if self.kind == "powerlaw":
            return (a + x ** p) ** (-r)
        raise AssertionError(self.kind)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "a": self.a, "p": self.p, "r": self.r, "shift": self.shift}
        if self.kind == "product":
            d["factors"] = [f.to_dict() for f in self.factors]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ProfileSpec":
        d = dict(d)
        factors = tuple(cls.from_dict(f) for f in d.pop("factors", ()))
        return cls(factors=factors, **{k: (v if k == "kind" else float(v)) for k, v in d.items()})


@dataclass(frozen=True)
class SeparableField:
    """``H(y) = amplitude * F(y_c - c_c) * G(y_r - c_r)``."""

    row_profile: ProfileSpec
    col_profile: ProfileSpec
    amplitude: float = 1.0
    center: tuple = (0.0, 0.0)  # (y_c, y_r)

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")

    def __call__(self, yc, yr):
        return (self.amplitude * self.col_profile(np.asarray(yc) - self.center[0])
                * self.row_profile(np.asarray(yr) - self.center[1]))

    def __mul__(self, other: "SeparableField") -> "SeparableField":
        # Product of two separable fields; both re-expressed around self.center.
        def shifted(prof, offset):
            return replace(prof, shift=prof.shift + offset)

        dc = other.center[0] - self.center[0]
        dr = other.center[1] - self.center[1]
        col = ProfileSpec("product", factors=(self.col_profile, shifted(other.col_profile, dc)))
        row = ProfileSpec("product", factors=(self.row_profile, shifted(other.row_profile, dr)))
        return SeparableField(row, col, self.amplitude * other.amplitude, self.center)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid with strictly ascending row and column coordinates."""

    row_coords: np.ndarray
    col_coords: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.row_coords, dtype=float).ravel()
        cols = np.asarray(self.col_coords, dtype=float).ravel()
        for name, c in (("row", rows), ("col", cols)):
            if c.size == 0 or not np.all(np.isfinite(c)):
                raise ValueError(f"{name} coordinates must be finite and nonempty")
            if np.any(np.diff(c) <= 0):
                raise ValueError(f"{name} coordinates must be strictly ascending")
        object.__setattr__(self, "row_coords", rows)
        object.__setattr__(self, "col_coords", cols)

    @property
    def n_r(self) -> int:
        return self.row_coords.size

    @property
    def n_c(self) -> int:
        return self.col_coords.size

    @property
    def shape(self) -> tuple:
        return (self.n_r, self.n_c)

    @classmethod
    def uniform(cls, n_r, n_c=None, row_range=(0.0, 1.0), col_range=(0.0, 1.0)):
        """Cell-centred uniform grid over the given coordinate ranges."""
        n_c = n_r if n_c is None else n_c
        return cls(cell_centers(*row_range, n_r), cell_centers(*col_range, n_c))


def cell_centers(lo: float, hi: float, n: int) -> np.ndarray:
    h = (hi - lo) / n
    return lo + h * (np.arange(n) + 0.5)


def eval_field(f: SeparableField, y) -> float:
    """Field value at ``y = (y_c, y_r)``."""
    yc, yr = y
    if not (math.isfinite(yc) and math.isfinite(yr)):
        raise ValueError("coordinates must be finite")
    return float(f(yc, yr))


def discretize(f: SeparableField, grid: GridSpec) -> np.ndarray:
    """Sample ``f`` on ``grid`` as the rank-1 outer product ``g f^T``."""
    g = f.amplitude * f.row_profile(grid.row_coords - f.center[1])
    c = f.col_profile(grid.col_coords - f.center[0])
    return np.outer(g, c)


def inverse_square_matrix(grid: GridSpec, H0: float = 1.0) -> np.ndarray:
    """``H0 / (y_c^2 + y_r^2)`` on ``grid``; only approximately rank 1."""
    r2 = grid.row_coords[:, None] ** 2 + grid.col_coords[None, :] ** 2
    if np.any(r2 == 0):
        raise ValueError("grid contains the singular point (0, 0)")
    return H0 / r2


def singular_value_gap_db(M) -> float:
    """``10 log10(sigma_2 / sigma_1)``; the separability measure for near rank-1 data."""
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s.size < 2:
        return -math.inf
    return 10.0 * math.log10(s[1] / s[0])


# --- coherence ---------------------------------------------------------------
#
# ``n`` below is the number of matrix entries of a square discretization,
# i.e. the singular vectors have length sqrt(n); the grid spacing is
# 1/sqrt(n) over a unit-length window.


def analytic_coherence_exponential(a: float, p: float, n: int) -> float:
    """Coherence of the discretized profile ``exp(-a|x|^p)``."""
    if not (a > 0 and p > 0 and n >= 1):
        raise ValueError("need a > 0, p > 0, n >= 1")
    return (2.0 * a) ** (1.0 / p) / (math.sqrt(n) * (2.0 / p) * math.gamma(1.0 / p))


def analytic_coherence_powerlaw(a: float, p: float, n: int) -> float:
    """Coherence of the discretized profile ``1 / (a + |x|^p)``."""
    if not (a > 0 and n >= 1):
        raise ValueError("need a > 0, n >= 1")
    if not p > 0.5:
        raise ValueError("power-law coherence integral diverges for p <= 1/2")
    if p == 1.0:
        return 1.0 / (2.0 * a * math.sqrt(n))
    return p * p * math.sin(math.pi / p) / (2.0 * math.sqrt(n) * math.pi * (p - 1.0) * a ** (1.0 / p))


def coherence_parameter(mu_u: float, mu_v: float, n: int) -> float:
    """Smallest ``nu`` consistent with the two per-vector coherences."""
    return max(0.5 * math.sqrt(n) * (mu_u + mu_v), n * mu_u * mu_v)


def numeric_coherence(u0, v0, tol: float = 1e-8) -> float:
    """Coherence parameter of the rank-1 matrix ``u0 v0^T`` from its factors.

    Both inputs must be unit vectors; ``n`` is taken as ``len(u0) * len(v0)``.
    """
    u0 = np.asarray(u0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    for name, w in (("u0", u0), ("v0", v0)):
        if abs(np.linalg.norm(w) - 1.0) > tol:
            raise ValueError(f"{name} must have unit norm")
    n = u0.size * v0.size
    return coherence_parameter(float(np.max(u0 ** 2)), float(np.max(v0 ** 2)), n)


def profile_unit_vector(profile, n: int, half_width: float = 0.5,
                        center: float = 0.0, normalize: bool = True) -> np.ndarray:
    """Discretize a 1-D profile at ``n`` cell centres over ``[-half_width, half_width]``."""
    x = cell_centers(-half_width, half_width, n)
    u = np.asarray(profile(x - center), dtype=float)
    return u / np.linalg.norm(u) if normalize else u


def field_from_dict(d: dict) -> SeparableField:
    """Build a field from a flat config mapping (see ``harness``)."""
    row = ProfileSpec.from_dict(d["row_profile"]) if "row_profile" in d else ProfileSpec(
        d.get("kind", "laplacian"), float(d.get("a", 1.0)), float(d.get("p", 1.0)), float(d.get("r", 1.0)))
    col = ProfileSpec.from_dict(d["col_profile"]) if "col_profile" in d else row
    center = tuple(float(c) for c in d.get("center", (0.0, 0.0)))
    return SeparableField(row, col, float(d.get("amplitude", 1.0)), center)


def field_to_dict(f: SeparableField) -> dict:
    return {"row_profile": f.row_profile.to_dict(), "col_profile": f.col_profile.to_dict(),
            "amplitude": f.amplitude, "center": list(f.center)}


__all__ = [
    "ProfileSpec", "SeparableField", "GridSpec", "cell_centers", "eval_field", "discretize",
    "inverse_square_matrix", "singular_value_gap_db", "analytic_coherence_exponential",
    "analytic_coherence_powerlaw", "coherence_parameter", "numeric_coherence",
    "profile_unit_vector", "field_from_dict", "field_to_dict",
]
