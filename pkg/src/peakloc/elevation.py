"""Elevation point clouds: loading, nearest-sample rasterization, ground truth.

Input files hold one record per line, ``id,longitude,latitude,altitude`` by
default. Rasters put latitude on the row axis (ascending) and longitude on
the column axis, so a cell's physical coordinate is ``(lon, lat)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

log = logging.getLogger(__name__)

DEFAULT_COLUMNS = (1, 2, 3)  # lon, lat, alt positions within a record
MAX_MALFORMED_FRACTION = 0.01


class ElevationError(ValueError):
    pass


@dataclass
class ElevationPointCloud:
    lon: np.ndarray
    lat: np.ndarray
    alt: np.ndarray
    malformed: int = 0

    def __post_init__(self):
        self.lon = np.asarray(self.lon, dtype=float)
        self.lat = np.asarray(self.lat, dtype=float)
        self.alt = np.asarray(self.alt, dtype=float)
        if not (self.lon.shape == self.lat.shape == self.alt.shape) or self.lon.ndim != 1:
            raise ElevationError("lon, lat and alt must be aligned 1-D arrays")
        if self.lon.size == 0:
            raise ElevationError("point cloud is empty")
        if not np.all(np.isfinite(self.alt)):
            raise ElevationError("altitudes must be finite")
        self._tree = None

    def __len__(self) -> int:
        return int(self.lon.size)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """``(lon_lo, lon_hi, lat_lo, lat_hi)``."""
        return (float(self.lon.min()), float(self.lon.max()),
                float(self.lat.min()), float(self.lat.max()))

    def nearest_altitude(self, lon, lat) -> np.ndarray:
        """Altitude of the nearest point (planar lon/lat distance).

        Equidistant points resolve to the one appearing first in the data.
        """
        if self._tree is None:
            self._tree = cKDTree(np.stack([self.lon, self.lat], axis=1))
        q = np.stack([np.ravel(lon), np.ravel(lat)], axis=1).astype(float)
        k = min(2, len(self))
        d, idx = self._tree.query(q, k=k)
        d = d.reshape(len(q), k)
        idx = idx.reshape(len(q), k)
        choice = idx[:, 0].copy()
        if k == 2:
            tied = np.flatnonzero(d[:, 1] <= d[:, 0] * (1 + 1e-12) + 1e-300)
            for t in tied:
                near = self._tree.query_ball_point(q[t], d[t, 0] * (1 + 1e-12) + 1e-300)
                choice[t] = min(near)
        return self.alt[choice].reshape(np.shape(lon))

    def oracle(self) -> "CloudOracle":
        """Sample oracle ``(row_coords=lat, col_coords=lon) -> matrix``."""
        return CloudOracle(self)

    def __getstate__(self):
        d = dict(self.__dict__)
        d["_tree"] = None  # rebuilt lazily after unpickling
        return d


@dataclass(frozen=True, eq=False)
class CloudOracle:
    cloud: ElevationPointCloud

    def __call__(self, row_coords, col_coords) -> np.ndarray:
        LAT, LON = np.meshgrid(np.asarray(row_coords, float), np.asarray(col_coords, float),
                               indexing="ij")
        return self.cloud.nearest_altitude(LON, LAT)


def load_elevation(path, columns: tuple = DEFAULT_COLUMNS, delimiter: str = ",",
                   max_malformed: float = MAX_MALFORMED_FRACTION) -> ElevationPointCloud:
    """Parse a delimited elevation file.

    ``columns`` gives the 0-based positions of longitude, latitude and
    altitude. Blank lines and lines starting with ``#`` are ignored.
    Malformed lines are skipped and counted; more than ``max_malformed`` of
    all records being malformed is an error.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ElevationError(f"cannot read {path}: {e}") from e
    ci, cj, ck = columns
    need = max(columns) + 1
    lon, lat, alt = [], [], []
    bad = 0
    total = 0
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        total += 1
        parts = s.split(delimiter)
        try:
            if len(parts) < need:
                raise ValueError
            x, y, z = float(parts[ci]), float(parts[cj]), float(parts[ck])
            if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
                raise ValueError
        except ValueError:
            bad += 1
            continue
        lon.append(x)
        lat.append(y)
        alt.append(z)
    if total == 0:
        raise ElevationError(f"{path} holds no records")
    if bad > max_malformed * total:
        raise ElevationError(f"{bad} of {total} lines malformed in {path}")
    if bad:
        log.warning("skipped %d malformed lines in %s", bad, path)
    return ElevationPointCloud(np.array(lon), np.array(lat), np.array(alt), bad)


def raster_coords(roi, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cell-centre latitudes (rows) and longitudes (columns) of an ``n x n`` raster."""
    lon_lo, lon_hi, lat_lo, lat_hi = roi
    if not (lon_lo < lon_hi and lat_lo < lat_hi) or n < 1:
        raise ElevationError("roi must be a nondegenerate rectangle and n >= 1")
    lat = lat_lo + (lat_hi - lat_lo) / n * (np.arange(n) + 0.5)
    lon = lon_lo + (lon_hi - lon_lo) / n * (np.arange(n) + 0.5)
    return lat, lon


def rasterize(cloud: ElevationPointCloud, roi=None, n: int = 100) -> np.ndarray:
    """``n x n`` raster over ``roi = (lon_lo, lon_hi, lat_lo, lat_hi)``, nearest sample per cell.

    ``roi`` defaults to the cloud's bounds and must intersect them.
    """
    b = cloud.bounds
    if roi is None:
        # pad degenerate extents (e.g. a single point) so the grid is defined
        pc = 0.5 if b[0] == b[1] else 0.0
        pr = 0.5 if b[2] == b[3] else 0.0
        roi = (b[0] - pc, b[1] + pc, b[2] - pr, b[3] + pr)
    roi = tuple(float(x) for x in roi)
    if roi[1] < b[0] or roi[0] > b[1] or roi[3] < b[2] or roi[2] > b[3]:
        raise ElevationError("roi does not intersect the point cloud")
    lat, lon = raster_coords(roi, n)
    return cloud.oracle()(lat, lon)


def ground_truth_peak(raster) -> tuple[int, int]:
    """1-based ``(row, col)`` of the maximum; ties go to the first in row-major order."""
    A = np.asarray(raster, dtype=float)
    if A.size == 0:
        raise ValueError("raster is empty")
    k = int(np.argmax(A))
    return k // A.shape[1] + 1, k % A.shape[1] + 1


def export_raster_csv(raster, path) -> None:
    """Write ``n_rows,n_cols`` then one comma-separated line per row."""
    A = np.asarray(raster, dtype=float)
    lines = [f"{A.shape[0]},{A.shape[1]}"]
    lines += [",".join(repr(float(x)) for x in row) for row in A]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_raster_csv(path) -> np.ndarray:
    rows = Path(path).read_text(encoding="utf-8").strip().splitlines()
    n_r, n_c = (int(x) for x in rows[0].split(","))
    A = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
    if A.shape != (n_r, n_c):
        raise ValueError(f"raster header says {n_r}x{n_c}, body is {A.shape}")
    return A
