"""Polar radar sweeps to Cartesian intensity grids.

Frame conventions used throughout the package:

* world/sensor frame is right-handed with ``x`` forward and ``y`` left;
* azimuth 0 points along ``+x`` and increases counter-clockwise (towards ``+y``);
* grid cell ``(i, j)`` (row, column) has its center at
  ``x = (j - size/2) * cell_size``, ``y = (i - size/2) * cell_size``, so the
  sensor sits on cell ``(size/2, size/2)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import rank_filter

from . import kernels

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class PolarScan:
    """One radar sweep: ``intensities[azimuth, range_bin]``.

    Range bin ``k`` is centred at ``k * range_resolution`` meters.
    """

    azimuth_angles: np.ndarray
    intensities: np.ndarray
    range_resolution: float
    timestamp: float = 0.0

    def __post_init__(self):
        az = np.ascontiguousarray(self.azimuth_angles, dtype=np.float64)
        inten = np.ascontiguousarray(self.intensities, dtype=np.float64)
        object.__setattr__(self, "azimuth_angles", az)
        object.__setattr__(self, "intensities", inten)
        object.__setattr__(self, "range_resolution", float(self.range_resolution))
        object.__setattr__(self, "timestamp", float(self.timestamp))
        if az.ndim != 1 or az.size == 0:
            raise ValueError("azimuth_angles must be a non-empty 1-D array")
        if inten.ndim != 2 or inten.shape[0] != az.size or inten.shape[1] == 0:
            raise ValueError(
                f"intensities shape {inten.shape} does not match {az.size} azimuths")
        if not np.all(np.isfinite(inten)) or np.any(inten < 0):
            raise ValueError("intensities must be finite and non-negative")
        if np.any(az < 0) or np.any(az >= TWO_PI) or np.any(np.diff(az) <= 0):
            raise ValueError("azimuth_angles must be strictly ascending in [0, 2*pi)")
        if not self.range_resolution > 0:
            raise ValueError("range_resolution must be positive")

    @property
    def azimuth_count(self) -> int:
        return self.intensities.shape[0]

    @property
    def range_bin_count(self) -> int:
        return self.intensities.shape[1]

    @property
    def max_range(self) -> float:
        return (self.range_bin_count - 1) * self.range_resolution

    def same_geometry(self, other: "PolarScan", atol: float = 1e-6) -> bool:
        return (self.intensities.shape == other.intensities.shape
                and abs(self.range_resolution - other.range_resolution) <= atol
                and np.allclose(self.azimuth_angles, other.azimuth_angles, atol=atol))

    def __eq__(self, other):
        if not isinstance(other, PolarScan):
            return NotImplemented
        return (self.range_resolution == other.range_resolution
                and self.timestamp == other.timestamp
                and np.array_equal(self.azimuth_angles, other.azimuth_angles)
                and np.array_equal(self.intensities, other.intensities))


@dataclass(frozen=True)
class GridConfig:
    grid_size: int = 256
    cell_size: float = 0.75
    noise_floor: float = 0.05
    window: str = "hann"
    log_scale: bool = False
    min_range: float = 0.0
    despeckle: bool = True

    def __post_init__(self):
        if self.grid_size < 32 or self.grid_size % 2:
            raise ValueError("grid_size must be even and >= 32")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        if not 0.0 <= self.noise_floor <= 1.0:
            raise ValueError("noise_floor must be in [0, 1]")
        if self.window not in ("none", "hann"):
            raise ValueError("window must be 'none' or 'hann'")
        if self.min_range < 0:
            raise ValueError("min_range must be non-negative")


@dataclass(frozen=True, eq=False)
class CartesianGrid:
    values: np.ndarray
    cell_size: float
    warnings: tuple = field(default=())

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("grid values must be a square matrix")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("grid values must be finite and non-negative")
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def extent(self) -> float:
        return self.size * self.cell_size

    def with_values(self, values) -> "CartesianGrid":
        return CartesianGrid(values, self.cell_size, self.warnings)


def cell_coordinates(size: int, cell_size: float = 1.0):
    """Metric ``(x, y)`` of every cell center, each shaped ``(size, size)``."""
    idx = (np.arange(size) - size // 2) * cell_size
    y, x = np.meshgrid(idx, idx, indexing="ij")
    return x, y


def coverage_gap(azimuths: np.ndarray) -> float:
    """Largest azimuth step (with wrap) divided by the median step."""
    az = np.asarray(azimuths, dtype=np.float64)
    if az.size < 2:
        return np.inf
    steps = np.diff(np.append(az, az[0] + TWO_PI))
    return float(steps.max() / np.median(steps))


def polar_to_cartesian(scan: PolarScan, cfg: GridConfig = GridConfig()) -> CartesianGrid:
    """Bilinear (azimuth x range) resampling of ``scan`` onto a square grid."""
    x, y = cell_coordinates(cfg.grid_size, cfg.cell_size)
    rho = np.hypot(x, y)
    phi = np.mod(np.arctan2(y, x), TWO_PI)
    values = kernels.polar_sample(scan.intensities, scan.azimuth_angles,
                                  scan.range_resolution, phi, rho, cfg.min_range)
    notes = ()
    gap = coverage_gap(scan.azimuth_angles)
    if gap > 2.0:
        msg = f"degraded azimuth coverage: largest gap is {gap:.1f}x the median step"
        log.warning(msg)
        notes = (msg,)
    return CartesianGrid(np.maximum(values, 0.0), cfg.cell_size, notes)


def despeckle(scan: PolarScan) -> PolarScan:
    """Clip every bin to the second-largest of its 8 (azimuth, range) neighbors.

    Isolated saturated bins, and pairs of them, drop to the local background
    while extended returns keep their level. Azimuth wraps; range repeats its
    edge values.
    """
    v = scan.intensities
    if v.shape[0] < 3:
        return scan
    padded = np.concatenate([v[-1:], v, v[:1]])
    ring = np.ones((3, 3), dtype=bool)
    ring[1, 1] = False
    second = rank_filter(padded, -2, footprint=ring, mode="nearest")[1:-1]
    return PolarScan(scan.azimuth_angles, np.minimum(v, second), scan.range_resolution,
                     scan.timestamp)


def hann_window(size: int) -> np.ndarray:
    """Radial Hann taper centred on the sensor cell, zero beyond ``size/2`` cells."""
    x, y = cell_coordinates(size)
    r = np.hypot(x, y) / (size / 2)
    return np.where(r < 1.0, 0.5 * (1.0 + np.cos(np.pi * np.minimum(r, 1.0))), 0.0)


def preprocess(grid: CartesianGrid, cfg: GridConfig = GridConfig()) -> CartesianGrid:
    """Threshold, optionally log-compress, and apodize a grid."""
    v = grid.values.copy()
    peak = v.max() if v.size else 0.0
    if peak > 0:
        v[v < cfg.noise_floor * peak] = 0.0
    if cfg.log_scale:
        v = np.log1p(v)
    if cfg.window == "hann":
        v *= hann_window(grid.size)
    return grid.with_values(v)


def rotate_grid(grid: CartesianGrid, angle: float) -> CartesianGrid:
    """Rotate grid content counter-clockwise by ``angle`` about the sensor cell."""
    n = grid.size
    x, y = cell_coordinates(n)
    c, s = np.cos(angle), np.sin(angle)
    src_x = c * x + s * y
    src_y = -s * x + c * y
    out = kernels.bilinear_sample(grid.values, src_y + n // 2, src_x + n // 2)
    return grid.with_values(np.maximum(out, 0.0))
