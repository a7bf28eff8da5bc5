"""Pairwise scan registration.

Pipeline: grid both scans, take (log-compressed) magnitude spectra, estimate
the rotation modulo pi on the sphere, then verify rotation candidates: rotate
grid B back, phase-correlate against grid A, and keep the candidate whose
translation peak is highest. The candidates are the strongest few peaks of
the rotation profile, each tried at ``theta`` and ``theta + pi``. Peak height
is read from a Gaussian low-passed copy of the whitened surface, which is
smooth in both angle and sub-cell offset. Every distinct translation peak
becomes a motion hypothesis; the strongest is the ego-motion.

The reported motion is the pose of scan B's sensor in scan A's frame (see
:mod:`fs2d.geometry`). For a secondary peak the motion is the ego-motion that
would explain that structure if it were static, so an object that moved by
``d`` (in A's frame) shows up at ``ego - d``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import RigidMotion2D, normalize_angle
from .grid import (CartesianGrid, GridConfig, PolarScan, despeckle, polar_to_cartesian,
                   preprocess, rotate_grid)
from .rotation import RotationEstimate, estimate_rotation, profile_peaks
from .spectral import _correlate_spectra, gaussian_taper, index_to_shift

CONFIDENCE_CLAMP = 1e6


class GeometryMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class RegistrationConfig:
    grid: GridConfig = GridConfig()
    bandwidth: int = 128
    tau: float = 1.5
    nms_k: int = 5
    nms_radius: int = 3
    rel_threshold: float = 0.3
    subcell: bool = False
    spectrum: str = "log"
    rotation_candidates: int = 3
    refine_rotation: bool = True
    taper_sigma: float = 0.15

    def __post_init__(self):
        if self.nms_k < 1 or self.nms_radius < 1:
            raise ValueError("nms_k and nms_radius must be >= 1")
        if not 0.0 < self.rel_threshold <= 1.0:
            raise ValueError("rel_threshold must be in (0, 1]")
        if self.tau < 1.0:
            raise ValueError("tau must be >= 1")
        if self.spectrum not in ("log", "linear"):
            raise ValueError("spectrum must be 'log' or 'linear'")
        if self.rotation_candidates < 1:
            raise ValueError("rotation_candidates must be >= 1")
        if not self.taper_sigma > 0:
            raise ValueError("taper_sigma must be > 0")


@dataclass(frozen=True)
class MotionHypothesis:
    motion: RigidMotion2D
    strength: float
    rank: int
    shift: tuple = (0, 0)


@dataclass(frozen=True, eq=False)
class RegistrationResult:
    ego_motion: RigidMotion2D
    confidence: float
    is_outlier: bool
    hypotheses: list
    rotation_confidence: float
    rotation: RotationEstimate | None = None
    surface: np.ndarray | None = field(default=None, repr=False)


def extract_peaks(surface: np.ndarray, k: int = 5, nms_radius: int = 3,
                  rel_threshold: float = 0.3) -> list:
    """Greedy cyclic NMS; returns ``[((row_shift, col_shift), strength), ...]``."""
    if k < 1 or nms_radius < 1 or not 0.0 < rel_threshold <= 1.0:
        raise ValueError("need k >= 1, nms_radius >= 1, 0 < rel_threshold <= 1")
    n = surface.shape[0]
    peaks = kernels.greedy_peaks(surface, int(k), int(nms_radius), float(rel_threshold), True)
    return [(index_to_shift((i, j), n), v) for i, j, v in peaks]


def confidence_score(surface: np.ndarray, nms_radius: int = 3) -> float:
    """Peak over strongest value outside its Chebyshev ``nms_radius`` neighborhood.

    Returns 1 for flat or all-zero surfaces and clamps at ``CONFIDENCE_CLAMP``
    when nothing positive survives outside the neighborhood.
    """
    s = np.asarray(surface, dtype=np.float64)
    i, j = np.unravel_index(int(np.argmax(s)), s.shape)
    top = s[i, j]
    if not top > 0:
        return 1.0
    nr, nc = s.shape
    rows = np.arange(i - nms_radius, i + nms_radius + 1) % nr
    cols = np.arange(j - nms_radius, j + nms_radius + 1) % nc
    outside = np.ones(s.shape, dtype=bool)
    outside[np.ix_(rows, cols)] = False
    if not outside.any():
        return CONFIDENCE_CLAMP
    second = s[outside].max()
    if second <= top / CONFIDENCE_CLAMP:
        return CONFIDENCE_CLAMP
    return float(max(top / second, 1.0))


def _parabola_offset(lo: float, mid: float, hi: float) -> float:
    denom = 2.0 * mid - lo - hi
    if denom <= 0:
        return 0.0
    return float(np.clip(0.5 * (hi - lo) / denom, -0.5, 0.5))


def refine_subcell(surface: np.ndarray, peak, wrap: bool = True) -> tuple:
    """Fractional peak index from separable 3-point parabola fits.

    ``peak`` is a surface index ``(row, col)``. With ``wrap=False`` a peak on
    the border is returned unchanged.
    """
    s = np.asarray(surface, dtype=np.float64)
    nr, nc = s.shape
    i, j = int(peak[0]), int(peak[1])
    if not wrap and (i in (0, nr - 1) or j in (0, nc - 1)):
        return float(i), float(j)
    di = _parabola_offset(s[(i - 1) % nr, j], s[i, j], s[(i + 1) % nr, j])
    dj = _parabola_offset(s[i, (j - 1) % nc], s[i, j], s[i, (j + 1) % nc])
    return i + di, j + dj


def _climb(surface: np.ndarray, peak, steps: int = 2) -> tuple:
    """Move to the largest cyclic 8-neighbor until a local maximum is reached."""
    n0, n1 = surface.shape
    i, j = peak
    for _ in range(steps):
        rows = [(i + d) % n0 for d in (-1, 0, 1)]
        cols = [(j + d) % n1 for d in (-1, 0, 1)]
        block = surface[np.ix_(rows, cols)]
        a, b = np.unravel_index(int(np.argmax(block)), block.shape)
        if (a, b) == (1, 1):
            break
        i, j = rows[a], cols[b]
    return i, j


def grid_scan(scan: PolarScan, cfg: GridConfig) -> CartesianGrid:
    """Despeckle, grid and preprocess one sweep."""
    return preprocess(polar_to_cartesian(despeckle(scan) if cfg.despeckle else scan, cfg), cfg)


def shift_to_motion(shift, theta: float, cell_size: float) -> RigidMotion2D:
    # rotated B ~ roll(A, s)  =>  B's origin sits at -s cells in A's frame
    return RigidMotion2D(-shift[1] * cell_size, -shift[0] * cell_size, theta)


def _conditioned(spectrum: np.ndarray, mode: str) -> np.ndarray:
    mag = np.abs(np.fft.fftshift(spectrum))
    return np.log1p(mag) if mode == "log" else mag


def _refine_rotation(trial, best, step: float):
    """Parabolic fit of the translation-peak height over ``theta +- step``."""
    peak, theta = best[0], best[1]
    lo = trial(normalize_angle(theta - step))[0]
    hi = trial(normalize_angle(theta + step))[0]
    off = _parabola_offset(lo, peak, hi)
    if off == 0.0:
        return best
    cand = trial(normalize_angle(theta + off * step))
    return cand if cand[0] >= peak else best


def register_grids(ga: CartesianGrid, gb: CartesianGrid,
                   cfg: RegistrationConfig = RegistrationConfig()) -> RegistrationResult:
    if ga.values.shape != gb.values.shape or not np.isclose(ga.cell_size, gb.cell_size):
        raise GeometryMismatchError("grids differ in size or cell size")
    fa = np.fft.fft2(ga.values)
    fb = np.fft.fft2(gb.values)
    rot = estimate_rotation(_conditioned(fa, cfg.spectrum), _conditioned(fb, cfg.spectrum),
                            cfg.bandwidth)

    taper = gaussian_taper(fa.shape[0], cfg.taper_sigma)

    def trial(theta):
        fr = np.fft.fft2(rotate_grid(gb, theta).values)
        smooth = _correlate_spectra(fa, fr, taper)
        return float(smooth.max()), theta, _correlate_spectra(fa, fr), smooth

    best = None
    angles = profile_peaks(rot.correlation_profile, cfg.rotation_candidates) or [rot.angle_mod_pi]
    for angle in angles:
        for cand in (angle, angle + np.pi):
            # estimate is B-content relative to A-content; the sensor turned the other way
            t = trial(normalize_angle(-cand))
            if best is None or t[0] > best[0]:
                best = t
    if cfg.refine_rotation:
        best = _refine_rotation(trial, best, np.pi / cfg.bandwidth)
    _, theta, surface, smooth = best

    n = surface.shape[0]
    # the whitened peak is sinc-like, which biases a parabola fit and makes the
    # argmax unstable between neighbors; refine on the low-passed copy, whose
    # peak is close to a Gaussian, then round unless fractional shifts were asked for
    # NMS on the low-passed copy too: single-cell spikes from chance matches
    # between unrelated structure do not survive the taper
    peaks = kernels.greedy_peaks(smooth, cfg.nms_k, cfg.nms_radius, cfg.rel_threshold, True)
    if not peaks:
        i, j = np.unravel_index(int(np.argmax(smooth)), smooth.shape)
        peaks = [(int(i), int(j), float(smooth[i, j]))]
    hyps = []
    for rank, (i, j, v) in enumerate(peaks, start=1):
        fi, fj = refine_subcell(smooth, _climb(smooth, (i, j)))
        frac = ((fi + n // 2) % n - n // 2, (fj + n // 2) % n - n // 2)
        cell = index_to_shift((int(np.floor(fi + 0.5)), int(np.floor(fj + 0.5))), n)
        shift = frac if cfg.subcell else cell
        hyps.append(MotionHypothesis(shift_to_motion(shift, theta, ga.cell_size), v, rank, cell))
    conf = confidence_score(surface, cfg.nms_radius)
    return RegistrationResult(hyps[0].motion, conf, conf < cfg.tau, hyps,
                              rot.confidence, rot, surface)


def register(scan_a: PolarScan, scan_b: PolarScan,
             cfg: RegistrationConfig = RegistrationConfig()) -> RegistrationResult:
    """Estimate the rigid motion of the sensor from ``scan_a`` to ``scan_b``."""
    if not scan_a.same_geometry(scan_b):
        raise GeometryMismatchError("scans do not share azimuth/range geometry")
    return register_grids(grid_scan(scan_a, cfg.grid), grid_scan(scan_b, cfg.grid), cfg)
