"""In-plane rotation from spectral magnitudes.

The DC-centered magnitude is wrapped onto the sphere (radius maps linearly to
colatitude on the northern hemisphere, mirrored to the southern one), so a
planar rotation of the scene becomes a rotation about the polar axis. The
angle is the argmax of the z-restricted SO(3) correlation of the two harmonic
expansions. Magnitudes of real images are point-symmetric, so the answer is
only defined modulo pi.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .sphere import colatitudes, longitudes, so3_correlate, sphere_transform


class NoStructureError(ValueError):
    """The correlation profile is flat: nothing to register against."""


@dataclass(frozen=True, eq=False)
class RotationEstimate:
    angle_mod_pi: float
    candidates: tuple
    angles: np.ndarray
    correlation_profile: np.ndarray
    confidence: float


def wrap_angle(a):
    """Normalize to ``(-pi, pi]``."""
    w = np.pi - np.mod(np.pi - np.asarray(a, dtype=np.float64), 2 * np.pi)
    return float(w) if np.ndim(w) == 0 else w


def rotate_magnitude_90(mag: np.ndarray, quarter_turns: int = 1) -> np.ndarray:
    """Exact counter-clockwise quarter-turn rotation of a DC-centered array about DC.

    Indices are taken cyclically, so the unpaired ``-N/2`` row and column wrap.
    """
    n = mag.shape[0]
    c = n // 2
    i = np.arange(n)
    out = np.array(mag, copy=True)
    for _ in range(quarter_turns % 4):
        # new[ky, kx] = old[-kx, ky]
        out = out[((2 * c - i) % n)[None, :], i[:, None]]
    return out


def max_bandwidth(size: int) -> int:
    """Largest bandwidth whose rim longitude spacing is at least one frequency bin."""
    return int(np.floor(np.pi * (size // 2 - 1)))


def project_to_sphere(mag: np.ndarray, bandwidth: int = 128, dc_radius: float = 2.0,
                      rho_max: float | None = None) -> np.ndarray:
    """Sample ``mag`` on the ``2B x 2B`` equiangular sphere grid.

    Frequency radius ``rho`` maps linearly to colatitude ``beta = (pi/2) rho / rho_max``
    on the northern hemisphere; ``rho_max`` defaults to the Nyquist radius.
    """
    mag = np.asarray(mag, dtype=np.float64)
    n = mag.shape[0]
    if mag.ndim != 2 or mag.shape[1] != n:
        raise ValueError("magnitude must be square")
    if bandwidth < 16:
        raise ValueError("bandwidth must be >= 16")
    if rho_max is None:
        rho_max = n // 2 - 1
    if not 0 < rho_max <= n // 2 - 1:
        raise ValueError(f"rho_max must be in (0, {n // 2 - 1}]")
    if bandwidth > max_bandwidth(n):
        raise ValueError(f"bandwidth {bandwidth} exceeds the angular Nyquist limit "
                         f"{max_bandwidth(n)} of a {n}x{n} magnitude")
    beta = colatitudes(bandwidth)
    phi = longitudes(bandwidth)
    north = beta < np.pi / 2
    rho = np.where(north, beta, np.pi - beta) * rho_max / (np.pi / 2)
    # southern hemisphere reads the point-mirrored half of the spectrum
    ang = phi[None, :] + np.where(north, 0.0, np.pi)[:, None]
    r = rho[:, None]
    ky = r * np.sin(ang) + n // 2
    kx = r * np.cos(ang) + n // 2
    out = kernels.bilinear_sample(mag, ky, kx)
    out[rho < dc_radius, :] = 0.0
    return np.maximum(out, 0.0)


def _interpolate_peak(profile: np.ndarray):
    n = profile.size
    i = int(np.argmax(profile))
    lo, mid, hi = profile[(i - 1) % n], profile[i], profile[(i + 1) % n]
    denom = 2.0 * mid - lo - hi
    offset = 0.5 * (hi - lo) / denom if denom > 0 else 0.0
    return i, float(np.clip(offset, -0.5, 0.5))


def _profile_confidence(profile: np.ndarray, peak: int, guard: int) -> float:
    n = profile.size
    base = profile.min()
    d = np.abs((np.arange(n) - peak + n // 2) % n - n // 2)
    twin = np.abs((np.arange(n) - peak) % n - n // 2)
    far = (d > guard) & (twin > guard)
    top = profile[peak] - base
    if not far.any() or top <= 0:
        return 1.0
    second = profile[far].max() - base
    if second <= 1e-12 * top:
        return 1e6
    return float(np.clip(top / second, 1.0, 1e6))


def profile_peaks(profile: np.ndarray, count: int) -> list:
    """Up to ``count`` interpolated local maxima of a pi-periodic profile, as
    angles in ``[0, pi)``, strongest first."""
    n = profile.size
    half = n // 2
    p = profile[:half]
    is_max = (p >= np.roll(p, 1)) & (p > np.roll(p, -1))
    idx = sorted(np.flatnonzero(is_max), key=lambda i: (-p[i], i))[:count]
    out = []
    for i in idx:
        lo, mid, hi = p[(i - 1) % half], p[i], p[(i + 1) % half]
        denom = 2.0 * mid - lo - hi
        off = float(np.clip(0.5 * (hi - lo) / denom, -0.5, 0.5)) if denom > 0 else 0.0
        out.append(float(np.mod((i + off) * 2 * np.pi / n, np.pi)))
    return out


def _estimate_from_profile(profile: np.ndarray, guard: int = 3) -> RotationEstimate:
    n = profile.size
    mean = profile.mean()
    if not mean > 0 or profile.max() / mean < 1.0 + 1e-6:
        raise NoStructureError("flat rotation correlation profile")
    i, off = _interpolate_peak(profile)
    theta = np.mod((i + off) * 2 * np.pi / n, np.pi)
    if theta >= np.pi:
        theta = 0.0
    cands = (wrap_angle(theta), wrap_angle(theta + np.pi))
    angles = 2 * np.pi * np.arange(n) / n
    return RotationEstimate(float(theta), cands, angles, profile,
                            _profile_confidence(profile, i, guard))


def estimate_rotation(mag_a: np.ndarray, mag_b: np.ndarray, bandwidth: int = 128,
                      rho_max: float | None = None) -> RotationEstimate:
    """Rotation (mod pi) that carries the content of A onto the content of B."""
    if mag_a.shape != mag_b.shape:
        raise ValueError(f"magnitude size mismatch: {mag_a.shape} vs {mag_b.shape}")
    fc = sphere_transform(project_to_sphere(mag_a, bandwidth, rho_max=rho_max))
    gc = sphere_transform(project_to_sphere(mag_b, bandwidth, rho_max=rho_max))
    return _estimate_from_profile(so3_correlate(fc, gc))


def angular_profile(mag: np.ndarray, angular_bins: int, dc_radius: float = 2.0) -> np.ndarray:
    """Radius-weighted integral of ``mag`` along rays, one value per angle bin."""
    n = mag.shape[0]
    radii = np.arange(int(np.ceil(dc_radius)), n // 2)
    psi = 2 * np.pi * np.arange(angular_bins) / angular_bins
    ky = radii[:, None] * np.sin(psi)[None, :] + n // 2
    kx = radii[:, None] * np.cos(psi)[None, :] + n // 2
    samples = kernels.bilinear_sample(np.asarray(mag, dtype=np.float64), ky, kx)
    return (radii[:, None] * samples).sum(axis=0)


def estimate_rotation_polar_oracle(mag_a: np.ndarray, mag_b: np.ndarray,
                                   angular_bins: int = 256) -> RotationEstimate:
    """Baseline: circular correlation of radially integrated angular profiles."""
    if mag_a.shape != mag_b.shape:
        raise ValueError(f"magnitude size mismatch: {mag_a.shape} vs {mag_b.shape}")
    pa = angular_profile(mag_a, angular_bins)
    pb = angular_profile(mag_b, angular_bins)
    # c[n] = sum_k pa[k - n] pb[k]
    corr = np.fft.ifft(np.fft.fft(pb) * np.conj(np.fft.fft(pa))).real
    return _estimate_from_profile(corr)
