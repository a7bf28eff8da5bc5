"""2-D DFT helpers and whitened phase correlation.

Normalization: ``dft2`` is the unnormalized forward transform
``X[k] = sum_n x[n] exp(-2j*pi*k.n/N)`` (numpy's default), so Parseval reads
``sum |X|^2 == N*N * sum x^2`` for an ``N x N`` grid. Spectra are returned
DC-centered (``fftshift``): frequency ``(ky, kx)`` lives at index
``(ky + N/2, kx + N/2)``.

Correlation surfaces are *not* shifted: index ``(i, j)`` is the cyclic shift
``(i, j)``, reported in ``[-N/2, N/2)`` by :func:`index_to_shift`.
"""
from __future__ import annotations

import numpy as np

from .grid import CartesianGrid


def _values(grid) -> np.ndarray:
    return grid.values if isinstance(grid, CartesianGrid) else np.asarray(grid, dtype=np.float64)


def dft2(grid) -> np.ndarray:
    return np.fft.fftshift(np.fft.fft2(_values(grid)))


def magnitude(spec: np.ndarray) -> np.ndarray:
    return np.abs(spec)


def cross_power(a: np.ndarray, b: np.ndarray, eps: float | None = None) -> np.ndarray:
    """Whitened cross-power ``A * conj(B) / max(|A * conj(B)|, eps)``.

    ``eps`` defaults to ``1e-12`` times the largest product modulus, which
    keeps bins zeroed by thresholding from blowing up.
    """
    if a.shape != b.shape:
        raise ValueError(f"spectrum size mismatch: {a.shape} vs {b.shape}")
    prod = a * np.conj(b)
    mod = np.abs(prod)
    if eps is None:
        eps = 1e-12 * mod.max() if mod.size else 0.0
    eps = max(float(eps), np.finfo(np.float64).tiny)
    return prod / np.maximum(mod, eps)


def phase_correlate(a, b) -> np.ndarray:
    """Correlation surface whose peak sits at the cyclic shift ``s`` with ``b ~ roll(a, s)``."""
    va, vb = _values(a), _values(b)
    if va.shape != vb.shape:
        raise ValueError(f"grid size mismatch: {va.shape} vs {vb.shape}")
    if isinstance(a, CartesianGrid) and isinstance(b, CartesianGrid) \
            and not np.isclose(a.cell_size, b.cell_size):
        raise ValueError("grids have different cell sizes")
    return _correlate_spectra(np.fft.fft2(va), np.fft.fft2(vb))


def gaussian_taper(size: int, sigma: float) -> np.ndarray:
    """Unshifted low-pass ``exp(-|k|^2 / (2 sigma^2))`` with ``k`` in cycles per cell."""
    k = np.fft.fftfreq(size)
    return np.exp(-(k[:, None] ** 2 + k[None, :] ** 2) / (2.0 * sigma ** 2))


def _correlate_spectra(fa: np.ndarray, fb: np.ndarray, taper: np.ndarray | None = None) -> np.ndarray:
    # unshifted spectra; cross_power is elementwise so shift order is irrelevant
    cp = cross_power(fb, fa)
    if taper is not None:
        cp = cp * taper
    return np.real(np.fft.ifft2(cp))


def index_to_shift(index, size) -> tuple:
    """Map surface indices to signed shifts in ``[-size/2, size/2)``."""
    return tuple(int((i + size // 2) % size - size // 2) for i in index)


def argmax_shift(surface: np.ndarray) -> tuple:
    """Integer shift of the global maximum (lowest row-major index on ties)."""
    idx = np.unravel_index(int(np.argmax(surface)), surface.shape)
    return index_to_shift(idx, surface.shape[0])


def fourier_shift(values: np.ndarray, shift) -> np.ndarray:
    """Cyclic sub-cell shift via a spectral phase ramp (exact for band-limited input)."""
    n0, n1 = values.shape
    k0 = np.fft.fftfreq(n0)[:, None]
    k1 = np.fft.fftfreq(n1)[None, :]
    ramp = np.exp(-2j * np.pi * (k0 * shift[0] + k1 * shift[1]))
    return np.real(np.fft.ifft2(np.fft.fft2(values) * ramp))
