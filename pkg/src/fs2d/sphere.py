"""Spherical harmonic analysis on the equiangular ``2B x 2B`` grid.

Samples live at colatitude ``beta_j = pi*(2j+1)/(4B)`` and longitude
``phi_k = pi*k/B``. The forward transform uses the Driscoll-Healy quadrature
weights, which integrate band-limited products exactly, so functions with
degree ``< B`` round-trip to machine precision.

Coefficients are stored as a complex ``(B, 2B-1)`` array ``c[l, m + B - 1]``
for the orthonormal harmonics ``Y_l^m = P_l^m(cos beta) exp(i m phi)`` with the
Condon-Shortley phase; entries with ``|m| > l`` are zero.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def colatitudes(bandwidth: int) -> np.ndarray:
    return np.pi * (2 * np.arange(2 * bandwidth) + 1) / (4 * bandwidth)


def longitudes(bandwidth: int) -> np.ndarray:
    return np.pi * np.arange(2 * bandwidth) / bandwidth


@lru_cache(maxsize=8)
def quadrature_weights(bandwidth: int) -> np.ndarray:
    """Weights ``w_j`` with ``sum_j w_j g(beta_j) == int_0^pi g(beta) sin(beta) dbeta``."""
    b = bandwidth
    j = np.arange(2 * b)[:, None]
    k = np.arange(b)[None, :]
    inner = np.sin((2 * j + 1) * (2 * k + 1) * np.pi / (4 * b)) / (2 * k + 1)
    w = (2.0 / b) * np.sin(np.pi * (2 * j[:, 0] + 1) / (4 * b)) * inner.sum(axis=1)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=8)
def legendre_table(bandwidth: int) -> np.ndarray:
    """Normalized associated Legendre values ``P[m, l, j]`` for ``0 <= m <= l < B``."""
    b = bandwidth
    beta = colatitudes(b)
    x, s = np.cos(beta), np.sin(beta)
    table = np.zeros((b, b, 2 * b))
    pmm = np.full(2 * b, 1.0 / np.sqrt(4.0 * np.pi))
    for m in range(b):
        if m > 0:
            pmm = -np.sqrt((2 * m + 1) / (2.0 * m)) * s * pmm
        table[m, m] = pmm
        if m + 1 < b:
            table[m, m + 1] = np.sqrt(2 * m + 3.0) * x * pmm
        for l in range(m + 2, b):
            a = np.sqrt((4.0 * l * l - 1) / (l * l - m * m))
            a_prev = np.sqrt((4.0 * (l - 1) ** 2 - 1) / ((l - 1) ** 2 - m * m))
            table[m, l] = a * (x * table[m, l - 1] - table[m, l - 2] / a_prev)
    table.setflags(write=False)
    return table


def _check_samples(samples: np.ndarray) -> int:
    if samples.ndim != 2 or samples.shape[0] != samples.shape[1] or samples.shape[0] % 2:
        raise ValueError(f"expected a 2B x 2B sample grid, got {samples.shape}")
    return samples.shape[0] // 2


def sphere_transform(samples: np.ndarray) -> np.ndarray:
    """Forward spherical harmonic transform up to degree ``B - 1``."""
    samples = np.asarray(samples)
    b = _check_samples(samples)
    table = legendre_table(b)
    w = quadrature_weights(b)
    # F[j, m] = int f(beta_j, phi) exp(-i m phi) dphi, exact for |m| < 2B
    four = np.fft.fft(samples, axis=1) * (np.pi / b)
    ms = np.arange(b)
    weighted = w[:, None] * four[:, ms]                       # (2B, B) for m >= 0
    pos = np.einsum("mlj,jm->lm", table, weighted)             # (B, B)
    coeffs = np.zeros((b, 2 * b - 1), dtype=np.complex128)
    coeffs[:, b - 1:] = pos
    if np.isrealobj(samples):
        sign = (-1.0) ** ms[1:]
        coeffs[:, :b - 1] = (sign * np.conj(pos[:, 1:]))[:, ::-1]
    else:
        neg = w[:, None] * four[:, (-ms[1:]) % (2 * b)]
        coeffs[:, :b - 1] = (np.einsum("mlj,jm->lm", table[1:], neg)
                             * (-1.0) ** ms[1:])[:, ::-1]
    return coeffs


def inverse_sphere_transform(coeffs: np.ndarray, real: bool = True) -> np.ndarray:
    """Synthesize ``2B x 2B`` samples from ``(B, 2B-1)`` coefficients."""
    b = coeffs.shape[0]
    if coeffs.shape != (b, 2 * b - 1):
        raise ValueError(f"coefficient array must be (B, 2B-1), got {coeffs.shape}")
    table = legendre_table(b)
    ms = np.arange(b)
    full = np.zeros((2 * b, 2 * b), dtype=np.complex128)
    full[:, ms] = np.einsum("mlj,lm->jm", table, coeffs[:, b - 1:])
    neg = coeffs[:, :b - 1][:, ::-1] * (-1.0) ** ms[1:]       # m = -1 .. -(B-1)
    full[:, (-ms[1:]) % (2 * b)] = np.einsum("mlj,lm->jm", table[1:], neg)
    out = np.fft.ifft(full, axis=1) * (2 * b)
    return out.real if real else out


def rotate_coefficients_z(coeffs: np.ndarray, angle: float) -> np.ndarray:
    """Coefficients of ``f(beta, phi - angle)``: multiply by ``exp(-i m angle)``."""
    b = coeffs.shape[0]
    m = np.arange(-(b - 1), b)
    return coeffs * np.exp(-1j * m * angle)[None, :]


def so3_correlate(fc: np.ndarray, gc: np.ndarray) -> np.ndarray:
    """``C(gamma) = <R_z(gamma) f, g>`` on ``gamma_n = pi*n/B``, ``n < 2B``.

    This is the SO(3) correlation restricted to Euler angles
    ``(alpha, beta, gamma) = (0, 0, gamma)``, where the Wigner matrices reduce
    to ``D^l_{mm'} = delta_{mm'} exp(-i m gamma)``. The argmax is the rotation
    about the polar axis that carries ``f`` onto ``g``.
    """
    if fc.shape != gc.shape:
        raise ValueError(f"bandwidth mismatch: {fc.shape} vs {gc.shape}")
    b = fc.shape[0]
    h = np.sum(fc * np.conj(gc), axis=0)                      # per order m
    slots = np.zeros(2 * b, dtype=np.complex128)
    slots[np.arange(-(b - 1), b) % (2 * b)] = h
    return np.fft.fft(slots).real
