# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror :mod:`fs2d._fallback` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, exp, ceil, fmod, M_PI

cnp.import_array()


cdef inline double _at(double[:, ::1] img, Py_ssize_t r, Py_ssize_t c,
                       Py_ssize_t nr, Py_ssize_t nc) nogil:
    if r < 0 or r >= nr or c < 0 or c >= nc:
        return 0.0
    return img[r, c]


def bilinear_sample(image, rows, cols):
    cdef double[:, ::1] img = np.ascontiguousarray(image, dtype=np.float64)
    r_arr = np.ascontiguousarray(rows, dtype=np.float64)
    c_arr = np.ascontiguousarray(cols, dtype=np.float64)
    shape = r_arr.shape
    cdef double[::1] rr = r_arr.reshape(-1)
    cdef double[::1] cc = c_arr.reshape(-1)
    out_arr = np.empty(rr.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t nr = img.shape[0], nc = img.shape[1]
    cdef Py_ssize_t i, r0, c0
    cdef double fr, fc, r, c
    with nogil:
        for i in range(rr.shape[0]):
            r = rr[i]
            c = cc[i]
            if r <= -1.0 or c <= -1.0 or r >= nr or c >= nc:
                out[i] = 0.0
                continue
            r0 = <Py_ssize_t>floor(r)
            c0 = <Py_ssize_t>floor(c)
            fr = r - r0
            fc = c - c0
            out[i] = ((1.0 - fr) * ((1.0 - fc) * _at(img, r0, c0, nr, nc)
                                    + fc * _at(img, r0, c0 + 1, nr, nc))
                      + fr * ((1.0 - fc) * _at(img, r0 + 1, c0, nr, nc)
                              + fc * _at(img, r0 + 1, c0 + 1, nr, nc)))
    return out_arr.reshape(shape)


def polar_sample(intensities, azimuths, double range_resolution, phi, rho,
                 double min_range=0.0):
    cdef double[:, ::1] img = np.ascontiguousarray(intensities, dtype=np.float64)
    cdef double[::1] az = np.ascontiguousarray(azimuths, dtype=np.float64)
    p_arr = np.ascontiguousarray(phi, dtype=np.float64)
    shape = p_arr.shape
    cdef double[::1] pp = p_arr.reshape(-1)
    cdef double[::1] rh = np.ascontiguousarray(rho, dtype=np.float64).reshape(-1)
    out_arr = np.zeros(pp.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t na = img.shape[0], nb = img.shape[1]
    cdef Py_ssize_t i, lo, hi, mid, k0, k1, r0, r1
    cdef double two_pi = 2.0 * M_PI
    cdef double p, r, a0, a1, t, fr, v0, v1
    cdef double max_index = nb - 1
    with nogil:
        for i in range(pp.shape[0]):
            if rh[i] < min_range:
                continue
            r = rh[i] / range_resolution
            if r > max_index:
                continue
            p = fmod(pp[i], two_pi)
            if p < 0:
                p = p + two_pi
            # last azimuth <= p
            lo = 0
            hi = na
            while lo < hi:
                mid = (lo + hi) // 2
                if az[mid] <= p:
                    lo = mid + 1
                else:
                    hi = mid
            k0 = lo - 1
            if k0 < 0:
                k0 = na - 1
                a0 = az[k0] - two_pi
            else:
                a0 = az[k0]
            k1 = k0 + 1
            if k1 >= na:
                k1 = 0
                a1 = az[0] + two_pi
            else:
                a1 = az[k1]
            if a1 > a0:
                t = (p - a0) / (a1 - a0)
            else:
                t = 0.0
            r0 = <Py_ssize_t>floor(r)
            fr = r - r0
            r1 = r0 + 1
            if r1 > nb - 1:
                r1 = nb - 1
            v0 = (1.0 - fr) * img[k0, r0] + fr * img[k0, r1]
            v1 = (1.0 - fr) * img[k1, r0] + fr * img[k1, r1]
            out[i] = (1.0 - t) * v0 + t * v1
    return out_arr.reshape(shape)


def greedy_peaks(surface, int k, int radius, double rel_threshold, bint wrap=True):
    cdef double[:, ::1] s = np.ascontiguousarray(surface, dtype=np.float64)
    cdef Py_ssize_t nr = s.shape[0], nc = s.shape[1]
    mask_arr = np.zeros((nr, nc), dtype=np.uint8)
    cdef unsigned char[:, ::1] mask = mask_arr
    cdef Py_ssize_t i, j, bi, bj, di, dj, ri, rj
    cdef double best, first = 0.0
    cdef bint found
    peaks = []
    while len(peaks) < k:
        found = False
        best = 0.0
        bi = 0
        bj = 0
        for i in range(nr):
            for j in range(nc):
                if mask[i, j]:
                    continue
                if not found or s[i, j] > best:
                    best = s[i, j]
                    bi = i
                    bj = j
                    found = True
        if not found or best <= 0.0:
            break
        if peaks and best < rel_threshold * first:
            break
        if not peaks:
            first = best
        peaks.append((int(bi), int(bj), float(best)))
        for di in range(-radius, radius + 1):
            ri = bi + di
            if wrap:
                ri = ri % nr
                if ri < 0:
                    ri += nr
            elif ri < 0 or ri >= nr:
                continue
            for dj in range(-radius, radius + 1):
                rj = bj + dj
                if wrap:
                    rj = rj % nc
                    if rj < 0:
                        rj += nc
                elif rj < 0 or rj >= nc:
                    continue
                mask[ri, rj] = 1
    return peaks


def splat_max(out, az_index, range_index, amplitude, double az_sigma,
              double range_sigma):
    cdef double[:, ::1] o = out
    cdef double[::1] ai = np.ascontiguousarray(az_index, dtype=np.float64)
    cdef double[::1] ri = np.ascontiguousarray(range_index, dtype=np.float64)
    cdef double[::1] amp = np.ascontiguousarray(amplitude, dtype=np.float64)
    cdef Py_ssize_t na = o.shape[0], nb = o.shape[1]
    cdef Py_ssize_t n, a, b, aa, a_lo, a_hi, b_lo, b_hi
    cdef int wa = <int>ceil(3.0 * az_sigma)
    cdef int wb = <int>ceil(3.0 * range_sigma)
    cdef double wgt_a, v, da, db
    with nogil:
        for n in range(ai.shape[0]):
            a_lo = <Py_ssize_t>floor(ai[n] + 0.5) - wa
            a_hi = a_lo + 2 * wa
            b_lo = <Py_ssize_t>floor(ri[n] + 0.5) - wb
            b_hi = b_lo + 2 * wb
            if b_lo < 0:
                b_lo = 0
            if b_hi > nb - 1:
                b_hi = nb - 1
            for a in range(a_lo, a_hi + 1):
                da = a - ai[n]
                wgt_a = amp[n] * exp(-0.5 * da * da / (az_sigma * az_sigma))
                aa = a % na
                if aa < 0:
                    aa += na
                for b in range(b_lo, b_hi + 1):
                    db = b - ri[n]
                    v = wgt_a * exp(-0.5 * db * db / (range_sigma * range_sigma))
                    if v > o[aa, b]:
                        o[aa, b] = v
