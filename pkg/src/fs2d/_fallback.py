"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Both backends must agree to floating-point rounding; ``tests/test_kernels.py``
runs them side by side.
"""
import numpy as np


def _gather(img, r, c):
    nr, nc = img.shape
    ok = (r >= 0) & (r < nr) & (c >= 0) & (c < nc)
    out = np.zeros(r.shape, dtype=np.float64)
    out[ok] = img[r[ok], c[ok]]
    return out


def bilinear_sample(image, rows, cols):
    """Bilinear lookup with zero padding outside the image."""
    img = np.asarray(image, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.float64)
    cols = np.asarray(cols, dtype=np.float64)
    nr, nc = img.shape
    inside = (rows > -1.0) & (cols > -1.0) & (rows < nr) & (cols < nc)
    r = np.where(inside, rows, 0.0)
    c = np.where(inside, cols, 0.0)
    r0 = np.floor(r).astype(np.intp)
    c0 = np.floor(c).astype(np.intp)
    fr = r - r0
    fc = c - c0
    out = ((1.0 - fr) * ((1.0 - fc) * _gather(img, r0, c0) + fc * _gather(img, r0, c0 + 1))
           + fr * ((1.0 - fc) * _gather(img, r0 + 1, c0) + fc * _gather(img, r0 + 1, c0 + 1)))
    return np.where(inside, out, 0.0)


def polar_sample(intensities, azimuths, range_resolution, phi, rho, min_range=0.0):
    """Bilinear (azimuth x range) lookup in a polar sweep.

    Azimuth interpolation wraps across 2*pi and tolerates non-uniform
    spacing. Range bin ``k`` sits at ``k * range_resolution``; samples beyond
    the last bin or closer than ``min_range`` read as zero.
    """
    img = np.asarray(intensities, dtype=np.float64)
    az = np.asarray(azimuths, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    na, nb = img.shape
    two_pi = 2.0 * np.pi
    p = np.mod(phi, two_pi)
    k0 = np.searchsorted(az, p, side="right") - 1
    below = k0 < 0
    k0 = np.where(below, na - 1, k0)
    a0 = np.where(below, az[na - 1] - two_pi, az[k0])
    k1 = k0 + 1
    over = k1 >= na
    k1 = np.where(over, 0, k1)
    a1 = np.where(over, az[0] + two_pi, az[k1])
    span = a1 - a0
    t = np.where(span > 0, (p - a0) / np.where(span > 0, span, 1.0), 0.0)

    r = rho / range_resolution
    valid = (rho >= min_range) & (r <= nb - 1)
    r = np.where(valid, r, 0.0)
    r0 = np.floor(r).astype(np.intp)
    fr = r - r0
    r1 = np.minimum(r0 + 1, nb - 1)
    v0 = (1.0 - fr) * img[k0, r0] + fr * img[k0, r1]
    v1 = (1.0 - fr) * img[k1, r0] + fr * img[k1, r1]
    return np.where(valid, (1.0 - t) * v0 + t * v1, 0.0)


def greedy_peaks(surface, k, radius, rel_threshold, wrap=True):
    """Greedy NMS; ties resolve to the lowest row-major index."""
    s = np.array(surface, dtype=np.float64)
    nr, nc = s.shape
    live = np.ones((nr, nc), dtype=bool)
    peaks = []
    offs = np.arange(-radius, radius + 1)
    first = 0.0
    while len(peaks) < k and live.any():
        masked = np.where(live, s, -np.inf)
        idx = int(np.argmax(masked))
        bi, bj = divmod(idx, nc)
        best = float(s[bi, bj])
        if best <= 0.0:
            break
        if peaks and best < rel_threshold * first:
            break
        if not peaks:
            first = best
        peaks.append((bi, bj, best))
        ri = bi + offs
        rj = bj + offs
        if wrap:
            ri = np.mod(ri, nr)
            rj = np.mod(rj, nc)
        else:
            ri = ri[(ri >= 0) & (ri < nr)]
            rj = rj[(rj >= 0) & (rj < nc)]
        live[np.ix_(ri, rj)] = False
    return peaks


def splat_max(out, az_index, range_index, amplitude, az_sigma, range_sigma):
    """Max-accumulate separable Gaussian footprints into ``out`` in place."""
    na, nb = out.shape
    ai = np.asarray(az_index, dtype=np.float64)
    ri = np.asarray(range_index, dtype=np.float64)
    amp = np.asarray(amplitude, dtype=np.float64)
    if ai.size == 0:
        return
    wa = int(np.ceil(3.0 * az_sigma))
    wb = int(np.ceil(3.0 * range_sigma))
    a_lo = np.floor(ai + 0.5).astype(np.intp) - wa
    b_lo = np.floor(ri + 0.5).astype(np.intp) - wb
    da = np.arange(2 * wa + 1)
    db = np.arange(2 * wb + 1)
    a = a_lo[:, None] + da[None, :]
    b = b_lo[:, None] + db[None, :]
    wgt_a = amp[:, None] * np.exp(-0.5 * (a - ai[:, None]) ** 2 / az_sigma ** 2)
    wgt_b = np.exp(-0.5 * (b - ri[:, None]) ** 2 / range_sigma ** 2)
    vals = wgt_a[:, :, None] * wgt_b[:, None, :]
    aa = np.broadcast_to(np.mod(a, na)[:, :, None], vals.shape)
    bb = np.broadcast_to(b[:, None, :], vals.shape)
    ok = (bb >= 0) & (bb < nb)
    np.maximum.at(out, (aa[ok], bb[ok]), vals[ok])
