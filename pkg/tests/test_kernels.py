"""The compiled kernels and the numpy fallback must agree."""
import numpy as np
import pytest

from fs2d import _fallback, kernels

compiled = pytest.importorskip("fs2d._kernels")


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


def test_bilinear_sample_parity(rng):
    img = rng.normal(size=(37, 41))
    rows = rng.uniform(-3, 40, (50, 60))
    cols = rng.uniform(-3, 44, (50, 60))
    np.testing.assert_allclose(compiled.bilinear_sample(img, rows, cols),
                               _fallback.bilinear_sample(img, rows, cols), rtol=0, atol=1e-12)


def test_bilinear_sample_exact_at_nodes(rng):
    img = rng.normal(size=(8, 9))
    r, c = np.meshgrid(np.arange(8.0), np.arange(9.0), indexing="ij")
    for impl in (compiled, _fallback):
        np.testing.assert_allclose(impl.bilinear_sample(img, r, c), img, atol=1e-14)


@pytest.mark.parametrize("min_range", [0.0, 3.0])
def test_polar_sample_parity(rng, min_range):
    az = np.sort(rng.uniform(0, 2 * np.pi, 90))
    inten = rng.uniform(0, 1, (90, 120))
    phi = rng.uniform(-1, 7, (64, 64))
    rho = rng.uniform(0, 70, (64, 64))
    a = compiled.polar_sample(inten, az, 0.5, phi, rho, min_range)
    b = _fallback.polar_sample(inten, az, 0.5, phi, rho, min_range)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_polar_sample_wraps_azimuth():
    az = np.array([0.0, np.pi / 2, np.pi, 3 * np.pi / 2])
    inten = np.array([[1.0] * 4, [2.0] * 4, [3.0] * 4, [5.0] * 4])
    for impl in (compiled, _fallback):
        # halfway between the last beam and the first one
        v = impl.polar_sample(inten, az, 1.0, np.array([7 * np.pi / 4]), np.array([1.0]))
        assert v[0] == pytest.approx(3.0)


@pytest.mark.parametrize("wrap", [True, False])
def test_greedy_peaks_parity(rng, wrap):
    for _ in range(20):
        s = rng.normal(size=(32, 32))
        a = compiled.greedy_peaks(s, 6, 3, 0.2, wrap)
        b = _fallback.greedy_peaks(s, 6, 3, 0.2, wrap)
        assert [(i, j) for i, j, _ in a] == [(i, j) for i, j, _ in b]
        np.testing.assert_allclose([v for *_, v in a], [v for *_, v in b])


def test_splat_max_parity(rng):
    out_a = np.zeros((64, 100))
    out_b = np.zeros((64, 100))
    ai, ri = rng.uniform(-2, 66, 200), rng.uniform(-5, 105, 200)
    amp = rng.uniform(0, 1, 200)
    compiled.splat_max(out_a, ai, ri, amp, 0.75, 1.0)
    _fallback.splat_max(out_b, ai, ri, amp, 0.75, 1.0)
    np.testing.assert_allclose(out_a, out_b, rtol=0, atol=1e-12)
