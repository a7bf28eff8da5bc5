import numpy as np
import pytest

from fs2d.grid import PolarScan


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_scan(rng, azimuths=64, bins=80, resolution=0.5, timestamp=0.0):
    az = 2 * np.pi * np.arange(azimuths) / azimuths
    return PolarScan(az, rng.uniform(0.0, 1.0, (azimuths, bins)), resolution, timestamp)


def band_limited(rng, size, cutoff=0.2):
    """Random smooth grid whose spectrum vanishes above ``cutoff`` cycles per cell."""
    k = np.fft.fftfreq(size)
    mask = (np.abs(k)[:, None] < cutoff) & (np.abs(k)[None, :] < cutoff)
    spec = np.fft.fft2(rng.normal(size=(size, size))) * mask
    return np.real(np.fft.ifft2(spec))


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
