import numpy as np
import pytest

from bwe.signal import Waveform
from bwe.vocoder import VocoderConfig, init_random

SR = 48000


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def noise(rng):
    return Waveform(rng.uniform(-0.5, 0.5, SR), SR)


@pytest.fixture(scope="session")
def default_model():
    return init_random(VocoderConfig(), seed=0)


@pytest.fixture(scope="session")
def tiny_config():
    return VocoderConfig(n_mels=8, dim=16, intermediate=24, n_blocks=2, n_fft=64, hop=16)


def sine(freq, seconds=1.0, sr=SR, amp=0.5, phase=0.0):
    t = np.arange(int(round(seconds * sr))) / sr
    return Waveform(amp * np.sin(2 * np.pi * freq * t + phase), sr)


def wideband_clip(seed, seconds=2.0, sr=SR):
    """White noise plus a handful of random tones spread over the full band."""
    rng = np.random.default_rng(seed)
    n = int(seconds * sr)
    t = np.arange(n) / sr
    x = 0.1 * rng.standard_normal(n)
    for f in rng.uniform(100, 20000, 8):
        x += 0.2 * rng.uniform() * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    return Waveform(x, sr)


def snr_db(ref, est):
    return 10 * np.log10(np.sum(ref**2) / np.sum((ref - est) ** 2))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
