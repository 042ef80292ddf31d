"""Mono WAV reading and writing (PCM16, PCM24, float32)."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.io import wavfile

from .signal import Waveform

MIN_RATE, MAX_RATE = 8000, 48000


class WavFormatError(ValueError):
    pass


def read_wav(path) -> Waveform:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", wavfile.WavFileWarning)
            rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except (ValueError, EOFError, OSError) as exc:
        raise WavFormatError(f"{path}: not a readable WAV file ({exc})") from None
    if data.ndim != 1:
        raise WavFormatError(f"{path}: expected mono audio, got {data.shape[1]} channels")
    if not MIN_RATE <= rate <= MAX_RATE:
        raise WavFormatError(f"{path}: sample rate {rate} outside [{MIN_RATE}, {MAX_RATE}]")
    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:
        # scipy left-justifies 24-bit PCM into int32
        samples = data / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise WavFormatError(f"{path}: unsupported sample format {data.dtype}")
    if not np.all(np.isfinite(samples)):
        raise WavFormatError(f"{path}: contains non-finite samples")
    return Waveform(samples, rate)


def write_wav(path, w: Waveform, pcm16: bool = False) -> None:
    """Float32 by default; ``pcm16`` rounds half-to-even after clipping to [-1, 1]."""
    if pcm16:
        data = np.rint(np.clip(w.samples, -1.0, 1.0) * 32767.0).astype(np.int16)
    else:
        data = w.samples.astype(np.float32)
    wavfile.write(path, w.sample_rate, data)
