"""Signal types and FFT / STFT / mel machinery shared by the rest of the package."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class Waveform:
    """Mono sample buffer tagged with its sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1:
            raise ValueError(f"waveform must be mono (1-D), got shape {samples.shape}")
        if not np.issubdtype(samples.dtype, np.floating):
            samples = samples.astype(np.float64)
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class RealSpectrum:
    """One-sided spectrum of a whole real signal."""

    bins: np.ndarray
    transform_size: int
    sample_rate: int

    def __post_init__(self):
        n = self.transform_size
        if n <= 0 or n % 2:
            raise ValueError(f"transform_size must be a positive even integer, got {n}")
        if self.bins.shape != (n // 2 + 1,):
            raise ValueError(f"expected {n // 2 + 1} bins for transform size {n}, got {self.bins.shape}")

    @property
    def freqs(self) -> np.ndarray:
        return bin_frequencies(self.transform_size, self.sample_rate)


@dataclass(frozen=True)
class ComplexSpectrogram:
    """Framed STFT, shape (n_frames, n_fft // 2 + 1)."""

    frames: np.ndarray
    n_fft: int
    hop: int
    sample_rate: int

    def __post_init__(self):
        if self.frames.ndim != 2 or self.frames.shape[1] != self.n_fft // 2 + 1:
            raise ValueError(
                f"spectrogram with n_fft={self.n_fft} needs {self.n_fft // 2 + 1} bins, "
                f"got shape {self.frames.shape}"
            )
        if not 0 < self.hop <= self.n_fft:
            raise ValueError(f"hop must be in (0, n_fft], got {self.hop}")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class MelSpectrogram:
    """Log-mel frames, shape (n_frames, n_mels)."""

    frames: np.ndarray
    n_fft: int
    hop: int
    sample_rate: int

    @property
    def n_mels(self) -> int:
        return self.frames.shape[1]

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def bin_frequencies(transform_size: int, sample_rate: int) -> np.ndarray:
    """Centre frequency in Hz of each one-sided bin (bin k -> k * sr / N)."""
    return np.arange(transform_size // 2 + 1) * (sample_rate / transform_size)


def _check_transform_size(n: int) -> None:
    if n <= 0 or n % 2:
        raise ValueError(f"transform_size must be a positive even integer, got {n}")


def _check_pow2(n: int) -> None:
    if n <= 0 or n & (n - 1):
        raise ValueError(f"n_fft must be a power of two, got {n}")


def rfft(signal, transform_size: int, sample_rate: int = 48000) -> RealSpectrum:
    x = np.asarray(signal)
    _check_transform_size(transform_size)
    if x.shape[-1] > transform_size:
        raise ValueError(f"signal length {x.shape[-1]} exceeds transform_size {transform_size}")
    bins = np.fft.rfft(x, n=transform_size)
    # pocketfft leaves round-off in the imaginary part of DC/Nyquist
    bins[0] = bins[0].real
    bins[-1] = bins[-1].real
    return RealSpectrum(bins, transform_size, sample_rate)


def irfft(spectrum: RealSpectrum, length: int | None = None) -> np.ndarray:
    out = np.fft.irfft(spectrum.bins, n=spectrum.transform_size)
    if length is not None:
        out = out[:length]
    return out


@lru_cache(maxsize=16)
def _hann(n: int, dtype: str) -> np.ndarray:
    # periodic Hann; COLA at hop = n/4
    w = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)
    w = w.astype(dtype)
    w.flags.writeable = False
    return w


def hann_window(n: int, dtype=np.float64) -> np.ndarray:
    return _hann(n, np.dtype(dtype).name)


def frame_count(length: int, hop: int) -> int:
    """Number of centre-padded frames for a signal of `length` samples."""
    return length // hop + 1


def _stft_array(x: np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    """Centre-padded Hann STFT of the last axis; returns (..., frames, bins)."""
    if x.shape[-1] == 0:
        raise ValueError("cannot take the STFT of an empty signal")
    _check_pow2(n_fft)
    if not 0 < hop <= n_fft:
        raise ValueError(f"hop must be in (0, n_fft], got {hop}")
    real_dtype = np.float32 if x.dtype == np.float32 else np.float64
    x = x.astype(real_dtype, copy=False)
    pad = [(0, 0)] * (x.ndim - 1) + [(n_fft // 2, n_fft // 2)]
    mode = "reflect" if x.shape[-1] > 1 else "edge"
    padded = np.pad(x, pad, mode=mode)
    n_frames = frame_count(x.shape[-1], hop)
    windows = np.lib.stride_tricks.sliding_window_view(padded, n_fft, axis=-1)[..., ::hop, :]
    windows = windows[..., :n_frames, :]
    return np.fft.rfft(windows * hann_window(n_fft, real_dtype), axis=-1)


def stft(w: Waveform, n_fft: int = 2048, hop: int = 512) -> ComplexSpectrogram:
    frames = _stft_array(w.samples, n_fft, hop)
    return ComplexSpectrogram(frames, n_fft, hop, w.sample_rate)


def _istft_array(frames: np.ndarray, n_fft: int, hop: int, length: int | None) -> np.ndarray:
    """Weighted overlap-add inverse of `_stft_array` for (..., frames, bins) input."""
    if frames.shape[-1] != n_fft // 2 + 1:
        raise ValueError(f"n_fft={n_fft} needs {n_fft // 2 + 1} bins, got {frames.shape[-1]}")
    real_dtype = np.float32 if frames.dtype == np.complex64 else np.float64
    window = hann_window(n_fft, real_dtype)
    n_frames = frames.shape[-2]
    segments = np.fft.irfft(frames, n=n_fft, axis=-1).astype(real_dtype, copy=False) * window

    total = n_fft + (n_frames - 1) * hop
    out = np.zeros(frames.shape[:-2] + (total,), dtype=real_dtype)
    envelope = np.zeros(total, dtype=real_dtype)
    win_sq = window * window
    for t in range(n_frames):
        start = t * hop
        out[..., start:start + n_fft] += segments[..., t, :]
        envelope[start:start + n_fft] += win_sq

    half = n_fft // 2
    if length is None:
        length = (n_frames - 1) * hop
    out = out[..., half:half + length]
    envelope = envelope[half:half + length]
    nonzero = envelope > 1e-11
    out[..., nonzero] /= envelope[nonzero]
    if out.shape[-1] < length:
        pad = [(0, 0)] * (out.ndim - 1) + [(0, length - out.shape[-1])]
        out = np.pad(out, pad)
    return out


def istft(spec: ComplexSpectrogram, length: int | None = None) -> Waveform:
    """Inverse STFT; output length defaults to (n_frames - 1) * hop."""
    samples = _istft_array(spec.frames, spec.n_fft, spec.hop, length)
    return Waveform(samples, spec.sample_rate)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def _mel_filterbank(n_mels, n_fft, sample_rate, f_min, f_max):
    if not 0 <= f_min < f_max <= sample_rate / 2:
        raise ValueError(f"need 0 <= f_min < f_max <= {sample_rate / 2}, got {f_min}, {f_max}")
    if n_mels <= 0:
        raise ValueError("n_mels must be positive")
    freqs = bin_frequencies(n_fft, sample_rate)
    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))
    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs[None, :] - lower) / (center - lower)
    falling = (upper - freqs[None, :]) / (upper - center)
    fb = np.maximum(0.0, np.minimum(rising, falling))
    empty = np.flatnonzero(fb.sum(axis=1) == 0)
    if empty.size:
        raise ValueError(
            f"n_mels={n_mels} too large for n_fft={n_fft}: filter {int(empty[0])} covers no FFT bin"
        )
    fb.flags.writeable = False
    return fb


def mel_filterbank(n_mels: int, n_fft: int, sample_rate: int,
                   f_min: float = 0.0, f_max: float | None = None) -> np.ndarray:
    """HTK-scale triangular filterbank, shape (n_mels, n_fft // 2 + 1).

    Triangles have unit peak and are not area-normalised.
    """
    if f_max is None:
        f_max = sample_rate / 2
    return _mel_filterbank(int(n_mels), int(n_fft), int(sample_rate), float(f_min), float(f_max))


def mel_centers(n_mels: int, f_min: float, f_max: float) -> np.ndarray:
    """Centre frequencies (Hz) of the filters built by `mel_filterbank`."""
    return mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))[1:-1]


def log_mel(power: np.ndarray, fb: np.ndarray, floor: float = LOG_FLOOR) -> np.ndarray:
    """Natural log of filterbank energies; `power` is (..., frames, bins)."""
    mel = power @ fb.T.astype(power.dtype, copy=False)
    return np.log(np.maximum(mel, floor))


def mel_spectrogram(w: Waveform, n_mels: int = 80, n_fft: int = 2048, hop: int = 512,
                    f_min: float = 0.0, f_max: float | None = None) -> MelSpectrogram:
    """Log-power mel spectrogram, ln(max(fb @ |X|^2, 1e-10))."""
    spec = _stft_array(w.samples, n_fft, hop)
    power = spec.real**2 + spec.imag**2
    fb = mel_filterbank(n_mels, n_fft, w.sample_rate, f_min, f_max)
    return MelSpectrogram(log_mel(power, fb), n_fft, hop, w.sample_rate)
