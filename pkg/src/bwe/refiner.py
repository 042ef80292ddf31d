"""Frequency-domain crossover that anchors the low band and keeps the generated high band."""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass

import numpy as np

from .signal import RealSpectrum, Waveform, bin_frequencies, irfft, rfft

CHUNK_SIZE = 2**20
CROSSFADE = 4096


class Variant(str, enum.Enum):
    SMOOTHSTEP_LR = "smoothstep"
    NAIVE_BRICKWALL = "brickwall"
    BUTTERWORTH4 = "butterworth"


@dataclass(frozen=True)
class CrossoverSpec:
    f_start: float
    f_end: float
    variant: Variant = Variant.SMOOTHSTEP_LR
    nyquist: float = 24000.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.variant is Variant.NAIVE_BRICKWALL:
            ok = 0 < self.f_start <= self.f_end <= self.nyquist
        else:
            ok = 0 < self.f_start < self.f_end <= self.nyquist
        if not ok:
            raise ValueError(
                f"crossover needs 0 < f_start < f_end <= {self.nyquist:g} Hz, "
                f"got f_start={self.f_start:g}, f_end={self.f_end:g}"
            )

    @property
    def f_c(self) -> float:
        return 0.5 * (self.f_start + self.f_end)


def default_crossover(input_rate: float) -> CrossoverSpec:
    """Transition over the top 10% of the input band, ending at the input Nyquist."""
    if not 8000 <= input_rate <= 48000:
        raise ValueError(f"input_rate must be in [8000, 48000] Hz, got {input_rate}")
    f_c = input_rate / 2
    return CrossoverSpec(f_c - 0.1 * f_c, f_c, Variant.SMOOTHSTEP_LR)


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return 3 * t**2 - 2 * t**3


def crossover_mask(spec: CrossoverSpec, bin_freqs) -> np.ndarray:
    """Weight given to the generated signal at each frequency.

    For the Butterworth variant this is only the highpass half; the low band is
    weighted by `lowpass_weights`, not by ``1 - mask``.
    """
    f = np.asarray(bin_freqs, dtype=np.float64)
    if spec.variant is Variant.SMOOTHSTEP_LR:
        t = (f - spec.f_start) / (spec.f_end - spec.f_start)
        return np.where(f < spec.f_start, 0.0, np.where(f > spec.f_end, 1.0, smoothstep(t)))
    if spec.variant is Variant.NAIVE_BRICKWALL:
        return np.where(f < spec.f_c, 0.0, 1.0)
    r8 = (f / spec.f_c) ** 8
    return np.sqrt(r8) / np.sqrt(1.0 + r8)


def lowpass_weights(spec: CrossoverSpec, bin_freqs) -> np.ndarray:
    """Weight given to the low-band anchor at each frequency."""
    if spec.variant is Variant.BUTTERWORTH4:
        f = np.asarray(bin_freqs, dtype=np.float64)
        return 1.0 / np.sqrt(1.0 + (f / spec.f_c) ** 8)
    return 1.0 - crossover_mask(spec, bin_freqs)


def merge_spectra(anchor: RealSpectrum, generated: RealSpectrum, spec: CrossoverSpec) -> RealSpectrum:
    if anchor.transform_size != generated.transform_size or anchor.sample_rate != generated.sample_rate:
        raise ValueError("spectra must share transform size and sample rate")
    freqs = anchor.freqs
    high = crossover_mask(spec, freqs)
    low = lowpass_weights(spec, freqs)
    merged = low * anchor.bins + high * generated.bins
    return RealSpectrum(merged, anchor.transform_size, anchor.sample_rate)


def _refine_block(y: np.ndarray, x: np.ndarray, spec: CrossoverSpec, sample_rate: int) -> np.ndarray:
    n = len(y) + len(y) % 2
    merged = merge_spectra(rfft(y, n, sample_rate), rfft(x, n, sample_rate), spec)
    return irfft(merged, len(y))


def refine(y: Waveform, x_gen: Waveform, spec: CrossoverSpec,
           chunk_size: int = CHUNK_SIZE, crossfade: int = CROSSFADE) -> Waveform:
    """Blend the anchor ``y`` and generated ``x_gen`` in the frequency domain.

    Signals longer than ``chunk_size`` are merged in overlapping chunks joined by
    a linear crossfade of ``crossfade`` samples.
    """
    if len(y) != len(x_gen):
        raise ValueError(f"length mismatch: {len(y)} vs {len(x_gen)}")
    if y.sample_rate != x_gen.sample_rate:
        raise ValueError(f"sample-rate mismatch: {y.sample_rate} vs {x_gen.sample_rate}")
    if spec.f_end > y.sample_rate / 2:
        raise ValueError(f"f_end {spec.f_end:g} Hz lies above the Nyquist of {y.sample_rate} Hz")
    a, b, sr = y.samples, x_gen.samples, y.sample_rate
    if len(a) <= chunk_size:
        return Waveform(_refine_block(a, b, spec, sr), sr)
    if not 0 < crossfade < chunk_size:
        raise ValueError("crossfade must be positive and shorter than chunk_size")

    out = np.zeros(len(a))
    step = chunk_size - crossfade
    fade_in = (np.arange(crossfade) + 0.5) / crossfade
    start = 0
    while True:
        stop = min(start + chunk_size, len(a))
        block = _refine_block(a[start:stop], b[start:stop], spec, sr)
        if start > 0:
            block[:crossfade] *= fade_in
        last = stop == len(a)
        if not last:
            block[-crossfade:] *= fade_in[::-1]
        out[start:stop] += block
        if last:
            break
        start += step
    return Waveform(out, sr)


def mask_csv(spec: CrossoverSpec, n_fft: int = 2048, sample_rate: int = 48000) -> str:
    """``frequency_hz,mask_value`` rows, one per one-sided bin."""
    freqs = bin_frequencies(n_fft, sample_rate)
    values = crossover_mask(spec, freqs)
    buf = io.StringIO()
    buf.write("frequency_hz,mask_value\n")
    for f, m in zip(freqs.tolist(), values.tolist()):
        buf.write(f"{f!r},{m!r}\n")
    return buf.getvalue()
