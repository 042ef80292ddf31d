"""Objective spectral metrics: LSD, multi-resolution STFT distance, log-mel L1.

Term definitions (kept stable so numbers compare across runs):

* ``lsd``: Hann STFT (n_fft 2048, hop 512, centre padding), power floored at
  1e-10, log10; RMS over bins per frame, then mean over frames.
* ``mrstft_distance``: for n_fft in (512, 1024, 2048), hop n_fft/4,
  spectral convergence ``||S| - |S^||_F / ||S||_F`` plus mean absolute
  difference of ``ln(max(|S|, 1e-7))``; all six terms weighted 1.0 and summed.
* ``mel_l1``: 128-band HTK mel filterbank (0 to 24 kHz) over the *magnitude*
  spectrogram (n_fft 2048, hop 512), ``ln(max(mel, 1e-7))``, mean absolute
  difference. Scaling the estimate by ``e`` therefore shifts every value by 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import Waveform, _stft_array, mel_filterbank

MRSTFT_RESOLUTIONS = (512, 1024, 2048)
MAG_FLOOR = 1e-7


@dataclass(frozen=True)
class LsdConfig:
    n_fft: int = 2048
    hop: int = 512
    epsilon: float = 1e-10

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def _check_pair(reference: Waveform, estimate: Waveform) -> None:
    if reference.sample_rate != estimate.sample_rate:
        raise ValueError(f"sample-rate mismatch: {reference.sample_rate} vs {estimate.sample_rate}")
    if len(reference) != len(estimate):
        raise ValueError(f"length mismatch: {len(reference)} vs {len(estimate)}")
    if len(reference) == 0:
        raise ValueError("empty signal")


def _power(x: np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    spec = _stft_array(x.astype(np.float64, copy=False), n_fft, hop)
    return spec.real**2 + spec.imag**2


def lsd(reference: Waveform, estimate: Waveform, cfg: LsdConfig = LsdConfig()) -> float:
    _check_pair(reference, estimate)
    p_ref = np.maximum(_power(reference.samples, cfg.n_fft, cfg.hop), cfg.epsilon)
    p_est = np.maximum(_power(estimate.samples, cfg.n_fft, cfg.hop), cfg.epsilon)
    diff = np.log10(p_ref) - np.log10(p_est)
    return float(np.mean(np.sqrt(np.mean(diff**2, axis=-1))))


def mrstft_terms(reference: Waveform, estimate: Waveform) -> dict[int, tuple[float, float]]:
    """(spectral convergence, log-magnitude L1) per resolution."""
    _check_pair(reference, estimate)
    terms = {}
    for n_fft in MRSTFT_RESOLUTIONS:
        ref = np.sqrt(_power(reference.samples, n_fft, n_fft // 4))
        est = np.sqrt(_power(estimate.samples, n_fft, n_fft // 4))
        denom = np.linalg.norm(ref)
        num = np.linalg.norm(ref - est)
        if denom > 0:
            sc = num / denom
        else:
            sc = 0.0 if num == 0 else 1.0
        log_l1 = np.mean(np.abs(np.log(np.maximum(ref, MAG_FLOOR)) - np.log(np.maximum(est, MAG_FLOOR))))
        terms[n_fft] = (float(sc), float(log_l1))
    return terms


def mrstft_distance(reference: Waveform, estimate: Waveform) -> float:
    return float(sum(sc + mag for sc, mag in mrstft_terms(reference, estimate).values()))


def log_mel_magnitude(w: Waveform, n_mels: int = 128, n_fft: int = 2048, hop: int = 512) -> np.ndarray:
    mag = np.sqrt(_power(w.samples, n_fft, hop))
    fb = mel_filterbank(n_mels, n_fft, w.sample_rate)
    return np.log(np.maximum(mag @ fb.T, MAG_FLOOR))


def mel_l1(reference: Waveform, estimate: Waveform) -> float:
    _check_pair(reference, estimate)
    if reference.sample_rate != 48000:
        raise ValueError(f"mel_l1 is defined at 48 kHz, got {reference.sample_rate}")
    return float(np.mean(np.abs(log_mel_magnitude(reference) - log_mel_magnitude(estimate))))
