"""Sample-rate conversion and the band-limiting degradation pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd

import numpy as np
from scipy.signal import upfirdn

from .signal import Waveform


@dataclass(frozen=True)
class Sinc:
    """Kaiser-windowed sinc interpolation.

    ``taps`` is the kernel span measured in samples of the lower of the two
    rates (taps per polyphase branch when upsampling); the transition band is placed so the stopband starts exactly at the
    lower Nyquist frequency. With the defaults the passband reaches 0.8 of the
    lower Nyquist, leaving the top band as anti-alias rolloff.
    """

    taps: int = 53
    kaiser_beta: float = 8.0

    def __post_init__(self):
        if self.taps <= 0 or self.taps % 2 == 0:
            raise ValueError(f"sinc taps must be odd and positive, got {self.taps}")
        if self.kaiser_beta < 0:
            raise ValueError("kaiser_beta must be non-negative")


@dataclass(frozen=True)
class ZeroOrderHold:
    pass


@dataclass(frozen=True)
class Linear:
    pass


ResampleMethod = Sinc | ZeroOrderHold | Linear

METHODS = {"sinc": Sinc, "zoh": ZeroOrderHold, "linear": Linear}


def method_from_name(name: str) -> ResampleMethod:
    try:
        return METHODS[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown resample method {name!r}; choose from {sorted(METHODS)}") from None


@dataclass(frozen=True)
class DegradeSpec:
    target_rate: int
    method: ResampleMethod = Sinc()
    quant_bits: int | None = None

    def __post_init__(self):
        if not 8000 <= self.target_rate <= 48000:
            raise ValueError(f"target_rate must be in [8000, 48000], got {self.target_rate}")
        if self.quant_bits is not None and not 4 <= self.quant_bits <= 16:
            raise ValueError(f"quant_bits must be in [4, 16], got {self.quant_bits}")
        if not isinstance(self.method, (Sinc, ZeroOrderHold, Linear)):
            raise ValueError(f"invalid resample method {self.method!r}")


def _kaiser_transition(taps: int, beta: float) -> float:
    """Transition width as a fraction of the sample rate (Kaiser's design formula)."""
    if beta > 4.55:
        atten = beta / 0.1102 + 8.7
    else:
        # inverse of the mid-range branch, solved numerically
        grid = np.linspace(21.0, 50.0, 2901)
        fit = 0.5842 * (grid - 21) ** 0.4 + 0.07886 * (grid - 21)
        atten = float(np.interp(beta, fit, grid))
    return (atten - 7.95) / (2.285 * (taps - 1)) / (2 * np.pi)


@lru_cache(maxsize=32)
def sinc_kernel(up: int, down: int, taps: int, beta: float) -> np.ndarray:
    """Prototype lowpass at rate ``source * up``, scaled for interpolation gain ``up``.

    Each of the ``up`` polyphase branches is normalised to unit DC gain so that
    constant signals survive any ratio exactly.
    """
    # the intermediate rate is max(up, down) times the lower of the two rates
    length = taps * max(up, down)
    if length % 2 == 0:
        length += 1
    # edge of the stopband sits at the lower Nyquist
    nyq = 0.5 / max(up, down)
    cutoff = max(nyq - 0.5 * _kaiser_transition(length, beta), 0.5 * nyq)
    n = np.arange(length) - (length - 1) / 2
    h = 2 * cutoff * np.sinc(2 * cutoff * n) * np.kaiser(length, beta)
    for phase in range(up):
        h[phase::up] /= h[phase::up].sum()
    h.flags.writeable = False
    return h


def _polyphase(x: np.ndarray, up: int, down: int, h: np.ndarray, out_len: int) -> np.ndarray:
    delay = (len(h) - 1) // 2
    # shift the kernel so the group delay lands on an output sample
    lead = (-delay) % down
    h = np.concatenate([np.zeros(lead), h])
    skip = (delay + lead) // down
    needed = (skip + out_len) * down // up + len(h) // up + 2
    x = np.pad(x, (0, max(0, needed - len(x))))
    y = upfirdn(h, x, up, down)
    return y[skip:skip + out_len]


def _zoh(x: np.ndarray, source: int, target: int, out_len: int) -> np.ndarray:
    idx = np.arange(out_len, dtype=np.int64) * source // target
    return x[np.minimum(idx, len(x) - 1)]


def _linear(x: np.ndarray, source: int, target: int, out_len: int) -> np.ndarray:
    num = np.arange(out_len, dtype=np.int64) * source
    left = num // target
    frac = (num - left * target) / target
    left = np.minimum(left, len(x) - 1)
    right = np.minimum(left + 1, len(x) - 1)
    return x[left] * (1.0 - frac) + x[right] * frac


def resample(w: Waveform, target_rate: int, method: ResampleMethod | None = None) -> Waveform:
    """Convert ``w`` to ``target_rate``; output length is round(len * target / source)."""
    if method is None:
        method = Sinc()
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if len(w) == 0:
        raise ValueError("cannot resample an empty waveform")
    source = w.sample_rate
    x = w.samples
    if source == target_rate:
        return Waveform(x.copy(), target_rate)

    out_len = max(1, int(round(len(x) * target_rate / source)))
    g = gcd(source, target_rate)
    up, down = target_rate // g, source // g
    if isinstance(method, Sinc):
        h = sinc_kernel(up, down, method.taps, float(method.kaiser_beta))
        y = _polyphase(x.astype(np.float64), up, down, h, out_len)
    elif isinstance(method, ZeroOrderHold):
        y = _zoh(x, source, target_rate, out_len)
    elif isinstance(method, Linear):
        y = _linear(x, source, target_rate, out_len)
    else:
        raise TypeError(f"unsupported resample method {method!r}")
    return Waveform(np.asarray(y, dtype=x.dtype), target_rate)


def quantize(w: Waveform, bits: int) -> Waveform:
    """Uniform mid-rise quantiser with 2**bits levels over [-1, 1]."""
    if not 4 <= bits <= 16:
        raise ValueError(f"bits must be in [4, 16], got {bits}")
    levels = 2**bits
    step = 2.0 / levels
    # step is a power of two, so x / step and (k + 0.5) * step are exact;
    # shifting by +1 before flooring would round inputs just below a threshold
    k = np.clip(np.floor(w.samples / step), -(levels // 2), levels // 2 - 1)
    return Waveform(((k + 0.5) * step).astype(w.samples.dtype), w.sample_rate)


def degrade_low(w: Waveform, spec: DegradeSpec) -> Waveform:
    """Band-limited capture at ``spec.target_rate`` (quantised if requested)."""
    if w.sample_rate != 48000:
        raise ValueError(f"degrade expects 48 kHz input, got {w.sample_rate}")
    low = resample(w, spec.target_rate, spec.method)
    if spec.quant_bits is not None:
        low = quantize(low, spec.quant_bits)
    return low


def degrade(w: Waveform, spec: DegradeSpec) -> Waveform:
    """Downsample, optionally quantise, and sinc-upsample back to the original length at 48 kHz."""
    low = degrade_low(w, spec)
    back = resample(low, 48000, Sinc())
    y = back.samples
    if len(y) > len(w):
        y = y[:len(w)]
    elif len(y) < len(w):
        y = np.pad(y, (0, len(w) - len(y)))
    return Waveform(y, 48000)
