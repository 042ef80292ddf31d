"""End-to-end enhancement and the real-time-factor benchmark."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .refiner import CrossoverSpec, default_crossover, merge_spectra, refine
from .resample import Sinc, resample
from .signal import RealSpectrum, Waveform, rfft
from .vocoder import VocoderModel, generate, generate_batch

TARGET_RATE = 48000


@dataclass
class EnhanceResult:
    output: Waveform
    resampled: Waveform
    generated: Waveform
    crossover: CrossoverSpec
    timings: dict[str, float] = field(default_factory=dict)

    def merged_spectrum(self) -> RealSpectrum:
        """Whole-signal merged spectrum, before the inverse transform."""
        n = len(self.resampled) + len(self.resampled) % 2
        return merge_spectra(
            rfft(self.resampled.samples, n, TARGET_RATE),
            rfft(self.generated.samples, n, TARGET_RATE),
            self.crossover,
        )


def enhance(w: Waveform, model: VocoderModel, crossover: CrossoverSpec | None = None,
            input_rate: int | None = None) -> EnhanceResult:
    """Resample to 48 kHz, generate, and merge with the refiner."""
    if input_rate is None:
        input_rate = w.sample_rate
    if crossover is None:
        crossover = default_crossover(input_rate)
    timings = {}
    t0 = time.perf_counter()
    y = resample(w, TARGET_RATE, Sinc())
    t1 = time.perf_counter()
    x_gen = generate(model, y)
    t2 = time.perf_counter()
    out = refine(y, Waveform(x_gen.samples.astype(np.float64), TARGET_RATE), crossover)
    t3 = time.perf_counter()
    timings.update(resample_s=t1 - t0, generate_s=t2 - t1, refine_s=t3 - t2)
    return EnhanceResult(out, y, x_gen, crossover, timings)


def rtf_report(latency_s: float, duration_s: float, batch: int) -> dict[str, float]:
    """RTF = latency / (duration * batch); speed = 1 / RTF."""
    rtf = latency_s / (duration_s * batch)
    return {"latency_s": latency_s, "rtf": rtf, "speed_x": 1.0 / rtf}


def benchmark(model: VocoderModel, duration_s: float = 4.0, batch: int = 1, warmup: int = 2,
              iters: int = 10, seed: int = 0, crossover: CrossoverSpec | None = None) -> dict:
    """Median wall-clock latency of generate + refine on synthetic 48 kHz noise.

    Resampling is excluded; inputs are synthesised directly at 48 kHz.
    """
    if duration_s <= 0 or batch < 1 or iters < 1 or warmup < 0:
        raise ValueError("duration must be positive, batch and iters >= 1, warmup >= 0")
    if crossover is None:
        crossover = default_crossover(16000)
    n = int(round(duration_s * TARGET_RATE))
    rng = np.random.default_rng(seed)
    clips = rng.uniform(-0.5, 0.5, size=(batch, n))

    def run():
        generated = generate_batch(model, clips.astype(np.float32))
        for clip, gen in zip(clips, generated):
            refine(Waveform(clip, TARGET_RATE), Waveform(gen.astype(np.float64), TARGET_RATE), crossover)

    for _ in range(warmup):
        run()
    latencies = []
    for _ in range(iters):
        t0 = time.perf_counter()
        run()
        latencies.append(time.perf_counter() - t0)
    report = {"duration_s": duration_s, "batch": batch, "warmup": warmup, "iters": iters}
    report.update(rtf_report(statistics.median(latencies), duration_s, batch))
    report["latency_min_s"] = min(latencies)
    report["n_params"] = model.n_params
    return report
