"""Metric distance of degraded audio from the wideband original, by capture rate and method.

At rates that divide 48 kHz, hold and linear decimation both reduce to picking
every k-th sample, so their rows coincide; the return trip is always sinc.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bwe.metrics import lsd, mel_l1, mrstft_distance
from bwe.resample import METHODS, DegradeSpec, degrade, method_from_name

from common import config_from_args, emit, table, wideband_clip


@dataclass(frozen=True)
class SweepConfig:
    """Band-limit sweep over capture rates and resampling methods."""
    n_clips: int = 5
    seconds: float = 2.0
    rates: tuple = (8000, 12000, 16000, 24000)
    quant_bits: int = 0
    seed: int = 100


def run(cfg: SweepConfig) -> list[dict]:
    clips = [wideband_clip(cfg.seed + i, cfg.seconds) for i in range(cfg.n_clips)]
    rows = []
    for method_name in METHODS:
        method = method_from_name(method_name)
        for rate in cfg.rates:
            spec = DegradeSpec(rate, method, cfg.quant_bits or None)
            vals = [(lsd(x, d), mrstft_distance(x, d), mel_l1(x, d))
                    for x in clips for d in [degrade(x, spec)]]
            mean = np.mean(vals, axis=0)
            row = {"method": method_name, "rate": rate, "lsd": float(mean[0]),
                   "mrstft": float(mean[1]), "mel_l1": float(mean[2])}
            emit(row)
            rows.append(row)
    return rows


if __name__ == "__main__":
    rows = run(config_from_args(SweepConfig))
    table(rows, ["method", "rate", "lsd", "mrstft", "mel_l1"])
