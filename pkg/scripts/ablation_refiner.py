"""Crossover-variant ablation with an oracle generator.

The ground-truth wideband signal stands in for the vocoder output, so the
numbers isolate what each crossover does at the band seam. Prints one NDJSON
row per (rate, variant) on stdout and a summary table on stderr.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bwe.metrics import lsd, mel_l1, mrstft_distance
from bwe.refiner import CrossoverSpec, Variant, default_crossover, refine
from bwe.resample import DegradeSpec, degrade

from common import config_from_args, emit, table, wideband_clip


@dataclass(frozen=True)
class AblationConfig:
    """Oracle-refiner ablation over crossover variants."""
    n_clips: int = 10
    seconds: float = 2.0
    rates: tuple = (8000, 12000, 16000)
    seed: int = 0


def run(cfg: AblationConfig) -> list[dict]:
    rows = []
    for rate in cfg.rates:
        base = default_crossover(rate)
        scores: dict[str, list] = {}
        for i in range(cfg.n_clips):
            x = wideband_clip(cfg.seed + i, cfg.seconds)
            y = degrade(x, DegradeSpec(rate))
            candidates = {"input": y}
            for variant in Variant:
                spec = CrossoverSpec(base.f_start, base.f_end, variant)
                candidates[variant.value] = refine(y, x, spec)
            for name, est in candidates.items():
                scores.setdefault(name, []).append((lsd(x, est), mrstft_distance(x, est), mel_l1(x, est)))
        for name, vals in scores.items():
            mean = np.mean(vals, axis=0)
            row = {"rate": rate, "system": name, "lsd": float(mean[0]),
                   "mrstft": float(mean[1]), "mel_l1": float(mean[2]), "n_clips": cfg.n_clips}
            emit(row)
            rows.append(row)
    return rows


if __name__ == "__main__":
    rows = run(config_from_args(AblationConfig))
    table(rows, ["rate", "system", "lsd", "mrstft", "mel_l1"])
