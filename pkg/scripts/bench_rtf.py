"""Real-time factor across batch sizes and thread counts (random weights)."""

from __future__ import annotations

from dataclasses import dataclass

from threadpoolctl import threadpool_limits

from bwe.pipeline import benchmark
from bwe.vocoder import VocoderConfig, init_random

from common import config_from_args, emit, table


@dataclass(frozen=True)
class BenchConfig:
    """RTF grid over batch sizes and BLAS thread counts."""
    duration: float = 4.0
    batches: tuple = (1, 4, 32)
    threads: tuple = (1,)
    warmup: int = 1
    iters: int = 3
    seed: int = 0


def run(cfg: BenchConfig) -> list[dict]:
    model = init_random(VocoderConfig(), cfg.seed)
    rows = []
    for n_threads in cfg.threads:
        with threadpool_limits(limits=n_threads):
            for batch in cfg.batches:
                report = benchmark(model, cfg.duration, batch, cfg.warmup, cfg.iters, cfg.seed)
                report["threads"] = n_threads
                emit(report)
                rows.append(report)
    return rows


if __name__ == "__main__":
    rows = run(config_from_args(BenchConfig))
    table(rows, ["threads", "batch", "latency_s", "rtf", "speed_x"])
