"""Shared helpers for the experiment scripts."""

from __future__ import annotations

import dataclasses
import json
import sys

import numpy as np

from bwe.signal import Waveform

SR = 48000


def wideband_clip(seed: int, seconds: float = 2.0) -> Waveform:
    """White noise plus eight random tones between 100 Hz and 20 kHz."""
    rng = np.random.default_rng(seed)
    n = int(seconds * SR)
    t = np.arange(n) / SR
    x = 0.1 * rng.standard_normal(n)
    for f in rng.uniform(100, 20000, 8):
        x += 0.2 * rng.uniform() * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    return Waveform(x, SR)


def emit(row: dict) -> None:
    print(json.dumps(row), flush=True)


def config_from_args(cls, argv=None):
    """Build a dataclass config from ``--field value`` flags."""
    import argparse

    parser = argparse.ArgumentParser(description=cls.__doc__)
    for f in dataclasses.fields(cls):
        kind = type(f.default)
        if kind is tuple:
            parser.add_argument(f"--{f.name.replace('_', '-')}", type=int, nargs="+", default=list(f.default))
        else:
            parser.add_argument(f"--{f.name.replace('_', '-')}", type=kind, default=f.default)
    args = vars(parser.parse_args(argv))
    return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in args.items()})


def table(rows: list[dict], columns: list[str]) -> None:
    widths = [max(len(c), *(len(f"{r[c]:.4f}" if isinstance(r[c], float) else str(r[c])) for r in rows))
              for c in columns]
    fmt = lambda v: f"{v:.4f}" if isinstance(v, float) else str(v)
    print("  ".join(c.rjust(w) for c, w in zip(columns, widths)), file=sys.stderr)
    for r in rows:
        print("  ".join(fmt(r[c]).rjust(w) for c, w in zip(columns, widths)), file=sys.stderr)
