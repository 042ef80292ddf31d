"""``bwe`` command line: enhance, degrade, eval, bench, mask.

Exit codes: 0 success, 1 usage error, 2 I/O or format error, 3 numeric failure.
NDJSON goes to stdout for eval/bench, CSV for mask; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import metrics
from .pipeline import TARGET_RATE, benchmark, enhance
from .refiner import CrossoverSpec, Variant, default_crossover, mask_csv
from .resample import DegradeSpec, Sinc, degrade, method_from_name, resample
from .signal import Waveform
from .vocoder import NonFiniteError, VocoderConfig, WeightFormatError, init_random, load_weights
from .wavio import WavFormatError, read_wav, write_wav

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3
RANDOM_RATES = (8000, 12000, 16000)


class UsageError(Exception):
    pass


def default_threads() -> int:
    try:
        import psutil
        n = psutil.cpu_count(logical=False)
    except ImportError:
        n = None
    return n or os.cpu_count() or 1


@dataclass
class RunConfig:
    weights_path: Path | None = None
    input_rate_override: int | None = None
    f_start: float | None = None
    f_end: float | None = None
    variant: Variant | None = None
    seed: int = 0
    threads: int = 1
    output_dir: Path | None = None

    def crossover(self, input_rate: int) -> CrossoverSpec:
        """Default crossover for ``input_rate`` with any explicit overrides applied."""
        base = default_crossover(input_rate)
        spec = CrossoverSpec(
            self.f_start if self.f_start is not None else base.f_start,
            self.f_end if self.f_end is not None else base.f_end,
            self.variant if self.variant is not None else base.variant,
        )
        return spec


def _warn(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_model(cfg: RunConfig):
    if cfg.weights_path is None:
        _warn("WARNING: no --weights given; running with UNTRAINED random weights "
              f"(seed {cfg.seed}). Output is not meaningful audio.")
        return init_random(VocoderConfig(), cfg.seed)
    return load_weights(cfg.weights_path)


def _run_config(args) -> RunConfig:
    return RunConfig(
        weights_path=getattr(args, "weights", None),
        input_rate_override=getattr(args, "input_rate", None),
        f_start=getattr(args, "f_start", None),
        f_end=getattr(args, "f_end", None),
        variant=Variant(args.variant) if getattr(args, "variant", None) else None,
        seed=args.seed,
        threads=args.threads,
        output_dir=getattr(args, "output_dir", None),
    )


def _output_path(inp: Path, args, suffix: str) -> Path:
    if args.output is not None:
        return args.output
    out_dir = args.output_dir or inp.parent
    return Path(out_dir) / f"{inp.stem}{suffix}.wav"


def cmd_enhance(args) -> int:
    cfg = _run_config(args)
    if args.output is not None and len(args.inputs) > 1:
        raise UsageError("--output takes a single input; use --output-dir for several")
    model = _load_model(cfg)
    for inp in args.inputs:
        w = read_wav(inp)
        input_rate = cfg.input_rate_override or w.sample_rate
        spec = cfg.crossover(input_rate)
        result = enhance(w, model, spec, input_rate)
        out_path = _output_path(inp, args, "_48k")
        if cfg.output_dir is not None:
            Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
        write_wav(out_path, result.output, pcm16=args.pcm16)
        t = result.timings
        _warn(f"{inp} -> {out_path}: crossover {spec.variant.value} "
              f"{spec.f_start:g}-{spec.f_end:g} Hz (input rate {input_rate} Hz); "
              f"resample {t['resample_s']:.3f}s generate {t['generate_s']:.3f}s refine {t['refine_s']:.3f}s")
    return EXIT_OK


def cmd_degrade(args) -> int:
    if args.rate == "random":
        rate = int(np.random.default_rng(args.seed).choice(RANDOM_RATES))
    else:
        try:
            rate = int(args.rate)
        except ValueError:
            raise UsageError(f"--rate must be an integer or 'random', got {args.rate!r}") from None
    try:
        spec = DegradeSpec(rate, method_from_name(args.method), args.quant_bits)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    w = read_wav(args.input)
    if w.sample_rate != TARGET_RATE:
        raise UsageError(f"degrade expects a 48 kHz input, got {w.sample_rate} Hz")
    out = degrade(w, spec)
    out_path = _output_path(args.input, args, f"_{rate // 1000}k")
    write_wav(out_path, out, pcm16=args.pcm16)
    _warn(f"{args.input} -> {out_path}: rate {rate} Hz, method {args.method}, "
          f"quant_bits {args.quant_bits}")
    return EXIT_OK


def _to_48k(w: Waveform) -> Waveform:
    return w if w.sample_rate == TARGET_RATE else resample(w, TARGET_RATE, Sinc())


def eval_pair(ref: Waveform, est: Waveform, name: str, input_rate: int | None = None,
              crossover: CrossoverSpec | None = None) -> dict:
    """Metrics report for one reference/estimate pair, both brought to 48 kHz."""
    ref, est = _to_48k(ref), _to_48k(est)
    n = min(len(ref), len(est))
    longest = max(len(ref), len(est))
    if longest - n > 0.001 * longest:
        _warn(f"WARNING: {name}: length mismatch {len(ref)} vs {len(est)}; trimming to {n}")
    ref = Waveform(ref.samples[:n], TARGET_RATE)
    est = Waveform(est.samples[:n], TARGET_RATE)
    if crossover is None and input_rate is not None:
        crossover = default_crossover(input_rate)
    return {
        "file": name,
        "lsd": metrics.lsd(ref, est),
        "mrstft": metrics.mrstft_distance(ref, est),
        "mel_l1": metrics.mel_l1(ref, est),
        "input_rate": input_rate,
        "crossover": None if crossover is None else {
            "f_start": crossover.f_start,
            "f_end": crossover.f_end,
            "variant": crossover.variant.value,
        },
    }


def cmd_eval(args) -> int:
    cfg = _run_config(args)
    ref = read_wav(args.reference)
    est = read_wav(args.estimate)
    crossover = cfg.crossover(cfg.input_rate_override) if cfg.input_rate_override else None
    report = eval_pair(ref, est, str(args.estimate), cfg.input_rate_override, crossover)
    print(json.dumps(report), flush=True)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _run_config(args)
    model = _load_model(cfg)
    report = benchmark(model, args.duration, args.batch, args.warmup, args.iters, cfg.seed)
    report["threads"] = cfg.threads
    report["untrained"] = cfg.weights_path is None
    print(json.dumps(report), flush=True)
    return EXIT_OK


def cmd_mask(args) -> int:
    if args.rate is not None:
        if args.f_start is not None or args.f_end is not None:
            raise UsageError("use either --rate or --f-start/--f-end, not both")
        base = default_crossover(args.rate)
        spec = CrossoverSpec(base.f_start, base.f_end, args.variant or base.variant)
    else:
        if args.f_start is None or args.f_end is None:
            raise UsageError("mask needs --rate or both --f-start and --f-end")
        spec = CrossoverSpec(args.f_start, args.f_end, args.variant or Variant.SMOOTHSTEP_LR)
    if args.n_fft <= 0 or args.n_fft % 2:
        raise UsageError("--n-fft must be a positive even integer")
    sys.stdout.write(mask_csv(spec, args.n_fft, TARGET_RATE))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p, weights=True):
    p.add_argument("--seed", type=int, default=0, help="seed for random weights and random choices")
    p.add_argument("--threads", type=int, default=default_threads(), help="BLAS threads")
    if weights:
        p.add_argument("--weights", type=Path, default=None, help=".bwef weight file")


def _add_crossover(p):
    p.add_argument("--input-rate", type=int, default=None, help="override the input rate used for the crossover")
    p.add_argument("--f-start", type=float, default=None)
    p.add_argument("--f-end", type=float, default=None)
    p.add_argument("--variant", choices=[v.value for v in Variant], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bwe", description="Bandwidth extension to 48 kHz.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("enhance", help="extend one or more WAV files to 48 kHz")
    p.add_argument("inputs", type=Path, nargs="+")
    p.add_argument("-o", "--output", type=Path, default=None)
    p.add_argument("--output-dir", type=Path, default=None)
    p.add_argument("--pcm16", action="store_true", help="write 16-bit PCM instead of float32")
    _add_common(p)
    _add_crossover(p)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("degrade", help="band-limit a 48 kHz WAV")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, default=None)
    p.add_argument("--output-dir", type=Path, default=None)
    p.add_argument("--rate", default="random", help="target rate in Hz, or 'random' for 8/12/16 kHz")
    p.add_argument("--method", default="sinc", help="sinc, zoh or linear")
    p.add_argument("--quant-bits", type=int, default=None)
    p.add_argument("--pcm16", action="store_true")
    _add_common(p, weights=False)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("eval", help="LSD / MRSTFT / mel-L1 of an estimate against a reference")
    p.add_argument("reference", type=Path)
    p.add_argument("estimate", type=Path)
    _add_common(p, weights=False)
    _add_crossover(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="real-time factor of generate + refine")
    p.add_argument("--duration", type=float, default=4.0)
    p.add_argument("--batch", type=int, default=1)
    p.add_argument("--warmup", type=int, default=2)
    p.add_argument("--iters", type=int, default=10)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("mask", help="print the crossover mask as CSV")
    p.add_argument("--rate", type=int, default=None, help="input rate; uses the default crossover")
    p.add_argument("--f-start", type=float, default=None)
    p.add_argument("--f-end", type=float, default=None)
    p.add_argument("--variant", choices=[v.value for v in Variant], default=None)
    p.add_argument("--n-fft", type=int, default=2048)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_mask)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    t0 = time.perf_counter()
    try:
        with threadpool_limits(limits=args.threads):
            code = args.func(args)
    except UsageError as exc:
        _warn(f"bwe {args.command}: error: {exc}")
        return EXIT_USAGE
    except (WavFormatError, WeightFormatError, OSError) as exc:
        _warn(f"bwe {args.command}: I/O error: {exc}")
        return EXIT_IO
    except (NonFiniteError, FloatingPointError) as exc:
        _warn(f"bwe {args.command}: numeric failure: {exc}")
        return EXIT_NUMERIC
    except ValueError as exc:
        _warn(f"bwe {args.command}: error: {exc}")
        return EXIT_USAGE
    _warn(f"bwe {args.command}: done in {time.perf_counter() - t0:.2f}s")
    return code


if __name__ == "__main__":
    sys.exit(main())
