"""Bandwidth extension to 48 kHz: resample, vocoder generation, crossover refinement."""

from .refiner import CrossoverSpec, Variant, default_crossover, refine
from .resample import DegradeSpec, degrade, resample
from .signal import Waveform

__version__ = "0.1.0"
