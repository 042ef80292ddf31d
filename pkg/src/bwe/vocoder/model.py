"""Float32 forward pass of the mel-conditioned ConvNeXt generator with an iSTFT head."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from ..signal import ComplexSpectrogram, MelSpectrogram, Waveform, _istft_array, mel_spectrogram

MAX_LOG_MAGNITUDE = 12.0
OUTPUT_CLIP = 4.0
LN_EPS = 1e-6


class NonFiniteError(ArithmeticError):
    """Raised when inference produces NaN/Inf, which means the weights are corrupt."""


@dataclass(frozen=True)
class VocoderConfig:
    n_mels: int = 80
    dim: int = 512
    intermediate: int = 1536
    n_blocks: int = 8
    n_fft: int = 2048
    hop: int = 512
    sample_rate: int = 48000
    dw_kernel: int = 7

    def __post_init__(self):
        if self.dw_kernel % 2 == 0:
            raise ValueError(f"dw_kernel must be odd, got {self.dw_kernel}")
        if self.n_fft != 4 * self.hop:
            raise ValueError(f"n_fft must equal 4 * hop, got n_fft={self.n_fft}, hop={self.hop}")
        for name in ("n_mels", "dim", "intermediate", "n_blocks", "n_fft", "hop", "sample_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1

    def as_tuple(self) -> tuple[int, ...]:
        return (self.n_mels, self.dim, self.intermediate, self.n_blocks,
                self.n_fft, self.hop, self.sample_rate, self.dw_kernel)


@dataclass
class ConvNextBlockWeights:
    dw_weight: np.ndarray   # (dim, kernel)
    dw_bias: np.ndarray     # (dim,)
    norm_gamma: np.ndarray
    norm_beta: np.ndarray
    pw1_weight: np.ndarray  # (intermediate, dim)
    pw1_bias: np.ndarray
    pw2_weight: np.ndarray  # (dim, intermediate)
    pw2_bias: np.ndarray


BLOCK_TENSORS = ("dw_weight", "dw_bias", "norm_gamma", "norm_beta",
                 "pw1_weight", "pw1_bias", "pw2_weight", "pw2_bias")


def expected_shapes(config: VocoderConfig) -> dict[str, tuple[int, ...]]:
    """Tensor names and shapes in canonical (file) order."""
    c = config
    shapes = {
        "embed.weight": (c.dim, c.n_mels, c.dw_kernel),
        "embed.bias": (c.dim,),
    }
    for i in range(c.n_blocks):
        shapes.update({
            f"blocks.{i}.dw_weight": (c.dim, c.dw_kernel),
            f"blocks.{i}.dw_bias": (c.dim,),
            f"blocks.{i}.norm_gamma": (c.dim,),
            f"blocks.{i}.norm_beta": (c.dim,),
            f"blocks.{i}.pw1_weight": (c.intermediate, c.dim),
            f"blocks.{i}.pw1_bias": (c.intermediate,),
            f"blocks.{i}.pw2_weight": (c.dim, c.intermediate),
            f"blocks.{i}.pw2_bias": (c.dim,),
        })
    shapes.update({
        "final_norm.gamma": (c.dim,),
        "final_norm.beta": (c.dim,),
        "pointwise.weight": (c.dim, c.dim),
        "pointwise.bias": (c.dim,),
        "head.weight": (2 * c.n_bins, c.dim),
        "head.bias": (2 * c.n_bins,),
    })
    return shapes


@dataclass
class VocoderModel:
    config: VocoderConfig
    embed_weight: np.ndarray
    embed_bias: np.ndarray
    blocks: list[ConvNextBlockWeights]
    final_norm_gamma: np.ndarray
    final_norm_beta: np.ndarray
    pointwise_weight: np.ndarray
    pointwise_bias: np.ndarray
    head_weight: np.ndarray
    head_bias: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def named_tensors(self):
        yield "embed.weight", self.embed_weight
        yield "embed.bias", self.embed_bias
        for i, block in enumerate(self.blocks):
            for name in BLOCK_TENSORS:
                yield f"blocks.{i}.{name}", getattr(block, name)
        yield "final_norm.gamma", self.final_norm_gamma
        yield "final_norm.beta", self.final_norm_beta
        yield "pointwise.weight", self.pointwise_weight
        yield "pointwise.bias", self.pointwise_bias
        yield "head.weight", self.head_weight
        yield "head.bias", self.head_bias

    @classmethod
    def from_named(cls, config: VocoderConfig, tensors: dict[str, np.ndarray]) -> VocoderModel:
        """Build a model, checking every tensor against the shapes `config` implies."""
        shapes = expected_shapes(config)
        missing = [name for name in shapes if name not in tensors]
        if missing:
            raise KeyError(f"missing tensor {missing[0]!r}")
        extra = [name for name in tensors if name not in shapes]
        if extra:
            raise KeyError(f"unexpected tensor {extra[0]!r}")
        for name, shape in shapes.items():
            if tuple(tensors[name].shape) != shape:
                raise ValueError(f"tensor {name!r} has shape {tuple(tensors[name].shape)}, expected {shape}")
        t = {name: np.ascontiguousarray(a, dtype=np.float32) for name, a in tensors.items()}
        blocks = [
            ConvNextBlockWeights(**{name: t[f"blocks.{i}.{name}"] for name in BLOCK_TENSORS})
            for i in range(config.n_blocks)
        ]
        return cls(
            config=config,
            embed_weight=t["embed.weight"],
            embed_bias=t["embed.bias"],
            blocks=blocks,
            final_norm_gamma=t["final_norm.gamma"],
            final_norm_beta=t["final_norm.beta"],
            pointwise_weight=t["pointwise.weight"],
            pointwise_bias=t["pointwise.bias"],
            head_weight=t["head.weight"],
            head_bias=t["head.bias"],
        )

    @property
    def n_params(self) -> int:
        return sum(a.size for _, a in self.named_tensors())

    def _transposed(self, key: str, w: np.ndarray) -> np.ndarray:
        # contiguous (in, out) copies so every matmul is x @ W
        cached = self._cache.get(key)
        if cached is None or cached[0] is not w:
            cached = (w, np.ascontiguousarray(w.T))
            self._cache[key] = cached
        return cached[1]


def _fan_in(name: str, config: VocoderConfig) -> int:
    if name.startswith("embed"):
        return config.n_mels * config.dw_kernel
    if name.startswith(("pointwise", "head")):
        return config.dim
    layer = name.split(".")[2].split("_")[0]
    return {"dw": config.dw_kernel, "pw1": config.dim, "pw2": config.intermediate}[layer]


def init_random(config: VocoderConfig = VocoderConfig(), seed: int = 0) -> VocoderModel:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, unit gammas, zero betas."""
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in expected_shapes(config).items():
        if "norm" in name:
            fill = 1.0 if name.endswith("gamma") else 0.0
            tensors[name] = np.full(shape, fill, dtype=np.float32)
        else:
            s = 1.0 / np.sqrt(_fan_in(name, config))
            tensors[name] = rng.uniform(-s, s, size=shape).astype(np.float32)
    return VocoderModel.from_named(config, tensors)


def gelu(x: np.ndarray) -> np.ndarray:
    """Exact erf-based GELU."""
    return 0.5 * x * (1.0 + erf(x * np.float32(1 / np.sqrt(2))))


def layer_norm(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, eps: float = LN_EPS) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    centered = x - mean
    var = np.mean(centered * centered, axis=-1, keepdims=True)
    return centered / np.sqrt(var + np.float32(eps)) * gamma + beta


def depthwise_conv(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Same-padded per-channel temporal convolution over x of shape (..., frames, dim)."""
    k = weight.shape[1]
    half = k // 2
    frames = x.shape[-2]
    pad = [(0, 0)] * (x.ndim - 2) + [(half, half), (0, 0)]
    xp = np.pad(x, pad)
    out = np.broadcast_to(bias, x.shape).copy()
    for j in range(k):
        out += xp[..., j:j + frames, :] * weight[:, j]
    return out


def embed_conv(mel: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Same-padded dense conv n_mels -> dim over mel of shape (..., frames, n_mels)."""
    dim, n_mels, k = weight.shape
    half = k // 2
    frames = mel.shape[-2]
    pad = [(0, 0)] * (mel.ndim - 2) + [(half, half), (0, 0)]
    mp = np.pad(mel, pad)
    out = np.broadcast_to(bias, mel.shape[:-1] + (dim,)).copy()
    for j in range(k):
        out += mp[..., j:j + frames, :] @ weight[:, :, j].T
    return out


def convnext_block(x: np.ndarray, w: ConvNextBlockWeights, pw1_t=None, pw2_t=None) -> np.ndarray:
    """x + pw2(GELU(pw1(LayerNorm(dwconv(x))))) over frames x dim input."""
    if x.shape[-1] != w.dw_weight.shape[0]:
        raise ValueError(f"block expects {w.dw_weight.shape[0]} channels, got {x.shape[-1]}")
    if pw1_t is None:
        pw1_t = w.pw1_weight.T
    if pw2_t is None:
        pw2_t = w.pw2_weight.T
    h = depthwise_conv(x, w.dw_weight, w.dw_bias)
    h = layer_norm(h, w.norm_gamma, w.norm_beta)
    h = gelu(h @ pw1_t + w.pw1_bias)
    h = h @ pw2_t + w.pw2_bias
    return x + h


def backbone(model: VocoderModel, mel: np.ndarray) -> np.ndarray:
    """Latent features of shape (..., frames, dim) after the pointwise layer."""
    x = embed_conv(mel, model.embed_weight, model.embed_bias)
    for i, block in enumerate(model.blocks):
        x = convnext_block(
            x, block,
            model._transposed(f"pw1.{i}", block.pw1_weight),
            model._transposed(f"pw2.{i}", block.pw2_weight),
        )
    x = layer_norm(x, model.final_norm_gamma, model.final_norm_beta)
    return x @ model._transposed("pointwise", model.pointwise_weight) + model.pointwise_bias


def head(model: VocoderModel, latent: np.ndarray) -> np.ndarray:
    """Complex STFT bins from log-magnitude and phase channels."""
    out = latent @ model._transposed("head", model.head_weight) + model.head_bias
    n_bins = model.config.n_bins
    log_mag = np.minimum(out[..., :n_bins], np.float32(MAX_LOG_MAGNITUDE))
    phase = out[..., n_bins:]
    mag = np.exp(log_mag)
    spec = np.empty(out.shape[:-1] + (n_bins,), dtype=np.complex64)
    spec.real = mag * np.cos(phase)
    spec.imag = mag * np.sin(phase)
    return spec


def forward_frames(model: VocoderModel, mel: np.ndarray) -> np.ndarray:
    """Forward pass on raw arrays of shape (..., frames, n_mels)."""
    mel = np.asarray(mel, dtype=np.float32)
    if mel.shape[-1] != model.config.n_mels:
        raise ValueError(f"model expects {model.config.n_mels} mel channels, got {mel.shape[-1]}")
    with np.errstate(over="ignore", invalid="ignore"):
        spec = head(model, backbone(model, mel))
    if not np.all(np.isfinite(spec.view(np.float32))):
        raise NonFiniteError("non-finite values in vocoder output; weights are likely corrupt")
    return spec


def forward(model: VocoderModel, mel: MelSpectrogram) -> ComplexSpectrogram:
    c = model.config
    frames = forward_frames(model, mel.frames)
    return ComplexSpectrogram(frames, c.n_fft, c.hop, c.sample_rate)


def _features(model: VocoderModel, samples: np.ndarray) -> np.ndarray:
    c = model.config
    w = Waveform(samples, c.sample_rate)
    mel = mel_spectrogram(w, n_mels=c.n_mels, n_fft=c.n_fft, hop=c.hop)
    return mel.frames.astype(np.float32)


def generate(model: VocoderModel, y: Waveform) -> Waveform:
    """Vocoder output for ``y``, same length, hard-clipped to [-4, 4]."""
    c = model.config
    if y.sample_rate != c.sample_rate:
        raise ValueError(f"generator expects {c.sample_rate} Hz input, got {y.sample_rate}")
    spec = forward_frames(model, _features(model, y.samples))
    out = _istft_array(spec, c.n_fft, c.hop, len(y))
    return Waveform(np.clip(out, -OUTPUT_CLIP, OUTPUT_CLIP), c.sample_rate)


def generate_batch(model: VocoderModel, batch: np.ndarray) -> np.ndarray:
    """Equal-length clips of shape (batch, samples) through one batched forward pass."""
    c = model.config
    mels = np.stack([_features(model, row) for row in batch])
    spec = forward_frames(model, mels)
    out = _istft_array(spec, c.n_fft, c.hop, batch.shape[-1])
    return np.clip(out, -OUTPUT_CLIP, OUTPUT_CLIP)
