"""Binary weight file (``.bwef``).

Layout, little-endian, no padding::

    b"BWEF"                      magic
    u32                          format version (1)
    8 x u32                      n_mels, dim, intermediate, n_blocks,
                                 n_fft, hop, sample_rate, dw_kernel
    repeated, in canonical order (see ``expected_shapes``):
        u16 name length, UTF-8 name, u8 rank, rank x u32 dims,
        float32 values, row-major
    u32                          CRC32 of every preceding byte
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .model import VocoderConfig, VocoderModel, expected_shapes

MAGIC = b"BWEF"
VERSION = 1
_HEADER = struct.Struct("<4sI8I")


class WeightFormatError(ValueError):
    pass


class BadMagicError(WeightFormatError):
    pass


class UnsupportedVersionError(WeightFormatError):
    pass


class ChecksumError(WeightFormatError):
    pass


class TruncatedFileError(WeightFormatError):
    pass


class ShapeMismatchError(WeightFormatError):
    pass


class NonFiniteWeightsError(WeightFormatError):
    pass


def dumps(model: VocoderModel) -> bytes:
    parts = [_HEADER.pack(MAGIC, VERSION, *model.config.as_tuple())]
    for name, array in model.named_tensors():
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)) + encoded)
        parts.append(struct.pack(f"<B{array.ndim}I", array.ndim, *array.shape))
        parts.append(np.ascontiguousarray(array, dtype="<f4").tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def save_weights(model: VocoderModel, path) -> None:
    Path(path).write_bytes(dumps(model))


class _Reader:
    def __init__(self, data: bytes, end: int):
        self.data = data
        self.pos = 0
        self.end = end

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > self.end:
            raise TruncatedFileError(f"file truncated while reading {what}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk


def loads(data: bytes) -> VocoderModel:
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < _HEADER.size + 4:
        raise TruncatedFileError("file too short for header")
    _, version, *dims = _HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported format version {version}")
    try:
        config = VocoderConfig(*dims)
    except ValueError as exc:
        raise WeightFormatError(f"invalid config block: {exc}") from None

    reader = _Reader(data, len(data) - 4)
    reader.pos = _HEADER.size
    tensors = {}
    while reader.pos < reader.end:
        (name_len,) = struct.unpack("<H", reader.take(2, "tensor name length"))
        try:
            name = reader.take(name_len, "tensor name").decode("utf-8")
        except UnicodeDecodeError:
            raise WeightFormatError("tensor name is not valid UTF-8") from None
        (rank,) = struct.unpack("<B", reader.take(1, f"rank of {name!r}"))
        shape = struct.unpack(f"<{rank}I", reader.take(4 * rank, f"dims of {name!r}"))
        count = int(np.prod(shape, dtype=np.int64))
        raw = reader.take(4 * count, f"values of {name!r}")
        tensors[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float32)

    (stored,) = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(data[:-4]) != stored:
        raise ChecksumError("CRC32 mismatch; file is corrupt")

    shapes = expected_shapes(config)
    for name, shape in shapes.items():
        if name not in tensors:
            raise TruncatedFileError(f"missing tensor {name!r}")
        if tensors[name].shape != shape:
            raise ShapeMismatchError(
                f"tensor {name!r} has shape {tensors[name].shape}, config implies {shape}"
            )
        if not np.all(np.isfinite(tensors[name])):
            raise NonFiniteWeightsError(f"tensor {name!r} contains non-finite values")
    unexpected = sorted(set(tensors) - set(shapes))
    if unexpected:
        raise ShapeMismatchError(f"unexpected tensor {unexpected[0]!r} for this config")
    return VocoderModel.from_named(config, tensors)


def load_weights(path) -> VocoderModel:
    return loads(Path(path).read_bytes())
