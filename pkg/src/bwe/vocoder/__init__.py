from .model import (
    ConvNextBlockWeights,
    NonFiniteError,
    VocoderConfig,
    VocoderModel,
    convnext_block,
    expected_shapes,
    forward,
    forward_frames,
    generate,
    generate_batch,
    init_random,
)
from .weights import (
    BadMagicError,
    ChecksumError,
    NonFiniteWeightsError,
    ShapeMismatchError,
    TruncatedFileError,
    UnsupportedVersionError,
    WeightFormatError,
    load_weights,
    save_weights,
)
