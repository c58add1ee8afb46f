"""Single-bit min-hash fingerprints for Jaccard similarity over ID streams.

Build a fingerprint per stream with build_fingerprint (known length) or
build_fingerprint_streaming, persist it with serialize/deserialize, and
compare any two built from the same SketchConfig with median_estimate.
"""

from .estimator import (
    BlockEstimate,
    IncompatibleFingerprintsError,
    NoUsableBlocksError,
    SimilarityEstimate,
    block_estimate,
    median_estimate,
    params_for,
)
from .fingerprint import (
    BadMagicError,
    Fingerprint,
    FingerprintBlock,
    FingerprintFormatError,
    InvalidFingerprintError,
    SketchConfig,
    TruncatedError,
    UnsupportedVersionError,
    blocks_for_confidence,
    build_fingerprint,
    build_fingerprint_streaming,
    deserialize,
    rows_for_accuracy,
    serialize,
    threshold_for,
)
from .modular import MERSENNE61, FieldParams
from .oracle import exact_jaccard, hash_eval_counter

__version__ = "0.1.0"

__all__ = [
    "BadMagicError",
    "BlockEstimate",
    "Fingerprint",
    "FingerprintBlock",
    "FingerprintFormatError",
    "FieldParams",
    "IncompatibleFingerprintsError",
    "InvalidFingerprintError",
    "MERSENNE61",
    "NoUsableBlocksError",
    "SimilarityEstimate",
    "SketchConfig",
    "TruncatedError",
    "UnsupportedVersionError",
    "block_estimate",
    "blocks_for_confidence",
    "build_fingerprint",
    "build_fingerprint_streaming",
    "deserialize",
    "exact_jaccard",
    "hash_eval_counter",
    "median_estimate",
    "params_for",
    "rows_for_accuracy",
    "serialize",
    "threshold_for",
    "__version__",
]
