"""Perceptual hashing for DNA: DCT sign-only fingerprints, storage, retrieval.

A sequence becomes a square gray image (one base per pixel), the image
becomes orthonormal DCT-II coefficients, and the signs of a fixed slice of
those coefficients become a compact bit-vector hash. Similar sequences get
nearby hashes, so Hamming distance over an index of fingerprints retrieves
relatives cheaply; a bundled simulator measures how distance tracks
sequence divergence.
"""

from .errors import (
    BadMagic,
    ChecksumMismatch,
    DataError,
    DnaPhashError,
    DuplicateId,
    EmptyRecord,
    IndexFormatError,
    InvalidBase,
    KOutOfRange,
    MalformedFasta,
    SequenceTooShort,
    StrategyMismatch,
    StrategyTooLarge,
    TruncatedFile,
    UnsupportedVersion,
    WidthMismatch,
)
from .sequence import (
    BASE_TO_INTENSITY,
    PixelMatrix,
    Sequence,
    decode_intensity,
    encode_base,
    layout_matrix,
    matrix_dim,
    parse_fasta,
    read_fasta,
)
from .transform import dct2, dct2_reference, idct2
from .hashing import (
    ZERO_TOL,
    PerceptualHash,
    SelectionStrategy,
    compute_hash,
    hamming,
    hash_matrix_stack,
    select_bits,
    sign_map,
    snap_zeros,
    zigzag_positions,
)
from .index import (
    HashIndex,
    IndexRecord,
    build_index,
    expand_windows,
    index_bytes,
    load_index,
    query,
    query_topk,
    save_index,
)
from .simulate import (
    DEFAULT_RATES,
    GROUP_PRESETS,
    DistanceHistogram,
    SimulationConfig,
    generate_sequence,
    mutate_sequence,
    mutation_count,
    preset_config,
    run_group,
    sequence_rng,
    write_histogram_csv,
    write_pair_csv,
)
from .bench import BenchReport, run_bench

__version__ = "0.1.0"

__all__ = [
    "BASE_TO_INTENSITY",
    "BadMagic",
    "BenchReport",
    "ChecksumMismatch",
    "DEFAULT_RATES",
    "DataError",
    "DistanceHistogram",
    "DnaPhashError",
    "DuplicateId",
    "EmptyRecord",
    "GROUP_PRESETS",
    "HashIndex",
    "IndexFormatError",
    "IndexRecord",
    "InvalidBase",
    "KOutOfRange",
    "MalformedFasta",
    "PerceptualHash",
    "PixelMatrix",
    "SelectionStrategy",
    "Sequence",
    "SequenceTooShort",
    "SimulationConfig",
    "StrategyMismatch",
    "StrategyTooLarge",
    "TruncatedFile",
    "UnsupportedVersion",
    "WidthMismatch",
    "ZERO_TOL",
    "build_index",
    "compute_hash",
    "dct2",
    "dct2_reference",
    "decode_intensity",
    "encode_base",
    "expand_windows",
    "generate_sequence",
    "hamming",
    "hash_matrix_stack",
    "idct2",
    "index_bytes",
    "layout_matrix",
    "load_index",
    "matrix_dim",
    "mutate_sequence",
    "mutation_count",
    "parse_fasta",
    "preset_config",
    "query",
    "query_topk",
    "read_fasta",
    "run_bench",
    "run_group",
    "save_index",
    "select_bits",
    "sequence_rng",
    "sign_map",
    "snap_zeros",
    "write_histogram_csv",
    "write_pair_csv",
    "zigzag_positions",
]
