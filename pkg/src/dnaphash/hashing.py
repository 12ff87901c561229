"""Sign-only hashes over DCT coefficients, and Hamming comparison.

A hash is the sign map of the coefficient matrix (1 where a value is
strictly positive, 0 otherwise — a coefficient of exactly zero yields 0)
sampled at k cells in a fixed selection order and packed most-significant
bit first. The zero rule makes every constant sequence of a given width
collapse to the same degenerate hash 1000...0: a documented collision
class, since a uniform image keeps all of its energy in the DC term.

Before the sign map, the pipeline forces coefficients within ``ZERO_TOL``
of zero to exactly zero. Pixel matrices hold integers, and their symmetric
cancellations produce coefficients that are mathematically zero far more
often than continuous inputs would (roughly one cell per six 4x4 layouts);
a float transform renders those as noise of arbitrary sign, which would
make the affected bits depend on the FFT kernel and platform. Snapping
them to zero applies the sign rule's zero branch the way exact arithmetic
would. The band is safe on both sides: transform noise stays below ~1e-10
through dim 100 while the smallest genuinely nonzero coefficient observed
for integer layouts is ~1e-4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import StrategyMismatch, StrategyTooLarge, WidthMismatch
from .sequence import Sequence, layout_matrix
from .transform import dct2

STRATEGY_KINDS = ("block", "zigzag", "zigzag_skip_dc")

#: Widest hash the on-disk format (16-bit width field) is specified for.
MAX_WIDTH = 4096

#: Coefficients within this band of zero are treated as exactly zero (see
#: the module docstring for why, and for the measured safety margins).
ZERO_TOL = 1e-7


@lru_cache(maxsize=None)
def zigzag_positions(dim: int) -> tuple[tuple[int, int], ...]:
    """JPEG-style zigzag walk over a dim x dim grid, starting at (0, 0).

    Anti-diagonal s = i + j is traversed bottom-left to top-right when s is
    even and top-right to bottom-left when s is odd.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    out = []
    for s in range(2 * dim - 1):
        lo = max(0, s - dim + 1)
        hi = min(s, dim - 1)
        rows = range(lo, hi + 1) if s % 2 else range(hi, lo - 1, -1)
        out.extend((i, s - i) for i in rows)
    return tuple(out)


@dataclass(frozen=True)
class SelectionStrategy:
    """Which sign cells become hash bits (``kind``) and how many (``k``).

    * ``block``: the top-left sqrt(k) x sqrt(k) square, row-major; k must
      be a perfect square.
    * ``zigzag``: the first k cells of the zigzag walk.
    * ``zigzag_skip_dc``: the same walk with the (0, 0) cell skipped.
    """

    kind: str
    k: int

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}; pick one of {STRATEGY_KINDS}")
        if not 1 <= self.k <= MAX_WIDTH:
            raise ValueError(f"hash width must be within 1..{MAX_WIDTH}, got {self.k}")
        if self.kind == "block" and math.isqrt(self.k) ** 2 != self.k:
            raise ValueError(f"block selection needs a square bit count, got {self.k}")

    def positions(self, dim: int) -> tuple[tuple[int, int], ...]:
        """(row, col) cells in selection order over a dim x dim matrix."""
        if self.kind == "block":
            side = math.isqrt(self.k)
            if side > dim:
                raise StrategyTooLarge(
                    f"block side {side} does not fit a {dim}x{dim} matrix"
                )
            return tuple((i, j) for i in range(side) for j in range(side))
        skip = 1 if self.kind == "zigzag_skip_dc" else 0
        if self.k + skip > dim * dim:
            raise StrategyTooLarge(
                f"{self.kind} selection of {self.k} bits needs {self.k + skip} cells, "
                f"but a {dim}x{dim} matrix has {dim * dim}"
            )
        return zigzag_positions(dim)[skip:skip + self.k]


@lru_cache(maxsize=None)
def _selection_arrays(strategy: SelectionStrategy, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column index vectors for fancy-indexing a sign matrix."""
    pos = strategy.positions(dim)
    rows = np.fromiter((p[0] for p in pos), dtype=np.intp, count=len(pos))
    cols = np.fromiter((p[1] for p in pos), dtype=np.intp, count=len(pos))
    rows.flags.writeable = False
    cols.flags.writeable = False
    return rows, cols


@dataclass(frozen=True)
class PerceptualHash:
    """A fixed-width bit vector in coefficient-selection order.

    ``data`` packs the bits most-significant-bit first per octet; when the
    width is not a multiple of 8 the final octet's low bits are zero.
    ``source_len`` records how many bases produced the hash (0 = unknown);
    it never affects comparability.
    """

    data: bytes
    strategy: SelectionStrategy
    source_len: int = 0

    def __post_init__(self):
        nbytes = (self.strategy.k + 7) // 8
        if len(self.data) != nbytes:
            raise ValueError(
                f"{self.strategy.k}-bit hash needs {nbytes} bytes, got {len(self.data)}"
            )
        pad = nbytes * 8 - self.strategy.k
        if pad and self.data[-1] & ((1 << pad) - 1):
            raise ValueError("trailing padding bits must be zero")
        if self.source_len < 0:
            raise ValueError("source_len cannot be negative")

    @property
    def width(self) -> int:
        return self.strategy.k

    @property
    def bits(self) -> tuple[int, ...]:
        unpacked = np.unpackbits(np.frombuffer(self.data, dtype=np.uint8))
        return tuple(int(b) for b in unpacked[: self.width])

    def to_hex(self) -> str:
        """Lowercase hex, one digit per 4 bits (rounded up)."""
        return self.data.hex()[: (self.width + 3) // 4]

    def to_binary_string(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __str__(self) -> str:
        return self.to_hex()

    @classmethod
    def from_bits(cls, bits, strategy: SelectionStrategy, *, source_len: int = 0) -> "PerceptualHash":
        arr = np.asarray(list(bits), dtype=np.uint8)
        if arr.size != strategy.k:
            raise ValueError(f"expected {strategy.k} bits, got {arr.size}")
        if arr.size and arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        return cls(data=np.packbits(arr).tobytes(), strategy=strategy, source_len=source_len)

    @classmethod
    def from_binary_string(cls, text: str, strategy: SelectionStrategy, *, source_len: int = 0) -> "PerceptualHash":
        """Bits written as '0'/'1' characters; whitespace is ignored."""
        compact = "".join(text.split())
        if not set(compact) <= {"0", "1"}:
            raise ValueError("binary string may only contain 0, 1 and whitespace")
        return cls.from_bits((int(c) for c in compact), strategy, source_len=source_len)

    @classmethod
    def from_hex(cls, text: str, strategy: SelectionStrategy, *, source_len: int = 0) -> "PerceptualHash":
        digits = (strategy.k + 3) // 4
        if len(text) != digits:
            raise ValueError(f"{strategy.k}-bit hash renders as {digits} hex digits, got {len(text)}")
        data = bytes.fromhex(text if len(text) % 2 == 0 else text + "0")
        return cls(data=data, strategy=strategy, source_len=source_len)


def sign_map(coeffs) -> np.ndarray:
    """Signs of a coefficient matrix: 1 where strictly positive, else 0."""
    return (np.asarray(coeffs) > 0).astype(np.uint8)


def snap_zeros(coeffs) -> np.ndarray:
    """A copy of ``coeffs`` with values within ``ZERO_TOL`` of zero zeroed.

    The hashing pipeline applies this before :func:`sign_map` so that
    mathematically-zero coefficients take the sign rule's zero branch
    instead of inheriting the transform's noise sign.
    """
    out = np.array(coeffs, dtype=np.float64, copy=True)
    out[np.abs(out) <= ZERO_TOL] = 0.0
    return out


def select_bits(signs: np.ndarray, strategy: SelectionStrategy, *, source_len: int = 0) -> PerceptualHash:
    """Sample a square sign matrix at the strategy's cells, in order."""
    s = np.asarray(signs)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"expected a square sign matrix, got shape {s.shape}")
    rows, cols = _selection_arrays(strategy, s.shape[0])
    bits = s[rows, cols].astype(np.uint8)
    return PerceptualHash(
        data=np.packbits(bits).tobytes(), strategy=strategy, source_len=source_len
    )


def compute_hash(seq: Sequence, strategy: SelectionStrategy) -> PerceptualHash:
    """Hash one sequence: pixel layout -> DCT -> sign map -> selected bits."""
    matrix = layout_matrix(seq)
    return select_bits(
        sign_map(snap_zeros(dct2(matrix))), strategy, source_len=matrix.payload_len
    )


def hash_matrix_stack(matrices: np.ndarray, strategy: SelectionStrategy) -> np.ndarray:
    """Sign bits for a (B, N, N) stack of pixel matrices, as (B, k) uint8 rows.

    Row b holds the same bits, in the same selection order, that
    :func:`compute_hash` would produce for matrix b; packing a row with
    ``np.packbits`` yields the same bytes. One fused transform over the
    stack keeps per-sequence overhead out of bulk hashing.
    """
    stack = np.asarray(matrices, dtype=np.float64)
    if stack.ndim != 3 or stack.shape[-1] != stack.shape[-2]:
        raise ValueError(f"expected a (B, N, N) stack, got shape {stack.shape}")
    rows, cols = _selection_arrays(strategy, stack.shape[-1])
    selected = dct2(stack)[:, rows, cols]
    # value > ZERO_TOL is exactly sign_map(snap_zeros(...)) at these cells
    return (selected > ZERO_TOL).astype(np.uint8)


def hamming(a: PerceptualHash, b: PerceptualHash) -> int:
    """Number of differing bit positions between two compatible hashes."""
    if a.width != b.width:
        raise WidthMismatch(f"cannot compare a {a.width}-bit hash with a {b.width}-bit hash")
    if a.strategy != b.strategy:
        raise StrategyMismatch(
            f"cannot compare {a.strategy.kind} and {b.strategy.kind} selections"
        )
    return (int.from_bytes(a.data, "big") ^ int.from_bytes(b.data, "big")).bit_count()
