"""Hash index: build from sequences, query by Hamming distance, save/load.

On-disk layout (all integers little-endian):

    magic "DPH1" | version u16 | width u16 (bits) | strategy tag u8 |
    reserved u8 = 0 | record count u64
    per record: id length u16 | id (UTF-8) | source length u32 |
                hash payload, ceil(width / 8) bytes
    trailer: CRC-32 (zlib) of every preceding byte, u32

Strategy tags: 0 = block, 1 = zigzag, 2 = zigzag_skip_dc.
"""

from __future__ import annotations

import logging
import struct
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import BinaryIO, Iterable

from .errors import (
    BadMagic,
    ChecksumMismatch,
    DuplicateId,
    IndexFormatError,
    KOutOfRange,
    StrategyMismatch,
    TruncatedFile,
    UnsupportedVersion,
    WidthMismatch,
)
from .hashing import PerceptualHash, SelectionStrategy, STRATEGY_KINDS, compute_hash
from .sequence import MIN_LENGTH, Sequence

log = logging.getLogger(__name__)

MAGIC = b"DPH1"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sHHBBQ")
_ID_LEN = struct.Struct("<H")
_SOURCE_LEN = struct.Struct("<I")
_CRC = struct.Struct("<I")

# Sequences per task when hashing across processes.
_BUILD_CHUNK = 512


@dataclass(frozen=True)
class IndexRecord:
    """One indexed entry: an id and the hash of its sequence."""

    id: str
    hash: PerceptualHash

    @property
    def source_len(self) -> int:
        return self.hash.source_len


@dataclass(frozen=True)
class HashIndex:
    """An ordered collection of records sharing one strategy and width."""

    strategy: SelectionStrategy
    records: tuple[IndexRecord, ...]

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if not rec.id:
                raise ValueError("record ids cannot be empty")
            if rec.id in seen:
                raise DuplicateId(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)
            if rec.hash.strategy != self.strategy:
                raise StrategyMismatch(
                    f"record {rec.id!r} was hashed with {rec.hash.strategy}, "
                    f"index uses {self.strategy}"
                )

    @property
    def width(self) -> int:
        return self.strategy.k

    def __len__(self) -> int:
        return len(self.records)


def expand_windows(seqs: Iterable[Sequence], window: int, step: int) -> Iterable[Sequence]:
    """Slice sequences into fixed-size windows with ids ``parent:offset``.

    Offsets are 0-based and advance by ``step``; a sequence shorter than
    the window yields nothing (with a warning).
    """
    if window < MIN_LENGTH:
        raise ValueError(f"window must be at least {MIN_LENGTH} bp")
    if step < 1:
        raise ValueError("step must be positive")
    for seq in seqs:
        if len(seq) < window:
            log.warning("sequence %r (%d bp) is shorter than the %d bp window; skipped",
                        seq.id, len(seq), window)
            continue
        for off in range(0, len(seq) - window + 1, step):
            yield Sequence(id=f"{seq.id}:{off}", bases=seq.bases[off:off + window])


def _hash_chunk(seqs: list[Sequence], strategy: SelectionStrategy) -> list[PerceptualHash]:
    return [compute_hash(s, strategy) for s in seqs]


def build_index(
    seqs: Iterable[Sequence],
    strategy: SelectionStrategy,
    *,
    window: int | None = None,
    step: int | None = None,
    workers: int = 1,
) -> HashIndex:
    """Hash every sequence (or every window of it) into a fresh index.

    Record order follows input order regardless of ``workers``. With
    ``window`` set, each input is expanded by :func:`expand_windows` first
    (``step`` defaults to the window size, i.e. non-overlapping).
    """
    items = list(seqs)
    if window is not None:
        items = list(expand_windows(items, window, step if step is not None else window))
    if not items:
        raise ValueError("nothing to index: no sequences (or no windows) supplied")

    if workers > 1 and len(items) > _BUILD_CHUNK:
        chunks = [items[i:i + _BUILD_CHUNK] for i in range(0, len(items), _BUILD_CHUNK)]
        hashes: list[PerceptualHash] = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(partial(_hash_chunk, strategy=strategy), chunks):
                hashes.extend(part)
    else:
        hashes = _hash_chunk(items, strategy)

    records = tuple(
        IndexRecord(id=s.id, hash=h) for s, h in zip(items, hashes)
    )
    return HashIndex(strategy=strategy, records=records)


def _check_compatible(index: HashIndex, probe: PerceptualHash) -> None:
    if probe.width != index.width:
        raise WidthMismatch(
            f"query hash is {probe.width} bits, index holds {index.width}-bit hashes"
        )
    if probe.strategy != index.strategy:
        raise StrategyMismatch(
            f"query uses {probe.strategy.kind}, index uses {index.strategy.kind}"
        )


def _scan(index: HashIndex, probe: PerceptualHash) -> list[tuple[str, int]]:
    q = int.from_bytes(probe.data, "big")
    return [
        (rec.id, (q ^ int.from_bytes(rec.hash.data, "big")).bit_count())
        for rec in index.records
    ]


def query(index: HashIndex, probe: PerceptualHash, max_dist: int) -> list[tuple[str, int]]:
    """All (id, distance) pairs within ``max_dist``, closest first, ties by id."""
    _check_compatible(index, probe)
    if not 0 <= max_dist <= index.width:
        raise ValueError(f"max_dist must be within 0..{index.width}, got {max_dist}")
    hits = [(rid, d) for rid, d in _scan(index, probe) if d <= max_dist]
    hits.sort(key=lambda pair: (pair[1], pair[0]))
    return hits


def query_topk(index: HashIndex, probe: PerceptualHash, k: int) -> list[tuple[str, int]]:
    """The k nearest (id, distance) pairs, closest first, ties by id."""
    _check_compatible(index, probe)
    if not 1 <= k <= len(index.records):
        raise KOutOfRange(f"k must be within 1..{len(index.records)}, got {k}")
    hits = _scan(index, probe)
    hits.sort(key=lambda pair: (pair[1], pair[0]))
    return hits[:k]


def index_bytes(index: HashIndex) -> bytes:
    """Serialize an index to its binary file format."""
    buf = bytearray(
        _HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            index.width,
            STRATEGY_KINDS.index(index.strategy.kind),
            0,
            len(index.records),
        )
    )
    for rec in index.records:
        ident = rec.id.encode("utf-8")
        if len(ident) > 0xFFFF:
            raise ValueError(f"record id {rec.id[:32]!r}... is too long to serialize")
        buf += _ID_LEN.pack(len(ident))
        buf += ident
        buf += _SOURCE_LEN.pack(rec.source_len)
        buf += rec.hash.data
    buf += _CRC.pack(zlib.crc32(bytes(buf)))
    return bytes(buf)


def save_index(index: HashIndex, sink: BinaryIO) -> None:
    """Write the binary format to an open binary file object."""
    sink.write(index_bytes(index))


def load_index(source: BinaryIO) -> HashIndex:
    """Read an index back; the inverse of :func:`save_index`.

    Raises BadMagic, UnsupportedVersion, TruncatedFile or ChecksumMismatch
    when the bytes cannot be decoded.
    """
    data = source.read()
    if len(data) < _HEADER.size + _CRC.size:
        raise TruncatedFile(f"index file holds {len(data)} bytes; even an empty index needs "
                            f"{_HEADER.size + _CRC.size}")
    magic, version, width, tag, _reserved, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, found {magic!r}")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"index format version {version} is not supported")

    nbytes = (width + 7) // 8
    payload_end = len(data) - _CRC.size
    offset = _HEADER.size
    raw_records: list[tuple[bytes, int, bytes]] = []
    for _ in range(count):
        if offset + _ID_LEN.size > payload_end:
            raise TruncatedFile("file ends inside a record id length")
        (id_len,) = _ID_LEN.unpack_from(data, offset)
        offset += _ID_LEN.size
        if offset + id_len + _SOURCE_LEN.size + nbytes > payload_end:
            raise TruncatedFile("file ends inside a record")
        ident = data[offset:offset + id_len]
        offset += id_len
        (source_len,) = _SOURCE_LEN.unpack_from(data, offset)
        offset += _SOURCE_LEN.size
        raw_records.append((ident, source_len, data[offset:offset + nbytes]))
        offset += nbytes
    if offset != payload_end:
        raise TruncatedFile(f"{payload_end - offset} unexpected bytes after the last record")

    (stored_crc,) = _CRC.unpack_from(data, payload_end)
    actual_crc = zlib.crc32(data[:payload_end])
    if stored_crc != actual_crc:
        raise ChecksumMismatch(
            f"stored CRC-32 {stored_crc:#010x} != computed {actual_crc:#010x}"
        )

    try:
        strategy = SelectionStrategy(kind=STRATEGY_KINDS[tag] if tag < len(STRATEGY_KINDS) else "?",
                                     k=width)
    except ValueError as exc:
        raise UnsupportedVersion(f"header does not decode to a known strategy: {exc}") from None

    records = []
    for ident, source_len, payload in raw_records:
        try:
            rid = ident.decode("utf-8")
        except UnicodeDecodeError:
            raise IndexFormatError("record id is not valid UTF-8") from None
        records.append(
            IndexRecord(id=rid, hash=PerceptualHash(data=payload, strategy=strategy,
                                                    source_len=source_len))
        )
    return HashIndex(strategy=strategy, records=tuple(records))
