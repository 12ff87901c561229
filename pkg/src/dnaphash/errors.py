"""Exception hierarchy shared across the package.

Two intermediate bases group the leaf errors by how the command line
reports them: ``DataError`` covers bad input data (exit code 2) and
``IndexFormatError`` covers undecodable index files (exit code 3).
"""


class DnaPhashError(Exception):
    """Base class for every error raised by this package."""


class DataError(DnaPhashError):
    """Invalid input data: bad bases, malformed FASTA, mismatched hashes."""


class IndexFormatError(DnaPhashError):
    """An on-disk index that cannot be decoded."""


class InvalidBase(DataError):
    """A symbol outside the A/T/C/G alphabet."""

    def __init__(self, base, record_id=None, position=None):
        self.base = base
        self.record_id = record_id
        self.position = position
        msg = f"invalid base {base!r}"
        if record_id is not None:
            msg += f" in record {record_id!r}"
        if position is not None:
            msg += f" at position {position}"
        super().__init__(msg)

    def __reduce__(self):
        return (type(self), (self.base, self.record_id, self.position))


class SequenceTooShort(DataError):
    """A sequence shorter than the 4 bp minimum."""


class MalformedFasta(DataError):
    """FASTA text that does not follow header/sequence structure."""


class EmptyRecord(DataError):
    """A FASTA header with no sequence lines."""


class StrategyTooLarge(DataError):
    """A bit-selection strategy that needs more cells than the matrix has."""


class WidthMismatch(DataError):
    """An operation across hashes of different bit widths."""


class StrategyMismatch(DataError):
    """An operation across hashes made with different selection strategies."""


class DuplicateId(DataError):
    """The same record id used twice within one index."""


class KOutOfRange(DataError):
    """A top-k request with k outside 1..record count."""


class BadMagic(IndexFormatError):
    """An index file that does not start with the expected magic bytes."""


class UnsupportedVersion(IndexFormatError):
    """An index file written by a newer (or unknown) format revision."""


class TruncatedFile(IndexFormatError):
    """An index file that ends before its declared payload does."""


class ChecksumMismatch(IndexFormatError):
    """An index file whose trailing checksum does not match its contents."""
