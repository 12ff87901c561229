"""Command line front end: hash, index, query, simulate, bench.

Exit codes: 0 success, 1 usage error, 2 data error (bad bases, mismatched
hash shapes), 3 I/O or index-format error. File outputs are written to a
temp file in the target directory and moved into place, so a failed run
never leaves a partial artifact behind.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import math
import os
import sys
import tempfile

from .bench import run_bench
from .errors import DataError, IndexFormatError, StrategyTooLarge
from .hashing import STRATEGY_KINDS, SelectionStrategy, compute_hash
from .index import build_index, load_index, query, query_topk, save_index
from .sequence import Sequence, parse_fasta
from .simulate import (
    DEFAULT_N_PRIMARY,
    DEFAULT_RATES,
    GROUP_PRESETS,
    SimulationConfig,
    preset_config,
    run_group,
    write_histogram_csv,
    write_pair_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3

WORKERS_ENV = "DNAPHASH_WORKERS"

log = logging.getLogger(__name__)


class UsageError(Exception):
    """A bad flag value or combination; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage problems; this package reserves 2 for
    # data errors, so route parser complaints through exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _resolve_workers(value: int | None) -> int:
    if value is None:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            value = int(raw)
        except ValueError:
            raise UsageError(f"{WORKERS_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise UsageError(f"workers must be at least 1, got {value}")
    return value


def _strategy(args) -> SelectionStrategy:
    kind = args.strategy
    if kind is None:
        # Presets pair 64-bit hashes with block selection and 32-bit ones
        # with zigzag; fall back the same way for square vs non-square.
        kind = "block" if math.isqrt(args.width) ** 2 == args.width else "zigzag"
    try:
        return SelectionStrategy(kind, args.width)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


@contextlib.contextmanager
def _atomic_text(path: str | None):
    """Text sink that only appears at ``path`` when the writer succeeds."""
    if path in (None, "-"):
        yield sys.stdout
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dnaphash-", suffix=".tmp")
    try:
        with open(fd, "w", encoding="utf-8", newline="") as handle:
            yield handle
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


@contextlib.contextmanager
def _atomic_binary(path: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dnaphash-", suffix=".tmp")
    try:
        with open(fd, "wb") as handle:
            yield handle
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _read_sequences(paths: list[str], n_policy: str) -> list[Sequence]:
    seqs: list[Sequence] = []
    for path in paths or ["-"]:
        if path == "-":
            seqs.extend(parse_fasta(sys.stdin, n_policy=n_policy))
        else:
            with open(path, "r", encoding="utf-8") as handle:
                seqs.extend(parse_fasta(handle, n_policy=n_policy))
    return seqs


def cmd_hash(args) -> int:
    strategy = _strategy(args)
    seqs = _read_sequences(args.fasta, args.n_policy)
    for seq in seqs:
        try:
            digest = compute_hash(seq, strategy)
        except StrategyTooLarge as exc:
            raise StrategyTooLarge(f"record {seq.id!r}: {exc}") from None
        print(f"{seq.id}\t{digest.to_hex()}")
    return EXIT_OK


def cmd_index(args) -> int:
    strategy = _strategy(args)
    workers = _resolve_workers(args.workers)
    if args.step is not None and args.window is None:
        raise UsageError("--step only makes sense together with --window")
    seqs = _read_sequences(args.fasta, args.n_policy)
    try:
        index = build_index(seqs, strategy, window=args.window, step=args.step,
                            workers=workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _atomic_binary(args.output) as sink:
        save_index(index, sink)
    log.info("indexed %d records into %s", len(index), args.output)
    return EXIT_OK


def cmd_query(args) -> int:
    with open(args.index, "rb") as handle:
        index = load_index(handle)
    seqs = _read_sequences([args.fasta], args.n_policy)
    for seq in seqs:
        try:
            probe = compute_hash(seq, index.strategy)
        except StrategyTooLarge as exc:
            raise StrategyTooLarge(f"record {seq.id!r}: {exc}") from None
        if args.top_k is not None:
            hits = query_topk(index, probe, args.top_k)
        else:
            if not 0 <= args.max_dist <= index.width:
                raise UsageError(
                    f"--max-dist must be within 0..{index.width}, got {args.max_dist}"
                )
            hits = query(index, probe, args.max_dist)
        for rid, dist in hits:
            print(f"{seq.id}\t{rid}\t{dist}")
    return EXIT_OK


def _simulation_config(args) -> SimulationConfig:
    rates = None
    if args.rates is not None:
        try:
            rates = tuple(float(r) for r in args.rates.split(","))
        except ValueError:
            raise UsageError(f"--rates must be a comma list of numbers, got {args.rates!r}") from None
    try:
        if args.group is not None:
            if args.len is not None or args.width is not None:
                raise UsageError("--group already fixes --len and --width")
            return preset_config(args.group, n_primary=args.n, seed=args.seed, rates=rates)
        if args.len is None or args.width is None:
            raise UsageError("either --group or both --len and --width are required")
        kind = args.strategy or ("block" if math.isqrt(args.width) ** 2 == args.width else "zigzag")
        return SimulationConfig(
            group="custom",
            seq_len=args.len,
            hash_width=args.width,
            strategy=SelectionStrategy(kind, args.width),
            divergence_rates=rates if rates is not None else DEFAULT_RATES,
            n_primary=args.n if args.n is not None else DEFAULT_N_PRIMARY,
            seed=args.seed if args.seed is not None else 0,
        )
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args) -> int:
    config = _simulation_config(args)
    workers = _resolve_workers(args.workers)
    hist = run_group(config, workers=workers, keep_pairs=args.per_pair is not None)
    with _atomic_text(args.output) as sink:
        write_histogram_csv(hist, sink)
    if args.per_pair is not None:
        with _atomic_text(args.per_pair) as sink:
            write_pair_csv(hist, sink)
    return EXIT_OK


def cmd_bench(args) -> int:
    strategy = _strategy(args)
    workers = _resolve_workers(args.workers)
    try:
        report = run_bench(seq_len=args.len, strategy=strategy, n=args.n,
                           seed=args.seed, workers=workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"sequences        {report.n}")
    print(f"sequence_length  {report.seq_len}")
    print(f"hash_width       {report.strategy.k}")
    print(f"strategy         {report.strategy.kind}")
    print(f"workers          {report.workers}")
    print(f"generation       {report.generation_seconds:.3f} s"
          f"  ({report.generation_rate:,.0f} seq/s)")
    print(f"hashing          {report.hashing_seconds:.3f} s"
          f"  ({report.hashing_rate:,.0f} hashes/s)")
    print(f"generation_share {report.generation_share:.1%}")
    print(f"bits_set         {report.bits_set}")
    return EXIT_OK


def _add_strategy_flags(parser, *, default_width=64):
    parser.add_argument("--width", type=int, default=default_width,
                        help=f"hash width in bits (default {default_width})")
    parser.add_argument("--strategy", choices=STRATEGY_KINDS, default=None,
                        help="bit selection (default: block for square widths, else zigzag)")


def _add_common_input_flags(parser):
    parser.add_argument("--n-policy", choices=("reject", "skip-record"),
                        default="reject",
                        help="what to do with records holding non-ATCG symbols")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dnaphash",
                     description="DCT sign-only perceptual hashing for DNA sequences.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hash", help="print id<TAB>hex hash for FASTA records")
    p.add_argument("fasta", nargs="*", help="FASTA files ('-' or none = stdin)")
    _add_strategy_flags(p)
    _add_common_input_flags(p)
    p.set_defaults(func=cmd_hash)

    p = sub.add_parser("index", help="hash FASTA records into a binary index file")
    p.add_argument("fasta", nargs="*", help="FASTA files ('-' or none = stdin)")
    p.add_argument("-o", "--output", required=True, help="index file to write")
    _add_strategy_flags(p)
    _add_common_input_flags(p)
    p.add_argument("--window", type=int, default=None,
                   help="index fixed-size windows of each sequence instead of whole records")
    p.add_argument("--step", type=int, default=None,
                   help="window start spacing (default: the window size)")
    p.add_argument("--workers", type=int, default=None,
                   help=f"hashing processes (default ${WORKERS_ENV} or 1)")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="look up FASTA records in an index")
    p.add_argument("index", help="index file written by 'dnaphash index'")
    p.add_argument("fasta", help="FASTA file of query records ('-' = stdin)")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--max-dist", type=int, default=None,
                       help="report every record within this Hamming distance")
    group.add_argument("--top-k", type=int, default=None,
                       help="report the k nearest records")
    _add_common_input_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("simulate",
                       help="hash random primaries against mutated variants; write a distance CSV")
    p.add_argument("--group", default=None,
                   help=f"preset group ({', '.join(GROUP_PRESETS)})")
    p.add_argument("--len", type=int, default=None, help="sequence length for a custom group")
    p.add_argument("--width", type=int, default=None, help="hash width for a custom group")
    p.add_argument("--strategy", choices=STRATEGY_KINDS, default=None,
                   help="bit selection for a custom group")
    p.add_argument("-n", type=int, default=None,
                   help="primary sequences per group (default 10000)")
    p.add_argument("--seed", type=int, default=None, help="base RNG seed (default 0)")
    p.add_argument("--rates", default=None,
                   help="comma list of divergence rates in [0, 1] (default 0.05,0.1,0.2,0.3,0.5,1.0)")
    p.add_argument("-o", "--output", default="-", help="CSV destination (default stdout)")
    p.add_argument("--per-pair", default=None,
                   help="also write one ordinal,rate,distance row per hashed pair")
    p.add_argument("--workers", type=int, default=None,
                   help=f"simulation processes (default ${WORKERS_ENV} or 1)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="measure generation and hashing throughput")
    p.add_argument("--len", type=int, default=100, help="sequence length (default 100)")
    _add_strategy_flags(p)
    p.add_argument("-n", type=int, default=100_000,
                   help="sequences to hash (default 100000)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--workers", type=int, default=None,
                   help=f"hashing processes (default ${WORKERS_ENV} or 1)")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dnaphash: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"dnaphash: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (IndexFormatError, OSError) as exc:
        print(f"dnaphash: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
