"""Bulk corpus generation and streaming frequency counting.

A corpus is plain text: one password per line, LF terminated, ASCII only.
Generation is split into blocks of ``BLOCK_SIZE`` passwords and block ``b``
draws from ``RandomSource.for_stream(seed, b)``, so the output depends only
on the spec and never on how many workers produced it.
"""

from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .charset import build_charset, builtin_profiles, composition_name, parse_composition
from .generator import (
    FilterConfig,
    GenerationPolicy,
    generate_array,
    generate_biased_array,
    generate_filtered_many,
)
from .rng import RandomSource
from .stats import FrequencyTable

__all__ = [
    "BLOCK_SIZE",
    "GENERATOR_KINDS",
    "CorpusError",
    "CorpusSpec",
    "generate_corpus",
    "generate_block",
    "count_frequencies",
    "iter_passwords",
]

BLOCK_SIZE = 1 << 16
GENERATOR_KINDS = ("uniform", "constrained", "filtered", "biased")
NEWLINE = 0x0A


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusSpec:
    """One corpus: which profile and composition, how long, how many, how generated.

    ``generator_kind``:
      uniform      every character uniform over the charset
      constrained  at least one character of each enabled group (slots + shuffle)
      filtered     uniform, then redrawn until the guess estimate clears ``filter_mode``
      biased       the modulo-biased fixture
    """

    profile: str
    composition: str
    length: int
    count: int
    seed: int
    generator_kind: str = "uniform"
    filter_mode: str = "lenient"

    def __post_init__(self):
        if self.count < 1:
            raise CorpusError(f"count must be at least 1, got {self.count}")
        if self.generator_kind not in GENERATOR_KINDS:
            raise CorpusError(f"generator_kind must be one of {GENERATOR_KINDS}")
        object.__setattr__(self, "composition", composition_name(parse_composition(self.composition)))

    def resolve(self, profiles=None):
        """Charset, policy and filter for this spec; raises on unsupported combinations."""
        profiles = builtin_profiles() if profiles is None else profiles
        if self.profile not in profiles:
            raise CorpusError(f"unknown profile {self.profile!r}")
        profile = profiles[self.profile]
        if not profile.supports_length(self.length):
            lo, hi = profile.supported_lengths
            raise CorpusError(f"profile {self.profile!r} supports lengths {lo}..{hi}, not {self.length}")
        charset = build_charset(self.profile, self.composition, profiles=profiles)
        policy = GenerationPolicy(charset, self.length,
                                  require_each_class=self.generator_kind == "constrained")
        filt = FilterConfig.for_length(self.filter_mode, self.length) if self.generator_kind == "filtered" else None
        return policy, filt


def generate_block(spec: CorpusSpec, block: int, profiles=None) -> bytes:
    """Bytes of block ``block`` of the corpus, newline terminated."""
    policy, filt = spec.resolve(profiles)
    start = block * BLOCK_SIZE
    n = min(BLOCK_SIZE, spec.count - start)
    if n <= 0:
        return b""
    rng = RandomSource.for_stream(spec.seed, block)
    if spec.generator_kind == "biased":
        arr = generate_biased_array(policy, rng, n)
    elif spec.generator_kind == "filtered":
        pws, _ = generate_filtered_many(policy, filt, rng, n)
        arr = np.frombuffer("".join(pws).encode("ascii"), dtype=np.uint8).reshape(n, spec.length)
    else:
        arr = generate_array(policy, rng, n)
    out = np.empty((n, spec.length + 1), dtype=np.uint8)
    out[:, :-1] = arr
    out[:, -1] = NEWLINE
    return out.tobytes()


def _block_job(args):
    spec, block, profiles = args
    return generate_block(spec, block, profiles)


def generate_corpus(spec: CorpusSpec, sink, profiles=None, workers: int = 1) -> int:
    """Write ``spec.count`` passwords to ``sink`` (text or binary); returns the count written."""
    spec.resolve(profiles)  # fail before writing anything
    nblocks = -(-spec.count // BLOCK_SIZE)
    text = isinstance(sink, io.TextIOBase)

    def emit(data):
        sink.write(data.decode("ascii") if text else data)

    if workers > 1 and nblocks > 1:
        jobs = [(spec, b, profiles) for b in range(nblocks)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for data in pool.map(_block_job, jobs):
                emit(data)
    else:
        for b in range(nblocks):
            emit(generate_block(spec, b, profiles))
    return spec.count


def _chunks(source, chunk_size):
    if isinstance(source, (bytes, bytearray)):
        yield bytes(source)
        return
    while True:
        data = source.read(chunk_size)
        if not data:
            return
        if isinstance(data, str):
            try:
                data = data.encode("ascii")
            except UnicodeEncodeError as e:
                raise CorpusError(f"non-ASCII character {data[e.start]!r} in corpus") from None
        yield data


def count_frequencies(source, expected_length: int, chunk_size: int = 1 << 22) -> FrequencyTable:
    """Stream a newline-delimited corpus into a FrequencyTable.

    ``source`` is a binary or text stream (or a bytes object). Memory stays
    bounded by ``chunk_size`` plus one line. A missing final newline is fine.
    """
    if expected_length < 1:
        raise CorpusError("expected_length must be at least 1")
    counts = np.zeros(256, dtype=np.int64)
    lines = 0
    tail = b""

    def consume(buf, final):
        # buf holds whole lines, each terminated by a newline unless final
        nonlocal lines
        arr = np.frombuffer(buf, dtype=np.uint8)
        nl = np.flatnonzero(arr == NEWLINE)
        ends = np.append(nl, len(arr)) if final else nl
        starts = np.concatenate(([0], nl[:len(ends) - 1] + 1))
        bad_len = np.flatnonzero(ends - starts != expected_length)
        bad_byte = np.flatnonzero(((arr < 32) | (arr > 126)) & (arr != NEWLINE))
        if len(bad_byte):
            pos = int(bad_byte[0])
            i = int(np.searchsorted(ends, pos))
            if not len(bad_len) or bad_len[0] >= i:
                raise CorpusError(
                    f"line {lines + i + 1}: byte 0x{arr[pos]:02x} is not printable ASCII"
                )
        if len(bad_len):
            i = int(bad_len[0])
            raise CorpusError(
                f"line {lines + i + 1}: length {int(ends[i] - starts[i])}, expected {expected_length}"
            )
        counts[:] += np.bincount(arr, minlength=256)
        counts[NEWLINE] = 0
        lines += len(ends)

    for data in _chunks(source, chunk_size):
        data = tail + data
        cut = data.rfind(b"\n") + 1
        if cut:
            consume(data[:cut], False)
        tail = data[cut:]
    if tail:
        consume(tail, True)
    table = {chr(c): int(n) for c, n in enumerate(counts) if n}
    return FrequencyTable(table, lines, expected_length)


def iter_passwords(source):
    """Yield passwords (without newlines) from a text or binary stream."""
    for line in source:
        if isinstance(line, bytes):
            line = line.decode("ascii")
        yield line.rstrip("\n")
