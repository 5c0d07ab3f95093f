"""Uniform integer sampling without modulo bias.

Every draw is built from raw 32-bit words. A word ``w`` is accepted for range
``n`` only if ``w < 2**32 - (2**32 % n)``; the accepted words are then
reduced mod ``n``, so each residue has exactly ``(2**32 // n)`` preimages and
probability exactly ``1/n``.
"""

import hashlib
import os

import numpy as np

__all__ = ["RandomSource", "stream_seed", "unbiased_reduce"]

WORD_BITS = 32


def stream_seed(seed: int, index: int) -> int:
    """Derive a 64-bit seed for stream ``index`` of a run seeded with ``seed``.

    blake2b over the two values as little-endian signed 128-bit integers,
    truncated to 8 bytes.
    """
    data = int(seed).to_bytes(16, "little", signed=True) + int(index).to_bytes(16, "little", signed=True)
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def unbiased_reduce(words, n, bits=WORD_BITS):
    """Keep the words below the largest multiple of ``n`` and reduce them mod ``n``.

    Returns an int64 array that is usually a little shorter than ``words``.
    """
    if n < 1 or n > 1 << bits:
        raise ValueError(f"range {n} outside [1, 2**{bits}]")
    span = 1 << bits
    limit = span - span % n
    words = np.asarray(words, dtype=np.uint64)
    return (words[words < limit] % n).astype(np.int64)


class RandomSource:
    """Seedable source of uniform integers.

    ``RandomSource.secure()`` reads the operating system CSPRNG; a seeded
    source (PCG64) exists for tests and reproducible corpora and must never
    back real password generation.
    """

    def __init__(self, seed=None):
        if seed is None:
            self._bitgen = None
        else:
            self._bitgen = np.random.PCG64(int(seed) & ((1 << 128) - 1))
        self.seed = seed

    @classmethod
    def secure(cls):
        return cls(None)

    @classmethod
    def seeded(cls, seed):
        return cls(seed)

    @classmethod
    def for_stream(cls, seed, index):
        return cls(stream_seed(seed, index))

    @property
    def is_secure(self):
        return self._bitgen is None

    def _raw_bytes(self, nbytes):
        if self._bitgen is None:
            return np.frombuffer(os.urandom(nbytes), dtype=np.uint8)
        nwords = -(-nbytes // 8)
        return self._bitgen.random_raw(nwords).view(np.uint8)[:nbytes]

    def words(self, count):
        """``count`` uniform 32-bit words."""
        return self._raw_bytes(4 * count).view(np.uint32)

    def bytes(self, count):
        """``count`` uniform bytes in [0, 255]."""
        return self._raw_bytes(count)

    def integers(self, n, size):
        """``size`` independent uniform integers in ``[0, n)`` as an int64 array."""
        n = int(n)
        size = int(size)
        out = np.empty(size, dtype=np.int64)
        filled = 0
        while filled < size:
            need = size - filled
            # acceptance is > 1/2, so a small overdraw nearly always suffices
            got = unbiased_reduce(self.words(need + need // 4 + 16), n)[:need]
            out[filled:filled + len(got)] = got
            filled += len(got)
        return out

    def randbelow(self, n):
        return int(self.integers(n, 1)[0])

    def shuffle_rows(self, arr):
        """Uniformly permute each row of a 2-D array in place (Fisher-Yates per row)."""
        rows, cols = arr.shape
        idx = np.arange(rows)
        for i in range(cols - 1, 0, -1):
            j = self.integers(i + 1, rows)
            tmp = arr[idx, i].copy()
            arr[idx, i] = arr[idx, j]
            arr[idx, j] = tmp
        return arr
