"""Random password generation under a policy.

Composition requirements are enforced by guaranteed slots by default: one
(or ``min_k``) character is drawn from each required class group, the rest
uniformly from the union, and the positions are shuffled. That makes the
expected count of a character ``c`` in group ``S`` per password exactly

    (length - sum(min_k)) / |all| + min_S / |S|

which is what ``stats.expected_frequencies`` reports. ``enforcement="reject"``
instead redraws whole passwords until the minimums hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .charset import CharacterSet, PasswordSpec

__all__ = [
    "GenerationPolicy",
    "FilterConfig",
    "PolicyError",
    "FilterExhaustedError",
    "generate",
    "generate_array",
    "generate_many",
    "generate_filtered",
    "generate_filtered_many",
    "generate_from_spec",
    "generate_from_spec_array",
    "generate_biased",
    "generate_biased_array",
    "rows_to_strings",
]

ENFORCEMENTS = ("slots", "reject")
DEFAULT_MAX_ATTEMPTS = 128


class PolicyError(ValueError):
    pass


class FilterExhaustedError(RuntimeError):
    def __init__(self, attempts, threshold):
        self.attempts = attempts
        self.threshold = threshold
        super().__init__(
            f"no password reached log10 guesses >= {threshold:g} in {attempts} attempts; "
            "the policy is too weak for this filter"
        )


@dataclass(frozen=True)
class GenerationPolicy:
    """What to generate.

    ``min_counts`` maps the selector groups 'l' (both letter cases), 'd' and
    's' to a minimum number of characters. When it is omitted and
    ``require_each_class`` is set, every enabled group gets a minimum of one.
    """

    charset: CharacterSet
    length: int
    require_each_class: bool = False
    min_counts: Mapping[str, int] | None = None
    enforcement: str = "slots"
    _minimums: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.length < 1:
            raise PolicyError(f"length must be at least 1, got {self.length}")
        if self.enforcement not in ENFORCEMENTS:
            raise PolicyError(f"enforcement must be one of {ENFORCEMENTS}")
        groups = self.charset.groups()
        if self.min_counts is not None:
            mins = {}
            for sel, k in dict(self.min_counts).items():
                if k < 0:
                    raise PolicyError(f"minimum for {sel!r} is negative")
                if k and sel not in groups:
                    raise PolicyError(f"minimum given for {sel!r} but the charset has no such characters")
                if k:
                    mins[sel] = int(k)
        elif self.require_each_class:
            mins = {sel: 1 for sel in groups}
        else:
            mins = {}
        total = sum(mins.values())
        if total > self.length:
            raise PolicyError(
                f"length {self.length} cannot hold the {total} required characters"
            )
        object.__setattr__(self, "_minimums", tuple(sorted(mins.items())))

    @property
    def enabled_classes(self):
        return self.charset.classes

    @property
    def minimums(self) -> dict[str, int]:
        return dict(self._minimums)

    @property
    def required_slots(self) -> int:
        return sum(k for _, k in self._minimums)

    @property
    def constrained(self) -> bool:
        return bool(self._minimums)


@dataclass(frozen=True)
class FilterConfig:
    """Reject generated passwords whose log10 guess estimate is below ``threshold_log10``."""

    mode: str
    threshold_log10: float
    max_attempts: int = DEFAULT_MAX_ATTEMPTS

    def __post_init__(self):
        if self.max_attempts < 1:
            raise PolicyError("max_attempts must be at least 1")
        if self.threshold_log10 < 0:
            raise PolicyError("threshold_log10 must be non-negative")

    @classmethod
    def for_length(cls, mode, length, max_attempts=DEFAULT_MAX_ATTEMPTS):
        # strict: within 0.1 of the length; lenient: 2 below it
        if mode == "strict":
            threshold = length - 0.1
        elif mode == "lenient":
            threshold = length - 2
        else:
            raise PolicyError(f"unknown filter mode {mode!r} (strict or lenient)")
        return cls(mode, max(0.0, float(threshold)), max_attempts)

    def accepts(self, log10_guesses):
        return log10_guesses >= self.threshold_log10


def _codes(chars):
    return np.frombuffer(chars.encode("ascii"), dtype=np.uint8)


def _draw(chars, rng, rows, cols):
    codes = _codes(chars)
    return codes[rng.integers(len(codes), rows * cols).reshape(rows, cols)]


def rows_to_strings(arr):
    rows, cols = arr.shape
    text = np.ascontiguousarray(arr).tobytes().decode("ascii")
    return [text[i * cols:(i + 1) * cols] for i in range(rows)]


def _meets_minimums(arr, policy):
    ok = np.ones(arr.shape[0], dtype=bool)
    groups = policy.charset.groups()
    for sel, k in policy.minimums.items():
        member = np.isin(arr, _codes(groups[sel]))
        ok &= member.sum(axis=1) >= k
    return ok


def generate_array(policy: GenerationPolicy, rng, count: int) -> np.ndarray:
    """``count`` passwords as a (count, length) uint8 array of ASCII codes."""
    length = policy.length
    chars = policy.charset.chars
    if not policy.constrained:
        return _draw(chars, rng, count, length)
    if policy.enforcement == "reject":
        out = np.empty((count, length), dtype=np.uint8)
        filled = 0
        while filled < count:
            need = count - filled
            batch = _draw(chars, rng, need, length)
            batch = batch[_meets_minimums(batch, policy)]
            out[filled:filled + len(batch)] = batch
            filled += len(batch)
        return out
    groups = policy.charset.groups()
    parts = [_draw(groups[sel], rng, count, k) for sel, k in policy.minimums.items()]
    parts.append(_draw(chars, rng, count, length - policy.required_slots))
    arr = np.concatenate(parts, axis=1)
    return rng.shuffle_rows(arr)


def generate_many(policy, rng, count) -> list[str]:
    return rows_to_strings(generate_array(policy, rng, count))


def generate(policy: GenerationPolicy, rng) -> str:
    return generate_many(policy, rng, 1)[0]


def _estimator(estimator):
    if estimator is None:
        from .estimator import default_estimator

        return default_estimator()
    return estimator


def generate_filtered(policy, filter: FilterConfig, rng, estimator=None) -> tuple[str, int]:
    """Generate until the guess estimate clears the filter; returns (password, attempts)."""
    est = _estimator(estimator)
    for attempt in range(1, filter.max_attempts + 1):
        password = generate(policy, rng)
        if filter.accepts(est.log10_guesses(password)):
            return password, attempt
    raise FilterExhaustedError(filter.max_attempts, filter.threshold_log10)


def generate_filtered_many(policy, filter: FilterConfig, rng, count, estimator=None):
    """Batch form of :func:`generate_filtered`.

    Returns ``(passwords, attempts)`` where ``attempts[i]`` counts the draws
    spent on slot ``i``. Rejected slots are redrawn together, in slot order.
    """
    est = _estimator(estimator)
    passwords = generate_many(policy, rng, count)
    attempts = np.ones(count, dtype=np.int64)
    pending = [i for i, pw in enumerate(passwords) if not filter.accepts(est.log10_guesses(pw))]
    while pending:
        if attempts[pending].max() >= filter.max_attempts:
            raise FilterExhaustedError(filter.max_attempts, filter.threshold_log10)
        redraw = generate_many(policy, rng, len(pending))
        still = []
        for i, pw in zip(pending, redraw):
            attempts[i] += 1
            passwords[i] = pw
            if not filter.accepts(est.log10_guesses(pw)):
                still.append(i)
        pending = still
    return passwords, attempts


def generate_from_spec_array(spec: PasswordSpec, charset: CharacterSet, rng, count) -> np.ndarray:
    cols = []
    for i, sel in enumerate(spec.slots):
        chars = charset.select(sel)
        if not chars:
            raise PolicyError(f"spec slot {i} ({sel!r}) has no characters in this charset")
        cols.append(_draw(chars, rng, count, 1))
    return np.concatenate(cols, axis=1)


def generate_from_spec(spec: PasswordSpec, charset: CharacterSet, rng) -> str:
    return rows_to_strings(generate_from_spec_array(spec, charset, rng, 1))[0]


def generate_biased_array(policy: GenerationPolicy, rng, count) -> np.ndarray:
    """Deliberately biased fixture: each character is ``charset[byte % |charset|]``.

    Whenever 256 is not a multiple of the charset size, the first
    ``256 % size`` characters are over-represented.
    """
    if policy.constrained:
        raise PolicyError("the biased fixture does not support composition requirements")
    codes = _codes(policy.charset.chars)
    if len(codes) > 256:
        raise PolicyError("the biased fixture needs a charset of at most 256 characters")
    raw = rng.bytes(count * policy.length).astype(np.int64)
    return codes[(raw % len(codes)).reshape(count, policy.length)]


def generate_biased(policy: GenerationPolicy, rng) -> str:
    return rows_to_strings(generate_biased_array(policy, rng, 1))[0]
