"""Audit statistics: entropy, expected-frequency models, chi-squared uniformity
with Bonferroni correction, frequency outliers and strength thresholds."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

__all__ = [
    "Strength",
    "StrengthThresholds",
    "FrequencyTable",
    "Chi2Result",
    "OutlierReport",
    "StatsError",
    "classify_strength",
    "shannon_entropy",
    "information_entropy",
    "bits_to_log10_guesses",
    "expected_frequencies",
    "uniform_frequencies",
    "chi2_cdf",
    "chi2_sf",
    "regularized_gamma_p",
    "regularized_gamma_q",
    "bonferroni",
    "chi2_uniformity",
    "frequency_outliers",
    "weak_fraction",
]

ALPHA = 0.05


class StatsError(ValueError):
    pass


class Strength(enum.Enum):
    ONLINE_WEAK = "OnlineWeak"
    OFFLINE_WEAK = "OfflineWeak"
    STRONG = "Strong"


@dataclass(frozen=True)
class StrengthThresholds:
    """Guess counts an attacker must exceed; bits are the matching entropy levels.

    A password needing more than ``online_guesses`` guesses resists online
    attack, more than ``offline_guesses`` resists offline attack.
    """

    online_guesses: float = 1e6
    offline_guesses: float = 1e14
    online_bits: int = 21
    offline_bits: int = 48

    def __post_init__(self):
        # average brute-force cost of b bits is 2**b / 2
        if 2.0 ** self.online_bits / 2 < self.online_guesses:
            raise StatsError("online_bits too small for online_guesses")
        if 2.0 ** self.offline_bits / 2 < self.offline_guesses:
            raise StatsError("offline_bits too small for offline_guesses")
        if self.offline_guesses < self.online_guesses:
            raise StatsError("offline threshold below online threshold")


def classify_strength(log10_guesses: float, thresholds: StrengthThresholds | None = None) -> Strength:
    """Boundary values count as weak: exactly 10**6 guesses is OnlineWeak."""
    t = thresholds or StrengthThresholds()
    if log10_guesses <= math.log10(t.online_guesses):
        return Strength.ONLINE_WEAK
    if log10_guesses <= math.log10(t.offline_guesses):
        return Strength.OFFLINE_WEAK
    return Strength.STRONG


# ---------------------------------------------------------------------------
# frequency tables and entropy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrequencyTable:
    counts: Mapping[str, int]
    total_passwords: int
    password_length: int
    total_chars: int = field(init=False)

    def __post_init__(self):
        counts = dict(self.counts)
        if any(v < 0 for v in counts.values()):
            raise StatsError("negative count")
        total = sum(counts.values())
        if total != self.total_passwords * self.password_length:
            raise StatsError(
                f"counts sum to {total}, expected {self.total_passwords} x {self.password_length}"
            )
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "total_chars", total)

    @classmethod
    def from_passwords(cls, passwords: Iterable[str], length: int) -> "FrequencyTable":
        counts: Counter = Counter()
        n = 0
        for pw in passwords:
            if len(pw) != length:
                raise StatsError(f"password {n + 1} has length {len(pw)}, expected {length}")
            counts.update(pw)
            n += 1
        return cls(dict(counts), n, length)

    def __add__(self, other: "FrequencyTable") -> "FrequencyTable":
        if other.password_length != self.password_length:
            raise StatsError("cannot merge tables of different password lengths")
        merged = Counter(self.counts)
        merged.update(other.counts)
        return FrequencyTable(dict(merged), self.total_passwords + other.total_passwords,
                              self.password_length)


def shannon_entropy(table: FrequencyTable) -> float:
    """Bits per character of the observed character distribution."""
    if table.total_chars == 0:
        raise StatsError("empty frequency table")
    total = table.total_chars
    return -math.fsum((c / total) * math.log2(c / total) for c in table.counts.values() if c > 0)


def information_entropy(charset_size: int, length: int) -> float:
    """Bits of a uniformly random password: length * log2(charset_size)."""
    if charset_size < 2:
        raise StatsError("charset_size must be at least 2")
    if length < 1:
        raise StatsError("length must be at least 1")
    return length * math.log2(charset_size)


def bits_to_log10_guesses(bits: float) -> float:
    """log10 of the average brute-force cost 2**bits / 2."""
    return (bits - 1) * math.log10(2)


# ---------------------------------------------------------------------------
# expected-frequency models
# ---------------------------------------------------------------------------


def uniform_frequencies(charset, length) -> dict[str, Fraction]:
    """Flat model: every character is expected length / |charset| times per password."""
    chars = charset.chars if hasattr(charset, "chars") else str(charset)
    share = Fraction(length, len(chars))
    return {c: share for c in chars}


def expected_frequencies(policy) -> dict[str, Fraction]:
    """Expected occurrences of each character per password under ``policy``.

    Without a composition requirement this is the flat model. With one, a
    character of group S receives (length - sum of minimums) / |all| plus
    min_S / |S|. The values are exact fractions summing to ``length``.
    """
    charset = policy.charset
    mins = policy.minimums
    if not mins:
        return uniform_frequencies(charset, policy.length)
    free = Fraction(policy.length - policy.required_slots, len(charset))
    out = {c: free for c in charset.chars}
    for sel, chars in charset.groups().items():
        k = mins.get(sel, 0)
        if k:
            bonus = Fraction(k, len(chars))
            for c in chars:
                out[c] += bonus
    return out


# ---------------------------------------------------------------------------
# chi-squared distribution
# ---------------------------------------------------------------------------

_EPS = 1e-16
_MAX_ITER = 100_000
_TINY = 1e-300


def _gamma_prefactor(a, x):
    return math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_series(a, x):
    """P(a, x) by its power series; converges quickly for x < a + 1."""
    ap = a
    term = total = 1.0 / a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError("incomplete gamma series did not converge")
    return total * _gamma_prefactor(a, x)


def _gamma_continued_fraction(a, x):
    """Q(a, x) by Lentz's continued fraction; converges quickly for x >= a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError("incomplete gamma continued fraction did not converge")
    return h * _gamma_prefactor(a, x)


def regularized_gamma_p(a: float, x: float) -> float:
    if a <= 0 or x < 0:
        raise StatsError("regularized gamma needs a > 0 and x >= 0")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return min(1.0, _gamma_series(a, x))
    return max(0.0, 1.0 - _gamma_continued_fraction(a, x))


def regularized_gamma_q(a: float, x: float) -> float:
    if a <= 0 or x < 0:
        raise StatsError("regularized gamma needs a > 0 and x >= 0")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_continued_fraction(a, x))


def _check_chi2_args(x, df):
    if df < 1 or int(df) != df:
        raise StatsError(f"df must be a positive integer, got {df}")
    if not x >= 0:
        raise StatsError(f"chi-squared statistic must be >= 0, got {x}")


def chi2_cdf(x: float, df: int) -> float:
    """P(X <= x) for X ~ chi-squared(df)."""
    _check_chi2_args(x, df)
    return regularized_gamma_p(df / 2.0, x / 2.0)


def chi2_sf(x: float, df: int) -> float:
    """P(X > x), computed directly so tiny tail probabilities keep their precision."""
    _check_chi2_args(x, df)
    return regularized_gamma_q(df / 2.0, x / 2.0)


def bonferroni(p_raw: float, family_size: int) -> float:
    if not 0.0 <= p_raw <= 1.0:
        raise StatsError(f"p-value {p_raw} outside [0, 1]")
    if family_size < 1:
        raise StatsError("family_size must be at least 1")
    return min(1.0, p_raw * family_size)


@dataclass(frozen=True)
class Chi2Result:
    statistic: float
    df: int
    p_raw: float
    p_corrected: float
    family_size: int
    significant: bool
    alpha: float = ALPHA


def chi2_uniformity(table: FrequencyTable, expected: Mapping[str, float], family_size: int = 1,
                    alpha: float = ALPHA) -> Chi2Result:
    """Chi-squared goodness of fit of observed character counts against a per-password model.

    ``expected`` gives the expected occurrences of every charset character in
    one password; cells are ``expected[c] * total_passwords``. Degrees of
    freedom are ``len(expected) - 1``.
    """
    if table.total_passwords <= 0:
        raise StatsError("empty frequency table")
    if family_size < 1:
        raise StatsError("family_size must be at least 1")
    if len(expected) < 2:
        raise StatsError("need at least two cells")
    stray = [c for c, n in table.counts.items() if n and c not in expected]
    if stray:
        raise StatsError(f"observed characters outside the model: {''.join(sorted(stray))!r}")
    n = table.total_passwords
    terms = []
    for c, e in expected.items():
        cell = float(e) * n
        if cell <= 0:
            raise StatsError(f"zero expected count for {c!r}")
        o = table.counts.get(c, 0)
        terms.append((o - cell) ** 2 / cell)
    statistic = math.fsum(terms)
    df = len(expected) - 1
    p_raw = chi2_sf(statistic, df)
    p_corrected = bonferroni(p_raw, family_size)
    return Chi2Result(statistic, df, p_raw, p_corrected, family_size, p_corrected < alpha, alpha)


# ---------------------------------------------------------------------------
# outliers and weak fractions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OutlierReport:
    mean_pct: float
    std_pct: float
    outliers: tuple[str, ...]
    k_sigma: float
    pct: Mapping[str, float] = field(default_factory=dict, compare=False, repr=False)

    @property
    def text(self):
        return "".join(self.outliers)


def frequency_outliers(table: FrequencyTable, k_sigma: float = 3.0, charset=None) -> OutlierReport:
    """Characters whose share of all characters lies more than k_sigma std from the mean share.

    Shares are percentages; the std is the population std over characters.
    Pass ``charset`` to include characters that were never observed.
    """
    chars = list(charset) if charset is not None else list(table.counts)
    if len(set(chars)) < 2:
        raise StatsError("need at least two distinct characters")
    if table.total_chars == 0:
        raise StatsError("empty frequency table")
    pct = {c: 100.0 * table.counts.get(c, 0) / table.total_chars for c in chars}
    values = list(pct.values())
    mean = math.fsum(values) / len(values)
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))
    cut = k_sigma * std
    flagged = [c for c in chars if abs(pct[c] - mean) > cut]
    flagged.sort(key=lambda c: (-abs(pct[c] - mean), ord(c)))
    return OutlierReport(mean, std, tuple(flagged), k_sigma, pct)


def weak_fraction(corpus: Iterable[str], length: int, estimator=None) -> float:
    """Share of passwords whose log10 guess estimate is below ``length - 2``.

    ``corpus`` yields passwords, optionally newline-terminated.
    """
    if estimator is None:
        from .estimator import default_estimator

        estimator = default_estimator()
    threshold = length - 2
    total = weak = 0
    for lineno, pw in enumerate(corpus, start=1):
        pw = pw[:-1] if pw.endswith("\n") else pw
        if len(pw) != length:
            raise StatsError(f"line {lineno}: length {len(pw)}, expected {length}")
        total += 1
        if estimator.log10_guesses(pw) < threshold:
            weak += 1
    if total == 0:
        raise StatsError("empty corpus")
    return weak / total
