"""Pattern-based guess-number estimation.

Matchers find dictionary words (case-insensitive, after l33t normalization,
also reversed), repeats, single-class sequences and dates. A dynamic program
over end positions then picks the tiling of the password, by matched spans
and brute-force gap fillers, with the smallest product of guesses.

Scoring:

- dictionary: rank * uppercase multiplier * l33t multiplier (* 2 if reversed)
- repeat: guesses(base) * repeat count
- sequence: (4 for obvious starts, else class size) * length (* 2 if descending)
- date: 365 * max(|year - reference_year|, 20)
- brute force: 10 ** length

A span sharing the password with other spans counts at least 10 guesses
(one character) or 50 (longer), so that runs of tiny matches cannot
undercut brute force by stacking small savings.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping

from .stats import StrengthThresholds, Strength, classify_strength

__all__ = [
    "MatchKind",
    "MatchSpan",
    "GuessEstimate",
    "Estimator",
    "EstimatorError",
    "L33T_TABLE",
    "load_wordlist",
    "default_estimator",
    "find_matches",
    "score_match",
    "estimate_guesses",
    "uppercase_multiplier",
    "submatch_floor",
]

BRUTEFORCE_CARDINALITY = 10
MIN_SUBMATCH_GUESSES_SINGLE_CHAR = 10
MIN_SUBMATCH_GUESSES_MULTI_CHAR = 50
REFERENCE_YEAR = 2019
MIN_YEAR_SPACE = 20
MIN_YEAR, MAX_YEAR = 1000, 2050

L33T_TABLE = {
    "@": "a",
    "4": "a",
    "3": "e",
    "0": "o",
    "1": "i",
    "!": "i",
    "|": "l",
    "$": "s",
    "5": "s",
    "7": "t",
}
_L33T_TRANS = str.maketrans(L33T_TABLE)

OBVIOUS_SEQUENCE_STARTS = frozenset("aAzZ019")

BUNDLED_WORDLISTS = ("passwords", "english", "names")


class EstimatorError(ValueError):
    pass


class MatchKind(enum.Enum):
    DICTIONARY = "dictionary"
    REPEAT = "repeat"
    SEQUENCE = "sequence"
    DATE = "date"
    BRUTEFORCE = "bruteforce"


@dataclass(frozen=True)
class MatchSpan:
    start: int
    end: int  # inclusive
    kind: MatchKind
    guesses: float
    token: str
    detail: Mapping = field(default_factory=dict, compare=False, hash=False)

    @property
    def length(self):
        return self.end - self.start + 1

    @property
    def log10_guesses(self):
        return math.log10(self.guesses)


@dataclass(frozen=True)
class GuessEstimate:
    password: str
    log10_guesses: float
    decomposition: tuple[MatchSpan, ...]
    strength: Strength

    @property
    def guesses(self):
        return 10.0 ** self.log10_guesses


def load_wordlist(source) -> list[str]:
    """One token per line; rank is the 1-based line number. Blank lines are skipped."""
    text = source if isinstance(source, str) else source.read()
    return [line.strip().lower() for line in text.splitlines() if line.strip()]


def _bundled(name):
    path = resources.files("passaudit").joinpath(f"data/{name}.txt")
    return load_wordlist(path.read_text(encoding="utf-8"))


def uppercase_multiplier(token: str) -> int:
    upper = sum(1 for c in token if "A" <= c <= "Z")
    lower = sum(1 for c in token if "a" <= c <= "z")
    if upper == 0:
        return 1
    if lower == 0:
        return 2
    first = next(c for c in token if c.isalpha())
    if upper == 1 and "A" <= first <= "Z":
        return 2
    return math.comb(upper + lower, min(upper, lower))


def submatch_floor(length: int) -> int:
    """Least guesses a span may count for when other spans share the password."""
    return MIN_SUBMATCH_GUESSES_SINGLE_CHAR if length == 1 else MIN_SUBMATCH_GUESSES_MULTI_CHAR


def _char_class(c):
    if "a" <= c <= "z":
        return 26
    if "A" <= c <= "Z":
        return 27  # distinct key, same size
    if "0" <= c <= "9":
        return 10
    return None


def _is_primitive(s):
    return (s + s).find(s, 1) == len(s)


def _date_candidates(token, min_year, max_year):
    """(year, month, day) readings of a digit string under yyyy, m/d/yyyy, d/m/yyyy, yyyy/m/d."""
    n = len(token)
    if n == 4:
        y = int(token)
        return [(y, None, None)] if min_year <= y <= max_year else []
    out = []
    rest = n - 4
    for year_first in (True, False):
        ytxt = token[:4] if year_first else token[rest:]
        md = token[4:] if year_first else token[:rest]
        y = int(ytxt)
        if not min_year <= y <= max_year:
            continue
        for split in (1, 2):
            a, b = md[:split], md[split:]
            if not 1 <= len(b) <= 2:
                continue
            a, b = int(a), int(b)
            # month/day and day/month readings
            for m, d in ((a, b), (b, a)):
                if 1 <= m <= 12 and 1 <= d <= 31:
                    out.append((y, m, d))
    return out


class Estimator:
    """Guess estimator over a fixed set of ranked dictionaries.

    ``dictionaries`` maps a dictionary name to a rank-ordered word sequence;
    by default the bundled password, English and name lists are used.
    """

    def __init__(self, dictionaries: Mapping[str, Iterable[str]] | None = None,
                 reference_year=REFERENCE_YEAR, thresholds=None,
                 min_year=MIN_YEAR, max_year=MAX_YEAR):
        if dictionaries is None:
            dictionaries = {name: _bundled(name) for name in BUNDLED_WORDLISTS}
        ranked: dict[str, list[tuple[int, str]]] = {}
        for name, words in dictionaries.items():
            for rank, word in enumerate(words, start=1):
                word = word.lower()
                hits = ranked.setdefault(word, [])
                if all(n != name for _, n in hits):
                    hits.append((rank, name))
        self._ranked = {w: tuple(sorted(h)) for w, h in ranked.items()}
        self._max_word = max((len(w) for w in self._ranked), default=0)
        self.reference_year = reference_year
        self.thresholds = thresholds or StrengthThresholds()
        self.min_year = min_year
        self.max_year = max_year
        self._base_cache: dict[str, float] = {}

    # -- matchers ----------------------------------------------------------

    def _dictionary(self, password, out):
        lower = password.lower()
        n = len(password)
        ranked = self._ranked
        for i in range(n):
            for j in range(i + 1, min(n, i + self._max_word) + 1):
                tok = lower[i:j]
                sub = tok.translate(_L33T_TRANS)
                lookups = [(tok, False)]
                if sub != tok:
                    lookups.append((sub, False))
                rev = tok[::-1]
                if rev != tok:
                    lookups.append((rev, True))
                    rsub = sub[::-1]
                    if rsub != sub and rsub != rev:
                        lookups.append((rsub, True))
                for word, reversed_ in lookups:
                    hits = ranked.get(word)
                    if hits is None:
                        continue
                    token = password[i:j]
                    plain = word[::-1] if reversed_ else word
                    subs = tuple(sorted({(c, L33T_TABLE[c]) for c, p in zip(tok, plain) if c != p}))
                    for rank, name in hits:
                        detail = {
                            "word": word,
                            "rank": rank,
                            "dictionary": name,
                            "reversed": reversed_,
                            "l33t": subs,
                            "uppercase_multiplier": uppercase_multiplier(token),
                            "l33t_multiplier": 2 ** len(subs),
                        }
                        out.append(self._span(i, j - 1, MatchKind.DICTIONARY, token, detail))

    def _repeat(self, password, out):
        n = len(password)
        for i in range(n - 1):
            for b in range(1, (n - i) // 2 + 1):
                base = password[i:i + b]
                if password[i + b:i + 2 * b] != base or not _is_primitive(base):
                    continue
                count = 2
                while password[i + count * b:i + (count + 1) * b] == base:
                    count += 1
                end = i + count * b - 1
                detail = {"base": base, "count": count}
                out.append(self._span(i, end, MatchKind.REPEAT, password[i:end + 1], detail))

    def _sequence(self, password, out):
        n = len(password)
        for i in range(n - 2):
            cls = _char_class(password[i])
            if cls is None:
                continue
            for delta in (1, -1):
                if i > 0 and _char_class(password[i - 1]) == cls and \
                        ord(password[i]) - ord(password[i - 1]) == delta:
                    continue  # not the start of a maximal run
                j = i
                while j + 1 < n and _char_class(password[j + 1]) == cls and \
                        ord(password[j + 1]) - ord(password[j]) == delta:
                    j += 1
                if j - i + 1 >= 3:
                    detail = {
                        "direction": "ascending" if delta > 0 else "descending",
                        "start_char": password[i],
                        "cardinality": 26 if cls in (26, 27) else 10,
                    }
                    out.append(self._span(i, j, MatchKind.SEQUENCE, password[i:j + 1], detail))

    def _date(self, password, out):
        n = len(password)
        for i in range(n - 3):
            for j in range(i + 4, min(n, i + 8) + 1):
                token = password[i:j]
                if not token.isdigit():
                    break
                best = None
                for y, m, d in _date_candidates(token, self.min_year, self.max_year):
                    detail = {"year": y, "month": m, "day": d}
                    span = self._span(i, j - 1, MatchKind.DATE, token, detail)
                    if best is None or span.guesses < best.guesses:
                        best = span
                if best is not None:
                    out.append(best)

    def _span(self, start, end, kind, token, detail):
        span = MatchSpan(start, end, kind, 1.0, token, detail)
        return MatchSpan(start, end, kind, self.score_match(span), token, detail)

    def find_matches(self, password: str) -> list[MatchSpan]:
        """All matcher hits, sorted by (start, end). Brute-force spans are not included."""
        if not password:
            raise EstimatorError("empty password")
        out: list[MatchSpan] = []
        self._dictionary(password, out)
        self._repeat(password, out)
        self._sequence(password, out)
        self._date(password, out)
        out.sort(key=lambda m: (m.start, m.end, m.kind.value, m.guesses))
        return out

    # -- scoring -------------------------------------------------------------

    def _base_guesses(self, base):
        cached = self._base_cache.get(base)
        if cached is None:
            cached = 10.0 ** self.estimate(base).log10_guesses
            if len(self._base_cache) < 100_000:
                self._base_cache[base] = cached
        return cached

    def score_match(self, span: MatchSpan) -> float:
        d = span.detail
        kind = span.kind
        if kind is MatchKind.DICTIONARY:
            g = d["rank"] * d["uppercase_multiplier"] * d["l33t_multiplier"]
            if d.get("reversed"):
                g *= 2
        elif kind is MatchKind.REPEAT:
            g = self._base_guesses(d["base"]) * d["count"]
        elif kind is MatchKind.SEQUENCE:
            base = 4 if d["start_char"] in OBVIOUS_SEQUENCE_STARTS else d["cardinality"]
            g = base * span.length * (2 if d["direction"] == "descending" else 1)
        elif kind is MatchKind.DATE:
            g = 365 * max(abs(d["year"] - self.reference_year), MIN_YEAR_SPACE)
        else:
            g = float(BRUTEFORCE_CARDINALITY) ** span.length
        return float(max(g, 1))

    # -- search --------------------------------------------------------------

    def estimate(self, password: str) -> GuessEstimate:
        """Minimum-guess tiling of ``password`` by matches and brute-force fillers.

        A span that does not cover the whole password counts at least
        ``submatch_floor(length)`` guesses. Ties on the guess product go to
        fewer spans, then to the tiling whose span starts are
        lexicographically smallest.
        """
        matches = self.find_matches(password)
        n = len(password)
        ending = [[] for _ in range(n)]
        for m in matches:
            g = m.guesses if m.length == n else max(m.guesses, submatch_floor(m.length))
            ending[m.end].append((m.start, math.log10(g), m, g))

        # best[k]: (log10, span count, starts, back pointer) for the prefix of length k
        best = [None] * (n + 1)
        best[0] = (0.0, 0, (), None)
        for k in range(1, n + 1):
            choice = None
            for s in range(k):
                prev = best[s]
                cand = (prev[0] + (k - s), prev[1] + 1, prev[2] + (s,), (s, None, 0.0))
                if choice is None or _better(cand, choice):
                    choice = cand
            for start, lg, m, g in ending[k - 1]:
                prev = best[start]
                cand = (prev[0] + lg, prev[1] + 1, prev[2] + (start,), (start, m, g))
                if _better(cand, choice):
                    choice = cand
            best[k] = choice

        spans = []
        k = n
        while k > 0:
            s, m, g = best[k][3]
            if m is None:
                m = MatchSpan(s, k - 1, MatchKind.BRUTEFORCE,
                              float(BRUTEFORCE_CARDINALITY) ** (k - s), password[s:k], {})
            elif g != m.guesses:
                m = replace(m, guesses=g, detail={**m.detail, "unfloored_guesses": m.guesses})
            spans.append(m)
            k = s
        spans.reverse()
        log10 = math.fsum(math.log10(m.guesses) for m in spans)
        return GuessEstimate(password, log10, tuple(spans),
                             classify_strength(log10, self.thresholds))

    def log10_guesses(self, password: str) -> float:
        return self.estimate(password).log10_guesses


_TIE = 1e-12


def _better(a, b):
    if a[0] < b[0] - _TIE:
        return True
    if a[0] > b[0] + _TIE:
        return False
    return (a[1], a[2]) < (b[1], b[2])


@lru_cache(maxsize=1)
def default_estimator() -> Estimator:
    return Estimator()


def find_matches(password: str) -> list[MatchSpan]:
    return default_estimator().find_matches(password)


def score_match(span: MatchSpan) -> float:
    return default_estimator().score_match(span)


def estimate_guesses(password: str) -> GuessEstimate:
    return default_estimator().estimate(password)
