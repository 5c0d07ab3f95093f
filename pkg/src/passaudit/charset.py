"""Character classes, per-manager character-set profiles and lds spec strings."""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping

__all__ = [
    "CharClass",
    "CharacterSet",
    "Profile",
    "PasswordSpec",
    "CharsetError",
    "ProfileError",
    "SpecError",
    "SELECTORS",
    "DEFAULT_DIFFICULT",
    "parse_composition",
    "composition_name",
    "build_charset",
    "parse_spec",
    "load_profiles",
    "builtin_profiles",
]


class CharClass(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"
    DIGIT = "digit"
    SYMBOL = "symbol"


CLASS_ORDER = (CharClass.LOWER, CharClass.UPPER, CharClass.DIGIT, CharClass.SYMBOL)

# 'l' never distinguishes case: it is the union of both letter classes.
SELECTORS: dict[str, tuple[CharClass, ...]] = {
    "l": (CharClass.LOWER, CharClass.UPPER),
    "d": (CharClass.DIGIT,),
    "s": (CharClass.SYMBOL,),
}

DEFAULT_DIFFICULT = "0Oo1lI|`'\""

REQUIRES_DIVERSE = ("always", "optional-on", "never")


class CharsetError(ValueError):
    pass


class ProfileError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SpecError(ValueError):
    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


def _check_printable(chars, what):
    for c in chars:
        if not 32 <= ord(c) <= 126:
            raise CharsetError(f"{what}: {c!r} is not printable ASCII")


@dataclass(frozen=True)
class CharacterSet:
    """Disjoint character classes, each an ordered string of characters.

    Iteration order (and therefore character indices) is lower, upper,
    digits, symbols. Classes with no members are simply absent.
    """

    members: tuple[tuple[CharClass, str], ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        index = {}
        for klass, chars in self.members:
            _check_printable(chars, klass.value)
            for c in chars:
                if c in index:
                    other = index[c]
                    where = "twice in" if other is klass else f"in both {other.value} and"
                    raise CharsetError(f"{c!r} appears {where} {klass.value}")
                index[c] = klass
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_classes(cls, mapping: Mapping[CharClass, str]) -> "CharacterSet":
        members = tuple((k, mapping[k]) for k in CLASS_ORDER if mapping.get(k))
        return cls(members)

    @property
    def chars(self) -> str:
        return "".join(chars for _, chars in self.members)

    @property
    def classes(self) -> frozenset[CharClass]:
        return frozenset(k for k, _ in self.members)

    def by_class(self, klass: CharClass) -> str:
        for k, chars in self.members:
            if k is klass:
                return chars
        return ""

    def class_of(self, char: str) -> CharClass:
        return self._index[char]

    def select(self, selector: str) -> str:
        """Characters drawn by an l/d/s selector."""
        return "".join(self.by_class(k) for k in SELECTORS[selector])

    def groups(self) -> dict[str, str]:
        """Non-empty selector groups, keyed 'l', 'd', 's'."""
        out = {}
        for sel in SELECTORS:
            chars = self.select(sel)
            if chars:
                out[sel] = chars
        return out

    def __len__(self):
        return len(self._index)

    def __contains__(self, char):
        return char in self._index

    def __iter__(self):
        return iter(self.chars)


@dataclass(frozen=True)
class Profile:
    name: str
    charset: CharacterSet
    supported_lengths: tuple[int, int]
    default_length: int
    default_composition: frozenset[CharClass]
    requires_diverse: str = "always"
    avoids_difficult: bool = False
    difficult: str = DEFAULT_DIFFICULT
    unsupported: frozenset[frozenset[CharClass]] = frozenset()

    def __post_init__(self):
        lo, hi = self.supported_lengths
        if not 1 <= lo <= hi:
            raise ProfileError(f"{self.name}: bad length range {lo}..{hi}")
        if not lo <= self.default_length <= hi:
            raise ProfileError(f"{self.name}: default_length {self.default_length} outside {lo}..{hi}")
        if not self.default_composition <= self.charset.classes:
            raise ProfileError(f"{self.name}: default_composition uses a class the charset lacks")
        if self.requires_diverse not in REQUIRES_DIVERSE:
            raise ProfileError(f"{self.name}: requires_diverse must be one of {REQUIRES_DIVERSE}")

    def supports_length(self, length: int) -> bool:
        lo, hi = self.supported_lengths
        return lo <= length <= hi


@dataclass(frozen=True)
class PasswordSpec:
    slots: tuple[str, ...]

    def __str__(self):
        return "".join(self.slots)

    def __len__(self):
        return len(self.slots)


def parse_composition(composition) -> frozenset[CharClass]:
    """Normalize a composition to a set of classes.

    Accepts "all", an l/d/s string such as "ld", or an iterable of
    CharClass members (or their values, e.g. "symbol").
    """
    if isinstance(composition, str):
        text = composition.strip().lower()
        if text == "all":
            return frozenset(CLASS_ORDER)
        if not text:
            raise CharsetError("empty composition")
        classes = set()
        for sel in text:
            if sel not in SELECTORS:
                raise CharsetError(f"unknown composition selector {sel!r} (use l, d, s or 'all')")
            classes.update(SELECTORS[sel])
        return frozenset(classes)
    classes = frozenset(c if isinstance(c, CharClass) else CharClass(c) for c in composition)
    if not classes:
        raise CharsetError("empty composition")
    return classes


def composition_name(classes: Iterable[CharClass]) -> str:
    classes = frozenset(classes)
    if classes == frozenset(CLASS_ORDER):
        return "all"
    # l, s, d order yields the conventional names: l, ld, ls, sd
    name = "".join(sel for sel in "lsd" if set(SELECTORS[sel]) <= classes)
    covered = {k for sel in name for k in SELECTORS[sel]}
    if covered != classes:
        return "+".join(k.value for k in CLASS_ORDER if k in classes)
    return name


def build_charset(profile_name, composition, avoid_difficult=False, profiles=None) -> CharacterSet:
    """Union of the requested classes of a profile, optionally minus difficult characters."""
    profiles = builtin_profiles() if profiles is None else profiles
    try:
        profile = profiles[profile_name]
    except KeyError:
        raise CharsetError(f"unknown profile {profile_name!r}") from None
    classes = parse_composition(composition)
    if classes in profile.unsupported:
        raise CharsetError(
            f"profile {profile.name!r} does not support composition {composition_name(classes)!r}"
        )
    missing = classes - profile.charset.classes
    if missing:
        names = ", ".join(k.value for k in CLASS_ORDER if k in missing)
        raise CharsetError(f"profile {profile.name!r} has no {names} characters")
    drop = profile.difficult if (avoid_difficult and profile.avoids_difficult) else ""
    mapping = {}
    for klass in classes:
        chars = "".join(c for c in profile.charset.by_class(klass) if c not in drop)
        if not chars:
            raise CharsetError(f"{klass.value} class is empty after removing difficult characters")
        mapping[klass] = chars
    return CharacterSet.from_classes(mapping)


def parse_spec(text: str) -> PasswordSpec:
    """Parse an l/d/s password specification such as "dddddd" (a six digit pin)."""
    if not text:
        raise SpecError("empty password spec", 0)
    for i, c in enumerate(text):
        if c not in SELECTORS:
            raise SpecError(f"invalid selector {c!r}", i)
    return PasswordSpec(tuple(text))


# ---------------------------------------------------------------------------
# profile file format
# ---------------------------------------------------------------------------

_CLASS_KEYS = {
    "lower": CharClass.LOWER,
    "upper": CharClass.UPPER,
    "digits": CharClass.DIGIT,
    "symbols": CharClass.SYMBOL,
}
_KEYS = set(_CLASS_KEYS) | {
    "lengths",
    "default_length",
    "default_composition",
    "difficult",
    "requires_diverse",
    "avoids_difficult",
    "unsupported",
}


def _unescape(value, line):
    out = []
    chars = iter(value)
    for c in chars:
        if c != "\\":
            out.append(c)
            continue
        nxt = next(chars, None)
        if nxt == "s":
            out.append(" ")
        elif nxt == "\\":
            out.append("\\")
        else:
            raise ProfileError(f"bad escape '\\{nxt or ''}' (use \\s or \\\\)", line)
    return "".join(out)


def _parse_int(value, line, key):
    try:
        return int(value.strip())
    except ValueError:
        raise ProfileError(f"{key}: expected an integer, got {value.strip()!r}", line) from None


def _parse_bool(value, line, key):
    v = value.strip().lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise ProfileError(f"{key}: expected true or false", line)


def _finish_block(name, fields, base, line):
    if base is not None:
        classes = {k: base.charset.by_class(k) for k in CLASS_ORDER}
        merged = dict(
            lengths=base.supported_lengths,
            default_length=base.default_length,
            default_composition=base.default_composition,
            requires_diverse=base.requires_diverse,
            avoids_difficult=base.avoids_difficult,
            difficult=base.difficult,
            unsupported=base.unsupported,
        )
    else:
        classes = {k: "" for k in CLASS_ORDER}
        merged = dict(
            lengths=(1, 4096),
            default_length=None,
            default_composition=None,
            requires_diverse="always",
            avoids_difficult=False,
            difficult=DEFAULT_DIFFICULT,
            unsupported=frozenset(),
        )
    for key, value in fields.items():
        if key in _CLASS_KEYS:
            classes[_CLASS_KEYS[key]] = value
        else:
            merged[key] = value
    try:
        charset = CharacterSet.from_classes(classes)
        if not charset.classes:
            raise ProfileError(f"profile {name!r} defines no characters", line)
        composition = merged["default_composition"]
        if composition is None:
            composition = charset.classes
        elif isinstance(composition, str):
            composition = parse_composition(composition)
        default_length = merged["default_length"]
        if default_length is None:
            default_length = min(max(16, merged["lengths"][0]), merged["lengths"][1])
        return Profile(
            name=name,
            charset=charset,
            supported_lengths=merged["lengths"],
            default_length=default_length,
            default_composition=composition,
            requires_diverse=merged["requires_diverse"],
            avoids_difficult=merged["avoids_difficult"],
            difficult=merged["difficult"],
            unsupported=merged["unsupported"],
        )
    except ProfileError as e:
        if e.line is None:
            raise ProfileError(str(e), line) from None
        raise
    except CharsetError as e:
        raise ProfileError(f"profile {name!r}: {e}", line) from None


def _parse_profile_text(text, base):
    """Parse profile blocks; ``base`` supplies profiles that blocks may partially override."""
    parsed: dict[str, Profile] = {}
    name = None
    header_line = 0
    fields: dict = {}

    def flush():
        if name is not None:
            parsed[name] = _finish_block(name, fields, base.get(name), header_line)

    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.rstrip("\r\n")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("profile ") or stripped == "profile":
            flush()
            parts = stripped.split()
            if len(parts) != 2:
                raise ProfileError("expected 'profile <name>'", lineno)
            name = parts[1]
            if name in parsed:
                raise ProfileError(f"duplicate profile {name!r}", lineno)
            header_line = lineno
            fields = {}
            continue
        if "=" not in line:
            raise ProfileError(f"expected key=value, got {stripped!r}", lineno)
        if name is None:
            raise ProfileError("key outside a profile block", lineno)
        key, value = line.split("=", 1)
        key = key.strip()
        if key not in _KEYS:
            raise ProfileError(f"unknown key {key!r}", lineno)
        if key in fields:
            raise ProfileError(f"{key} given twice for profile {name!r}", lineno)
        if key in _CLASS_KEYS or key == "difficult":
            fields[key] = _unescape(value, lineno)
        elif key == "lengths":
            lo, sep, hi = value.strip().partition("..")
            if not sep:
                raise ProfileError("lengths: expected <min>..<max>", lineno)
            fields[key] = (_parse_int(lo, lineno, key), _parse_int(hi, lineno, key))
        elif key == "default_length":
            fields[key] = _parse_int(value, lineno, key)
        elif key == "default_composition":
            try:
                fields[key] = parse_composition(value)
            except CharsetError as e:
                raise ProfileError(str(e), lineno) from None
        elif key == "requires_diverse":
            v = value.strip()
            if v not in REQUIRES_DIVERSE:
                raise ProfileError(f"requires_diverse must be one of {REQUIRES_DIVERSE}", lineno)
            fields[key] = v
        elif key == "avoids_difficult":
            fields[key] = _parse_bool(value, lineno, key)
        elif key == "unsupported":
            try:
                fields[key] = frozenset(
                    parse_composition(part) for part in value.replace(",", " ").split()
                )
            except CharsetError as e:
                raise ProfileError(str(e), lineno) from None
    flush()
    return parsed


@lru_cache(maxsize=1)
def _builtin():
    text = resources.files("passaudit").joinpath("data/profiles.txt").read_text(encoding="utf-8")
    return _parse_profile_text(text, {})


def builtin_profiles() -> dict[str, Profile]:
    return dict(_builtin())


def load_profiles(source=None) -> dict[str, Profile]:
    """Built-in profiles, overridden or extended by ``source``.

    ``source`` is profile-file text or a readable text stream. A block for an
    existing name only replaces the keys it mentions.
    """
    profiles = builtin_profiles()
    if source is None:
        return profiles
    text = source if isinstance(source, str) else source.read()
    profiles.update(_parse_profile_text(text, profiles))
    return profiles
