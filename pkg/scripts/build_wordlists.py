"""Regenerate the bundled wordlists in src/passaudit/data/.

The frequency lists come from the MIT-licensed ``zxcvbn`` Python package
(``pip download zxcvbn --no-deps`` and unzip, or install it). Only this
script needs it; the library reads the plain text files it writes.

    python scripts/build_wordlists.py [path/to/unpacked/zxcvbn/parent]
"""

import sys
from itertools import zip_longest
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "passaudit" / "data"

SIZES = {"passwords": 10_000, "english": 10_000, "names": 1_000}


def interleave(*lists):
    """Merge rank-ordered lists so rank r of each source lands near r * len(lists)."""
    out, seen = [], set()
    for row in zip_longest(*lists):
        for word in row:
            if word and word not in seen:
                seen.add(word)
                out.append(word)
    return out


def main(argv):
    if argv:
        sys.path.insert(0, argv[0])
    from zxcvbn.frequency_lists import FREQUENCY_LISTS as F

    lists = {
        "passwords": F["passwords"],
        "english": interleave(F["english_wikipedia"], F["us_tv_and_film"]),
        "names": interleave(F["surnames"], F["female_names"], F["male_names"]),
    }
    for name, words in lists.items():
        words = [w.lower() for w in words if w.isascii() and w.isprintable()]
        words = words[: SIZES[name]]
        (DATA / f"{name}.txt").write_text("\n".join(words) + "\n", encoding="utf-8")
        print(f"{name}: {len(words)} words")


if __name__ == "__main__":
    main(sys.argv[1:])
