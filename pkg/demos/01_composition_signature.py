"""
Why "one of each class" looks non-random
=========================================

A generator that insists on at least one digit draws digits more often than
a flat model predicts. The chi-squared test notices; the class-weighted
model explains it.
"""

import io

from passaudit.charset import build_charset
from passaudit.corpus import CorpusSpec, count_frequencies, generate_corpus
from passaudit.generator import GenerationPolicy
from passaudit.stats import chi2_uniformity, expected_frequencies, uniform_frequencies

# letters and digits, length 8
charset = build_charset("reference", "ld")
flat = uniform_frequencies(charset, 8)
weighted = expected_frequencies(GenerationPolicy(charset, 8, require_each_class=True))
print("expected per password, flat:    ", round(float(flat["7"]), 4), "for '7',", round(float(flat["q"]), 4), "for 'q'")
print("expected per password, weighted:", round(float(weighted["7"]), 4), "for '7',", round(float(weighted["q"]), 4), "for 'q'")


def table(kind, count=200_000, seed=1):
    buf = io.BytesIO()
    generate_corpus(CorpusSpec("reference", "ld", 8, count, seed, kind), buf)
    return count_frequencies(buf.getvalue(), 8)


# %% the same test against both models, for both generators
for kind in ("uniform", "constrained"):
    t = table(kind)
    a = chi2_uniformity(t, flat, family_size=147)
    b = chi2_uniformity(t, weighted if kind == "constrained" else flat, family_size=147)
    print(f"{kind:12s} flat model: chi2={a.statistic:10.1f} p={a.p_corrected:.3g}   "
          f"own model: chi2={b.statistic:6.1f} p={b.p_corrected:.3g}")
