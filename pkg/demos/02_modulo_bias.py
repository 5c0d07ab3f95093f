"""
Catching modulo bias
====================

Reducing a random byte mod 52 favours the first 48 letters (5 chances in 256
against 4). Frequency outliers point straight at the four losers.
"""

import numpy as np

from passaudit.charset import build_charset
from passaudit.generator import GenerationPolicy, generate_array, generate_biased_array
from passaudit.rng import RandomSource, unbiased_reduce
from passaudit.stats import FrequencyTable, chi2_uniformity, frequency_outliers, uniform_frequencies

letters = build_charset("reference", "l")
policy = GenerationPolicy(letters, 8)


def table(arr):
    counts = np.bincount(arr.ravel(), minlength=128)
    return FrequencyTable({chr(c): int(n) for c, n in enumerate(counts) if n}, *arr.shape)


# %% rejection sampling keeps every residue equally likely
kept = unbiased_reduce(np.arange(256), 52, bits=8)
print("8-bit words kept for n=52:", len(kept), "of 256; each residue", set(np.bincount(kept).tolist()))

# %% biased versus unbiased generation
for name, make in (("unbiased", generate_array), ("biased", generate_biased_array)):
    t = table(make(policy, RandomSource.seeded(7), 500_000))
    r = chi2_uniformity(t, uniform_frequencies(letters, 8), family_size=147)
    out = frequency_outliers(t, 3.0, charset=letters)
    print(f"{name:9s} chi2={r.statistic:9.1f} p={r.p_corrected:.3g} "
          f"mean={out.mean_pct:.3f}% std={out.std_pct:.3f}% outliers={out.text or '-'}")
