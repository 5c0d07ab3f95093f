"""
Random is not always strong
===========================

Uniformly random 8-character passwords occasionally spell words, repeats or
runs. The guess estimator finds them; a filter throws them away.
"""

from passaudit.charset import build_charset
from passaudit.estimator import estimate_guesses
from passaudit.generator import FilterConfig, GenerationPolicy, generate_filtered_many, generate_many
from passaudit.rng import RandomSource

# %% a few unlucky draws
for pw in ["Tz5a5a5a", "2345678#", "d@rKn3s5", "MrKNxQNDAViS"]:
    e = estimate_guesses(pw)
    parts = " + ".join(f"{m.kind.value}:{m.token}" for m in e.decomposition)
    print(f"{pw:14s} log10={e.log10_guesses:5.2f} {e.strength.value:12s} {parts}")

# %% how often does it happen, and what does the filter cost?
policy = GenerationPolicy(build_charset("reference", "all"), 8)
rng = RandomSource.seeded(3)
plain = generate_many(policy, rng, 50_000)
weak = [pw for pw in plain if estimate_guesses(pw).log10_guesses < 6]
print(f"unfiltered: {len(weak)} of {len(plain)} below 10^6 guesses, e.g. {weak[:3]}")

filt = FilterConfig.for_length("lenient", 8)
kept, attempts = generate_filtered_many(policy, filt, rng, 50_000)
print(f"filtered:   {sum(estimate_guesses(p).log10_guesses < 6 for p in kept)} weak, "
      f"{int(attempts.sum()) - len(kept)} redraws in total")
