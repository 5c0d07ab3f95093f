import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from passaudit.charset import CharacterSet, CharClass, build_charset, parse_spec
from passaudit.estimator import Estimator
from passaudit.generator import (
    FilterConfig,
    FilterExhaustedError,
    GenerationPolicy,
    PolicyError,
    generate,
    generate_array,
    generate_biased,
    generate_biased_array,
    generate_filtered,
    generate_filtered_many,
    generate_from_spec,
    generate_from_spec_array,
    generate_many,
)
from passaudit.rng import RandomSource
from passaudit.stats import chi2_sf

DIGITS = CharacterSet.from_classes({CharClass.DIGIT: "0123456789"})
LETTERS = build_charset("reference", "l")


def rng(seed=0):
    return RandomSource.seeded(seed)


def test_policy_validation():
    with pytest.raises(PolicyError):
        GenerationPolicy(DIGITS, 0)
    with pytest.raises(PolicyError):
        GenerationPolicy(build_charset("reference", "all"), 2, require_each_class=True)
    with pytest.raises(PolicyError):
        GenerationPolicy(DIGITS, 8, min_counts={"s": 1})
    with pytest.raises(PolicyError):
        GenerationPolicy(DIGITS, 8, enforcement="magic")
    p = GenerationPolicy(build_charset("reference", "ld"), 8, require_each_class=True)
    assert p.minimums == {"l": 1, "d": 1} and p.required_slots == 2 and p.constrained


def test_single_class_two_digit_pin():
    p = GenerationPolicy(DIGITS, 2, require_each_class=True)
    pw = generate(p, rng())
    assert len(pw) == 2 and pw.isdigit()


def test_determinism():
    p = GenerationPolicy(build_charset("reference", "all"), 20, require_each_class=True)
    assert generate_many(p, rng(5), 50) == generate_many(p, rng(5), 50)
    assert generate_many(p, rng(5), 50) != generate_many(p, rng(6), 50)


@settings(max_examples=80, deadline=None)
@given(
    profile=st.sampled_from(["reference", "chrm", "bw", "oneps", "kpx"]),
    groups=st.sets(st.sampled_from("lds"), min_size=1),
    length=st.integers(1, 40),
    require=st.booleans(),
    enforcement=st.sampled_from(["slots", "reject"]),
    seed=st.integers(0, 2 ** 32),
)
def test_postconditions_hold_for_random_policies(profile, groups, length, require, enforcement, seed):
    comp = "".join(sorted(groups))
    if profile == "oneps" and set(comp) == {"d", "s"}:
        return
    cs = build_charset(profile, comp)
    if require and length < len(cs.groups()):
        with pytest.raises(PolicyError):
            GenerationPolicy(cs, length, require_each_class=require)
        return
    policy = GenerationPolicy(cs, length, require_each_class=require, enforcement=enforcement)
    for pw in generate_many(policy, rng(seed), 20):
        assert len(pw) == length
        assert set(pw) <= set(cs.chars)
        if require:
            for chars in cs.groups().values():
                assert set(pw) & set(chars)


def test_minimum_counts_respected():
    cs = build_charset("reference", "all")
    policy = GenerationPolicy(cs, 10, min_counts={"d": 3, "s": 2})
    arr = generate_array(policy, rng(1), 5000)
    digits = np.isin(arr, np.frombuffer(b"0123456789", dtype=np.uint8)).sum(axis=1)
    assert digits.min() >= 3


def test_uniform_generation_within_5_sigma():
    cs = build_charset("reference", "all")
    n, length = 1_000_000, 8
    arr = generate_array(GenerationPolicy(cs, length), rng(2), n)
    counts = np.bincount(arr.ravel(), minlength=128)[[ord(c) for c in cs.chars]]
    p = 1 / len(cs)
    sigma = math.sqrt(n * length * p * (1 - p))
    assert np.abs(counts - n * length * p).max() < 5 * sigma


def test_letters_only_expected_occurrence():
    arr = generate_array(GenerationPolicy(LETTERS, 8), rng(3), 200_000)
    per_password = np.bincount(arr.ravel(), minlength=128)[ord("q")] / 200_000
    assert per_password == pytest.approx(8 / 52, abs=0.005)


def test_slots_match_class_weighted_expectation_exactly_in_total():
    cs = build_charset("reference", "ld")
    arr = generate_array(GenerationPolicy(cs, 8, require_each_class=True), rng(4), 10_000)
    assert arr.size == 80_000  # observed totals equal 8 per password


# -- filter -------------------------------------------------------------------------

def test_filter_thresholds():
    assert FilterConfig.for_length("strict", 8).threshold_log10 == pytest.approx(7.9)
    assert FilterConfig.for_length("lenient", 8).threshold_log10 == 6
    assert FilterConfig.for_length("lenient", 1).threshold_log10 == 0
    with pytest.raises(PolicyError):
        FilterConfig.for_length("loose", 8)
    with pytest.raises(PolicyError):
        FilterConfig("strict", 1.0, max_attempts=0)
    f = FilterConfig("lenient", 6.0)
    assert f.accepts(6.0) and not f.accepts(5.99)


def test_filtered_output_clears_threshold():
    cs = build_charset("reference", "all")
    policy = GenerationPolicy(cs, 8)
    f = FilterConfig.for_length("lenient", 8)
    est = Estimator()
    pws, attempts = generate_filtered_many(policy, f, rng(8), 2000)
    assert all(est.log10_guesses(pw) >= 6 for pw in pws)
    assert attempts.min() >= 1 and attempts.max() <= f.max_attempts
    pw, n = generate_filtered(policy, f, rng(8))
    assert est.log10_guesses(pw) >= 6 and 1 <= n <= f.max_attempts


def test_filtered_length_20_rarely_retries():
    cs = build_charset("reference", "all")
    _, attempts = generate_filtered_many(GenerationPolicy(cs, 20), FilterConfig.for_length("lenient", 20),
                                         rng(9), 3000)
    assert (attempts == 1).mean() > 0.99


def test_filter_exhaustion_on_degenerate_policy():
    # a one-symbol alphabet only ever yields repeats, far below the strict threshold
    dash = CharacterSet.from_classes({CharClass.SYMBOL: "-"})
    f = FilterConfig.for_length("strict", 4, max_attempts=10)
    with pytest.raises(FilterExhaustedError) as e:
        generate_filtered(GenerationPolicy(dash, 4), f, rng())
    assert e.value.attempts == 10
    with pytest.raises(FilterExhaustedError):
        generate_filtered_many(GenerationPolicy(dash, 4), f, rng(), 3)


def test_two_digit_pins_mostly_pass_strict():
    # 100 guesses clears 1.9; only doubled digits (repeats) are rejected
    f = FilterConfig.for_length("strict", 2, max_attempts=10)
    pw, _ = generate_filtered(GenerationPolicy(DIGITS, 2), f, rng())
    assert pw[0] != pw[1]


def test_filtered_distribution_is_conditioned_uniform():
    # 4 letters, length 3: the filter must keep relative weights of the passing strings
    alphabet = "abcd"
    cs = CharacterSet.from_classes({CharClass.LOWER: alphabet})
    est = Estimator(dictionaries={"tiny": ["abc", "dab", "cc"]})
    f = FilterConfig("custom", 2.5, max_attempts=64)
    universe = ["".join(t) for t in itertools.product(alphabet, repeat=3)]
    passing = [s for s in universe if est.log10_guesses(s) >= 2.5]
    assert 0 < len(passing) < len(universe)
    n = 60_000
    pws, _ = generate_filtered_many(GenerationPolicy(cs, 3), f, rng(10), n, estimator=est)
    counts = {s: 0 for s in passing}
    for pw in pws:
        counts[pw] += 1  # KeyError if a failing string slipped through
    expected = n / len(passing)
    stat = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2_sf(stat, len(passing) - 1) > 1e-4


# -- spec-driven --------------------------------------------------------------------

def test_spec_generation():
    cs = build_charset("reference", "all")
    pin = generate_from_spec(parse_spec("dddddd"), cs, rng())
    assert len(pin) == 6 and pin.isdigit()
    assert generate_from_spec(parse_spec("s"), build_charset("sfri", "all"), rng()) == "-"
    with pytest.raises(PolicyError):
        generate_from_spec(parse_spec("s"), LETTERS, rng())


def test_spec_positions_uniform_within_class():
    cs = build_charset("reference", "all")
    arr = generate_from_spec_array(parse_spec("ld"), cs, rng(12), 100_000)
    letters = np.bincount(arr[:, 0], minlength=128)[[ord(c) for c in cs.select("l")]]
    digits = np.bincount(arr[:, 1], minlength=128)[[ord(c) for c in cs.select("d")]]
    for counts in (letters, digits):
        e = counts.sum() / len(counts)
        assert chi2_sf(float(((counts - e) ** 2 / e).sum()), len(counts) - 1) > 1e-4


# -- biased fixture -------------------------------------------------------------------

def test_biased_fixture_probabilities():
    arr = generate_biased_array(GenerationPolicy(LETTERS, 8), rng(13), 200_000)
    counts = np.bincount(arr.ravel(), minlength=128)[[ord(c) for c in LETTERS.chars]]
    share = counts / counts.sum()
    assert share[:48] == pytest.approx(np.full(48, 5 / 256), rel=0.05)
    assert share[48:] == pytest.approx(np.full(4, 4 / 256), rel=0.05)


def test_biased_fixture_unbiased_for_64():
    cs = CharacterSet.from_classes({CharClass.LOWER: LETTERS.chars[:26], CharClass.UPPER: LETTERS.chars[26:],
                                    CharClass.DIGIT: "0123456789", CharClass.SYMBOL: "+/"})
    assert len(cs) == 64
    arr = generate_biased_array(GenerationPolicy(cs, 8), rng(14), 100_000)
    counts = np.bincount(arr.ravel(), minlength=128)[[ord(c) for c in cs.chars]]
    e = counts.sum() / 64
    assert chi2_sf(float(((counts - e) ** 2 / e).sum()), 63) > 1e-4


def test_biased_rejects_constrained_policy():
    with pytest.raises(PolicyError):
        generate_biased(GenerationPolicy(build_charset("reference", "ld"), 8, require_each_class=True), rng())
