"""Independent reference implementations used by the tests.

Neither oracle shares code with the package: the chi-squared CDF is summed
term by term in mpmath at 60 digits, and the guess oracle enumerates every
tiling of a password instead of running a dynamic program.
"""

import itertools
import math

import mpmath

DIGITS = 60


def chi2_cdf_oracle(x, df):
    """P(df/2, x/2) from the power series, summed until terms drop below 1e-40."""
    with mpmath.workdps(DIGITS):
        a = mpmath.mpf(df) / 2
        z = mpmath.mpf(x) / 2
        if z == 0:
            return mpmath.mpf(0)
        term = 1 / a
        total = term
        n = 0
        while True:
            n += 1
            term *= z / (a + n)
            total += term
            if term < total * mpmath.mpf(10) ** -40:
                break
        return total * mpmath.exp(-z + a * mpmath.log(z) - mpmath.loggamma(a))


def chi2_sf_oracle(x, df):
    with mpmath.workdps(DIGITS):
        return 1 - chi2_cdf_oracle(x, df)


def compositions(n):
    """Every way of cutting range(n) into consecutive (start, end) pieces, end exclusive."""
    for cuts in itertools.product((False, True), repeat=n - 1):
        pieces, start = [], 0
        for i, cut in enumerate(cuts, start=1):
            if cut:
                pieces.append((start, i))
                start = i
        pieces.append((start, n))
        yield pieces


def min_log10_guesses(password, matches, single_floor=10, multi_floor=50, cardinality=10):
    """Smallest log10 guess product over all tilings.

    ``matches`` are (start, end_inclusive, guesses) triples. Pieces without a
    match are brute forced. A match narrower than the password counts at
    least ``single_floor`` (one character) or ``multi_floor`` guesses.
    """
    n = len(password)
    by_span = {}
    for start, end, guesses in matches:
        width = end - start + 1
        if width < n:
            guesses = max(guesses, single_floor if width == 1 else multi_floor)
        key = (start, end + 1)
        by_span[key] = min(by_span.get(key, math.inf), guesses)
    best = math.inf
    for pieces in compositions(n):
        total = 0.0
        for s, e in pieces:
            options = [(e - s) * math.log10(cardinality)]
            if (s, e) in by_span:
                options.append(math.log10(by_span[(s, e)]))
            total += min(options)
        best = min(best, total)
    return best
