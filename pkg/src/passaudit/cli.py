"""Command line interface: ``passaudit <command> ...``.

Exit status is 0 on success, 1 on usage or input errors, and 2 when
``audit --fail-on-nonrandom`` finds a significant chi-squared result.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .charset import (
    CharacterSet,
    CharClass,
    CharsetError,
    ProfileError,
    SpecError,
    build_charset,
    load_profiles,
    parse_composition,
    parse_spec,
)
from .generator import FilterConfig, FilterExhaustedError, GenerationPolicy, PolicyError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONRANDOM = 2

PROFILES_ENV = "PASSAUDIT_PROFILES"
SEED_WARNING = "warning: seeded mode; output is reproducible and must not be used as real passwords"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _profiles(args):
    path = getattr(args, "profiles_file", None) or os.environ.get(PROFILES_ENV)
    if not path:
        return load_profiles()
    try:
        with open(path, encoding="utf-8") as fh:
            return load_profiles(fh)
    except OSError as e:
        raise UsageError(f"cannot read profile file {path}: {e.strerror}") from None


def _rng(args):
    from .rng import RandomSource

    if args.seed is None:
        return RandomSource.secure()
    print(SEED_WARNING, file=sys.stderr)
    return RandomSource.seeded(args.seed)


def _filter(mode, length):
    return None if mode == "off" else FilterConfig.for_length(mode, length)


def _estimator():
    from .estimator import default_estimator

    return default_estimator()


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", encoding="ascii", newline="\n")


def _open_in(path):
    return sys.stdin.buffer if path in (None, "-") else open(path, "rb")


def charset_of_size(n):
    """The first ``n`` characters of lower, upper, digits, punctuation (52 gives exactly the letters)."""
    from .charset import builtin_profiles

    ref = builtin_profiles()["reference"].charset
    chars = "".join(c for c in ref.chars if c != " ")
    if not 2 <= n <= len(chars):
        raise UsageError(f"--charset-size must be between 2 and {len(chars)}")
    picked = chars[:n]
    mapping = {k: "".join(c for c in picked if ref.class_of(c) == k) for k in CharClass}
    return CharacterSet.from_classes(mapping)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_gen(args):
    from .generator import generate_filtered, generate_from_spec, generate

    profiles = _profiles(args)
    if args.profile not in profiles:
        raise UsageError(f"unknown profile {args.profile!r}")
    profile = profiles[args.profile]
    rng = _rng(args)
    out = sys.stdout
    if args.spec is not None:
        if args.length is not None or args.composition is not None:
            raise UsageError("--spec cannot be combined with --length or --composition")
        spec = parse_spec(args.spec)
        charset = build_charset(args.profile, profile.charset.classes, args.avoid_difficult, profiles)
        filt = _filter(args.filter, len(spec))
        est = _estimator() if filt else None
        for _ in range(args.count):
            for _attempt in range(filt.max_attempts if filt else 1):
                pw = generate_from_spec(spec, charset, rng)
                if filt is None or filt.accepts(est.log10_guesses(pw)):
                    break
            else:
                raise FilterExhaustedError(filt.max_attempts, filt.threshold_log10)
            print(pw, file=out)
        return EXIT_OK

    length = profile.default_length if args.length is None else args.length
    if not profile.supports_length(length):
        lo, hi = profile.supported_lengths
        raise UsageError(f"profile {args.profile!r} supports lengths {lo}..{hi}")
    classes = profile.default_composition if args.composition is None else parse_composition(args.composition)
    charset = build_charset(args.profile, classes, args.avoid_difficult, profiles)
    groups = charset.groups()
    wanted = {"l": args.min_letters, "d": args.min_digits, "s": args.min_symbols}
    # minimums only apply to groups that are part of the composition
    mins = {sel: k for sel, k in wanted.items() if sel in groups}
    policy = GenerationPolicy(charset, length, min_counts=mins, enforcement=args.enforcement)
    filt = _filter(args.filter, length)
    for _ in range(args.count):
        pw = generate(policy, rng) if filt is None else generate_filtered(policy, filt, rng)[0]
        print(pw, file=out)
    return EXIT_OK


def cmd_corpus(args):
    from .corpus import CorpusSpec, generate_corpus

    profiles = _profiles(args)
    seed = args.seed
    if seed is None:
        seed = int.from_bytes(os.urandom(8), "little")
        print(f"corpus seed {seed}", file=sys.stderr)
    else:
        print(SEED_WARNING, file=sys.stderr)
    kind = args.generator
    if kind == "profile":
        from .audit import profile_generator_kind

        if args.profile not in profiles:
            raise UsageError(f"unknown profile {args.profile!r}")
        kind = profile_generator_kind(profiles[args.profile])
    spec = CorpusSpec(args.profile, args.composition, args.length, args.count, seed, kind, args.filter)
    out = _open_out(args.output)
    try:
        n = generate_corpus(spec, out, profiles, workers=args.workers)
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"wrote {n} passwords", file=sys.stderr)
    return EXIT_OK


def _csv_list(text, convert=str):
    return [convert(x.strip()) for x in text.split(",") if x.strip()]


def cmd_audit(args):
    from .audit import GRID_COMPOSITIONS, GRID_LENGTHS, GRID_PROFILES, run_audit

    profiles = _profiles(args)
    names = _csv_list(args.profiles) if args.profiles else list(GRID_PROFILES)
    unknown = [n for n in names if n not in profiles]
    if unknown:
        raise UsageError(f"unknown profile(s): {', '.join(unknown)}")
    comps = _csv_list(args.compositions) if args.compositions else list(GRID_COMPOSITIONS)
    for c in comps:
        parse_composition(c)
    try:
        lengths = _csv_list(args.lengths, int) if args.lengths else list(GRID_LENGTHS)
    except ValueError:
        raise UsageError("--lengths takes comma separated integers") from None
    seed = args.seed
    if seed is None:
        seed = int.from_bytes(os.urandom(8), "little")
    else:
        print(SEED_WARNING, file=sys.stderr)
    report = run_audit(names, comps, lengths, count=args.count, seed=seed,
                       generator=args.generator, workers=args.workers, k_sigma=args.k_sigma,
                       profile_table=profiles)
    md = report.to_markdown()
    if args.markdown:
        with open(args.markdown, "w", encoding="utf-8") as fh:
            fh.write(md)
    else:
        sys.stdout.write(md)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(report.to_csv())
    if args.fail_on_nonrandom and report.any_significant():
        return EXIT_NONRANDOM
    return EXIT_OK


def cmd_estimate(args):
    est = _estimator()
    passwords = args.passwords or [line.rstrip("\r\n") for line in sys.stdin]
    for pw in passwords:
        if not pw:
            continue
        r = est.estimate(pw)
        print(f"{pw}\t{r.log10_guesses:.2f}\t{r.strength.value}")
        if not args.quiet:
            for m in r.decomposition:
                print(f"  [{m.start}:{m.end + 1}] {m.kind.value:<10} {m.token!r} {m.guesses:g}")
    return EXIT_OK


def _table_from(args):
    from .corpus import count_frequencies

    src = _open_in(args.corpus)
    try:
        return count_frequencies(src, args.length)
    finally:
        if src is not sys.stdin.buffer:
            src.close()


def cmd_entropy(args):
    from .stats import bits_to_log10_guesses, information_entropy, shannon_entropy

    if args.corpus is not None:
        table = _table_from(args)
        print(f"shannon_bits_per_char\t{shannon_entropy(table):.6f}")
        print(f"distinct_chars\t{len(table.counts)}")
        return EXIT_OK
    if args.charset_size is None:
        raise UsageError("give --corpus or --charset-size")
    bits = information_entropy(args.charset_size, args.length)
    print(f"information_bits\t{bits:.6f}")
    print(f"log10_average_guesses\t{bits_to_log10_guesses(bits):.6f}")
    return EXIT_OK


def _model_charset(args, profiles):
    if args.charset_size is not None:
        return charset_of_size(args.charset_size)
    return build_charset(args.profile, args.composition, profiles=profiles)


def _biased_table(args, charset):
    from .corpus import count_frequencies
    from .generator import generate_biased_array, generate_array
    from .rng import RandomSource

    policy = GenerationPolicy(charset, args.length)
    rng = _rng(args) if args.seed is not None else RandomSource.secure()
    make = generate_biased_array if args.biased else generate_array
    arr = make(policy, rng, args.count)
    lines = np.empty((arr.shape[0], arr.shape[1] + 1), dtype=np.uint8)
    lines[:, :-1] = arr
    lines[:, -1] = ord("\n")
    return count_frequencies(lines.tobytes(), args.length), policy


def cmd_chi2(args):
    from .stats import chi2_uniformity, expected_frequencies, uniform_frequencies

    profiles = _profiles(args)
    charset = _model_charset(args, profiles)
    if args.corpus is not None:
        table = _table_from(args)
        policy = GenerationPolicy(charset, args.length, require_each_class=args.model == "constrained")
    else:
        table, policy = _biased_table(args, charset)
    expected = expected_frequencies(policy) if args.model == "constrained" else uniform_frequencies(charset, args.length)
    r = chi2_uniformity(table, expected, args.family_size)
    print(f"statistic\t{r.statistic:.6g}")
    print(f"df\t{r.df}")
    print(f"p_raw\t{r.p_raw:.6g}")
    print(f"p_corrected\t{r.p_corrected:.6g}")
    print(f"family_size\t{r.family_size}")
    print(f"verdict\t{'significant' if r.significant else 'not significant'}")
    return EXIT_OK


def cmd_outliers(args):
    from .stats import frequency_outliers

    profiles = _profiles(args)
    charset = _model_charset(args, profiles)
    if args.corpus is not None:
        table = _table_from(args)
    else:
        table, _ = _biased_table(args, charset)
    r = frequency_outliers(table, args.k_sigma, charset=charset)
    print(f"mean_pct\t{r.mean_pct:.4f}")
    print(f"std_pct\t{r.std_pct:.4f}")
    print(f"k_sigma\t{r.k_sigma:g}")
    print(f"outliers\t{r.text}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_profiles_file(p):
    p.add_argument("--profiles-file", metavar="PATH",
                   help=f"extra profile file (default: ${PROFILES_ENV} if set)")


def _add_seed(p):
    p.add_argument("--seed", type=int, help="seeded, reproducible mode (tests only)")


def _add_sample_source(p, count_default=1_000_000):
    p.add_argument("--corpus", metavar="PATH", help="newline-delimited corpus ('-' for stdin)")
    p.add_argument("--length", type=int, default=8)
    p.add_argument("--profile", default="reference")
    p.add_argument("--composition", default="all")
    p.add_argument("--charset-size", type=int, help="use the first N letters/digits/punctuation as the charset")
    p.add_argument("--biased", action="store_true", help="sample from the modulo-biased fixture")
    p.add_argument("--count", type=int, default=count_default, help="passwords to sample when no corpus is given")
    _add_seed(p)
    _add_profiles_file(p)


def build_parser():
    parser = _Parser(prog="passaudit", description="Generate passwords and audit password generators.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate passwords")
    p.add_argument("--profile", default="reference")
    p.add_argument("--length", type=int)
    p.add_argument("--composition", help="l, ld, ls, sd or all")
    p.add_argument("--spec", help="per-position classes, e.g. dddddd for a six digit pin")
    p.add_argument("--min-letters", type=int, default=0)
    p.add_argument("--min-digits", type=int, default=1)
    p.add_argument("--min-symbols", type=int, default=1)
    p.add_argument("--enforcement", choices=("slots", "reject"), default="slots")
    p.add_argument("--filter", choices=("strict", "lenient", "off"), default="lenient")
    p.add_argument("--avoid-difficult", action="store_true")
    p.add_argument("--count", type=int, default=1)
    _add_seed(p)
    _add_profiles_file(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("corpus", help="write a newline-delimited corpus")
    p.add_argument("--profile", default="reference")
    p.add_argument("--composition", default="all")
    p.add_argument("--length", type=int, default=8)
    p.add_argument("--count", type=int, default=1_000_000)
    p.add_argument("--generator", choices=("profile", "uniform", "constrained", "filtered", "biased"),
                   default="uniform")
    p.add_argument("--filter", choices=("strict", "lenient"), default="lenient",
                   help="threshold used by the filtered generator")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", help="output path (default stdout)")
    _add_seed(p)
    _add_profiles_file(p)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("audit", help="audit a grid of profiles, compositions and lengths")
    p.add_argument("--profiles", help="comma separated (default: the full grid)")
    p.add_argument("--compositions", help="comma separated (default: l,ld,ls,sd,all)")
    p.add_argument("--lengths", help="comma separated (default: 8,12,20)")
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--generator", choices=("profile", "uniform", "constrained", "filtered", "biased"),
                   default="profile")
    p.add_argument("--k-sigma", type=float, default=3.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--markdown", metavar="PATH", help="write the Markdown report here instead of stdout")
    p.add_argument("--csv", metavar="PATH", help="also write the full-precision CSV")
    p.add_argument("--fail-on-nonrandom", action="store_true")
    _add_seed(p)
    _add_profiles_file(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("estimate", help="estimate guesses for passwords (arguments or stdin)")
    p.add_argument("passwords", nargs="*")
    p.add_argument("-q", "--quiet", action="store_true", help="omit the decomposition")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("entropy", help="information entropy of a charset, or Shannon entropy of a corpus")
    p.add_argument("--charset-size", type=int)
    p.add_argument("--length", type=int, default=8)
    p.add_argument("--corpus", metavar="PATH")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("chi2", help="chi-squared uniformity test")
    _add_sample_source(p)
    p.add_argument("--model", choices=("flat", "constrained"), default="flat")
    p.add_argument("--family-size", type=int, default=1)
    p.set_defaults(func=cmd_chi2)

    p = sub.add_parser("outliers", help="character frequency outliers")
    _add_sample_source(p)
    p.add_argument("--k-sigma", type=float, default=3.0)
    p.set_defaults(func=cmd_outliers)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "count", 1) is not None and getattr(args, "count", 1) < 1:
        parser.error("--count must be at least 1")
    try:
        return args.func(args)
    except UsageError as e:
        parser.error(str(e))
    except (CharsetError, ProfileError, SpecError, PolicyError, FilterExhaustedError, ValueError) as e:
        print(f"passaudit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
