"""Grid audits: generate a corpus per (profile, composition, length) cell and analyse it.

Each analysed cell gets two chi-squared tests. ``chi2_flat`` compares the
observed character counts with the flat model (every character equally
likely); ``chi2_adjusted`` compares them with the expectation of the
generator's own composition rule. A cell that fails the first test and
passes the second is labelled as non-random only because of its
composition requirement.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .charset import CharsetError, builtin_profiles, composition_name, parse_composition
from .corpus import BLOCK_SIZE, CorpusError, CorpusSpec, count_frequencies, generate_block
from .generator import PolicyError
from .rng import stream_seed
from .stats import (
    ALPHA,
    Chi2Result,
    OutlierReport,
    Strength,
    chi2_uniformity,
    expected_frequencies,
    frequency_outliers,
    information_entropy,
    shannon_entropy,
    uniform_frequencies,
)

__all__ = [
    "GRID_PROFILES",
    "GRID_COMPOSITIONS",
    "GRID_LENGTHS",
    "VERDICT_RANDOM",
    "VERDICT_EXPLAINED",
    "VERDICT_NONRANDOM",
    "AuditCell",
    "CellResult",
    "AuditReport",
    "cell_seed",
    "profile_generator_kind",
    "analyse_cell",
    "run_audit",
    "parse_csv",
]

GRID_PROFILES = ("kpx", "kpxc", "oneps", "bw", "dlan", "lpass", "robo", "chrm", "sfri", "spg", "dvrn")
GRID_COMPOSITIONS = ("l", "ld", "ls", "sd", "all")
GRID_LENGTHS = (8, 12, 20)

VERDICT_RANDOM = "consistent with uniform"
VERDICT_EXPLAINED = "non-randomness explained by composition requirement"
VERDICT_NONRANDOM = "non-random"


@dataclass(frozen=True)
class AuditCell:
    profile: str
    composition: str
    length: int

    @property
    def key(self):
        return f"{self.profile}/{self.composition}/{self.length}"


@dataclass(frozen=True)
class CellResult:
    cell: AuditCell
    generator_kind: str = ""
    count: int = 0
    charset_size: int = 0
    shannon_bits: float = math.nan
    information_bits: float = math.nan
    chi2_flat: Chi2Result | None = None
    chi2_adjusted: Chi2Result | None = None
    outliers: OutlierReport | None = None
    weak_fraction: float = math.nan
    strength_histogram: dict = field(default_factory=dict)
    skip_reason: str = ""

    @property
    def skipped(self):
        return bool(self.skip_reason)

    @property
    def verdict(self):
        if self.skipped:
            return ""
        if not self.chi2_flat.significant:
            return VERDICT_RANDOM
        if not self.chi2_adjusted.significant:
            return VERDICT_EXPLAINED
        return VERDICT_NONRANDOM


def cell_seed(seed: int, cell: AuditCell) -> int:
    """Seed for one cell, derived from the run seed and the cell identity (not its position)."""
    tag = int.from_bytes(hashlib.blake2b(cell.key.encode(), digest_size=8).digest(), "little")
    return stream_seed(seed, tag)


def profile_generator_kind(profile) -> str:
    """The generator that mimics a profile: constrained when its composition rule was active."""
    return "uniform" if profile.requires_diverse == "never" else "constrained"


def _skip_reason(cell, profiles, generator):
    profile = profiles.get(cell.profile)
    if profile is None:
        return f"unknown profile {cell.profile!r}"
    if not profile.supports_length(cell.length):
        lo, hi = profile.supported_lengths
        return f"length {cell.length} outside supported range {lo}..{hi}"
    classes = parse_composition(cell.composition)
    if classes in profile.unsupported:
        return f"composition {cell.composition} not offered by {cell.profile}"
    if not classes <= profile.charset.classes:
        return f"{cell.profile} lacks characters for composition {cell.composition}"
    return ""


def analyse_cell(cell: AuditCell, count: int, seed: int, generator: str = "profile",
                 family_size: int = 1, k_sigma: float = 3.0, profiles=None,
                 alpha: float = ALPHA, estimator=None) -> CellResult:
    """Generate ``count`` passwords for ``cell`` and run every analysis on them."""
    profiles = builtin_profiles() if profiles is None else profiles
    reason = _skip_reason(cell, profiles, generator)
    if reason:
        return CellResult(cell, skip_reason=reason)
    kind = profile_generator_kind(profiles[cell.profile]) if generator == "profile" else generator
    spec = CorpusSpec(cell.profile, cell.composition, cell.length, count, cell_seed(seed, cell), kind)
    try:
        policy, _ = spec.resolve(profiles)
    except (CharsetError, CorpusError, PolicyError) as e:
        return CellResult(cell, generator_kind=kind, skip_reason=str(e))
    if estimator is None:
        from .estimator import default_estimator

        estimator = default_estimator()

    nblocks = -(-count // BLOCK_SIZE)
    data = b"".join(generate_block(spec, b, profiles) for b in range(nblocks))
    table = count_frequencies(data, cell.length)
    charset = policy.charset

    flat = uniform_frequencies(charset, cell.length)
    adjusted = expected_frequencies(policy) if kind == "constrained" else flat

    threshold = cell.length - 2
    hist = Counter()
    weak = 0
    for pw in data.decode("ascii").splitlines():
        est = estimator.estimate(pw)
        hist[est.strength] += 1
        weak += est.log10_guesses < threshold

    return CellResult(
        cell=cell,
        generator_kind=kind,
        count=count,
        charset_size=len(charset),
        shannon_bits=shannon_entropy(table),
        information_bits=information_entropy(len(charset), cell.length),
        chi2_flat=chi2_uniformity(table, flat, family_size, alpha),
        chi2_adjusted=chi2_uniformity(table, adjusted, family_size, alpha),
        outliers=frequency_outliers(table, k_sigma, charset=charset),
        weak_fraction=weak / count,
        strength_histogram={s.value: hist.get(s, 0) for s in Strength},
    )


def _cell_job(args):
    return analyse_cell(*args)


@dataclass(frozen=True)
class AuditReport:
    results: tuple[CellResult, ...]
    count: int
    seed: int
    generator: str
    family_size: int
    k_sigma: float

    @property
    def analysed(self):
        return [r for r in self.results if not r.skipped]

    @property
    def skipped(self):
        return [r for r in self.results if r.skipped]

    def any_significant(self):
        return any(r.chi2_flat.significant for r in self.analysed)

    def rows(self):
        return [_row(r) for r in self.results]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: _csv_value(v) for k, v in row.items()})
        return buf.getvalue()

    def to_markdown(self) -> str:
        out = [
            "# Password generator audit",
            "",
            f"{len(self.analysed)} cells analysed, {len(self.skipped)} skipped; "
            f"{self.count} passwords per cell; generator `{self.generator}`; seed {self.seed}.",
            f"Chi-squared p values are Bonferroni corrected for a family of {self.family_size}. "
            f"Outliers lie more than {self.k_sigma:g} std from the mean character share.",
            "",
            "| " + " | ".join(MD_COLUMNS) + " |",
            "|" + "|".join("---" for _ in MD_COLUMNS) + "|",
        ]
        for r in self.analysed:
            row = _row(r)
            out.append("| " + " | ".join(_md_value(row[c]) for c in MD_COLUMNS) + " |")
        if self.skipped:
            out += ["", "## Skipped cells", ""]
            for r in self.skipped:
                out.append(f"- {r.cell.key}: {r.skip_reason}")
        return "\n".join(out) + "\n"


CSV_COLUMNS = [
    "profile", "composition", "length", "generator", "count", "charset_size",
    "shannon_bits", "information_bits",
    "chi2_flat_statistic", "chi2_flat_df", "chi2_flat_p_raw", "chi2_flat_p", "chi2_flat_significant",
    "chi2_adjusted_statistic", "chi2_adjusted_p_raw", "chi2_adjusted_p", "chi2_adjusted_significant",
    "outlier_mean_pct", "outlier_std_pct", "outliers",
    "weak_fraction", "online_weak", "offline_weak", "strong",
    "verdict", "skip_reason",
]

MD_COLUMNS = [
    "profile", "composition", "length", "generator", "shannon_bits", "information_bits",
    "chi2_flat_statistic", "chi2_flat_p", "chi2_adjusted_statistic", "chi2_adjusted_p",
    "outlier_mean_pct", "outlier_std_pct", "outliers", "weak_fraction",
    "online_weak", "offline_weak", "strong", "verdict",
]


def _row(r: CellResult) -> dict:
    row = dict.fromkeys(CSV_COLUMNS, "")
    row.update(profile=r.cell.profile, composition=r.cell.composition, length=r.cell.length,
               generator=r.generator_kind, skip_reason=r.skip_reason)
    if r.skipped:
        return row
    row.update(
        count=r.count,
        charset_size=r.charset_size,
        shannon_bits=r.shannon_bits,
        information_bits=r.information_bits,
        chi2_flat_statistic=r.chi2_flat.statistic,
        chi2_flat_df=r.chi2_flat.df,
        chi2_flat_p_raw=r.chi2_flat.p_raw,
        chi2_flat_p=r.chi2_flat.p_corrected,
        chi2_flat_significant=r.chi2_flat.significant,
        chi2_adjusted_statistic=r.chi2_adjusted.statistic,
        chi2_adjusted_p_raw=r.chi2_adjusted.p_raw,
        chi2_adjusted_p=r.chi2_adjusted.p_corrected,
        chi2_adjusted_significant=r.chi2_adjusted.significant,
        outlier_mean_pct=r.outliers.mean_pct,
        outlier_std_pct=r.outliers.std_pct,
        outliers=r.outliers.text,
        weak_fraction=r.weak_fraction,
        online_weak=r.strength_histogram[Strength.ONLINE_WEAK.value],
        offline_weak=r.strength_histogram[Strength.OFFLINE_WEAK.value],
        strong=r.strength_histogram[Strength.STRONG.value],
        verdict=r.verdict,
    )
    return row


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _md_value(v):
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v).replace("|", "\\|")


def parse_csv(text: str) -> list[dict]:
    """Read a report CSV back, converting numeric columns."""
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in raw.items():
            if v == "" or k in ("profile", "composition", "generator", "outliers", "verdict", "skip_reason"):
                row[k] = v
            elif v in ("True", "False"):
                row[k] = v == "True"
            elif k in ("length", "count", "charset_size", "chi2_flat_df", "online_weak", "offline_weak", "strong"):
                row[k] = int(v)
            else:
                row[k] = float(v)
        rows.append(row)
    return rows


def run_audit(profiles=GRID_PROFILES, compositions=GRID_COMPOSITIONS, lengths=GRID_LENGTHS,
              count: int = 10_000, seed: int = 0, generator: str = "profile", workers: int = 1,
              k_sigma: float = 3.0, profile_table=None, alpha: float = ALPHA,
              family_size: int | None = None) -> AuditReport:
    """Audit every (profile, composition, length) cell.

    The chi-squared family size defaults to the number of analysed cells.
    Results are ordered as the grid, whatever ``workers`` is.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    table = builtin_profiles() if profile_table is None else profile_table
    cells = [AuditCell(p, composition_name(parse_composition(c)), int(n))
             for p in profiles for c in compositions for n in lengths]
    skips = {c: _skip_reason(c, table, generator) for c in cells}
    if family_size is None:
        family_size = max(1, sum(1 for c in cells if not skips[c]))
    jobs = [(c, count, seed, generator, family_size, k_sigma, profile_table, alpha) for c in cells]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_job, jobs))
    else:
        results = [_cell_job(j) for j in jobs]
    return AuditReport(tuple(results), count, seed, generator, family_size, k_sigma)
