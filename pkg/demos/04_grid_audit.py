"""
A small grid audit
==================

The CLI's ``passaudit audit`` runs this over every profile, composition and
length. Here a slice of the grid is enough to see each verdict.
"""

from pathlib import Path

from passaudit.audit import run_audit

report = run_audit(["chrm", "bw", "dlan", "dvrn", "oneps"], ["ld", "sd"], [8], count=20_000, seed=11)

for r in report.results:
    if r.skipped:
        print(f"{r.cell.key:12s} skipped: {r.skip_reason}")
    else:
        print(f"{r.cell.key:12s} {r.generator_kind:11s} flat p={r.chi2_flat.p_corrected:.2g} "
              f"adjusted p={r.chi2_adjusted.p_corrected:.2g} weak={r.weak_fraction:.1e}  {r.verdict}")

# %% reports: Markdown at 4 significant digits, CSV at full precision
out = Path("audit_demo")
out.mkdir(exist_ok=True)
(out / "report.md").write_text(report.to_markdown())
(out / "report.csv").write_text(report.to_csv())
print("wrote", out / "report.md", "and", out / "report.csv")
