import math
import subprocess
import sys

import pytest

from passaudit.audit import (
    MD_COLUMNS,
    VERDICT_EXPLAINED,
    VERDICT_RANDOM,
    AuditCell,
    analyse_cell,
    cell_seed,
    parse_csv,
    run_audit,
)
from passaudit.cli import EXIT_NONRANDOM, EXIT_OK, EXIT_USAGE, SEED_WARNING, main


@pytest.fixture(scope="module")
def small_report():
    return run_audit(["reference", "oneps", "sfri"], ["ld", "sd"], [8], count=4000, seed=5)


def test_report_cells_and_skips(small_report):
    r = small_report
    assert len(r.results) == 6
    assert {x.cell.key for x in r.skipped} == {"oneps/sd/8", "sfri/ld/8", "sfri/sd/8"}
    assert all(x.skip_reason for x in r.skipped)
    assert r.family_size == 3
    by_key = {x.cell.key: x for x in r.analysed}
    assert by_key["reference/ld/8"].verdict == VERDICT_RANDOM
    assert by_key["oneps/ld/8"].generator_kind == "constrained"
    assert by_key["oneps/ld/8"].verdict == VERDICT_EXPLAINED
    hist = by_key["reference/ld/8"].strength_histogram
    assert sum(hist.values()) == 4000


def test_cell_seed_depends_on_identity_not_position():
    a = AuditCell("chrm", "ld", 8)
    assert cell_seed(1, a) == cell_seed(1, AuditCell("chrm", "ld", 8))
    assert cell_seed(1, a) != cell_seed(1, AuditCell("chrm", "ld", 12))
    r1 = analyse_cell(a, 500, 1)
    r2 = run_audit(["kpx", "chrm"], ["ld"], [8], count=500, seed=1).results[1]
    assert r1.chi2_flat.statistic == r2.chi2_flat.statistic


def md_rows(markdown):
    lines = [l for l in markdown.splitlines() if l.startswith("| ")]
    header = [c.strip() for c in lines[0].strip("|").split(" | ")]
    rows = []
    for line in lines[1:]:
        cells = [c.strip() for c in line[2:-2].split(" | ")]
        rows.append(dict(zip(header, cells)))
    return header, rows


def test_csv_and_markdown_agree(small_report):
    csv_rows = [r for r in parse_csv(small_report.to_csv()) if not r["skip_reason"]]
    header, rows = md_rows(small_report.to_markdown())
    assert header == MD_COLUMNS
    assert len(rows) == len(csv_rows)
    for c, m in zip(csv_rows, rows):
        for col in MD_COLUMNS:
            v = c[col]
            if isinstance(v, float):
                assert float(m[col]) == float(f"{v:.4g}"), col
            elif isinstance(v, bool):
                assert m[col] == ("yes" if v else "no")
            else:
                assert m[col].replace("\\|", "|") == str(v), col


def test_csv_full_precision(small_report):
    rows = parse_csv(small_report.to_csv())
    first = small_report.analysed[0]
    row = next(r for r in rows if r["profile"] == first.cell.profile and r["composition"] == first.cell.composition)
    assert row["shannon_bits"] == first.shannon_bits
    assert row["chi2_flat_statistic"] == first.chi2_flat.statistic


# -- CLI ---------------------------------------------------------------------------------

def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_spec_pin(capsys):
    code, out, _ = run(["gen", "--spec", "dddddd"], capsys)
    assert code == EXIT_OK and len(out.strip()) == 6 and out.strip().isdigit()


def test_gen_unsupported_combination(capsys):
    code, _, err = run(["gen", "--length", "8", "--composition", "sd", "--profile", "oneps"], capsys)
    assert code == EXIT_USAGE and "does not support" in err


def test_gen_seeded_is_reproducible_and_warns(capsys):
    code, first, err = run(["gen", "--length", "20", "--count", "3", "--seed", "1"], capsys)
    assert code == EXIT_OK and SEED_WARNING in err
    _, second, _ = run(["gen", "--length", "20", "--count", "3", "--seed", "1"], capsys)
    assert first == second and len(first.splitlines()) == 3


def test_gen_default_minimums(capsys):
    _, out, _ = run(["gen", "--length", "8", "--count", "50", "--seed", "2", "--filter", "off"], capsys)
    for pw in out.splitlines():
        assert any(c.isdigit() for c in pw)
        assert any(not c.isalnum() for c in pw)


def test_gen_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["gen", "--spec", "dd", "--length", "4"])
    assert e.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as e:
        main(["gen", "--filter", "sometimes"])
    assert e.value.code == EXIT_USAGE
    code, _, err = run(["gen", "--spec", "ldx"], capsys)
    assert code == EXIT_USAGE and "offset 2" in err


def test_estimate(capsys):
    code, out, _ = run(["estimate", "2345678#"], capsys)
    assert code == EXIT_OK
    assert "OnlineWeak" in out and "sequence" in out


def test_entropy(capsys):
    _, out, _ = run(["entropy", "--charset-size", "96", "--length", "8"], capsys)
    assert "15.557" in out


def test_chi2_biased_is_significant(capsys):
    code, out, _ = run(["chi2", "--biased", "--charset-size", "52", "--count", "200000", "--seed", "1"], capsys)
    assert code == EXIT_OK and "verdict\tsignificant" in out


def test_outliers_biased(capsys):
    _, out, _ = run(["outliers", "--biased", "--charset-size", "52", "--count", "300000", "--seed", "1"], capsys)
    line = next(l for l in out.splitlines() if l.startswith("outliers"))
    assert sorted(line.split("\t")[1]) == list("WXYZ")


def test_corpus_then_chi2_and_entropy(tmp_path, capsys):
    path = tmp_path / "c.txt"
    code, _, _ = run(["corpus", "--composition", "ld", "--count", "5000", "--seed", "3", "-o", str(path)], capsys)
    assert code == EXIT_OK
    again = tmp_path / "d.txt"
    run(["corpus", "--composition", "ld", "--count", "5000", "--seed", "3", "-o", str(again)], capsys)
    assert path.read_bytes() == again.read_bytes()
    _, out, _ = run(["chi2", "--corpus", str(path), "--composition", "ld"], capsys)
    assert "df\t61" in out
    _, out, _ = run(["entropy", "--corpus", str(path)], capsys)
    assert "distinct_chars\t62" in out


def test_audit_command_outputs_and_exit_codes(tmp_path, capsys):
    md, csv_path = tmp_path / "r.md", tmp_path / "r.csv"
    argv = ["audit", "--profiles", "reference", "--compositions", "ld", "--lengths", "8",
            "--count", "3000", "--seed", "4", "--markdown", str(md), "--csv", str(csv_path)]
    code, _, _ = run(argv, capsys)
    assert code == EXIT_OK
    rows = parse_csv(csv_path.read_text())
    assert not rows[0]["chi2_flat_significant"] and "reference" in md.read_text()
    code, _, _ = run(["audit", "--profiles", "bw", "--compositions", "ld", "--lengths", "8",
                      "--count", "20000", "--seed", "4", "--fail-on-nonrandom"], capsys)
    assert code == EXIT_NONRANDOM
    with pytest.raises(SystemExit) as e:
        main(["audit", "--profiles", "nosuch"])
    assert e.value.code == EXIT_USAGE


def test_profiles_env_var(tmp_path, monkeypatch, capsys):
    extra = tmp_path / "p.txt"
    extra.write_text("profile chrm\nsymbols=!-\n")
    monkeypatch.setenv("PASSAUDIT_PROFILES", str(extra))
    _, out, _ = run(["gen", "--profile", "chrm", "--spec", "ssssssss", "--filter", "off", "--count", "20",
                     "--seed", "1"], capsys)
    assert set(out.split("\n")[0]) <= {"!", "-"}
    assert set("".join(out.splitlines())) == {"!", "-"}


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "passaudit.cli", "estimate", "-q", "password"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "OnlineWeak" in r.stdout
