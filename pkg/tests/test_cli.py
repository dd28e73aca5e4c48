import json
import shutil

import pytest
from click.testing import CliRunner

from conftest import CORPUS, EXPECTED, NEGATIVES, POSITIVES
from pdgfix.bundleio import load_bundle
from pdgfix.cli import main
from pdgfix.patterns import BUILTIN_DIR, EXAMPLES_DIR

SPAN_KEYS = {"start_line", "start_col", "end_line", "end_col"}


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args, **kw):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False, **kw)
    return invoke


@pytest.fixture
def range_len_loop(tmp_path):
    path = tmp_path / "range_len_loop.py"
    shutil.copy(CORPUS / "range_len_loop.py", path)
    return path


def test_check_clean_file(run, tmp_path):
    clean = tmp_path / "clean.py"
    clean.write_text("def f(x):\n    return x + 1\n")
    result = run("check", clean)
    assert result.exit_code == 0 and result.stdout == ""


def test_check_range_len_loop_json(run, range_len_loop):
    result = run("check", "--format", "json", range_len_loop)
    assert result.exit_code == 1
    rec, = [json.loads(line) for line in result.stdout.splitlines()]
    assert set(rec) == {"pattern", "file", "spans", "message", "fixable"}
    assert rec["pattern"] == "enumerate" and rec["fixable"] is True
    assert rec["file"] == str(range_len_loop)
    assert all(set(s) == SPAN_KEYS for s in rec["spans"])
    lines = {s["start_line"] for s in rec["spans"]}
    assert len(lines) >= 2 and 5 in lines


def test_check_human(run, range_len_loop):
    result = run("check", range_len_loop)
    assert result.exit_code == 1
    assert result.stdout.startswith(f"{range_len_loop}:5:") and "enumerate" in result.stdout


def test_check_missing_path(run, tmp_path):
    assert run("check", tmp_path / "nope.py").exit_code == 2


def test_unparseable_file_reported_and_run_continues(run, tmp_path, range_len_loop):
    (tmp_path / "broken.py").write_text("def f(:\n")
    result = run("check", tmp_path)
    assert result.exit_code == 1
    assert "broken.py" in result.stderr and "enumerate" in result.stdout


def test_check_json_over_corpus_is_line_delimited(run):
    result = run("check", "--format", "json", CORPUS)
    assert result.exit_code == 1
    recs = [json.loads(line) for line in result.stdout.splitlines()]
    assert recs
    order = [(r["file"], r["spans"][0]["start_line"], r["spans"][0]["start_col"]) for r in recs]
    assert order == sorted(order)


def test_check_negatives_are_clean(run):
    result = run("check", NEGATIVES)
    assert result.exit_code == 0 and result.stdout == ""


def test_jobs_give_same_output(run):
    one = run("check", "--format", "json", POSITIVES)
    many = run("check", "--format", "json", "--jobs", "4", POSITIVES)
    assert one.exit_code == many.exit_code == 1
    assert one.stdout == many.stdout


def test_fix_rewrites_then_clean(run, range_len_loop):
    first = run("fix", range_len_loop)
    assert first.exit_code == 1
    assert range_len_loop.read_text() == (EXPECTED / "range_len_loop.py").read_text()
    assert run("fix", range_len_loop).exit_code == 0
    assert run("check", range_len_loop).exit_code == 0


def test_fix_dry_run(run, range_len_loop):
    before = range_len_loop.read_bytes()
    result = run("fix", "--dry-run", range_len_loop)
    assert result.exit_code == 1
    assert range_len_loop.read_bytes() == before
    assert "-    for i in range(len(data)):" in result.stdout
    assert "+    for i, item in enumerate(data):" in result.stdout


def test_fix_interactive_decline(run, range_len_loop):
    before = range_len_loop.read_bytes()
    result = run("fix", "--interactive", range_len_loop, input="n\n")
    assert result.exit_code == 1
    assert range_len_loop.read_bytes() == before
    assert "enumerate(data)" in result.stdout
    assert f"{range_len_loop}:5:" in result.stdout


def test_fix_interactive_accept(run, range_len_loop):
    result = run("fix", "--interactive", range_len_loop, input="y\n")
    assert result.exit_code == 1
    assert range_len_loop.read_text() == (EXPECTED / "range_len_loop.py").read_text()


def test_compile_success(run, tmp_path):
    out = tmp_path / "enum.pattern.json"
    result = run("compile", "--examples", EXAMPLES_DIR / "enumerate", "--id", "enumerate",
                 "--message", "use enumerate", "--out", out)
    assert result.exit_code == 0
    assert load_bundle(out).script == load_bundle(BUILTIN_DIR / "enumerate.pattern.json").script


def test_compile_missing_after(run, tmp_path):
    pair = tmp_path / "ex" / "1"
    pair.mkdir(parents=True)
    (pair / "before.py").write_text("def f(a):\n    return a\n")
    result = run("compile", "--examples", tmp_path / "ex", "--id", "x", "--message", "m",
                 "--out", tmp_path / "x.pattern.json")
    assert result.exit_code == 2
    assert str(pair / "after.py") in result.stderr


def test_compile_empty_core(run, tmp_path):
    pairs = {
        "a": ("def f(a):\n    x = a + 1\n    return x\n", "def f(a):\n    x = a + 2\n    return x\n"),
        "b": ("def f(b):\n    x = b + 1\n    return x\n", "def f(b):\n    x = b + 1\n    return -x\n"),
    }
    for name, (before, after) in pairs.items():
        d = tmp_path / "ex" / name
        d.mkdir(parents=True)
        (d / "before.py").write_text(before)
        (d / "after.py").write_text(after)
    result = run("compile", "--examples", tmp_path / "ex", "--id", "x", "--message", "m",
                 "--out", tmp_path / "x.pattern.json")
    assert result.exit_code == 2
    assert str(tmp_path / "ex" / "a") in result.stderr and str(tmp_path / "ex" / "b") in result.stderr
    assert not (tmp_path / "x.pattern.json").exists()


def test_patterns_env_var(run, tmp_path, range_len_loop, monkeypatch):
    empty = tmp_path / "none"
    empty.mkdir()
    monkeypatch.setenv("PDGFIX_PATTERNS", str(empty))
    result = run("check", range_len_loop)
    assert result.exit_code == 0 and "no patterns" in result.stderr
    only = tmp_path / "only"
    only.mkdir()
    shutil.copy(BUILTIN_DIR / "enumerate.pattern.json", only)
    monkeypatch.setenv("PDGFIX_PATTERNS", str(only))
    assert run("check", range_len_loop).exit_code == 1


def test_duplicate_pattern_ids_are_operational_errors(run, tmp_path, range_len_loop):
    d = tmp_path / "dup"
    d.mkdir()
    shutil.copy(BUILTIN_DIR / "enumerate.pattern.json", d / "a.pattern.json")
    shutil.copy(BUILTIN_DIR / "enumerate.pattern.json", d / "b.pattern.json")
    assert run("check", "--patterns", d, range_len_loop).exit_code == 2
