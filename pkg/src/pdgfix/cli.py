"""Command line interface: ``pdgfix compile|check|fix``."""

from __future__ import annotations

import difflib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from .applier import analyze_source, fix_source
from .bundleio import load_pattern_set, save_bundle
from .errors import EmptyCore, PdgfixError
from .patterncompile import compile_pattern, load_examples
from .patterns import BUILTIN_DIR

EXIT_CLEAN, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2


def _err(msg: str):
    click.echo(f"pdgfix: {msg}", err=True)


def collect_files(paths) -> list[Path]:
    files = set()
    for p in paths:
        p = Path(p)
        if p.is_dir():
            files.update(f for f in p.rglob("*.py") if f.is_file())
        else:
            files.add(p)
    return sorted(files)


def _load_patterns(directory):
    errors = []
    try:
        bundles = load_pattern_set(directory, errors=errors)
    except PdgfixError as e:
        _err(str(e))
        raise SystemExit(EXIT_ERROR)
    for path, e in errors:
        _err(f"skipping malformed pattern {path}: {e}")
    if not bundles:
        _err(f"warning: no patterns found in {directory}")
    return bundles


def _read(path: Path):
    try:
        return path.read_bytes().decode("utf-8"), None
    except (OSError, UnicodeDecodeError) as e:
        return None, str(e)


def finding_record(tree, f) -> dict:
    spans = []
    for s in f.spans:
        sl, sc = tree.location(s.start)
        el, ec = tree.location(s.end)
        spans.append({"start_line": sl, "start_col": sc, "end_line": el, "end_col": ec})
    return {"pattern": f.pattern, "file": f.path, "spans": spans,
            "message": f.message, "fixable": f.fixable}


def check_file(path: str, bundles) -> tuple[list, list]:
    """Records and error messages for one file; safe to run in a worker."""
    text, err = _read(Path(path))
    if err:
        return [], [f"{path}: cannot read: {err}"]
    analysis = analyze_source(text, bundles, path)
    if analysis.error:
        return [], [f"{path}: cannot parse: {analysis.error}"]
    msgs = [f"{path}: pattern {pid} skipped in {unit}: search budget exceeded"
            for pid, unit in analysis.skipped]
    return [finding_record(analysis.tree, f) for f in analysis.findings], msgs


def format_human(rec: dict) -> str:
    first = rec["spans"][0]
    lines = sorted({s["start_line"] for s in rec["spans"]})
    more = f" (lines {', '.join(map(str, lines))})" if len(lines) > 1 else ""
    tag = " [fixable]" if rec["fixable"] else ""
    return (f"{rec['file']}:{first['start_line']}:{first['start_col']}: "
            f"{rec['pattern']}: {rec['message']}{more}{tag}")


def _emit(rec: dict, fmt: str):
    if fmt == "json":
        click.echo(json.dumps(rec, sort_keys=True))
    else:
        click.echo(format_human(rec))


def _run_checks(files, bundles, jobs: int):
    names = [str(f) for f in files]
    if jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(check_file, names, [bundles] * len(names)))
    return [check_file(n, bundles) for n in names]


def _require_paths(paths) -> bool:
    missing = [p for p in paths if not Path(p).exists()]
    for p in missing:
        _err(f"{p}: no such file or directory")
    return not missing


patterns_option = click.option(
    "--patterns", "patterns_dir", type=click.Path(file_okay=False), envvar="PDGFIX_PATTERNS",
    default=str(BUILTIN_DIR), show_default="built-in set",
    help="Directory of .pattern.json bundles (env: PDGFIX_PATTERNS).")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Graph-based change pattern linter for Python."""


@main.command("compile")
@click.option("--examples", "examples", required=True, type=click.Path(),
              help="Directory holding <k>/before.py and <k>/after.py pairs.")
@click.option("--id", "pattern_id", required=True)
@click.option("--message", required=True, help="Description shown with findings.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_compile(examples, pattern_id, message, out):
    """Compile example pairs into a pattern bundle."""
    instances = []
    try:
        instances = load_examples(examples)
        bundle = compile_pattern(instances, pattern_id, message)
        for w in bundle.warnings:
            _err(f"warning: {w}")
        save_bundle(bundle, out)
    except EmptyCore as e:
        i, j = e.pair
        _err(f"compile failed: no common edit between {instances[i].name} and {instances[j].name}")
        sys.exit(EXIT_ERROR)
    except (PdgfixError, FileNotFoundError, ValueError) as e:
        _err(f"compile failed: {e}")
        sys.exit(EXIT_ERROR)
    click.echo(f"wrote {out}")
    sys.exit(EXIT_CLEAN)


@main.command("check")
@click.argument("paths", nargs=-1, required=True)
@patterns_option
@click.option("--format", "fmt", type=click.Choice(["human", "json"]), default="human")
@click.option("--jobs", "-j", type=int, default=1, show_default=True, help="Worker processes.")
def cmd_check(paths, patterns_dir, fmt, jobs):
    """Report pattern occurrences in files or directories."""
    if not _require_paths(paths):
        sys.exit(EXIT_ERROR)
    bundles = _load_patterns(patterns_dir)
    files = collect_files(paths)
    found = False
    for recs, msgs in _run_checks(files, bundles, jobs):
        for m in msgs:
            _err(m)
        for rec in recs:
            found = True
            _emit(rec, fmt)
    sys.exit(EXIT_FINDINGS if found else EXIT_CLEAN)


def _diff(path: str, before: str, after: str) -> str:
    return "".join(difflib.unified_diff(before.splitlines(keepends=True),
                                        after.splitlines(keepends=True),
                                        f"a/{path}", f"b/{path}"))


def _prompt(name: str):
    def decide(f, before, after):
        click.echo(f"{name}:{f.lines[0]}: {f.pattern}: {f.message}")
        click.echo(_diff(name, before, after), nl=False)
        return click.confirm("Apply this fix?", default=False)
    return decide


@main.command("fix")
@click.argument("paths", nargs=-1, required=True)
@patterns_option
@click.option("--dry-run", is_flag=True, help="Print diffs instead of writing files.")
@click.option("--interactive", is_flag=True, help="Ask before applying each fix.")
@click.option("--format", "fmt", type=click.Choice(["human", "json"]), default="human")
def cmd_fix(paths, patterns_dir, dry_run, interactive, fmt):
    """Apply fixes for pattern occurrences."""
    if not _require_paths(paths):
        sys.exit(EXIT_ERROR)
    bundles = _load_patterns(patterns_dir)
    found = False
    write_failed = False
    for path in collect_files(paths):
        name = str(path)
        text, err = _read(path)
        if err:
            _err(f"{name}: cannot read: {err}")
            continue

        result = fix_source(text, bundles, name, decide=_prompt(name) if interactive else None)
        if result.error:
            _err(f"{name}: cannot parse: {result.error}")
            continue
        if result.initial:
            found = True
        for f in result.remaining:
            tree = f.graph.tree
            _emit(finding_record(tree, f), fmt)
        if not result.changed:
            continue
        if dry_run:
            click.echo(_diff(name, text, result.text), nl=False)
            continue
        try:
            path.write_bytes(result.text.encode("utf-8"))
        except OSError as e:
            write_failed = True
            _err(f"{name}: cannot write: {e}")
            continue
        click.echo(f"fixed {len(result.applied)} finding(s) in {name}", err=True)
    if write_failed:
        sys.exit(EXIT_ERROR)
    sys.exit(EXIT_FINDINGS if found else EXIT_CLEAN)


if __name__ == "__main__":
    main()
