import dataclasses
import difflib

import pytest

from conftest import CORPUS, EXPECTED, builtin_bundles, bundle_by_id, pattern_of, positive_files
from pdgfix import applier
from pdgfix.applier import analyze_source, apply_fix, fix_source, remap_script
from pdgfix.errors import DanglingReference, RemapFailure
from pdgfix.patterncompile import compile_pattern, load_examples
from pdgfix.treediff import apply_edit_script, delete, update

FIXABLE = positive_files() + [CORPUS / "range_len_loop.py"]
REMAP = CORPUS / "remap"


def only(pid, src):
    return analyze_source(src, [bundle_by_id(pid)])


@pytest.mark.parametrize("path", FIXABLE, ids=lambda p: p.name)
def test_fix_matches_expected_file(path):
    result = fix_source(path.read_text(), builtin_bundles(), str(path))
    assert result.text == (EXPECTED / path.name).read_text()
    assert result.applied and not result.remaining


def test_range_len_loop_keeps_data_line():
    src = (CORPUS / "range_len_loop.py").read_text()
    out = fix_source(src, [bundle_by_id("enumerate")]).text
    data_line = next(l for l in src.splitlines() if l.strip().startswith("data = "))
    assert data_line in out.splitlines()
    assert "enumerate(data)" in out and "range(len(data))" not in out


def test_update_of_exact_call_targets_call_node():
    f, = only("log1p", (EXPECTED.parent / "positives" / "log1p_1.py").read_text()).findings
    script = remap_script(bundle_by_id("log1p"), f)
    tree = f.graph.tree
    assert script and all(a.node in tree.nodes or a.node < 0 for a in script)


def test_placeholder_insert_is_rebound():
    bundle = compile_pattern(load_examples(REMAP / "show-len"), "show-len", "show the length")
    src = (REMAP / "target.py").read_text()
    f, = analyze_source(src, [bundle]).findings
    assert f.iso.binding == {"$v0": "items"}
    labels = [a.label for a in remap_script(bundle, f) if a.op == "insert"]
    assert "items" in labels and not any(l.startswith("$") for l in labels)
    result = fix_source(src, [bundle])
    assert result.text == (REMAP / "expected.py").read_text()
    # the fixed code still contains the pattern, but the site is fixed once
    assert len(result.applied) == 1


def test_two_occurrences_fix_first_only():
    src = (CORPUS / "two_occurrences.py").read_text()
    analysis = only("enumerate", src)
    first, second = analysis.findings
    out = apply_fix(src, analysis.tree, first, bundle_by_id("enumerate"))
    assert out == (EXPECTED / "two_occurrences_first.py").read_text()
    tail = src[src.index("def second_pass"):]
    assert out.endswith(tail)
    again = only("enumerate", out).findings
    assert len(again) == 1 and again[0].unit == second.unit


@pytest.mark.parametrize("path", FIXABLE, ids=lambda p: p.name)
def test_idempotent(path):
    pid = pattern_of(path) if path.parent.name == "positives" else "enumerate"
    src = path.read_text()
    analysis = only(pid, src)
    f = analysis.findings[0]
    out = apply_fix(src, analysis.tree, f, bundle_by_id(pid))
    assert out != src
    after = only(pid, out).findings
    assert {g.span_key() for g in after}.isdisjoint({f.span_key()})
    assert fix_source(out, [bundle_by_id(pid)]).text == out


@pytest.mark.parametrize("path", FIXABLE, ids=lambda p: p.name)
def test_locality(path):
    src = path.read_text()
    analysis = analyze_source(src, builtin_bundles())
    for f in analysis.findings:
        bundle = bundle_by_id(f.pattern)
        _, touched = apply_edit_script(analysis.tree, remap_script(bundle, f))
        spans = [analysis.tree.nodes[t].span for t in touched if t in analysis.tree.nodes]
        out = apply_fix(src, analysis.tree, f, bundle)
        for tag, i1, i2, _, _ in difflib.SequenceMatcher(None, src, out, autojunk=False).get_opcodes():
            if tag != "equal":
                assert any(s.start <= i1 and i2 <= s.end for s in spans), (tag, i1, i2)


def _inject_dangling(monkeypatch):
    real = applier.remap_script

    def broken(bundle, finding, target=None):
        script = real(bundle, finding, target)
        victim = next(a.node for a in script if a.node >= 0) if any(a.node >= 0 for a in script) \
            else script[0].parent
        return script + [delete(victim), delete(victim)]

    monkeypatch.setattr(applier, "remap_script", broken)


@pytest.mark.parametrize("path", FIXABLE, ids=lambda p: p.name)
def test_dangling_reference_leaves_source(path, monkeypatch):
    src = path.read_text()
    analysis = analyze_source(src, builtin_bundles())
    _inject_dangling(monkeypatch)
    for f in analysis.findings:
        bundle = bundle_by_id(f.pattern)
        assert apply_fix(src, analysis.tree, f, bundle) == src
        with pytest.raises(DanglingReference):
            apply_fix(src, analysis.tree, f, bundle, strict=True)
    result = fix_source(src, builtin_bundles())
    assert result.text == src and result.failed and not result.applied


def _unremappable_enumerate():
    enum = bundle_by_id("enumerate")
    covered = {r for v in enum.graph.vertices.values() for r in v.syntax_refs}
    func = next(n for n in enum.canonical_tree.root.walk() if n.kind == "function-def")
    assert func.id not in covered
    return dataclasses.replace(enum, script=[update(func.id, "renamed")])


def test_remap_failure_makes_finding_report_only():
    bundle = _unremappable_enumerate()
    src = (CORPUS / "range_len_loop.py").read_text()
    f, = analyze_source(src, [bundle]).findings
    assert not f.fixable
    with pytest.raises(RemapFailure) as info:
        remap_script(bundle, f)
    assert info.value.index == 0
    result = fix_source(src, [bundle])
    assert result.text == src and len(result.remaining) == 1


def test_parse_error_is_reported():
    result = fix_source("def f(:\n", builtin_bundles())
    assert result.error and result.text == "def f(:\n"


def test_swapped_operands_are_report_only():
    src = "def f(x, y):\n    x = y + x\n    return x\n"
    f, = only("aug-assign", src).findings
    assert not f.fixable
    with pytest.raises(RemapFailure):
        remap_script(bundle_by_id("aug-assign"), f)
    assert fix_source(src, [bundle_by_id("aug-assign")]).text == src
