import io
import tokenize
from collections import deque

import pytest

from conftest import CORPUS
from pdgfix.errors import UnknownVertex
from pdgfix.fgpdg import (CONTROL_SUBKINDS, DATA_SUBKINDS, OPERATION_SUBKINDS, build_fgpdg,
                          highlight_spans)
from pdgfix.syntax import function_units, parse_source

CORPUS_FILES = sorted(CORPUS.rglob("*.py"))


def graph_of(src, index=0):
    tree = parse_source(src)
    return build_fgpdg(function_units(tree)[index], tree), tree


def reachable(g, src, dst):
    seen, todo = {src}, deque([src])
    while todo:
        v = todo.popleft()
        if v == dst:
            return True
        for e in g.out_edges(v):
            if e.dst not in seen:
                seen.add(e.dst)
                todo.append(e.dst)
    return False


def test_single_assignment_graph():
    g, _ = graph_of("def f():\n    x = 1\n")
    assert g.export().strip().splitlines() == [
        'V 0 operation assign "="',
        'V 1 data variable "x"',
        'V 2 data literal "1"',
        "E 0 1 data def",
        "E 2 0 data para",
    ]


def test_pass_has_no_vertices():
    g, _ = graph_of("def f():\n    pass\n")
    assert not g.vertices and not g.edges


def test_range_len_loop_golden():
    g, _ = graph_of((CORPUS / "range_len_loop.py").read_text())
    assert g.export().strip() == (CORPUS / "golden" / "range_len_loop.graph").read_text().strip()


def test_range_len_loop_structure():
    g, tree = graph_of((CORPUS / "range_len_loop.py").read_text())
    data = [v for v in g.vertices.values() if v.label == "data" and v.kind == "data"]
    defs = [v for v in data if any(e.label == "def" for e in g.in_edges(v.id))]
    assert len(defs) == 1
    d = defs[0]
    uses = [e for e in g.out_edges(d.id) if e.label == "use"]
    use_lines = {tree.line_of(tree.nodes[g.vertices[e.dst].syntax_refs[0]].span.start) for e in uses}
    def_line = tree.line_of(tree.nodes[d.syntax_refs[0]].span.start)
    assert len(uses) == 2
    assert def_line not in use_lines and len(use_lines) >= 1
    loop, = [v for v in g.vertices.values() if v.kind == "control" and v.subkind == "for"]
    deps = {g.vertices[e.dst].label for e in g.out_edges(loop.id) if e.label == "dep"}
    assert {"range", "len", "[]", "="} <= deps


def test_def_use_path_straight_line():
    g, _ = graph_of("def f():\n    a = make()\n    use(a)\n")
    a_def = next(v.id for v in g.vertices.values() if v.label == "a"
                 and any(e.label == "def" for e in g.in_edges(v.id)))
    call = next(v.id for v in g.vertices.values() if v.kind == "operation" and v.label == "use")
    assert reachable(g, a_def, call)


def test_branch_join_keeps_both_definitions():
    src = "def f(c):\n    if c:\n        x = 1\n    else:\n        x = 2\n    print(x)\n"
    g, _ = graph_of(src)
    call = next(v.id for v in g.vertices.values() if v.label == "print" and v.kind == "operation")
    sources = {e.src for e in g.in_edges(call) if e.label == "use"}
    assert len(sources) == 2


def test_dotted_call_vertices():
    g, _ = graph_of("def f(x):\n    return np.log(x)\n")
    labels = {(v.kind, v.subkind, v.label) for v in g.vertices.values()}
    assert ("operation", "call", "log") in labels
    assert ("data", "function-ref", "np.log") in labels
    assert any(e.label == "qual" for e in g.edges)


def test_equal_literals_are_distinct():
    g, _ = graph_of("def f():\n    a = 1\n    b = 1\n")
    assert sum(1 for v in g.vertices.values() if v.label == "1") == 2


def test_highlight_single_variable():
    g, tree = graph_of("def f():\n    x = 1\n")
    x = next(v.id for v in g.vertices.values() if v.label == "x")
    span, = highlight_spans(g, {x})
    assert tree.text(span) == "x"


def test_highlight_empty_and_unknown():
    g, _ = graph_of("def f():\n    x = 1\n")
    assert highlight_spans(g, set()) == []
    with pytest.raises(UnknownVertex):
        highlight_spans(g, {999})


def test_highlight_merges_and_sorts():
    g, tree = graph_of("def f(a):\n    b = a + 1\n    return b\n")
    spans = highlight_spans(g, set(g.vertices))
    assert all(s.start <= t.start for s, t in zip(spans, spans[1:]))
    assert all(s.end < t.start for s, t in zip(spans, spans[1:]))


def _units(path):
    tree = parse_source(path.read_text())
    return tree, function_units(tree, str(path), module=True)


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.name)
def test_graph_invariants(path):
    tree, units = _units(path)
    for unit in units:
        g = build_fgpdg(unit, tree)
        assert g.check() == []
        for v in g.vertices.values():
            assert v.subkind in {"data": DATA_SUBKINDS, "operation": OPERATION_SUBKINDS,
                                 "control": CONTROL_SUBKINDS}[v.kind]
            if v.kind != "control":
                assert v.label
        for e in g.edges:
            assert e.src != e.dst
            if e.kind == "control":
                assert g.vertices[e.src].kind == "control"


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.name)
def test_use_edges_point_at_consumers(path):
    tree, units = _units(path)
    for unit in units:
        g = build_fgpdg(unit, tree)
        for e in g.edges:
            if e.label != "use":
                continue
            name = g.vertices[e.src].label
            node = tree.nodes[g.vertices[e.dst].syntax_refs[0]]
            assert any(n.kind == "name" and n.label == name for n in node.walk()), (path, e)


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.name)
def test_deterministic(path):
    text = path.read_text()
    t1, t2 = parse_source(text), parse_source(text)
    for u1, u2 in zip(function_units(t1, module=True), function_units(t2, module=True)):
        assert build_fgpdg(u1, t1).export() == build_fgpdg(u2, t2).export()


def _token_count(text):
    n = 0
    for tok in tokenize.generate_tokens(io.StringIO(text).readline):
        if tok.type in (tokenize.NAME, tokenize.NUMBER, tokenize.STRING, tokenize.OP):
            n += 1
    return n


def test_size_linear_in_tokens():
    for path in CORPUS_FILES:
        text = path.read_text()
        tree = parse_source(text)
        for u in function_units(tree, module=True):
            own = tree.text(u.node.span) if u.node.kind != "module" else text
            assert len(build_fgpdg(u, tree).vertices) <= 2 * _token_count(own.strip() + "\n"), (path, u)
