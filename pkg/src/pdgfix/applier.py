"""Locate pattern occurrences in source files and apply their fixes."""

from __future__ import annotations

import ast
import difflib
import warnings
from dataclasses import dataclass, field

from .errors import PdgfixError, RemapFailure, TimeoutExceeded
from .fgpdg import Pdg, build_fgpdg
from .matcher import DEFAULT_BUDGET, Finding, find_matches, finding_spans
from .printer import render
from .syntax import SyntaxNode, SyntaxTree, function_units, parse_source
from .treediff import EditAction, _Editor, apply_edit_script

MAX_PASSES = 10


# ---------------------------------------------------------------------------
# remapping


def _correspondence(bundle, finding: Finding, target: Pdg) -> dict:
    corr = {}
    graph = bundle.graph
    for p, t in sorted(finding.iso.mapping.items()):
        for a, b in zip(graph.vertices[p].syntax_refs, target.vertices[t].syntax_refs):
            corr.setdefault(a, b)
    _check_operand_order(bundle.canonical_tree, target.tree, corr)
    for aid, sid in sorted(finding.iso.anchors.items()):
        corr.setdefault(graph.vertices[aid].syntax_refs[0], sid)
    # a suffix-matched dotted path: the receiver expression left of the
    # suffix corresponds as a whole, whatever its shape in the target
    ctree, ttree = bundle.canonical_tree, target.tree
    for p, t in sorted(finding.iso.mapping.items()):
        mode = bundle.modes.get(p)
        if mode is None or not mode.suffix:
            continue
        a = ctree.nodes.get(graph.vertices[p].syntax_refs[0])
        b = ttree.nodes.get(target.vertices[t].syntax_refs[0])
        for _ in range(mode.suffix.count(".")):
            if a is None or b is None or a.kind != "attribute" or b.kind != "attribute":
                a = None
                break
            a, b = a.children[0], b.children[0]
        if a is not None and b is not None:
            corr[a.id] = b.id
    return corr


def _check_operand_order(ctree: SyntaxTree, ttree: SyntaxTree, corr: dict):
    """Matched operands must sit in the same slot of their matched parent.

    The graph does not order operands, so ``x = y + x`` matches ``x = x + y``;
    rewriting it would swap operands of a possibly non-commutative operator.
    """
    for a, b in corr.items():
        ca, tb = ctree.nodes.get(a), ttree.nodes.get(b)
        if ca is None or tb is None or ca.parent is None or tb.parent is None:
            continue
        if ca.parent.kind in ("block", "module") or corr.get(ca.parent.id) != tb.parent.id:
            continue
        if ca.index_in_parent() != tb.index_in_parent():
            raise RemapFailure(-1, f"{ca.kind} operand order differs from the pattern")


def _index_of(node: SyntaxNode, siblings) -> int:
    for i, c in enumerate(siblings):
        if c is node:
            return i
    return -1


def remap_script(bundle, finding: Finding, target: Pdg | None = None) -> list[EditAction]:
    """Rewrite the bundle's script so it refers to nodes of the target tree.

    Both trees are edited in lockstep so that nodes created by earlier
    actions and positions shifted by them stay in correspondence.
    """
    target = target if target is not None else finding.graph
    corr = _correspondence(bundle, finding, target)
    binding = finding.iso.binding
    # edits stay inside the matched unit, so only that subtree is copied
    unit = getattr(target, "unit", None)
    ttree = target.tree.clone(unit.node if unit is not None else None)
    ctree = bundle.canonical_tree.clone()
    ced, ted = _Editor(ctree), _Editor(ttree)
    created: dict[int, int] = {}     # canonical work id -> target work id
    script_ref: dict[int, int] = {}  # target work id of a created node -> script id

    def to_target(cnode: SyntaxNode | None):
        if cnode is None:
            return None
        tid = created.get(cnode.id)
        if tid is None:
            tid = corr.get(cnode.id)
        return ttree.nodes.get(tid) if tid is not None else None

    def need(cnode, i, what):
        t = to_target(cnode)
        if t is None:
            raise RemapFailure(i, f"{what} {cnode.kind} has no counterpart in the target")
        return t

    def ref(tnode):
        return script_ref.get(tnode.id, tnode.id)

    def label(value, i):
        if value is not None and value in bundle.bound_names:
            bound = binding.get(value)
            if bound is None:
                raise RemapFailure(i, f"placeholder {value} is unbound")
            return bound
        return value

    def position(csibs, pos, tsibs):
        pos = min(pos, len(csibs))
        if pos > 0:
            left = to_target(csibs[pos - 1])
            k = _index_of(left, tsibs) if left is not None else -1
            if k >= 0:
                return k + 1
        if pos < len(csibs):
            right = to_target(csibs[pos])
            k = _index_of(right, tsibs) if right is not None else -1
            if k >= 0:
                return k
        if pos == 0:
            return 0
        if pos >= len(csibs):
            return len(tsibs)
        return min(pos, len(tsibs))

    out = []
    for i, a in enumerate(bundle.script):
        if a.op == "insert":
            cparent = ced.resolve(a.parent, i, "parent")
            tparent = need(cparent, i, "parent")
            pos = position(cparent.children, a.position, tparent.children)
            b = EditAction("insert", a.node, kind=a.kind, label=label(a.label, i),
                           parent=ref(tparent), position=pos)
        else:
            cnode = ced.resolve(a.node, i, "node")
            tnode = need(cnode, i, "node")
            if a.op == "delete":
                b = EditAction("delete", ref(tnode))
            elif a.op == "update":
                b = EditAction("update", ref(tnode), new_label=label(a.new_label, i))
            else:
                cparent = ced.resolve(a.parent, i, "parent")
                tparent = need(cparent, i, "parent")
                csibs = [c for c in cparent.children if c is not cnode]
                tsibs = [c for c in tparent.children if c is not tnode]
                b = EditAction("move", ref(tnode), parent=ref(tparent),
                               position=position(csibs, a.position, tsibs))
        made_c = ced.apply(a, i)
        made_t = ted.apply(b, i)
        if a.op == "insert":
            created[made_c.id] = made_t.id
            script_ref[made_t.id] = b.node
        out.append(b)
    return out


# ---------------------------------------------------------------------------
# analysis


@dataclass
class Analysis:
    path: str
    tree: SyntaxTree | None
    findings: list = field(default_factory=list)
    skipped: list = field(default_factory=list)   # (pattern id, unit name)
    error: str | None = None


def analyze_tree(tree: SyntaxTree, bundles, path: str = "", budget: int = DEFAULT_BUDGET) -> Analysis:
    result = Analysis(path, tree)
    seen = set()
    for unit in function_units(tree, path, module=True):
        pdg = build_fgpdg(unit, tree)
        if not pdg.vertices:
            continue
        for bundle in bundles:
            try:
                isos = find_matches(bundle, pdg, budget)
            except TimeoutExceeded:
                result.skipped.append((bundle.id, unit.qualified_name))
                continue
            for iso in isos:
                spans = finding_spans(pdg, iso)
                key = (bundle.id, tuple((s.start, s.end) for s in spans))
                if not spans or key in seen:
                    continue
                seen.add(key)
                f = Finding(bundle.id, path, iso, spans, bundle.description, False,
                            unit.qualified_name,
                            sorted({tree.line_of(s.start) + 1 for s in spans}), pdg)
                try:
                    remap_script(bundle, f, pdg)
                    f.fixable = True
                except PdgfixError:
                    pass
                result.findings.append(f)
    result.findings.sort(key=lambda f: (f.spans[0].start, f.pattern, f.span_key()))
    return result


def analyze_source(source: str, bundles, path: str = "", budget: int = DEFAULT_BUDGET) -> Analysis:
    """Parse and analyze; parse failures are reported in ``error``."""
    try:
        tree = parse_source(source)
    except PdgfixError as e:
        return Analysis(path, None, error=str(e))
    return analyze_tree(tree, bundles, path, budget)


# ---------------------------------------------------------------------------
# fixing


def _parses(text: str) -> bool:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ast.parse(text)
    except (SyntaxError, ValueError):
        return False
    return True


def apply_fix(source: str, tree: SyntaxTree, finding: Finding, bundle,
              target: Pdg | None = None, strict: bool = False) -> str:
    """Apply one finding's fix; returns ``source`` unchanged on any failure.

    With ``strict`` the underlying error is raised instead.
    """
    try:
        script = remap_script(bundle, finding, target)
        edited, touched = apply_edit_script(tree, script)
        text = render(edited, source, touched)
        if not _parses(text):
            raise PdgfixError("fixed source does not parse")
        return text
    except PdgfixError:
        if strict:
            raise
        return source


def _region(tree: SyntaxTree, script) -> set:
    ids = set()
    for a in script:
        for r in (a.node if a.op != "insert" else None, a.parent):
            if r is not None and r >= 0 and r in tree.nodes:
                ids.update(n.id for n in tree.nodes[r].walk())
    return ids


@dataclass
class FixResult:
    source: str
    text: str
    applied: list = field(default_factory=list)
    declined: list = field(default_factory=list)
    failed: list = field(default_factory=list)
    initial: list = field(default_factory=list)
    remaining: list = field(default_factory=list)
    error: str | None = None

    @property
    def changed(self) -> bool:
        return self.text != self.source


def _fkey(f: Finding):
    return (f.pattern, f.unit, f.span_key())


def _carry(sites, old: str, new: str):
    """Move site spans from ``old`` into ``new`` coordinates.

    Spans on unchanged lines shift exactly; spans inside rewritten lines
    widen to the rewritten block.
    """
    a, b = old.splitlines(keepends=True), new.splitlines(keepends=True)
    oa, ob = [0], [0]
    for line in a:
        oa.append(oa[-1] + len(line))
    for line in b:
        ob.append(ob[-1] + len(line))
    ops = difflib.SequenceMatcher(None, a, b, autojunk=False).get_opcodes()

    def at(pos: int, end: bool) -> int:
        for tag, i1, i2, j1, j2 in ops:
            if oa[i1] <= pos < oa[i2] or (end and pos == oa[i2] and i2 > i1):
                if tag == "equal":
                    return ob[j1] + pos - oa[i1]
                return ob[j2] if end else ob[j1]
        return ob[-1]

    return [(pid, [(at(s, False), at(e, True)) for s, e in spans]) for pid, spans in sites]


def _same_site(f: Finding, sites) -> bool:
    for pid, spans in sites:
        if pid == f.pattern and all(any(s.start < e and a < s.end for a, e in spans) for s in f.spans):
            return True
    return False


def fix_source(source: str, bundles, path: str = "", decide=None,
               max_passes: int = MAX_PASSES, budget: int = DEFAULT_BUDGET) -> FixResult:
    """Apply fixable findings until none are left (or ``max_passes``).

    ``decide(finding, before, after)`` is asked per finding when given and
    fixes are then applied one at a time.
    """
    by_id = {b.id: b for b in bundles}
    result = FixResult(source, source)
    text = source
    skip: set = set()
    sites: list = []   # (pattern, spans) of applied fixes, in current coordinates
    first = True
    for _ in range(max_passes):
        analysis = analyze_source(text, bundles, path, budget)
        if analysis.error:
            result.error = analysis.error
            break
        if first:
            result.initial = list(analysis.findings)
            first = False
        # a fix whose output still matches its own pattern is applied once per site
        todo = [f for f in analysis.findings
                if f.fixable and _fkey(f) not in skip and not _same_site(f, sites)]
        if not todo:
            break
        tree = analysis.tree
        if decide is not None:
            progressed = False
            for f in todo:
                new = apply_fix(text, tree, f, by_id[f.pattern])
                skip.add(_fkey(f))
                if new == text:
                    result.failed.append(f)
                    continue
                if decide(f, text, new):
                    result.applied.append(f)
                    sites = _carry(sites + [(f.pattern, f.span_key())], text, new)
                    text = new
                    progressed = True
                    break
                result.declined.append(f)
            if not progressed:
                break
            continue
        chosen, taken = [], set()
        for f in sorted(todo, key=lambda f: (f.pattern, f.spans[0].start)):
            try:
                script = remap_script(by_id[f.pattern], f)
            except PdgfixError:
                result.failed.append(f)
                skip.add(_fkey(f))
                continue
            region = _region(tree, script)
            if region & taken:
                continue
            taken |= region
            chosen.append((f, script))
        if not chosen:
            break
        chosen.sort(key=lambda fs: -fs[0].spans[0].start)
        new = None
        try:
            work = tree.clone()
            touched = set()
            for f, script in chosen:
                editor = _Editor(work)
                for i, a in enumerate(script):
                    editor.apply(a, i)
                touched |= editor.touched
            candidate = render(work, text, touched)
            if _parses(candidate):
                new = candidate
        except PdgfixError:
            new = None
        if new is None:
            # fall back to the first fix alone; a failure marks it unfixable
            f = chosen[-1][0]
            candidate = apply_fix(text, tree, f, by_id[f.pattern])
            skip.add(_fkey(f))
            if candidate == text:
                result.failed.append(f)
                continue
            result.applied.append(f)
            sites = _carry(sites + [(f.pattern, f.span_key())], text, candidate)
            text = candidate
            continue
        result.applied.extend(f for f, _ in chosen)
        if new == text:
            break
        sites = _carry(sites + [(f.pattern, f.span_key()) for f, _ in chosen], text, new)
        text = new
    result.text = text
    final = analyze_source(text, bundles, path, budget)
    result.remaining = final.findings
    return result
