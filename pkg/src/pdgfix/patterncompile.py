"""Compile before/after example pairs into reusable pattern bundles.

Compilation aligns every instance's graph with the first (canonical) one,
derives a matching mode for each data vertex from the labels seen across
instances, keeps the edit actions common to all instances, and finally adds
anchor vertices for syntax nodes the surviving script touches but the graph
does not cover.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .errors import (AlignmentFailure, BundleInvariantViolation, DanglingReference,
                     EmptyCore, TimeoutExceeded)
from .fgpdg import DATA, Pdg, PdgNode, build_fgpdg
from .matcher import (ANY, ORIGINAL, SUFFIX, MatchingMode, iter_monomorphisms,
                      search_order, syntax_category)
from .syntax import SEQUENCE_KINDS, SyntaxTree, function_units, parse_source
from .treediff import EditAction, _Editor, apply_edit_script, diff

SCHEMA_VERSION = 1
GENERALIZED_KINDS = frozenset({"name", "literal"})


@lru_cache(maxsize=None)
def _shipped_registry() -> frozenset:
    text = resources.files("pdgfix").joinpath("builtin_names.txt").read_text(encoding="utf-8")
    return frozenset(line.strip() for line in text.splitlines()
                     if line.strip() and not line.startswith("#"))


def builtin_registry(extra=()) -> frozenset:
    """Shipped names plus extras from the argument and ``PDGFIX_EXTRA_BUILTINS``."""
    env = os.environ.get("PDGFIX_EXTRA_BUILTINS", "")
    names = set(_shipped_registry())
    names.update(n for n in env.replace(",", " ").split() if n)
    names.update(extra)
    return frozenset(names)


class PatternInstance:
    def __init__(self, before_source: str, after_source: str, name: str = ""):
        self.name = name
        self.before_source = before_source
        self.after_source = after_source
        self.before_tree = parse_source(before_source)
        self.after_tree = parse_source(after_source)
        units = function_units(self.before_tree, name)
        if not units:
            raise ValueError(f"{name or 'instance'}: before side has no function")
        self.unit = units[0]
        self.before_pdg = build_fgpdg(self.unit)


@dataclass
class PatternBundle:
    id: str
    description: str
    graph: Pdg
    modes: dict
    script: list
    canonical_source: str
    bound_names: dict
    schema_version: int = SCHEMA_VERSION
    canonical_tree: SyntaxTree | None = field(default=None, repr=False)
    warnings: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if self.canonical_tree is None:
            self.canonical_tree = parse_source(self.canonical_source)
        self.graph.tree = self.canonical_tree
        self.anchor_paths = anchor_paths(self.graph, self.canonical_tree)


def anchor_paths(graph: Pdg, tree: SyntaxTree) -> dict:
    """For each anchor: (base vertex, steps) leading from a covered node to it."""
    owner = {}
    for v in sorted(graph.vertices):
        node = graph.vertices[v]
        if not node.anchor and node.syntax_refs:
            owner.setdefault(node.syntax_refs[0], v)
    out = {}
    for aid, a in graph.vertices.items():
        if not a.anchor:
            continue
        start = tree.nodes.get(a.syntax_refs[0])
        if start is None:
            continue
        level = [(start, 0)]
        found = None
        while level and found is None:
            nxt = []
            for node, depth in level:
                for c in node.children:
                    if c.id in owner:
                        found = (owner[c.id], ["up"] * (depth + 1))
                        break
                    nxt.append((c, depth + 1))
                if found:
                    break
            level = nxt
        if found is None:
            steps = []
            node = start
            while node.parent is not None and node.id not in owner:
                steps.append(node.index_in_parent())
                node = node.parent
            if node.id in owner:
                found = (owner[node.id], list(reversed(steps)))
        if found is not None:
            out[aid] = found
    return out


# ---------------------------------------------------------------------------
# alignment


def _align_one(canonical: Pdg, other: Pdg, budget: int):
    order = search_order(canonical, {})

    def ok(p, t):
        a, b = canonical.vertices[p], other.vertices[t]
        if a.kind != b.kind or a.subkind != b.subkind:
            return False
        return a.kind == DATA or a.label == b.label

    best, best_key = None, None
    data_vs = [v for v in canonical.vertices if canonical.vertices[v].kind == DATA]
    for mapping, _ in iter_monomorphisms(canonical, other, ok, order, budget):
        agree = sum(canonical.vertices[v].label == other.vertices[mapping[v]].label for v in data_vs)
        key = (-agree, tuple(mapping[v] for v in sorted(mapping)))
        if best_key is None or key < best_key:
            best, best_key = mapping, key
    return best


def align_instances(instances, budget: int = 1_000_000):
    """Map the canonical graph into every further instance.

    Returns one entry per non-canonical instance: the vertex mapping, or
    an :class:`AlignmentFailure` describing why that instance was rejected.
    """
    canonical = instances[0].before_pdg
    out = []
    for i, inst in enumerate(instances[1:], start=1):
        try:
            m = _align_one(canonical, inst.before_pdg, budget)
        except TimeoutExceeded:
            m = None
        out.append(m if m is not None else AlignmentFailure(i))
    return out


# ---------------------------------------------------------------------------
# matching modes


def common_suffix(labels) -> str:
    """Longest common suffix that begins at a '.' and leaves every prefix nonempty."""
    labels = list(labels)
    first = labels[0]
    n = 0
    while n < len(first) and all(len(l) > n and l[-1 - n] == first[-1 - n] for l in labels):
        n += 1
    tail = first[len(first) - n:] if n else ""
    dot = tail.find(".")
    if dot < 0:
        return ""
    suffix = tail[dot:]
    if len(suffix) < 2 or any(len(l) <= len(suffix) for l in labels):
        return ""
    return suffix


def mode_for_labels(labels, subkind: str, registry) -> MatchingMode:
    labels = list(labels)
    if all(l == labels[0] for l in labels):
        label = labels[0]
        if subkind == "literal" or "." in label or label in registry:
            return MatchingMode(ORIGINAL)
        return MatchingMode(ANY)
    if subkind != "literal":
        suffix = common_suffix(labels)
        if suffix:
            return MatchingMode(SUFFIX, suffix)
    return MatchingMode(ANY)


def assign_matching_modes(canonical: Pdg, alignments, graphs=None, registry=None) -> dict:
    """Mode per data vertex of ``canonical``.

    ``alignments`` are vertex maps into ``graphs`` (same order).  Vertices
    with the same label pattern across instances share one placeholder.
    """
    registry = builtin_registry() if registry is None else registry
    graphs = graphs or []
    modes, vectors = {}, {}
    for v, node in canonical.vertices.items():
        if node.kind != DATA or node.anchor:
            continue
        labels = [node.label] + [g.vertices[m[v]].label for m, g in zip(alignments, graphs)]
        vectors[v] = tuple(labels)
        modes[v] = mode_for_labels(labels, node.subkind, registry)
    groups: dict = {}
    for v in sorted(modes):
        mode = modes[v]
        if mode.variant == ORIGINAL:
            continue
        key = vectors[v]
        groups.setdefault(key, []).append(v)
    for members in groups.values():
        ph = f"$v{members[0]}"
        for v in members:
            m = modes[v]
            modes[v] = MatchingMode(m.variant, m.suffix, ph)
    return modes


def placeholder_table(graph: Pdg, modes: dict, mapping=None) -> dict:
    """Label -> placeholder for one instance (canonical when mapping is None)."""
    table = {}
    # plain variables take precedence over suffix-mode prefixes
    for v in sorted(modes, key=lambda v: (modes[v].variant == SUFFIX, v)):
        mode = modes[v]
        if mode.placeholder is None:
            continue
        vid = v if mapping is None else mapping[v]
        value = mode.bound_value(graph.vertices[vid].label)
        if value and "." not in value:
            table.setdefault(value, mode.placeholder)
    return table


# ---------------------------------------------------------------------------
# script generalization


def _role(parent, position: int) -> str:
    if parent.kind in SEQUENCE_KINDS:
        return "first" if position == 0 else "after"
    return str(position)


def _gen(table, kind, label):
    if kind in GENERALIZED_KINDS:
        return table.get(label, label)
    return label


def action_keys(tree: SyntaxTree, script, table) -> list:
    """Generalized comparison key of every action, from a replay on ``tree``."""
    work = tree.clone()
    editor = _Editor(work)
    keys = []
    for i, a in enumerate(script):
        if a.op == "insert":
            parent = editor.resolve(a.parent, i, "parent")
            key = ("insert", a.kind, _gen(table, a.kind, a.label), parent.kind,
                   _role(parent, min(a.position, len(parent.children))))
        else:
            node = editor.resolve(a.node, i, "node")
            if a.op == "move":
                parent = editor.resolve(a.parent, i, "parent")
                role = _role(parent, a.position)
            else:
                parent = node.parent
                role = _role(parent, node.index_in_parent()) if parent else "root"
            label = _gen(table, node.kind, node.label)
            if a.op == "update":
                label = (label, _gen(table, node.kind, a.new_label))
            key = (a.op, node.kind, label, parent.kind if parent else "", role)
        keys.append(key)
        editor.apply(a, i)
    return keys


def lcs_indices(xs, ys) -> list[tuple[int, int]]:
    n, k = len(xs), len(ys)
    table = [[0] * (k + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(k - 1, -1, -1):
            table[i][j] = table[i + 1][j + 1] + 1 if xs[i] == ys[j] else max(table[i + 1][j], table[i][j + 1])
    out, i, j = [], 0, 0
    while i < n and j < k:
        if xs[i] == ys[j]:
            out.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return out


def generalized_lcs(keyed_scripts) -> list:
    """Fold LCS over scripts given as lists of (key, action) pairs.

    The surviving actions are those of the first script.
    """
    result = list(keyed_scripts[0])
    if not result:
        raise EmptyCore((0, 0), "canonical instance has no edit actions")
    for i, other in enumerate(keyed_scripts[1:], start=1):
        pairs = lcs_indices([k for k, _ in result], [k for k, _ in other])
        result = [result[a] for a, _ in pairs]
        if not result:
            raise EmptyCore((0, i))
    return [a for _, a in result]


def _drop_orphans(script) -> list:
    kept = list(script)
    while True:
        fresh = {a.node for a in kept if a.op == "insert"}
        removed = {a.node for a in script if a.op == "insert"} - fresh
        nxt = [a for a in kept
               if not ((a.node < 0 and a.op != "insert" and a.node in removed)
                       or (a.parent is not None and a.parent < 0 and a.parent in removed))]
        if len(nxt) == len(kept):
            return kept
        kept = nxt
        script = kept + [a for a in script if a.op == "insert" and a.node in removed]


def _generalize_labels(tree: SyntaxTree, script, table) -> list:
    work = tree.clone()
    editor = _Editor(work)
    out = []
    for i, a in enumerate(script):
        if a.op == "insert" and a.kind in GENERALIZED_KINDS and a.label in table:
            b = EditAction("insert", a.node, kind=a.kind, label=table[a.label],
                           parent=a.parent, position=a.position)
        elif a.op == "update":
            node = editor.resolve(a.node, i, "node")
            b = EditAction("update", a.node, new_label=_gen(table, node.kind, a.new_label))
        else:
            b = a
        editor.apply(a, i)
        out.append(b)
    return out


# ---------------------------------------------------------------------------
# graph extension


def script_references(script) -> list[int]:
    refs = []
    for a in script:
        for r in (a.node if a.op != "insert" else None, a.parent):
            if r is not None and r >= 0 and r not in refs:
                refs.append(r)
    return refs


def extend_graph(canonical: Pdg, script, tree: SyntaxTree | None = None) -> Pdg:
    """Copy of ``canonical`` plus anchor vertices for uncovered script references."""
    tree = tree if tree is not None else canonical.tree
    g = Pdg(canonical.unit, tree)
    for v in canonical.vertices.values():
        g.add_vertex(PdgNode(v.id, v.kind, v.subkind, v.label, v.syntax_refs, v.anchor))
    for e in canonical.edges:
        g.add_edge(e.src, e.dst, e.kind, e.label)
    covered = {ref: vids[0] for ref, vids in canonical.by_syntax.items() if vids}
    next_id = max(g.vertices, default=-1) + 1
    for ref in sorted(script_references(script), key=lambda r: r):
        if ref in covered:
            continue
        node = tree.nodes.get(ref)
        if node is None:
            raise BundleInvariantViolation(f"script references unknown node {ref}")
        aid = next_id
        next_id += 1
        g.add_vertex(PdgNode(aid, syntax_category(node), node.kind, node.label, (ref,), anchor=True))
        p = node.parent
        while p is not None and p.id not in covered:
            p = p.parent
        if p is not None:
            g.add_edge(covered[p.id], aid, "anchor", "anchor")
        stack = list(node.children)
        while stack:
            c = stack.pop()
            if c.id in covered:
                g.add_edge(aid, covered[c.id], "anchor", "anchor")
            else:
                stack.extend(c.children)
    return g


# ---------------------------------------------------------------------------
# driver


def compile_pattern(instances, id: str, description: str, registry=None) -> PatternBundle:
    if not instances:
        raise ValueError("at least one instance is required")
    registry = builtin_registry() if registry is None else registry
    canonical = instances[0]
    results = align_instances(instances)
    used, alignments, warnings = [canonical], [], []
    for inst, res in zip(instances[1:], results):
        if isinstance(res, AlignmentFailure):
            warnings.append(f"{inst.name or 'instance'}: {res}")
        else:
            used.append(inst)
            alignments.append(res)
    if len(instances) > 1 and len(used) == 1:
        raise next(r for r in results if isinstance(r, AlignmentFailure))

    modes = assign_matching_modes(canonical.before_pdg, alignments,
                                  [u.before_pdg for u in used[1:]], registry)
    keyed = []
    for k, inst in enumerate(used):
        script = diff(inst.before_tree, inst.after_tree)
        table = placeholder_table(inst.before_pdg, modes, None if k == 0 else alignments[k - 1])
        keyed.append(list(zip(action_keys(inst.before_tree, script, table), script)))
    try:
        core = generalized_lcs(keyed)
    except EmptyCore as e:
        a, b = e.pair
        names = [used[a].name or str(a), used[b].name or str(b)]
        raise EmptyCore(e.pair, f"no common edit actions between {names[0]} and {names[1]}") from None
    core = _drop_orphans(core)
    if not core:
        raise EmptyCore((0, len(used) - 1))
    tree = canonical.before_tree
    try:
        apply_edit_script(tree, core)
    except DanglingReference as e:
        raise BundleInvariantViolation(f"generalized script does not apply: {e}") from None
    table = placeholder_table(canonical.before_pdg, modes)
    script = _generalize_labels(tree, core, table)
    graph = extend_graph(canonical.before_pdg, script, tree)
    bound = {}
    for v in sorted(modes):
        ph = modes[v].placeholder
        if ph is not None:
            bound.setdefault(ph, v)
    bundle = PatternBundle(id, description, graph, modes, script, canonical.before_source,
                           bound, SCHEMA_VERSION, tree, warnings)
    problems = validate_bundle(bundle)
    if problems:
        raise BundleInvariantViolation("; ".join(problems))
    return bundle


def validate_bundle(bundle: PatternBundle) -> list[str]:
    problems = []
    g = bundle.graph
    for v, node in g.vertices.items():
        if node.kind == DATA and not node.anchor and v not in bundle.modes:
            problems.append(f"data vertex {v} has no matching mode")
    for v in bundle.modes:
        node = g.vertices.get(v)
        if node is None or node.kind != DATA or node.anchor:
            problems.append(f"mode for non-data vertex {v}")
        elif bundle.modes[v].variant == SUFFIX and not node.label.endswith(bundle.modes[v].suffix):
            problems.append(f"suffix of vertex {v} does not end its label")
    for ph, v in bundle.bound_names.items():
        if v not in bundle.modes or bundle.modes[v].placeholder != ph:
            problems.append(f"placeholder {ph} bound to vertex {v} without that mode")
    covered = {r for node in g.vertices.values() for r in node.syntax_refs}
    for r in script_references(bundle.script):
        if r not in covered:
            problems.append(f"script reference {r} has no vertex")
    try:
        apply_edit_script(bundle.canonical_tree, bundle.script)
    except DanglingReference as e:
        problems.append(f"script does not apply to the canonical tree: {e}")
    problems.extend(g.check())
    return problems


def load_examples(directory) -> list[PatternInstance]:
    """Read ``<k>/before.py`` and ``<k>/after.py`` pairs in sorted order."""
    from pathlib import Path
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"{root}: not a directory")
    instances = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        before, after = sub / "before.py", sub / "after.py"
        for f in (before, after):
            if not f.is_file():
                raise FileNotFoundError(f"missing {f}")
        instances.append(PatternInstance(before.read_text(encoding="utf-8"),
                                         after.read_text(encoding="utf-8"), str(sub)))
    if not instances:
        raise FileNotFoundError(f"{root}: no example pairs")
    return instances
