"""Subgraph isomorphism search honoring per-vertex matching modes."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import TimeoutExceeded
from .fgpdg import DATA, Pdg, highlight_spans
from .syntax import STATEMENT_KINDS, Span, SyntaxNode

ORIGINAL = "match_original_labels"
ANY = "match_any_label"
SUFFIX = "match_longest_common_suffix"
MODE_RANK = {ORIGINAL: 0, SUFFIX: 1, ANY: 2}

DEFAULT_BUDGET = 100_000


@dataclass(frozen=True)
class MatchingMode:
    variant: str
    suffix: str = ""
    placeholder: str | None = None

    def __post_init__(self):
        if self.variant not in MODE_RANK:
            raise ValueError(f"unknown matching mode {self.variant!r}")
        if (self.variant == SUFFIX) != bool(self.suffix):
            raise ValueError("suffix must be set exactly for suffix mode")
        if self.variant == SUFFIX and not (self.suffix.startswith(".") and len(self.suffix) >= 2):
            raise ValueError(f"suffix {self.suffix!r} does not start at a '.' boundary")

    def bound_value(self, target_label: str) -> str:
        if self.variant == SUFFIX:
            return target_label[: len(target_label) - len(self.suffix)]
        return target_label


def label_compatible(mode: MatchingMode, pattern_label: str, target_label: str) -> bool:
    if mode.variant == ANY:
        return True
    if mode.variant == SUFFIX:
        return target_label.endswith(mode.suffix) and len(target_label) > len(mode.suffix)
    return pattern_label == target_label


@dataclass
class Isomorphism:
    mapping: dict            # pattern vertex -> target vertex (non-anchor)
    binding: dict            # placeholder -> target label
    anchors: dict = field(default_factory=dict)   # anchor vertex -> target syntax id

    def key(self) -> tuple:
        return tuple(self.mapping[k] for k in sorted(self.mapping))


@dataclass
class Finding:
    pattern: str
    path: str
    iso: Isomorphism
    spans: list
    message: str
    fixable: bool
    unit: str = ""
    lines: list = field(default_factory=list)
    graph: Pdg | None = field(default=None, repr=False, compare=False)

    def span_key(self) -> tuple:
        return tuple((s.start, s.end) for s in self.spans)


def _signature(g: Pdg, vid: int) -> Counter:
    c = Counter()
    for e in g.out_edges(vid):
        if e.kind != "anchor":
            c[("out", e.kind, e.label)] += 1
    for e in g.in_edges(vid):
        if e.kind != "anchor":
            c[("in", e.kind, e.label)] += 1
    return c


def search_order(pattern: Pdg, modes: dict, vertices=None) -> list[int]:
    """Descending degree, then strictest mode first, then kept connected."""
    vs = [v for v in (vertices if vertices is not None else pattern.vertices)
          if not pattern.vertices[v].anchor]

    def rank(v):
        node = pattern.vertices[v]
        m = modes.get(v)
        perm = MODE_RANK[m.variant] if node.kind == DATA and m is not None else 0
        return (-pattern.degree(v), perm, v)

    remaining = sorted(vs, key=rank)
    order: list[int] = []
    placed: set[int] = set()
    while remaining:
        pick = None
        for v in remaining:
            if _neighbours_of(pattern, v) & placed:
                pick = v
                break
        if pick is None:
            pick = remaining[0]
        remaining.remove(pick)
        order.append(pick)
        placed.add(pick)
    return order


def _neighbours_of(g: Pdg, v: int) -> set:
    out = {e.dst for e in g.out_edges(v) if e.kind != "anchor"}
    out |= {e.src for e in g.in_edges(v) if e.kind != "anchor"}
    return out


def _target_index(target: Pdg):
    """Kind buckets and edge lookups, shared by every pattern searched in ``target``."""
    idx = target.derived.get("match")
    if idx is not None:
        return idx
    by_kind: dict[tuple, list[int]] = {}
    for t, node in target.vertices.items():
        if not node.anchor:
            by_kind.setdefault((node.kind, node.subkind), []).append(t)
    edges = {(e.src, e.dst, e.kind, e.label) for e in target.edges}
    t_out: dict[tuple, set] = {}
    t_in: dict[tuple, set] = {}
    for e in target.edges:
        t_out.setdefault((e.src, e.kind, e.label), set()).add(e.dst)
        t_in.setdefault((e.dst, e.kind, e.label), set()).add(e.src)
    idx = target.derived["match"] = (by_kind, edges, t_out, t_in)
    return idx


def iter_monomorphisms(pattern: Pdg, target: Pdg, vertex_ok, order=None,
                       budget: int = DEFAULT_BUDGET, bind=None):
    """Yield (mapping, binding) for every injective edge-preserving map.

    ``vertex_ok(p, t)`` filters single vertex pairs; ``bind(p, t, binding)``
    returns an extended binding dict or None when inconsistent.
    """
    order = order if order is not None else search_order(pattern, {})
    if not order:
        return
    psig = {p: _signature(pattern, p) for p in order}
    tsig_cache: dict[int, Counter] = {}

    def tsig(t):
        s = tsig_cache.get(t)
        if s is None:
            s = tsig_cache[t] = _signature(target, t)
        return s


    # edges between pattern vertices, indexed by the later vertex in the order
    pos = {p: i for i, p in enumerate(order)}
    checks: dict[int, list] = {p: [] for p in order}
    for e in pattern.edges:
        if e.kind == "anchor" or e.src not in pos or e.dst not in pos:
            continue
        later = e.src if pos[e.src] > pos[e.dst] else e.dst
        checks[later].append(e)

    by_kind, target_edges, t_out, t_in = _target_index(target)

    mapping: dict[int, int] = {}
    used: set[int] = set()
    expansions = 0

    def candidates(p):
        cands = None
        for e in checks[p]:
            if e.src == p:
                other = mapping[e.dst]
                s = t_in.get((other, e.kind, e.label), set())
            else:
                other = mapping[e.src]
                s = t_out.get((other, e.kind, e.label), set())
            cands = s if cands is None else cands & s
            if not cands:
                return []
        node = pattern.vertices[p]
        if cands is None:
            return by_kind.get((node.kind, node.subkind), [])
        return sorted(t for t in cands
                      if (target.vertices[t].kind, target.vertices[t].subkind) == (node.kind, node.subkind))

    def rec(i, binding):
        nonlocal expansions
        if i == len(order):
            yield dict(mapping), dict(binding)
            return
        p = order[i]
        need = psig[p]
        for t in candidates(p):
            expansions += 1
            if expansions > budget:
                raise TimeoutExceeded(f"search exceeded {budget} expansions")
            if t in used or not vertex_ok(p, t):
                continue
            have = tsig(t)
            if any(have[k] < n for k, n in need.items()):
                continue
            ok = True
            for e in checks[p]:
                src = t if e.src == p else mapping[e.src]
                dst = t if e.dst == p else mapping[e.dst]
                if (src, dst, e.kind, e.label) not in target_edges:
                    ok = False
                    break
            if not ok:
                continue
            nb = binding
            if bind is not None:
                nb = bind(p, t, binding)
                if nb is None:
                    continue
            mapping[p] = t
            used.add(t)
            yield from rec(i + 1, nb)
            del mapping[p]
            used.discard(t)

    yield from rec(0, {})


def vertex_compatible(pattern: Pdg, target: Pdg, modes: dict, p: int, t: int) -> bool:
    pv, tv = pattern.vertices[p], target.vertices[t]
    if pv.kind != tv.kind or pv.subkind != tv.subkind:
        return False
    if pv.kind == DATA:
        mode = modes.get(p) or MatchingMode(ORIGINAL)
        return label_compatible(mode, pv.label, tv.label)
    return pv.label == tv.label


def extend_binding(modes: dict, target: Pdg, p: int, t: int, binding: dict):
    mode = modes.get(p)
    if mode is None or mode.placeholder is None or mode.variant == ORIGINAL:
        return binding
    value = mode.bound_value(target.vertices[t].label)
    have = binding.get(mode.placeholder)
    if have is None:
        nb = dict(binding)
        nb[mode.placeholder] = value
        return nb
    return binding if have == value else None


def find_matches(bundle, target: Pdg, budget: int = DEFAULT_BUDGET) -> list[Isomorphism]:
    """All distinct occurrences of ``bundle``'s graph inside ``target``."""
    pattern, modes = bundle.graph, bundle.modes
    order = search_order(pattern, modes)
    found: dict[frozenset, Isomorphism] = {}
    for mapping, binding in iter_monomorphisms(
            pattern, target,
            lambda p, t: vertex_compatible(pattern, target, modes, p, t),
            order, budget,
            lambda p, t, b: extend_binding(modes, target, p, t, b)):
        iso = Isomorphism(mapping, binding)
        key = frozenset(mapping.values())
        old = found.get(key)
        if old is None or iso.key() < old.key():
            found[key] = iso
    results = list(found.values())
    for iso in results:
        iso.anchors = resolve_anchors(bundle, target, iso)
    results.sort(key=lambda iso: (_first_start(target, iso), iso.key()))
    return results


def _first_start(target: Pdg, iso: Isomorphism) -> int:
    spans = highlight_spans(target, iso.mapping.values())
    return spans[0].start if spans else -1


# ---------------------------------------------------------------------------
# anchors


def syntax_category(node: SyntaxNode) -> str:
    from .fgpdg import CONTROL_KEYWORDS
    if node.kind in CONTROL_KEYWORDS:
        return "control"
    if not node.children and node.kind in ("name", "literal", "empty", "alias",
                                           "posonly-marker", "kwonly-marker"):
        return "data"
    return "operation"


def _anchor_fits(anchor, node: SyntaxNode) -> bool:
    # statements are interchangeable holders of an expression slot
    if anchor.subkind in STATEMENT_KINDS and node.kind in STATEMENT_KINDS:
        return True
    return syntax_category(node) == anchor.kind


def resolve_anchors(bundle, target: Pdg, iso: Isomorphism) -> dict:
    """Locate each anchor's target syntax node via its recorded syntax path."""
    out = {}
    tree = target.tree
    for aid, path in bundle.anchor_paths.items():
        anchor = bundle.graph.vertices[aid]
        base_vertex, steps = path
        t = iso.mapping.get(base_vertex)
        if t is None:
            continue
        refs = target.vertices[t].syntax_refs
        node = tree.nodes.get(refs[0]) if refs else None
        for step in steps:
            if node is None:
                break
            if step == "up":
                node = node.parent
            elif 0 <= step < len(node.children):
                node = node.children[step]
            else:
                node = None
        if node is not None and _anchor_fits(anchor, node):
            out[aid] = node.id
    return out


def finding_spans(target: Pdg, iso: Isomorphism) -> list[Span]:
    return highlight_spans(target, iso.mapping.values())
