"""Fine-grained program dependence graphs over syntax trees.

One graph is built per function.  Every variable occurrence becomes a data
vertex, every call/assignment/operator an operation vertex, and every
compound statement a control vertex.  Data edges carry a role tag
(``def``, ``use``, ``recv``, ``para``, ``qual``); control edges are
``dep``, ``true-branch`` or ``false-branch``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .errors import UnknownVertex
from .syntax import FunctionUnit, Span, SyntaxNode, SyntaxTree, FUNCTION_KINDS

DATA, OPERATION, CONTROL = "data", "operation", "control"
DATA_SUBKINDS = ("variable", "literal", "function-ref")
OPERATION_SUBKINDS = ("call", "assign", "aug-assign", "bin-op", "compare",
                      "subscript-load", "subscript-store", "attribute-load")
CONTROL_SUBKINDS = ("for", "while", "if", "with", "try")
DATA_LABELS = ("def", "use", "recv", "para", "qual")
CONTROL_LABELS = ("dep", "true-branch", "false-branch")

CONTROL_KEYWORDS = {
    "for-stmt": ("for", "for"), "async-for-stmt": ("for", "async for"),
    "while-stmt": ("while", "while"), "if-stmt": ("if", "if"),
    "elif-stmt": ("if", "elif"), "with-stmt": ("with", "with"),
    "async-with-stmt": ("with", "async with"), "try-stmt": ("try", "try"),
    "try-star-stmt": ("try", "try"),
}
UNARY_LABELS = {"not": "not", "-": "u-", "+": "u+", "~": "~"}


@dataclass
class PdgNode:
    id: int
    kind: str
    subkind: str
    label: str
    syntax_refs: tuple = ()
    anchor: bool = False

    def __post_init__(self):
        if (self.kind == CONTROL) != (self.subkind in CONTROL_SUBKINDS) and not self.anchor:
            raise ValueError(f"vertex {self.id}: kind {self.kind} with subkind {self.subkind}")
        if self.kind in (DATA, OPERATION) and not self.label and not self.anchor:
            raise ValueError(f"vertex {self.id}: empty label")


@dataclass(frozen=True, order=True)
class PdgEdge:
    src: int
    dst: int
    kind: str
    label: str

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError("self loop")


class Pdg:
    def __init__(self, unit: FunctionUnit | None = None, tree: SyntaxTree | None = None):
        self.unit = unit
        self.tree = tree if tree is not None else (unit.tree if unit else None)
        self.vertices: dict[int, PdgNode] = {}
        self.edges: set[PdgEdge] = set()
        self.by_syntax: dict[int, list[int]] = defaultdict(list)
        self._out: dict[int, list[PdgEdge]] | None = None
        self._in: dict[int, list[PdgEdge]] | None = None
        self.derived: dict = {}   # consumer caches, dropped on mutation

    def add_vertex(self, node: PdgNode) -> PdgNode:
        self.vertices[node.id] = node
        for ref in node.syntax_refs:
            self.by_syntax[ref].append(node.id)
        self._out = self._in = None
        self.derived.clear()
        return node

    def add_edge(self, src: int, dst: int, kind: str, label: str):
        if src == dst:
            return
        self.edges.add(PdgEdge(src, dst, kind, label))
        self._out = self._in = None
        self.derived.clear()

    def _index(self):
        out, inc = defaultdict(list), defaultdict(list)
        for e in sorted(self.edges):
            out[e.src].append(e)
            inc[e.dst].append(e)
        self._out, self._in = out, inc

    def out_edges(self, vid: int) -> list[PdgEdge]:
        if self._out is None:
            self._index()
        return self._out.get(vid, [])

    def in_edges(self, vid: int) -> list[PdgEdge]:
        if self._in is None:
            self._index()
        return self._in.get(vid, [])

    def degree(self, vid: int) -> int:
        return len(self.out_edges(vid)) + len(self.in_edges(vid))

    def vertex_for_syntax(self, syntax_id: int) -> int | None:
        ids = self.by_syntax.get(syntax_id)
        return ids[0] if ids else None

    def export(self) -> str:
        """Line-oriented debug dump used for golden comparisons."""
        lines = []
        for v in self.vertices.values():
            label = v.label.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
            lines.append(f'V {v.id} {v.kind} {v.subkind} "{label}"')
        for e in sorted(self.edges):
            lines.append(f"E {e.src} {e.dst} {e.kind} {e.label}")
        return "\n".join(lines) + "\n"

    def check(self) -> list[str]:
        problems = []
        for e in self.edges:
            if e.src not in self.vertices or e.dst not in self.vertices:
                problems.append(f"edge {e} references a missing vertex")
            elif e.kind == "control" and self.vertices[e.src].kind != CONTROL:
                problems.append(f"control edge {e} from a non-control vertex")
        for v in self.vertices.values():
            if not v.anchor and not v.syntax_refs:
                problems.append(f"vertex {v.id} has no syntax reference")
            for ref in v.syntax_refs:
                if v.id not in self.by_syntax.get(ref, ()):
                    problems.append(f"index misses vertex {v.id} for syntax {ref}")
        return problems


def dotted_path(node: SyntaxNode) -> str | None:
    parts = []
    while node.kind == "attribute":
        parts.append(node.label)
        node = node.children[0]
    if node.kind != "name":
        return None
    parts.append(node.label)
    return ".".join(reversed(parts))


def _root_name(node: SyntaxNode) -> SyntaxNode:
    while node.kind == "attribute":
        node = node.children[0]
    return node


class _Builder:
    def __init__(self, pdg: Pdg, inline_functions: bool = True):
        self.g = pdg
        self.inline_functions = inline_functions
        self.memo: dict[tuple, int] = {}
        self.reaching: dict[int, frozenset] = {}
        self.order: dict[int, tuple] = {}
        self.next_id = 0
        self.ctrl: tuple | None = None

    # -- vertices --------------------------------------------------------

    def vertex(self, kind, subkind, label, node: SyntaxNode, role="") -> int:
        key = (node.id, role)
        vid = self.memo.get(key)
        if vid is None:
            vid = self.next_id
            self.next_id += 1
            self.memo[key] = vid
            self.g.add_vertex(PdgNode(vid, kind, subkind, label, (node.id,)))
            span = node.span or node.meta.get("moved") or Span(0, 0)
            self.order[vid] = (span.start, -span.end, vid)
        return vid

    def op(self, subkind, label, node, role="") -> int:
        vid = self.vertex(OPERATION, subkind, label, node, role)
        if self.ctrl is not None:
            self.g.add_edge(self.ctrl[0], vid, "control", self.ctrl[1])
        return vid

    def feed(self, values, dst: int, label: str):
        for v in values:
            self.g.add_edge(v, dst, "data", label)
            for d in self.reaching.get(v, ()):
                self.g.add_edge(d, dst, "data", "use")

    def use_var(self, node: SyntaxNode, env) -> int:
        vid = self.vertex(DATA, "variable", node.label, node)
        defs = env.get(node.label, frozenset())
        self.reaching[vid] = self.reaching.get(vid, frozenset()) | defs
        return vid

    # -- expressions -------------------------------------------------------

    def expr(self, node: SyntaxNode, env) -> list[int]:
        k = node.kind
        if k == "name":
            return [self.use_var(node, env)]
        if k == "literal":
            return [self.vertex(DATA, "literal", node.label, node)]
        if k == "attribute":
            return [self.attribute(node, env)]
        if k == "call":
            return [self.call(node, env)]
        if k == "subscript":
            vid = self.op("subscript-load", "[]", node)
            self.feed(self.expr(node.children[0], env), vid, "recv")
            self.feed(self.expr(node.children[1], env), vid, "para")
            return [vid]
        if k in ("bin-op", "bool-op", "compare"):
            vid = self.op("compare" if k == "compare" else "bin-op", node.label, node)
            for c in node.children:
                self.feed(self.expr(c, env), vid, "para")
            return [vid]
        if k == "unary-op":
            vid = self.op("bin-op", UNARY_LABELS[node.label], node)
            self.feed(self.expr(node.children[0], env), vid, "para")
            return [vid]
        if k == "if-exp":
            vid = self.op("bin-op", "if-else", node)
            for c in node.children:
                self.feed(self.expr(c, env), vid, "para")
            return [vid]
        if k == "named-expr":
            vid = self.op("assign", ":=", node)
            self.feed(self.expr(node.children[1], env), vid, "para")
            self.store(node.children[0], vid, env)
            return [vid]
        if k in ("list", "tuple", "set", "dict", "dict-item", "dict-unpack", "slice",
                 "starred", "await", "yield", "yield-from", "keyword"):
            out = []
            for c in node.children:
                out.extend(self.expr(c, env))
            return out
        if k in ("list-comp", "set-comp", "generator-exp", "dict-comp"):
            return self.comprehension(node, env)
        if k == "lambda":
            inner = dict(env)
            self.params(node.children[0], inner)
            self.expr(node.children[1], inner)
            return []
        return []

    def attribute(self, node: SyntaxNode, env) -> int:
        vid = self.op("attribute-load", node.label, node)
        path = dotted_path(node)
        if path is not None:
            ref = self.vertex(DATA, "variable", path, node, "path")
            self.g.add_edge(ref, vid, "data", "recv")
            root = _root_name(node)
            self.feed([self.use_var(root, env)], vid, "qual")
        else:
            self.feed(self.expr(node.children[0], env), vid, "recv")
        return vid

    def call(self, node: SyntaxNode, env) -> int:
        func = node.children[0]
        path = dotted_path(func)
        if path is not None:
            vid = self.op("call", path.rsplit(".", 1)[-1], node)
            ref = self.vertex(DATA, "function-ref", path, func)
            self.g.add_edge(ref, vid, "data", "recv")
            if func.kind == "attribute":
                self.feed([self.use_var(_root_name(func), env)], vid, "qual")
            else:
                for d in env.get(func.label, ()):
                    self.g.add_edge(d, vid, "data", "use")
        else:
            vid = self.op("call", "()", node)
            self.feed(self.expr(func, env), vid, "recv")
        for arg in node.children[1:]:
            self.feed(self.expr(arg, env), vid, "para")
        return vid

    def comprehension(self, node: SyntaxNode, env) -> list[int]:
        inner = dict(env)
        heads = 2 if node.kind == "dict-comp" else 1
        for gen in node.children[heads:]:
            target, it, *ifs = gen.children
            values = self.expr(it, inner)
            for name in self._target_names(target):
                vid = self.vertex(DATA, "variable", name.label, name)
                inner[name.label] = frozenset({vid})
                for v in values:
                    self.g.add_edge(v, vid, "data", "para")
            for cond in ifs:
                self.expr(cond, inner)
        out = []
        for h in node.children[:heads]:
            out.extend(self.expr(h, inner))
        return out

    def _target_names(self, node):
        if node.kind == "name":
            yield node
        elif node.kind in ("tuple", "list", "starred"):
            for c in node.children:
                yield from self._target_names(c)

    # -- definitions -------------------------------------------------------

    def store(self, target: SyntaxNode, definer: int, env):
        k = target.kind
        if k == "name":
            vid = self.vertex(DATA, "variable", target.label, target)
            self.g.add_edge(definer, vid, "data", "def")
            env[target.label] = frozenset({vid})
        elif k in ("tuple", "list", "starred"):
            for c in target.children:
                self.store(c, definer, env)
        elif k == "attribute":
            path = dotted_path(target)
            if path is not None:
                vid = self.vertex(DATA, "variable", path, target, "path")
                self.g.add_edge(definer, vid, "data", "def")
                self.feed([self.use_var(_root_name(target), env)], definer, "qual")
            else:
                self.feed(self.expr(target.children[0], env), definer, "qual")
        elif k == "subscript":
            vid = self.op("subscript-store", "[]=", target)
            self.g.add_edge(definer, vid, "data", "def")
            self.feed(self.expr(target.children[0], env), vid, "recv")
            self.feed(self.expr(target.children[1], env), vid, "para")

    def params(self, arguments: SyntaxNode, env):
        for p in arguments.children:
            if p.kind in ("param", "vararg", "kwarg"):
                vid = self.vertex(DATA, "variable", p.label, p)
                env[p.label] = frozenset({vid})

    # -- statements ----------------------------------------------------------

    def block(self, stmts, env):
        for s in stmts:
            self.stmt(s, env)

    def stmt(self, s: SyntaxNode, env):
        k = s.kind
        if k == "assign":
            vid = self.op("assign", "=", s)
            self.feed(self.expr(s.children[-1], env), vid, "para")
            for t in s.children[:-1]:
                self.store(t, vid, env)
        elif k == "aug-assign":
            target, value = s.children
            vid = self.op("aug-assign", s.label, s)
            self.feed(self.expr(value, env), vid, "para")
            if target.kind == "name":
                old = self.use_var(target, env)
                self.feed([old], vid, "para")
                self.g.add_edge(vid, old, "data", "def")
                env[target.label] = frozenset({old})
            else:
                self.store(target, vid, env)
        elif k == "ann-assign":
            target, _, value = s.children
            if value.kind != "empty":
                vid = self.op("assign", "=", s)
                self.feed(self.expr(value, env), vid, "para")
                self.store(target, vid, env)
        elif k in ("expr-stmt", "return-stmt", "delete-stmt", "raise-stmt", "assert-stmt"):
            for c in s.children:
                self.expr(c, env)
        elif k in CONTROL_KEYWORDS:
            self.control(s, env)
        elif k in FUNCTION_KINDS:
            vid = self.vertex(DATA, "variable", s.label, s)
            env[s.label] = frozenset({vid})
            if self.inline_functions:
                inner = dict(env)
                self.params(s.children[1], inner)
                self.block(s.children[3].children, inner)
        elif k == "class-def":
            vid = self.vertex(DATA, "variable", s.label, s)
            for b in s.children[1].children:
                self.expr(b, env)
            self.block(s.children[2].children, dict(env))
            env[s.label] = frozenset({vid})
        elif k in ("import-stmt", "import-from"):
            for alias in s.children:
                name = alias.label.split(" as ")[-1]
                if k == "import-stmt" and " as " not in alias.label:
                    name = name.split(".")[0]
                if name == "*":
                    continue
                vid = self.vertex(DATA, "variable", name, alias)
                env[name] = frozenset({vid})

    def nested(self, ctrl, label, stmts, env):
        saved = self.ctrl
        self.ctrl = (ctrl, label)
        self.block(stmts, env)
        self.ctrl = saved

    def control(self, s: SyntaxNode, env):
        subkind, keyword = CONTROL_KEYWORDS[s.kind]
        cid = self.vertex(CONTROL, subkind, keyword.split()[-1] if subkind != "if" else "if", s)
        if self.ctrl is not None:
            self.g.add_edge(self.ctrl[0], cid, "control", self.ctrl[1])
        saved = self.ctrl
        self.ctrl = (cid, "dep")
        if subkind == "for":
            target, it, body, orelse = s.children
            self.feed(self.expr(it, env), cid, "para")
            self.store_control(target, cid, env)
            self.loop(cid, body, env, lambda e: self.store_control(target, cid, e))
            self.branch_else(cid, orelse, env)
        elif subkind == "while":
            test, body, orelse = s.children
            self.feed(self.expr(test, env), cid, "para")
            self.loop(cid, body, env, lambda e: self.feed(self.expr(test, e), cid, "para"))
            self.branch_else(cid, orelse, env)
        elif subkind == "if":
            test, body, orelse = s.children
            self.feed(self.expr(test, env), cid, "para")
            then_env = dict(env)
            self.nested(cid, "true-branch", body.children, then_env)
            else_env = dict(env)
            if orelse.kind == "block":
                self.nested(cid, "false-branch", orelse.children, else_env)
            elif orelse.kind == "elif-stmt":
                self.ctrl = (cid, "false-branch")
                self.stmt(orelse, else_env)
            _join(env, then_env, else_env)
        elif subkind == "with":
            for item in s.children[:-1]:
                ctx, var = item.children
                self.feed(self.expr(ctx, env), cid, "para")
                if var.kind != "empty":
                    self.store_control(var, cid, env)
            self.nested(cid, "dep", s.children[-1].children, env)
        else:
            body, handlers, orelse, final = s.children
            start = dict(env)
            self.nested(cid, "dep", body.children, env)
            branches = [env.copy()]
            for h in handlers.children:
                henv = _union(start, env)
                typ, hbody = h.children
                self.feed(self.expr(typ, henv), cid, "para")
                self.nested(cid, "dep", hbody.children, henv)
                branches.append(henv)
            if orelse.kind == "block":
                self.nested(cid, "dep", orelse.children, branches[0])
            merged = {}
            for b in branches:
                _join(merged, merged, b)
            env.clear()
            env.update(merged)
            if final.kind == "block":
                self.nested(cid, "dep", final.children, env)
        self.ctrl = saved

    def store_control(self, target, cid, env):
        self.store(target, cid, env)

    def loop(self, cid, body, env, head):
        entry = dict(env)
        first = dict(env)
        self.nested(cid, "dep", body.children, first)
        second = _union(entry, first)
        head(second)
        self.nested(cid, "dep", body.children, second)
        _join(env, entry, second)

    def branch_else(self, cid, orelse, env):
        if orelse.kind == "block":
            self.nested(cid, "false-branch", orelse.children, env)


def _union(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, frozenset()) | v
    return out


def _join(target: dict, a: dict, b: dict):
    merged = _union(a, b)
    target.clear()
    target.update(merged)


def build_fgpdg(unit: FunctionUnit, tree: SyntaxTree | None = None) -> Pdg:
    """Build the graph of one function; vertex ids follow source order."""
    raw = Pdg(unit, tree)
    fn = unit.node
    # a module unit covers top-level code only; function bodies are units
    b = _Builder(raw, inline_functions=fn.kind != "module")
    env: dict = {}
    if fn.kind == "module":
        b.block(fn.children, env)
    else:
        b.params(fn.children[1], env)
        b.block(fn.children[3].children, env)
    order = sorted(raw.vertices, key=lambda v: b.order[v])
    renumber = {old: new for new, old in enumerate(order)}
    g = Pdg(unit, tree)
    for old in order:
        v = raw.vertices[old]
        g.add_vertex(PdgNode(renumber[old], v.kind, v.subkind, v.label, v.syntax_refs, v.anchor))
    for e in raw.edges:
        g.add_edge(renumber[e.src], renumber[e.dst], e.kind, e.label)
    return g


def highlight_spans(pdg: Pdg, vertex_ids) -> list[Span]:
    """Source spans of the given vertices, merged and sorted."""
    tree = pdg.tree
    spans = []
    for vid in vertex_ids:
        v = pdg.vertices.get(vid)
        if v is None:
            raise UnknownVertex(vid)
        if v.anchor:
            continue
        for ref in v.syntax_refs:
            node = tree.nodes.get(ref) if tree is not None else None
            if node is None or node.span is None:
                continue
            spans.append(_token_span(tree, node, v))
    spans.sort(key=lambda s: (s.start, s.end))
    merged: list[Span] = []
    for s in spans:
        if merged and s.start <= merged[-1].end:
            if s.end > merged[-1].end:
                merged[-1] = Span(merged[-1].start, s.end)
        else:
            merged.append(s)
    return merged


def _token_span(tree: SyntaxTree, node: SyntaxNode, v: PdgNode) -> Span:
    s = node.span
    if v.kind == CONTROL:
        keyword = CONTROL_KEYWORDS[node.kind][1]
        return Span(s.start, s.start + len(keyword))
    if node.kind in ("param", "vararg", "kwarg", "function-def", "async-function-def", "class-def"):
        name = node.label.encode()
        at = tree.data.find(name, s.start, s.end)
        if node.kind in ("function-def", "async-function-def", "class-def"):
            kw = b"class" if node.kind == "class-def" else b"def"
            at = tree.data.find(name, tree.data.find(kw, s.start, s.end) + len(kw), s.end)
        if at >= 0:
            return Span(at, at + len(name))
    return s
