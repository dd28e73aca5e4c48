"""GumTree matching, Chawathe edit scripts, and transactional script application."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .errors import DanglingReference
from .syntax import SyntaxNode, SyntaxTree, Span

MIN_HEIGHT = 2
MIN_DICE = 0.5
RECOVERY_LIMIT = 40_000

OPS = ("insert", "delete", "update", "move")


@dataclass(frozen=True)
class EditAction:
    """One tree edit.

    ``node`` is the id of the affected node.  Inserted nodes get negative
    ids inside a script; later actions refer to them by that id.
    """

    op: str
    node: int
    kind: str | None = None
    label: str | None = None
    parent: int | None = None
    position: int | None = None
    new_label: str | None = None

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown edit op {self.op!r}")
        need = {
            "insert": ("kind", "label", "parent", "position"),
            "delete": (),
            "update": ("new_label",),
            "move": ("parent", "position"),
        }[self.op]
        for name in ("kind", "label", "parent", "position", "new_label"):
            present = getattr(self, name) is not None
            if present != (name in need):
                raise ValueError(f"{self.op} action with bad field {name}")
        if self.position is not None and self.position < 0:
            raise ValueError("negative position")

    def to_dict(self) -> dict:
        d = {"op": self.op, "node": self.node}
        for name in ("kind", "label", "parent", "position", "new_label"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> EditAction:
        return cls(**d)


def insert(node, kind, label, parent, position):
    return EditAction("insert", node, kind=kind, label=label, parent=parent, position=position)


def delete(node):
    return EditAction("delete", node)


def update(node, new_label):
    return EditAction("update", node, new_label=new_label)


def move(node, parent, position):
    return EditAction("move", node, parent=parent, position=position)


class NodeMapping:
    """Injective pairing of before-tree ids with after-tree ids."""

    def __init__(self, pairs=()):
        self.src: dict[int, int] = {}
        self.dst: dict[int, int] = {}
        for a, b in pairs:
            self.add(a, b)

    def add(self, a: int, b: int):
        if a in self.src or b in self.dst:
            raise ValueError(f"mapping would not be injective at ({a}, {b})")
        self.src[a] = b
        self.dst[b] = a

    def has_src(self, a):
        return a in self.src

    def has_dst(self, b):
        return b in self.dst

    @property
    def pairs(self) -> set:
        return set(self.src.items())

    def __len__(self):
        return len(self.src)

    def __contains__(self, pair):
        return self.src.get(pair[0]) == pair[1]


# ---------------------------------------------------------------------------
# matching


class _Index:
    def __init__(self, tree: SyntaxTree):
        self.tree = tree
        self.height: dict[int, int] = {}
        self.hash: dict[int, int] = {}
        self.size: dict[int, int] = {}
        self.pre: dict[int, int] = {}
        self.post: list[SyntaxNode] = []
        for i, n in enumerate(tree.root.walk()):
            self.pre[n.id] = i
        for n in tree.root.postorder():
            self.post.append(n)
            if n.children:
                self.height[n.id] = 1 + max(self.height[c.id] for c in n.children)
                self.size[n.id] = 1 + sum(self.size[c.id] for c in n.children)
            else:
                self.height[n.id] = 1
                self.size[n.id] = 1
            self.hash[n.id] = hash((n.kind, n.label, tuple(self.hash[c.id] for c in n.children)))

    def descendants(self, n: SyntaxNode):
        it = n.walk()
        next(it)
        return it


def _isomorphic(a: SyntaxNode, b: SyntaxNode) -> bool:
    from .syntax import structurally_equal
    return structurally_equal(a, b)


def _map_subtrees(m: NodeMapping, a: SyntaxNode, b: SyntaxNode):
    for x, y in zip(a.walk(), b.walk()):
        if not m.has_src(x.id) and not m.has_dst(y.id):
            m.add(x.id, y.id)


def _dice(m: NodeMapping, ia: _Index, a: SyntaxNode, b: SyntaxNode, desc_b=None) -> float:
    if desc_b is None:
        desc_b = {d.id for d in ib_desc(b)}
    common = sum(1 for d in ia.descendants(a) if m.src.get(d.id) in desc_b)
    total = (ia.size[a.id] - 1) + len(desc_b)
    return 2.0 * common / total if total else 0.0


def ib_desc(n: SyntaxNode):
    it = n.walk()
    next(it)
    return it


def match_trees(before: SyntaxTree, after: SyntaxTree) -> NodeMapping:
    ia, ib = _Index(before), _Index(after)
    m = NodeMapping()
    _top_down(m, ia, ib)
    if not m.has_src(before.root.id) and not m.has_dst(after.root.id):
        m.add(before.root.id, after.root.id)
    _bottom_up(m, ia, ib)
    return m


def _top_down(m: NodeMapping, ia: _Index, ib: _Index):
    def push(queue, idx, n):
        queue[idx.height[n.id]].append(n)

    qa: dict[int, list] = defaultdict(list)
    qb: dict[int, list] = defaultdict(list)
    push(qa, ia, ia.tree.root)
    push(qb, ib, ib.tree.root)
    candidates = []

    def top(q):
        hs = [h for h, v in q.items() if v]
        return max(hs) if hs else 0

    while True:
        ha, hb = top(qa), top(qb)
        if min(ha, hb) < MIN_HEIGHT:
            break
        if ha != hb:
            if ha > hb:
                for n in qa.pop(ha):
                    for c in n.children:
                        push(qa, ia, c)
            else:
                for n in qb.pop(hb):
                    for c in n.children:
                        push(qb, ib, c)
            continue
        h1, h2 = qa.pop(ha), qb.pop(hb)
        by_hash = defaultdict(list)
        for t2 in h2:
            by_hash[ib.hash[t2.id]].append(t2)
        matched_a, matched_b = set(), set()
        for t1 in h1:
            same = [t2 for t2 in by_hash.get(ia.hash[t1.id], ()) if _isomorphic(t1, t2)]
            for t2 in same:
                matched_a.add(t1.id)
                matched_b.add(t2.id)
            if not same:
                continue
            others_a = [x for x in h1 if x is not t1 and ia.hash[x.id] == ia.hash[t1.id]
                        and _isomorphic(x, t1)]
            if len(same) == 1 and not others_a:
                _map_subtrees(m, t1, same[0])
            else:
                candidates.extend((t1, t2) for t2 in same)
        for t1 in h1:
            if t1.id not in matched_a:
                for c in t1.children:
                    push(qa, ia, c)
        for t2 in h2:
            if t2.id not in matched_b:
                for c in t2.children:
                    push(qb, ib, c)

    def key(pair):
        t1, t2 = pair
        p1, p2 = t1.parent, t2.parent
        same_kind = p1 is not None and p2 is not None and p1.kind == p2.kind
        dice = _dice(m, ia, p1, p2) if same_kind else 0.0
        return (-ia.height[t1.id], not same_kind, -dice, ia.pre[t1.id], ib.pre[t2.id])

    candidates.sort(key=key)
    for t1, t2 in candidates:
        if not m.has_src(t1.id) and not m.has_dst(t2.id):
            _map_subtrees(m, t1, t2)


def _bottom_up(m: NodeMapping, ia: _Index, ib: _Index):
    nodes_b = ib.tree.nodes
    for t1 in ia.post:
        if t1.parent is None:
            t2 = nodes_b[m.src[t1.id]]
            _recover(m, ia, ib, t1, t2)
            continue
        if m.has_src(t1.id) or not t1.children:
            continue
        seeds = set()
        for d in ia.descendants(t1):
            partner = m.src.get(d.id)
            if partner is None:
                continue
            p = nodes_b[partner].parent
            while p is not None and p.id not in seeds:
                seeds.add(p.id)
                p = p.parent
        best, best_dice = None, -1.0
        for cid in sorted(seeds, key=lambda i: ib.pre[i]):
            c = nodes_b[cid]
            if c.kind != t1.kind or m.has_dst(cid) or c.parent is None:
                continue
            d = _dice(m, ia, t1, c)
            if d > best_dice:
                best, best_dice = c, d
        if best is not None and best_dice >= MIN_DICE:
            m.add(t1.id, best.id)
            _recover(m, ia, ib, t1, best)


def _lcs_pairs(xs, ys, eq):
    n, k = len(xs), len(ys)
    table = [[0] * (k + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(k - 1, -1, -1):
            if eq(xs[i], ys[j]):
                table[i][j] = table[i + 1][j + 1] + 1
            else:
                table[i][j] = max(table[i + 1][j], table[i][j + 1])
    out, i, j = [], 0, 0
    while i < n and j < k:
        if eq(xs[i], ys[j]):
            out.append((xs[i], ys[j]))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return out


def _recover(m: NodeMapping, ia: _Index, ib: _Index, a: SyntaxNode, b: SyntaxNode):
    """Simple recovery: map leftover children by isomorphism, label, then unique kind."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        xs = [c for c in x.children if not m.has_src(c.id)]
        ys = [c for c in y.children if not m.has_dst(c.id)]
        if not xs or not ys:
            continue
        for c1, c2 in _lcs_pairs(xs, ys, lambda p, q: ia.hash[p.id] == ib.hash[q.id]
                                 and _isomorphic(p, q)):
            _map_subtrees(m, c1, c2)
        xs = [c for c in xs if not m.has_src(c.id)]
        ys = [c for c in ys if not m.has_dst(c.id)]
        for c1, c2 in _lcs_pairs(xs, ys, lambda p, q: p.kind == q.kind and p.label == q.label):
            m.add(c1.id, c2.id)
            stack.append((c1, c2))
        xs = [c for c in xs if not m.has_src(c.id)]
        ys = [c for c in ys if not m.has_dst(c.id)]
        kinds_x = defaultdict(list)
        kinds_y = defaultdict(list)
        for c in xs:
            kinds_x[c.kind].append(c)
        for c in ys:
            kinds_y[c.kind].append(c)
        for kind, group in kinds_x.items():
            other = kinds_y.get(kind, [])
            if len(group) == 1 and len(other) == 1:
                m.add(group[0].id, other[0].id)
                stack.append((group[0], other[0]))
        # matched pairs among already-mapped children may hide unmatched grandchildren
        for c1 in x.children:
            partner = m.src.get(c1.id)
            if partner is not None:
                c2 = ib.tree.nodes[partner]
                if c2.parent is y and (c1, c2) not in stack:
                    if any(not m.has_src(g.id) for g in c1.children):
                        stack.append((c1, c2))
    # leftovers anywhere below the pair, e.g. a name hoisted out of a call
    xs = [d for d in ia.descendants(a) if not m.has_src(d.id)]
    ys = [d for d in ib.descendants(b) if not m.has_dst(d.id)]
    if xs and ys and len(xs) * len(ys) <= RECOVERY_LIMIT:
        for c1, c2 in _lcs_pairs(xs, ys, lambda p, q: p.kind == q.kind and p.label == q.label):
            m.add(c1.id, c2.id)


# ---------------------------------------------------------------------------
# applying actions


class _Editor:
    """Applies actions to a tree in place, resolving script-local fresh ids."""

    def __init__(self, tree: SyntaxTree):
        self.tree = tree
        self.fresh: dict[int, int] = {}
        self.touched: set[int] = set()

    def resolve(self, ref, index: int, what: str) -> SyntaxNode:
        if ref is None:
            raise DanglingReference(index, f"missing {what}")
        rid = self.fresh.get(ref) if ref < 0 else ref
        node = self.tree.nodes.get(rid) if rid is not None else None
        if node is None:
            raise DanglingReference(index, f"{what} {ref} does not exist")
        return node

    def apply(self, action: EditAction, index: int) -> SyntaxNode:
        op = action.op
        if op == "insert":
            parent = self.resolve(action.parent, index, "parent")
            if action.node in self.fresh or action.node >= 0 and action.node in self.tree.nodes:
                raise DanglingReference(index, f"inserted id {action.node} already in use")
            node = SyntaxNode(action.kind, action.label)
            self.tree.register(node)
            node.base_indent = parent.base_indent
            if action.node < 0:
                self.fresh[action.node] = node.id
            pos = min(action.position, len(parent.children))
            parent.children.insert(pos, node)
            node.parent = parent
            self.touched.update((node.id, parent.id))
            return node
        node = self.resolve(action.node, index, "node")
        if op == "update":
            node.label = action.new_label
            self.touched.add(node.id)
        elif op == "delete":
            if node.parent is None:
                raise DanglingReference(index, "cannot delete the root")
            parent = node.parent
            parent.children.remove(node)
            for d in node.walk():
                self.tree.nodes.pop(d.id, None)
                self.touched.discard(d.id)
            node.parent = None
            self.touched.add(parent.id)
        else:
            parent = self.resolve(action.parent, index, "parent")
            if node.parent is None:
                raise DanglingReference(index, "cannot move the root")
            p = parent
            while p is not None:
                if p is node:
                    raise DanglingReference(index, "move into own subtree")
                p = p.parent
            old = node.parent
            old.children.remove(node)
            pos = min(action.position, len(parent.children))
            parent.children.insert(pos, node)
            node.parent = parent
            if node.span is not None:
                node.meta["moved"] = node.span
                node.span = None
            self.touched.update((node.id, old.id, parent.id))
        return node


def apply_edit_script(tree: SyntaxTree, script) -> tuple[SyntaxTree, set]:
    """Apply actions in order to a copy of ``tree``.

    Returns the edited copy and the ids of touched nodes.  Any unresolved
    reference raises :class:`DanglingReference`; the input is never modified.
    """
    work = tree.clone()
    editor = _Editor(work)
    for i, action in enumerate(script):
        editor.apply(action, i)
    return work, editor.touched


# ---------------------------------------------------------------------------
# edit script generation


def compute_edit_script(before: SyntaxTree, after: SyntaxTree, mapping: NodeMapping) -> list[EditAction]:
    work = before.clone()
    editor = _Editor(work)
    partner: dict[int, int] = dict(mapping.src)   # work id -> after id
    rev: dict[int, int] = dict(mapping.dst)       # after id -> work id
    script_id: dict[int, int] = {}                # work id -> id used in the script
    # "in order" marks, kept apart because the two trees share id ranges
    done_w: set[int] = set()
    done_x: set[int] = set()
    script: list[EditAction] = []
    next_fresh = -1

    def ref(wid):
        return script_id.get(wid, wid)

    def emit(action):
        script.append(action)
        return editor.apply(action, len(script) - 1)

    def find_pos(x: SyntaxNode, exclude: SyntaxNode | None = None) -> int:
        y = x.parent
        v = None
        for s in y.children:
            if s is x:
                break
            if s.id in done_x:
                v = s
        if v is None:
            return 0
        u = work.nodes[rev[v.id]]
        siblings = [c for c in u.parent.children if c is not exclude]
        return siblings.index(u) + 1

    def align_children(w: SyntaxNode, x: SyntaxNode):
        for c in w.children:
            done_w.discard(c.id)
        for c in x.children:
            done_x.discard(c.id)
        s1 = [c for c in w.children if partner.get(c.id) is not None
              and after.nodes[partner[c.id]].parent is x]
        s2 = [c for c in x.children if rev.get(c.id) is not None
              and work.nodes[rev[c.id]].parent is w]
        lcs = _lcs_pairs(s1, s2, lambda a, b: partner.get(a.id) == b.id)
        for a, b in lcs:
            done_w.add(a.id)
            done_x.add(b.id)
        fixed = {a.id for a, _ in lcs}
        for b in s2:
            a = work.nodes[rev[b.id]]
            if a.id in fixed:
                continue
            k = find_pos(b, exclude=a)
            emit(move(ref(a.id), ref(w.id), k))
            done_w.add(a.id)
            done_x.add(b.id)

    queue = [after.root]
    head = 0
    while head < len(queue):
        x = queue[head]
        head += 1
        queue.extend(x.children)
        if x.parent is None:
            w = work.nodes[rev[x.id]]
        else:
            z = work.nodes[rev[x.parent.id]]
            wid = rev.get(x.id)
            if wid is None:
                k = find_pos(x)
                fid = next_fresh
                next_fresh -= 1
                w = emit(insert(fid, x.kind, x.label, ref(z.id), k))
                script_id[w.id] = fid
                partner[w.id] = x.id
                rev[x.id] = w.id
            else:
                w = work.nodes[wid]
                if w.label != x.label:
                    emit(update(ref(w.id), x.label))
                if w.parent is not z:
                    k = find_pos(x, exclude=w)
                    emit(move(ref(w.id), ref(z.id), k))
            done_w.add(w.id)
            done_x.add(x.id)
        align_children(w, x)

    for n in list(work.root.postorder()):
        if n.id not in partner or partner[n.id] not in after.nodes:
            emit(delete(ref(n.id)))
    return script


def diff(before: SyntaxTree, after: SyntaxTree) -> list[EditAction]:
    return compute_edit_script(before, after, match_trees(before, after))


def spans_of(tree: SyntaxTree, ids) -> list[Span]:
    """Original spans of the given nodes, where they still have one."""
    out = []
    for i in ids:
        n = tree.nodes.get(i)
        if n is not None:
            s = n.span or n.meta.get("moved")
            if s is not None:
                out.append(s)
    return out
