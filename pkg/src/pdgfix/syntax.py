"""Lossless concrete syntax trees for Python source.

The tree is derived from :mod:`ast` but every node carries a byte span into
the original source, so text outside edited regions can always be copied
verbatim.  Optional grammar slots are filled with ``empty`` leaves to keep
child positions stable, which the edit-script machinery relies on.
"""

from __future__ import annotations

import ast
import bisect
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterator

from .errors import ParseError

STATEMENT_KINDS = frozenset({
    "function-def", "async-function-def", "class-def", "return-stmt",
    "delete-stmt", "assign", "aug-assign", "ann-assign", "for-stmt",
    "async-for-stmt", "while-stmt", "if-stmt", "elif-stmt", "with-stmt",
    "async-with-stmt", "raise-stmt", "try-stmt", "try-star-stmt",
    "assert-stmt", "import-stmt", "import-from", "global-stmt",
    "nonlocal-stmt", "expr-stmt", "pass-stmt", "break-stmt",
    "continue-stmt", "opaque-stmt", "except-handler",
})

FUNCTION_KINDS = frozenset({"function-def", "async-function-def"})

# Kinds whose children form a variable-length sequence.
SEQUENCE_KINDS = frozenset({
    "module", "block", "call", "list", "tuple", "set", "dict", "arguments",
    "bases", "decorators", "handlers", "assign", "bool-op", "compare",
    "delete-stmt", "import-stmt", "import-from", "with-stmt",
    "async-with-stmt", "list-comp", "set-comp", "generator-exp",
    "dict-comp", "comprehension",
})

BINOP_SYMBOLS = {
    ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.MatMult: "@", ast.Div: "/",
    ast.Mod: "%", ast.Pow: "**", ast.LShift: "<<", ast.RShift: ">>",
    ast.BitOr: "|", ast.BitXor: "^", ast.BitAnd: "&", ast.FloorDiv: "//",
}
UNARY_SYMBOLS = {ast.Invert: "~", ast.Not: "not", ast.UAdd: "+", ast.USub: "-"}
CMP_SYMBOLS = {
    ast.Eq: "==", ast.NotEq: "!=", ast.Lt: "<", ast.LtE: "<=", ast.Gt: ">",
    ast.GtE: ">=", ast.Is: "is", ast.IsNot: "is not", ast.In: "in",
    ast.NotIn: "not in",
}

_NEWLINE = re.compile(rb"\r\n|\r|\n")
_WS = b" \t\f"


@dataclass(frozen=True)
class Span:
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"span start {self.start} > end {self.end}")

    def __len__(self):
        return self.end - self.start


class SyntaxNode:
    """One node of a :class:`SyntaxTree`.

    ``span`` is the node's byte range in the original source, or ``None``
    for nodes created by edits.  ``orig`` remembers the
    label and child ids the node had at parse time; the renderer uses it to
    decide which regions can be copied verbatim.
    """

    __slots__ = ("id", "kind", "label", "children", "span", "parent",
                 "base_indent", "meta", "orig")

    def __init__(self, kind: str, label: str = "", children=None, span=None):
        self.id = -1
        self.kind = kind
        self.label = label
        self.children: list[SyntaxNode] = children or []
        self.span: Span | None = span
        self.parent: SyntaxNode | None = None
        self.base_indent = ""
        self.meta: dict = {}
        self.orig = None
        for c in self.children:
            c.parent = self

    def __repr__(self):
        return f"SyntaxNode({self.id}, {self.kind!r}, {self.label!r})"

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self) -> Iterator[SyntaxNode]:
        """Pre-order traversal."""
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def postorder(self) -> Iterator[SyntaxNode]:
        stack = [(self, False)]
        while stack:
            n, done = stack.pop()
            if done:
                yield n
            else:
                stack.append((n, True))
                stack.extend((c, False) for c in reversed(n.children))

    def index_in_parent(self) -> int:
        if self.parent is None:
            return -1
        for i, c in enumerate(self.parent.children):
            if c is self:
                return i
        raise ValueError("node not among its parent's children")


class SyntaxTree:
    """A parsed module plus the bookkeeping needed to render edits."""

    def __init__(self, root: SyntaxNode, source: str, data: bytes,
                 line_starts: list[int], protected_lines: frozenset,
                 newline: str = "\n", indent_unit: str = "    "):
        self.root = root
        self.source = source
        self.data = data
        self.line_starts = line_starts
        self.protected_lines = protected_lines
        self.newline = newline
        self.indent_unit = indent_unit
        self.nodes: dict[int, SyntaxNode] = {}
        self.next_id = 0

    def __getitem__(self, node_id: int) -> SyntaxNode:
        return self.nodes[node_id]

    def __contains__(self, node_id) -> bool:
        return node_id in self.nodes

    def register(self, node: SyntaxNode) -> SyntaxNode:
        node.id = self.next_id
        self.next_id += 1
        self.nodes[node.id] = node
        return node

    def line_of(self, offset: int) -> int:
        """0-based line index containing ``offset``."""
        return bisect.bisect_right(self.line_starts, offset) - 1

    def location(self, offset: int) -> tuple[int, int]:
        """1-based (line, column) with the column counted in characters."""
        line = self.line_of(offset)
        start = self.line_starts[line]
        col = len(self.data[start:offset].decode("utf-8", errors="replace"))
        return line + 1, col + 1

    def text(self, span: Span) -> str:
        return self.data[span.start:span.end].decode("utf-8")

    def clone(self, root: SyntaxNode | None = None) -> SyntaxTree:
        """Copy the node structure; spans, ids and provenance are kept.

        With ``root`` only that subtree is copied, detached from its parent.
        """
        new = SyntaxTree(None, self.source, self.data, self.line_starts,
                         self.protected_lines, self.newline, self.indent_unit)
        new.next_id = self.next_id

        def copy(n, parent):
            m = SyntaxNode(n.kind, n.label)
            m.id, m.span, m.base_indent, m.orig = n.id, n.span, n.base_indent, n.orig
            m.meta = dict(n.meta)
            m.parent = parent
            new.nodes[m.id] = m
            m.children = [copy(c, m) for c in n.children]
            return m

        new.root = copy(root if root is not None else self.root, None)
        return new


@dataclass
class FunctionUnit:
    node: SyntaxNode
    qualified_name: str
    path: str = ""
    tree: SyntaxTree | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.node.kind not in FUNCTION_KINDS and self.node.kind != "module":
            raise ValueError(f"function unit rooted at {self.node.kind}")


def structurally_equal(a: SyntaxNode, b: SyntaxNode) -> bool:
    """Compare kinds, labels and child order; spans and ids are ignored."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x.kind != y.kind or x.label != y.label or len(x.children) != len(y.children):
            return False
        stack.extend(zip(x.children, y.children))
    return True


def signature(node: SyntaxNode):
    """Hashable structural fingerprint of a subtree."""
    return (node.kind, node.label, tuple(signature(c) for c in node.children))


def dump(node: SyntaxNode, indent: int = 0) -> str:
    lines = []
    for depth, n in _walk_depth(node, indent):
        lines.append("  " * depth + (f"{n.kind} {n.label!r}" if n.label else n.kind))
    return "\n".join(lines)


def _walk_depth(node, depth):
    yield depth, node
    for c in node.children:
        yield from _walk_depth(c, depth + 1)


# ---------------------------------------------------------------------------
# parsing


def _line_starts(data: bytes) -> list[int]:
    starts = [0]
    starts.extend(m.end() for m in _NEWLINE.finditer(data))
    return starts


def _detect_newline(data: bytes) -> str:
    m = _NEWLINE.search(data)
    return m.group().decode() if m else "\n"


def _leading_ws(data: bytes, start: int) -> str:
    end = start
    while end < len(data) and data[end] in _WS:
        end += 1
    return data[start:end].decode("utf-8")


def parse_source(source) -> SyntaxTree:
    """Parse Python source (``str`` or UTF-8 ``bytes``) into a syntax tree."""
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(1, e.start + 1, f"invalid UTF-8: {e.reason}") from None
    data = source.encode("utf-8")
    bom = 0
    text = source
    if text.startswith("﻿"):
        text = text[1:]
        bom = 3
    try:
        # warnings about the user's code (odd escapes and the like) are not ours to show
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            module = ast.parse(text)
    except SyntaxError as e:
        raise ParseError(e.lineno or 1, e.offset or 1, e.msg) from None
    except ValueError as e:  # null bytes
        raise ParseError(1, 1, str(e)) from None
    line_starts = _line_starts(data)
    builder = _Builder(data, line_starts, bom)
    root = builder.module(module)
    tree = SyntaxTree(root, source, data, line_starts, frozenset(builder.protected),
                      _detect_newline(data), _detect_indent_unit(module, builder))
    for n in root.walk():
        tree.register(n)
    for n in root.walk():
        n.orig = (n.label, tuple(c.id for c in n.children))
    _assign_indents(tree)
    return tree


def _detect_indent_unit(module, builder) -> str:
    for n in ast.walk(module):
        body = getattr(n, "body", None)
        if isinstance(n, ast.stmt) and isinstance(body, list) and body:
            outer = builder.line_indent(builder.pos(n.lineno, n.col_offset))
            inner = builder.line_indent(builder.pos(body[0].lineno, body[0].col_offset))
            if inner.startswith(outer) and len(inner) > len(outer):
                unit = inner[len(outer):]
                return "\t" if "\t" in unit else "    "
    return "    "


def _assign_indents(tree: SyntaxTree):
    data = tree.data
    # iterative to survive deeply nested sources
    stack = [(tree.root, "")]
    while stack:
        n, current = stack.pop()
        if n.kind in STATEMENT_KINDS or n.kind in ("block", "handlers", "decorators"):
            start = tree.line_starts[tree.line_of(n.span.start)]
            prefix_blank = data[start:n.span.start].strip(_WS) == b""
            if n.kind == "block":
                n.meta["inline"] = not prefix_blank
                if prefix_blank:
                    current = _leading_ws(data, start)
            else:
                current = _leading_ws(data, start)
        n.base_indent = current
        stack.extend((c, current) for c in reversed(n.children))


class _Builder:
    def __init__(self, data: bytes, line_starts: list[int], bom: int):
        self.data = data
        self.line_starts = line_starts
        self.bom = bom
        self.protected: set[int] = set()

    # -- positions ---------------------------------------------------------

    def pos(self, lineno: int, col: int) -> int:
        return self.line_starts[lineno - 1] + col + (self.bom if lineno == 1 else 0)

    def span_of(self, a) -> tuple[int, int]:
        return self.pos(a.lineno, a.col_offset), self.pos(a.end_lineno, a.end_col_offset)

    def line_indent(self, offset: int) -> str:
        line = bisect.bisect_right(self.line_starts, offset) - 1
        return _leading_ws(self.data, self.line_starts[line])

    def skip_trivia(self, pos: int) -> int:
        """Advance past whitespace, commas, comments and line continuations."""
        data = self.data
        while pos < len(data):
            ch = data[pos:pos + 1]
            if ch in (b" ", b"\t", b"\f", b"\r", b"\n", b",", b"\\"):
                pos += 1
            elif ch == b"#":
                while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                break
        return pos

    def find_token(self, pos: int, token: bytes) -> int:
        p = self.skip_trivia(pos)
        if self.data.startswith(token, p):
            return p
        q = self.data.find(token, pos)
        return q if q >= 0 else pos

    # -- node helpers --------------------------------------------------------

    def mk(self, kind, label, children, start, end, **meta) -> SyntaxNode:
        node = SyntaxNode(kind, label, children, Span(start, end))
        node.meta.update(meta)
        return node

    def empty(self, at: int) -> SyntaxNode:
        return self.mk("empty", "", [], at, at)

    def opt(self, a, at: int) -> SyntaxNode:
        return self.expr(a) if a is not None else self.empty(at)

    def seq(self, kind, label, children, at: int) -> SyntaxNode:
        if children:
            return self.mk(kind, label, children, children[0].span.start, children[-1].span.end)
        return self.mk(kind, label, [], at, at)

    def opaque(self, a, kind) -> SyntaxNode:
        start, end = self.span_of(a)
        base = self.line_indent(start)
        first = bisect.bisect_right(self.line_starts, start) - 1
        lines = self.data[start:end].decode("utf-8").splitlines(keepends=True)
        out = []
        for i, line in enumerate(lines):
            if i and (first + i) not in self.protected and line.startswith(base):
                line = line[len(base):]
            out.append(line)
        return self.mk(kind, "".join(out), [], start, end)

    # -- module and statements ----------------------------------------------

    def module(self, m: ast.Module) -> SyntaxNode:
        self._mark_protected(m)
        body = [self.stmt(s) for s in m.body]
        root = self.mk("module", "", body, 0, len(self.data))
        if body:
            root.meta["body"] = (body[0].span.start, body[-1].span.end)
        for n in root.walk():
            for i, c in enumerate(n.children):
                if c.kind == "block":
                    prev = n.children[i - 1].span.end if i else n.span.start
                    c.meta["colon"] = self.find_colon(prev, c.span.start)
                if i and n.kind in ("module", "block"):
                    c.meta["lead"] = n.children[i - 1].span.end
        return root

    def find_colon(self, pos: int, limit: int):
        data = self.data
        while pos < limit:
            ch = data[pos:pos + 1]
            if ch == b"#":
                while pos < limit and data[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
                continue
            if ch == b":":
                return pos
            pos += 1
        return None

    def _mark_protected(self, m):
        for n in ast.walk(m):
            if isinstance(n, (ast.Constant, ast.JoinedStr)) and hasattr(n, "lineno"):
                if n.end_lineno > n.lineno:
                    self.protected.update(range(n.lineno, n.end_lineno))

    def block(self, stmts) -> SyntaxNode:
        body = [self.stmt(s) for s in stmts]
        return self.mk("block", "", body, body[0].span.start, body[-1].span.end)

    def stmt(self, s: ast.stmt) -> SyntaxNode:
        method = getattr(self, "s_" + type(s).__name__, None)
        if method is None:
            return self.opaque(s, "opaque-stmt")
        return method(s)

    def _def_header(self, s, keyword: bytes):
        start, end = self.span_of(s)
        kw = self.data.find(keyword, start)
        name_pos = self.data.find(s.name.encode(), kw + len(keyword))
        name_end = name_pos + len(s.name.encode())
        decos = [self.expr(d) for d in s.decorator_list]
        if decos:
            at = self.data.rfind(b"@", 0, decos[0].span.start)
            deco = self.mk("decorators", "", decos, at, decos[-1].span.end)
            start = at
        else:
            deco = self.empty_seq("decorators", start)
        return start, end, deco, name_end

    def empty_seq(self, kind, at):
        return self.mk(kind, "", [], at, at)

    def s_FunctionDef(self, s, kind="function-def"):
        start, end, deco, name_end = self._def_header(s, b"def")
        lparen = self.data.find(b"(", name_end)
        args = self.arguments(s.args, lparen + 1)
        returns = self.opt(s.returns, args.span.end)
        body = self.block(s.body)
        return self.mk(kind, s.name, [deco, args, returns, body], start, end)

    def s_AsyncFunctionDef(self, s):
        return self.s_FunctionDef(s, "async-function-def")

    def s_ClassDef(self, s):
        start, end, deco, name_end = self._def_header(s, b"class")
        items = [self.expr(b) for b in s.bases] + [self.keyword(k) for k in s.keywords]
        items.sort(key=lambda n: n.span.start)
        bases = self.seq("bases", "", items, name_end)
        body = self.block(s.body)
        return self.mk("class-def", s.name, [deco, bases, body], start, end)

    def s_Return(self, s):
        start, end = self.span_of(s)
        return self.mk("return-stmt", "", [self.opt(s.value, start + 6)], start, end)

    def s_Delete(self, s):
        start, end = self.span_of(s)
        return self.mk("delete-stmt", "", [self.expr(t) for t in s.targets], start, end)

    def s_Assign(self, s):
        start, end = self.span_of(s)
        kids = [self.expr(t) for t in s.targets] + [self.expr(s.value)]
        return self.mk("assign", "", kids, start, end)

    def s_AugAssign(self, s):
        start, end = self.span_of(s)
        label = BINOP_SYMBOLS[type(s.op)] + "="
        return self.mk("aug-assign", label, [self.expr(s.target), self.expr(s.value)], start, end)

    def s_AnnAssign(self, s):
        start, end = self.span_of(s)
        target, ann = self.expr(s.target), self.expr(s.annotation)
        value = self.opt(s.value, ann.span.end)
        return self.mk("ann-assign", "", [target, ann, value], start, end)

    def s_For(self, s, kind="for-stmt"):
        start, end = self.span_of(s)
        target, it, body = self.expr(s.target), self.expr(s.iter), self.block(s.body)
        orelse = self.block(s.orelse) if s.orelse else self.empty(body.span.end)
        return self.mk(kind, "", [target, it, body, orelse], start, end)

    def s_AsyncFor(self, s):
        return self.s_For(s, "async-for-stmt")

    def s_While(self, s):
        start, end = self.span_of(s)
        test, body = self.expr(s.test), self.block(s.body)
        orelse = self.block(s.orelse) if s.orelse else self.empty(body.span.end)
        return self.mk("while-stmt", "", [test, body, orelse], start, end)

    def s_If(self, s, kind="if-stmt"):
        start, end = self.span_of(s)
        test, body = self.expr(s.test), self.block(s.body)
        if not s.orelse:
            orelse = self.empty(body.span.end)
        elif (len(s.orelse) == 1 and isinstance(s.orelse[0], ast.If)
              and self.data.startswith(b"elif", self.pos(s.orelse[0].lineno, s.orelse[0].col_offset))):
            orelse = self.s_If(s.orelse[0], "elif-stmt")
        else:
            orelse = self.block(s.orelse)
        return self.mk(kind, "", [test, body, orelse], start, end)

    def s_With(self, s, kind="with-stmt"):
        start, end = self.span_of(s)
        items = []
        for item in s.items:
            ctx = self.expr(item.context_expr)
            var = self.opt(item.optional_vars, ctx.span.end)
            items.append(self.mk("with-item", "", [ctx, var], ctx.span.start,
                                 max(ctx.span.end, var.span.end)))
        return self.mk(kind, "", items + [self.block(s.body)], start, end)

    def s_AsyncWith(self, s):
        return self.s_With(s, "async-with-stmt")

    def s_Raise(self, s):
        start, end = self.span_of(s)
        exc = self.opt(s.exc, start + 5)
        cause = self.opt(s.cause, exc.span.end)
        return self.mk("raise-stmt", "", [exc, cause], start, end)

    def s_Try(self, s, kind="try-stmt"):
        start, end = self.span_of(s)
        body = self.block(s.body)
        handlers = []
        for h in s.handlers:
            hs, he = self.span_of(h)
            typ = self.opt(h.type, hs + 6)
            handlers.append(self.mk("except-handler", h.name or "", [typ, self.block(h.body)], hs, he))
        hnode = self.seq("handlers", "", handlers, body.span.end)
        orelse = self.block(s.orelse) if s.orelse else self.empty(hnode.span.end)
        final = self.block(s.finalbody) if s.finalbody else self.empty(orelse.span.end)
        return self.mk(kind, "", [body, hnode, orelse, final], start, end)

    def s_TryStar(self, s):
        return self.s_Try(s, "try-star-stmt")

    def s_Assert(self, s):
        start, end = self.span_of(s)
        test = self.expr(s.test)
        return self.mk("assert-stmt", "", [test, self.opt(s.msg, test.span.end)], start, end)

    def alias(self, a) -> SyntaxNode:
        label = a.name + (f" as {a.asname}" if a.asname else "")
        return self.mk("alias", label, [], *self.span_of(a))

    def s_Import(self, s):
        start, end = self.span_of(s)
        return self.mk("import-stmt", "", [self.alias(a) for a in s.names], start, end)

    def s_ImportFrom(self, s):
        start, end = self.span_of(s)
        label = "." * (s.level or 0) + (s.module or "")
        return self.mk("import-from", label, [self.alias(a) for a in s.names], start, end)

    def s_Global(self, s, kind="global-stmt"):
        return self.mk(kind, ", ".join(s.names), [], *self.span_of(s))

    def s_Nonlocal(self, s):
        return self.s_Global(s, "nonlocal-stmt")

    def s_Expr(self, s):
        start, end = self.span_of(s)
        return self.mk("expr-stmt", "", [self.expr(s.value)], start, end)

    def s_Pass(self, s):
        return self.mk("pass-stmt", "", [], *self.span_of(s))

    def s_Break(self, s):
        return self.mk("break-stmt", "", [], *self.span_of(s))

    def s_Continue(self, s):
        return self.mk("continue-stmt", "", [], *self.span_of(s))

    # -- function parameters -------------------------------------------------

    def arguments(self, a: ast.arguments, at: int) -> SyntaxNode:
        kids: list[SyntaxNode] = []
        positional = a.posonlyargs + a.args
        defaults = [None] * (len(positional) - len(a.defaults)) + list(a.defaults)
        prev_end = at
        for i, (arg, default) in enumerate(zip(positional, defaults)):
            kids.append(self.param("param", arg, default))
            prev_end = kids[-1].span.end
            if a.posonlyargs and i == len(a.posonlyargs) - 1:
                p = self.find_token(prev_end, b"/")
                kids.append(self.mk("posonly-marker", "/", [], p, p + 1))
                prev_end = p + 1
        if a.vararg is not None:
            star = self.find_token(prev_end, b"*")
            kids.append(self.param("vararg", a.vararg, None, star))
            prev_end = kids[-1].span.end
        elif a.kwonlyargs:
            star = self.find_token(prev_end, b"*")
            kids.append(self.mk("kwonly-marker", "*", [], star, star + 1))
            prev_end = star + 1
        for arg, default in zip(a.kwonlyargs, a.kw_defaults):
            kids.append(self.param("param", arg, default))
            prev_end = kids[-1].span.end
        if a.kwarg is not None:
            star = self.find_token(prev_end, b"**")
            kids.append(self.param("kwarg", a.kwarg, None, star))
        return self.seq("arguments", "", kids, at)

    def param(self, kind, arg: ast.arg, default, start=None) -> SyntaxNode:
        astart, aend = self.span_of(arg)
        name_end = astart + len(arg.arg.encode())
        ann = self.opt(arg.annotation, name_end)
        kids = [ann]
        end = aend
        if kind == "param":
            dflt = self.opt(default, ann.span.end)
            kids.append(dflt)
            end = max(end, dflt.span.end)
        return self.mk(kind, arg.arg, kids, astart if start is None else start, end)

    def keyword(self, k: ast.keyword) -> SyntaxNode:
        start, end = self.span_of(k)
        return self.mk("keyword", k.arg if k.arg is not None else "**", [self.expr(k.value)], start, end)

    # -- expressions -----------------------------------------------------------

    def expr(self, e: ast.expr) -> SyntaxNode:
        method = getattr(self, "e_" + type(e).__name__, None)
        if method is None:
            return self.opaque(e, "opaque-expr")
        return method(e)

    def e_BoolOp(self, e):
        label = "and" if isinstance(e.op, ast.And) else "or"
        return self.mk("bool-op", label, [self.expr(v) for v in e.values], *self.span_of(e))

    def e_NamedExpr(self, e):
        return self.mk("named-expr", "", [self.expr(e.target), self.expr(e.value)], *self.span_of(e))

    def e_BinOp(self, e):
        kids = [self.expr(e.left), self.expr(e.right)]
        return self.mk("bin-op", BINOP_SYMBOLS[type(e.op)], kids, *self.span_of(e))

    def e_UnaryOp(self, e):
        return self.mk("unary-op", UNARY_SYMBOLS[type(e.op)], [self.expr(e.operand)], *self.span_of(e))

    def e_Lambda(self, e):
        start, end = self.span_of(e)
        args = self.arguments(e.args, start + 6)
        return self.mk("lambda", "", [args, self.expr(e.body)], start, end)

    def e_IfExp(self, e):
        kids = [self.expr(e.body), self.expr(e.test), self.expr(e.orelse)]
        return self.mk("if-exp", "", kids, *self.span_of(e))

    def e_Dict(self, e):
        kids = []
        for k, v in zip(e.keys, e.values):
            value = self.expr(v)
            if k is None:
                prev = kids[-1].span.end if kids else self.span_of(e)[0]
                star = self.data.rfind(b"**", prev, value.span.start)
                kids.append(self.mk("dict-unpack", "", [value], star, value.span.end))
            else:
                key = self.expr(k)
                kids.append(self.mk("dict-item", "", [key, value], key.span.start, value.span.end))
        return self.mk("dict", "", kids, *self.span_of(e))

    def e_Set(self, e):
        return self.mk("set", "", [self.expr(x) for x in e.elts], *self.span_of(e))

    def _comp(self, kind, e, heads):
        kids = [self.expr(h) for h in heads]
        for g in e.generators:
            target = self.expr(g.target)
            prev = kids[-1].span.end
            kw = self.data.rfind(b"for", prev, target.span.start)
            if g.is_async:
                kw = self.data.rfind(b"async", prev, kw)
            parts = [target, self.expr(g.iter)] + [self.expr(c) for c in g.ifs]
            kids.append(self.mk("comprehension", "async" if g.is_async else "", parts,
                                kw, parts[-1].span.end))
        return self.mk(kind, "", kids, *self.span_of(e))

    def e_ListComp(self, e):
        return self._comp("list-comp", e, [e.elt])

    def e_SetComp(self, e):
        return self._comp("set-comp", e, [e.elt])

    def e_GeneratorExp(self, e):
        return self._comp("generator-exp", e, [e.elt])

    def e_DictComp(self, e):
        return self._comp("dict-comp", e, [e.key, e.value])

    def e_Await(self, e):
        return self.mk("await", "", [self.expr(e.value)], *self.span_of(e))

    def e_Yield(self, e):
        start, end = self.span_of(e)
        return self.mk("yield", "", [self.opt(e.value, start + 5)], start, end)

    def e_YieldFrom(self, e):
        return self.mk("yield-from", "", [self.expr(e.value)], *self.span_of(e))

    def e_Compare(self, e):
        label = ",".join(CMP_SYMBOLS[type(op)] for op in e.ops)
        kids = [self.expr(e.left)] + [self.expr(c) for c in e.comparators]
        return self.mk("compare", label, kids, *self.span_of(e))

    def e_Call(self, e):
        items = [self.expr(a) for a in e.args] + [self.keyword(k) for k in e.keywords]
        items.sort(key=lambda n: n.span.start)
        return self.mk("call", "", [self.expr(e.func)] + items, *self.span_of(e))

    def e_Constant(self, e):
        start, end = self.span_of(e)
        return self.mk("literal", self.data[start:end].decode("utf-8"), [], start, end)

    e_JoinedStr = e_Constant

    def e_Attribute(self, e):
        return self.mk("attribute", e.attr, [self.expr(e.value)], *self.span_of(e))

    def e_Subscript(self, e):
        return self.mk("subscript", "", [self.expr(e.value), self.expr(e.slice)], *self.span_of(e))

    def e_Starred(self, e):
        return self.mk("starred", "", [self.expr(e.value)], *self.span_of(e))

    def e_Name(self, e):
        return self.mk("name", e.id, [], *self.span_of(e))

    def e_List(self, e):
        return self.mk("list", "", [self.expr(x) for x in e.elts], *self.span_of(e))

    def e_Tuple(self, e):
        start, end = self.span_of(e)
        kids = [self.expr(x) for x in e.elts]
        parens = self.data[start:start + 1] == b"(" and (not kids or kids[0].span.start > start)
        return self.mk("tuple", "", kids, start, end, parens=parens)

    def e_Slice(self, e):
        start, end = self.span_of(e)
        lower = self.opt(e.lower, start)
        upper = self.opt(e.upper, lower.span.end)
        step = self.opt(e.step, upper.span.end)
        return self.mk("slice", "", [lower, upper, step], start, end)


def function_units(tree: SyntaxTree, path: str = "", module: bool = False) -> list[FunctionUnit]:
    """All function definitions in source order, nested ones included.

    With ``module`` set, the top-level statements come first as a unit
    named ``<module>``.
    """
    units: list[FunctionUnit] = []
    if module:
        units.append(FunctionUnit(tree.root, "<module>", path, tree))

    def visit(node, prefix):
        for c in node.children:
            if c.kind in FUNCTION_KINDS:
                name = prefix + c.label
                units.append(FunctionUnit(c, name, path, tree))
                visit(c, name + ".")
            elif c.kind == "class-def":
                visit(c, prefix + c.label + ".")
            else:
                visit(c, prefix)

    visit(tree.root, "")
    return units


def check_span_invariants(tree: SyntaxTree) -> list[str]:
    """Return a list of violated span invariants (empty when consistent)."""
    problems = []
    n_bytes = len(tree.data)
    for node in tree.root.walk():
        if node.span is None:
            continue
        if node.span.end > n_bytes:
            problems.append(f"{node!r} ends past the source")
        prev_end = node.span.start
        for c in node.children:
            if c.span is None:
                continue
            if c.span.start < prev_end or c.span.end > node.span.end:
                problems.append(f"{c!r} escapes or overlaps inside {node!r}")
            prev_end = c.span.end
        if node.kind in ("name", "literal") and node.children:
            problems.append(f"{node!r} is not a leaf")
    return problems
