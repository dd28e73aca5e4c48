"""Render an edited syntax tree back to source text.

Subtrees that were not edited are copied from the original bytes (with
indentation shifted when they moved to a different depth).  Edited nodes are
printed by per-kind rules, reusing original separators whenever the
neighbouring children were already adjacent before the edit.
"""

from __future__ import annotations

import ast
import bisect

from .errors import RenderError
from .syntax import SyntaxNode, SyntaxTree, FUNCTION_KINDS

# operator precedence, lowest first
NAMED_EXPR, TUPLE, YIELD, TEST, OR, AND, NOT, CMP, EXPR = range(1, 10)
BOR = EXPR
BXOR, BAND, SHIFT, ARITH, TERM, FACTOR, POWER, AWAIT, ATOM = range(10, 19)

BINOP_PREC = {
    "|": BOR, "^": BXOR, "&": BAND, "<<": SHIFT, ">>": SHIFT, "+": ARITH,
    "-": ARITH, "*": TERM, "@": TERM, "/": TERM, "%": TERM, "//": TERM,
    "**": POWER,
}

COMPOUND_KINDS = frozenset({
    "function-def", "async-function-def", "class-def", "for-stmt",
    "async-for-stmt", "while-stmt", "if-stmt", "with-stmt", "async-with-stmt",
    "try-stmt", "try-star-stmt",
})

EXPRESSION_KINDS = frozenset({
    "bool-op", "named-expr", "bin-op", "unary-op", "lambda", "if-exp", "dict",
    "set", "list-comp", "set-comp", "generator-exp", "dict-comp", "await",
    "yield", "yield-from", "compare", "call", "literal", "attribute",
    "subscript", "starred", "name", "list", "tuple", "slice", "opaque-expr",
})



def _parses_as_expression(text: str) -> bool:
    try:
        ast.parse(text.strip(), mode="eval")
    except SyntaxError:
        return False
    return True


def precedence(node: SyntaxNode, bare_tuple: bool = False) -> int:
    kind = node.kind
    if kind == "tuple":
        return ATOM if node.meta.get("parens") and not bare_tuple else TUPLE
    if kind == "named-expr":
        return NAMED_EXPR
    if kind in ("yield", "yield-from"):
        return YIELD
    if kind in ("if-exp", "lambda"):
        return TEST
    if kind == "bool-op":
        return OR if node.label == "or" else AND
    if kind == "unary-op":
        return NOT if node.label == "not" else FACTOR
    if kind == "compare":
        return CMP
    if kind == "bin-op":
        return BINOP_PREC.get(node.label, ATOM)
    if kind == "await":
        return AWAIT
    if kind == "starred":
        return EXPR
    return ATOM


def child_context(parent: SyntaxNode, index: int):
    """(minimum precedence, bare tuple allowed) for a child slot, or None."""
    kind = parent.kind
    if kind in ("expr-stmt",):
        return YIELD, True
    if kind in ("assign", "return-stmt", "yield"):
        return TUPLE, True
    if kind == "aug-assign":
        return (TEST, False) if index == 0 else (TUPLE, True)
    if kind == "ann-assign":
        return (TUPLE, True) if index == 2 else (TEST, False)
    if kind in ("for-stmt", "async-for-stmt"):
        return (TUPLE, True) if index < 2 else None
    if kind in ("while-stmt", "if-stmt", "elif-stmt"):
        return (NAMED_EXPR, False) if index == 0 else None
    if kind in ("with-item", "raise-stmt", "assert-stmt", "delete-stmt", "keyword",
                "slice", "dict-item", "list", "set", "tuple", "bases",
                "decorators", "yield-from", "param", "list-comp", "set-comp",
                "generator-exp", "dict-comp"):
        return TEST, False
    if kind == "except-handler":
        return (TEST, False) if index == 0 else None
    if kind in FUNCTION_KINDS:
        return (TEST, False) if index == 2 else None
    if kind == "call":
        return (ATOM, False) if index == 0 else (TEST, False)
    if kind in ("attribute", "await"):
        return ATOM, False
    if kind == "subscript":
        return (ATOM, False) if index == 0 else (TUPLE, True)
    if kind == "starred":
        return EXPR, False
    if kind == "dict-unpack":
        return BOR, False
    if kind == "bin-op":
        p = BINOP_PREC.get(parent.label, ATOM)
        if p == POWER:
            return (POWER + 1, False) if index == 0 else (FACTOR, False)
        return (p, False) if index == 0 else (p + 1, False)
    if kind == "compare":
        return CMP + 1, False
    if kind == "bool-op":
        return (OR if parent.label == "or" else AND) + 1, False
    if kind == "unary-op":
        return (NOT, False) if parent.label == "not" else (FACTOR, False)
    if kind == "if-exp":
        return (TEST + 1, False) if index < 2 else (TEST, False)
    if kind == "lambda":
        return (TEST, False) if index == 1 else None
    if kind == "named-expr":
        return (ATOM, False) if index == 0 else (TEST, False)
    if kind == "comprehension":
        return (TUPLE, True) if index == 0 else (OR, False)
    return None


def sp(node: SyntaxNode):
    """Source span of a node's original text, including nodes that were moved."""
    return node.span if node.span is not None else node.meta.get("moved")


def _is_compound(node: SyntaxNode) -> bool:
    if node.kind in COMPOUND_KINDS:
        return True
    return node.kind == "opaque-stmt" and "\n" in node.label.rstrip("\n")


class _Renderer:
    def __init__(self, tree: SyntaxTree, touched):
        self.tree = tree
        self.data = tree.data
        self.nl = tree.newline
        self.unit = tree.indent_unit
        self.touched = set(touched or ())
        self.dirty: set[int] = set()
        self.changed: set[int] = set()
        for n in tree.root.postorder():
            own = (sp(n) is None or n.orig is None or n.label != n.orig[0]
                   or tuple(c.id for c in n.children) != n.orig[1])
            if own:
                self.changed.add(n.id)
            if own or n.id in self.touched or any(c.id in self.dirty for c in n.children):
                self.dirty.add(n.id)

    # -- raw text ---------------------------------------------------------

    def shift(self, start: int, end: int, old: str, new: str, gap: bool = False) -> str:
        """Source bytes [start, end) with line indents rebased from old to new.

        With ``gap`` the line that starts exactly at ``end`` is rebased too,
        since the chunk then holds the indentation of the following token.
        """
        chunk = self.data[start:end]
        if old == new or b"\n" not in chunk and b"\r" not in chunk:
            return chunk.decode("utf-8")
        starts = self.tree.line_starts
        lo = bisect.bisect_right(starts, start)
        hi = (bisect.bisect_right if gap else bisect.bisect_left)(starts, end)
        old_b, new_b = old.encode(), new.encode()
        out, pos = [], start
        for li in range(lo, hi):
            ls = starts[li]
            if li in self.tree.protected_lines:
                continue
            line_end = self.data.find(b"\n", ls)
            line = self.data[ls:line_end if line_end >= 0 else len(self.data)]
            if not line.strip():
                continue
            if line.startswith(old_b):
                out.append(self.data[pos:ls])
                out.append(new_b)
                pos = ls + len(old_b)
        out.append(self.data[pos:end])
        return b"".join(out).decode("utf-8")

    def gap(self, a: SyntaxNode, b: SyntaxNode, old: str, new: str) -> str:
        return self.shift(sp(a).end, sp(b).start, old, new, gap=True)

    def adjacent(self, parent: SyntaxNode, a: SyntaxNode, b: SyntaxNode) -> bool:
        """True when a and b were neighbouring children of parent originally."""
        if parent.orig is None or sp(a) is None or sp(b) is None:
            return False
        ids = parent.orig[1]
        for i in range(len(ids) - 1):
            if ids[i] == a.id and ids[i + 1] == b.id:
                return sp(a).end <= sp(b).start
        return False

    # -- dispatch ---------------------------------------------------------

    def emit(self, node: SyntaxNode, ind: str, ctx=None) -> str:
        text, verbatim = self.emit_raw(node, ind)
        return self.wrap(node, text, verbatim, ctx)

    def emit_raw(self, node: SyntaxNode, ind: str):
        if node.id not in self.dirty:
            return self.shift(sp(node).start, sp(node).end, node.base_indent, ind), True
        if node.id not in self.changed and self._spliceable(node):
            return self.splice(node, ind), True
        method = getattr(self, "r_" + node.kind.replace("-", "_"), None)
        if method is None:
            raise RenderError(f"no printer rule for {node.kind!r}")
        return method(node, ind), False

    def wrap(self, node: SyntaxNode, text: str, verbatim: bool, ctx) -> str:
        """Parenthesize when the slot's precedence or a bare line break demands it."""
        if ctx is None or node.kind not in EXPRESSION_KINDS:
            return text
        min_prec, bare = ctx
        if node.kind == "tuple" and not verbatim:
            prec = TUPLE if text[:1] != "(" else ATOM
        else:
            prec = precedence(node)
        if prec < min_prec:
            return "(" + text + ")"
        if min_prec == ATOM and node.kind == "literal" and text.strip().isdigit():
            # `7.join` would lex as a float
            return "(" + text + ")"
        if verbatim and ("\n" in text or "\r" in text) and not _parses_as_expression(text):
            return "(" + text + ")"
        return text

    def _spliceable(self, node: SyntaxNode) -> bool:
        if sp(node) is None:
            return False
        for c in node.children:
            if c.kind == "block" and c.meta.get("inline") and any(_is_compound(s) for s in c.children):
                return False
            if c.id in self.dirty and sp(c) is not None and sp(c).start == sp(c).end:
                if not (c.kind == "arguments" and node.kind in FUNCTION_KINDS):
                    return False
        return True

    def splice(self, node: SyntaxNode, ind: str) -> str:
        out = []
        pos = sp(node).start
        base = node.base_indent
        for i, c in enumerate(node.children):
            if c.kind == "block":
                child_ind = self.block_indent(node, c, ind)
            else:
                child_ind = ind
            out.append(self.shift(pos, sp(c).start, base, ind, gap=True))
            text, verbatim = self.emit_raw(c, child_ind)
            already = out[-1].rstrip().endswith("(")
            if c.id in self.changed and not already:
                text = self.wrap(c, text, verbatim, child_context(node, i))
            out.append(text)
            pos = sp(c).end
        out.append(self.shift(pos, sp(node).end, base, ind))
        return "".join(out)

    def child(self, node: SyntaxNode, i: int, ind: str) -> str:
        return self.emit(node.children[i], ind, child_context(node, i))

    def join_children(self, node: SyntaxNode, ind: str, sep: str, start: int = 0,
                      end: int | None = None) -> str:
        kids = node.children[start:end]
        parts = []
        for j, c in enumerate(kids):
            i = start + j
            if j:
                prev = kids[j - 1]
                if self.adjacent(node, prev, c) and node.label == node.orig[0]:
                    parts.append(self.gap(prev, c, node.base_indent, ind))
                else:
                    parts.append(sep)
            parts.append(self.child(node, i, ind))
        return "".join(parts)

    # -- blocks and suites ------------------------------------------------

    def block_indent(self, parent: SyntaxNode, block: SyntaxNode, ind: str) -> str:
        if sp(block) is not None and sp(parent) is not None and not block.meta.get("inline"):
            pb, bb = parent.base_indent, block.base_indent
            if bb.startswith(pb) and len(bb) > len(pb):
                return ind + bb[len(pb):]
        return ind + self.unit

    def suite(self, parent: SyntaxNode, block: SyntaxNode, ind: str) -> str:
        inline = (block.meta.get("inline") and sp(block) is not None
                  and block.children and not any(_is_compound(s) for s in block.children))
        colon = block.meta.get("colon")
        if inline:
            bind = ind
            head = self.shift(colon, sp(block).start, block.base_indent, bind) if colon is not None else ": "
        else:
            bind = self.block_indent(parent, block, ind)
            if sp(block) is not None and colon is not None and not block.meta.get("inline"):
                head = self.shift(colon, sp(block).start, block.base_indent, bind)
            else:
                head = ":" + self.nl + bind
        return head + self.statements(block, bind, bool(inline))

    def statements(self, block: SyntaxNode, bind: str, inline: bool = False) -> str:
        if block.id not in self.dirty:
            return self.shift(sp(block).start, sp(block).end, block.base_indent, bind)
        if not block.children:
            return "pass"
        parts = []
        prev = None
        for s in block.children:
            if prev is not None:
                parts.append(self.separator(block, prev, s, bind, inline))
            parts.append(self.emit(s, bind))
            prev = s
        return "".join(parts)

    def trailing(self, block, stmt) -> str:
        """The same-line comment after ``stmt`` if it was not last in ``block``."""
        if block.orig is None or sp(stmt) is None or sp(block) is None:
            return ""
        ids = block.orig[1]
        if stmt.id not in ids or ids[-1] == stmt.id:
            return ""
        end = self.data.find(b"\n", sp(stmt).end, sp(block).end)
        chunk = self.data[sp(stmt).end:end if end >= 0 else sp(stmt).end].rstrip(b"\r")
        if chunk.strip().startswith(b"#"):
            return chunk.decode("utf-8")
        return ""

    def lead_lines(self, cur, bind):
        """Own-line comments and blank lines before ``cur``, from its first newline on."""
        lead = cur.meta.get("lead") if sp(cur) is not None else None
        if lead is None:
            return None
        k = self.data.find(b"\n", lead, sp(cur).start)
        if k < 0:
            return None
        return self.shift(k, sp(cur).start, cur.base_indent, bind, gap=True)

    def separator(self, block, prev, cur, bind, inline) -> str:
        sep = None
        if self.adjacent(block, prev, cur):
            sep = self.gap(prev, cur, block.base_indent, bind)
        elif (rest := self.lead_lines(cur, bind)) is not None:
            sep = self.trailing(block, prev) + rest
        elif sp(cur) is not None and cur.meta.get("lead") is not None:
            sep = self.shift(cur.meta["lead"], sp(cur).start, cur.base_indent, bind, gap=True)
        if sep is not None and inline and ("\n" in sep or "\r" in sep):
            sep = None
        if sep is not None and "\n" not in sep and "\r" not in sep:
            if _is_compound(cur) or _is_compound(prev) or not inline and ";" not in sep:
                sep = None
        if sep is None:
            sep = "; " if inline else self.nl + bind
        return sep

    def r_module(self, node: SyntaxNode, ind: str) -> str:
        data = self.data
        body = node.meta.get("body")
        if body is not None:
            prefix = data[:body[0]].decode("utf-8")
            suffix = data[body[1]:].decode("utf-8")
            if not node.children:
                return prefix + suffix.lstrip(" \t;\r\n")
        else:
            prefix = data.decode("utf-8")
            if prefix and not prefix.endswith(("\n", "\r")):
                prefix += self.nl
            suffix = self.nl if node.children else ""
        return prefix + self.statements_module(node) + suffix

    def statements_module(self, node: SyntaxNode) -> str:
        parts = []
        prev = None
        for s in node.children:
            if prev is not None:
                parts.append(self.separator(node, prev, s, "", False))
            parts.append(self.emit(s, ""))
            prev = s
        return "".join(parts)

    def r_block(self, node: SyntaxNode, ind: str) -> str:
        return self.statements(node, ind, bool(node.meta.get("inline")))

    # -- statements -------------------------------------------------------

    def decorators(self, node: SyntaxNode, ind: str) -> str:
        deco = node.children[0]
        if not deco.children:
            return ""
        return self.emit(deco, ind) + self.nl + ind

    def r_decorators(self, node, ind):
        parts = []
        for i, c in enumerate(node.children):
            if i:
                prev = node.children[i - 1]
                parts.append(self.gap(prev, c, node.base_indent, ind)
                             if self.adjacent(node, prev, c) else self.nl + ind + "@")
            else:
                parts.append("@")
            parts.append(self.child(node, i, ind))
        return "".join(parts)

    def r_function_def(self, node, ind, prefix="def "):
        deco, args, returns, body = node.children
        head = self.decorators(node, ind) + prefix + node.label + "(" + self.emit(args, ind) + ")"
        if returns.kind != "empty":
            head += " -> " + self.child(node, 2, ind)
        return head + self.suite(node, body, ind)

    def r_async_function_def(self, node, ind):
        return self.r_function_def(node, ind, "async def ")

    def r_class_def(self, node, ind):
        deco, bases, body = node.children
        head = self.decorators(node, ind) + "class " + node.label
        if bases.children:
            head += "(" + self.emit(bases, ind) + ")"
        return head + self.suite(node, body, ind)

    def r_bases(self, node, ind):
        return self.join_children(node, ind, ", ")

    def r_return_stmt(self, node, ind):
        v = node.children[0]
        return "return" if v.kind == "empty" else "return " + self.child(node, 0, ind)

    def r_delete_stmt(self, node, ind):
        return "del " + self.join_children(node, ind, ", ")

    def r_assign(self, node, ind):
        return self.join_children(node, ind, " = ")

    def r_aug_assign(self, node, ind):
        return self.child(node, 0, ind) + " " + node.label + " " + self.child(node, 1, ind)

    def r_ann_assign(self, node, ind):
        text = self.child(node, 0, ind) + ": " + self.child(node, 1, ind)
        if node.children[2].kind != "empty":
            text += " = " + self.child(node, 2, ind)
        return text

    def _else(self, node, i, ind, keyword="else") -> str:
        c = node.children[i]
        if c.kind == "empty":
            return ""
        prev = node.children[i - 1]
        if c.kind == "elif-stmt":
            sep = self.gap(prev, c, node.base_indent, ind) if self.adjacent(node, prev, c) else self.nl + ind
            return sep + self.emit(c, ind)
        colon = c.meta.get("colon")
        if self.adjacent(node, prev, c) and colon is not None:
            return self.shift(sp(prev).end, colon, node.base_indent, ind) + self.suite(node, c, ind)
        return self.nl + ind + keyword + self.suite(node, c, ind)

    def r_for_stmt(self, node, ind, prefix="for "):
        head = prefix + self.child(node, 0, ind) + " in " + self.child(node, 1, ind)
        return head + self.suite(node, node.children[2], ind) + self._else(node, 3, ind)

    def r_async_for_stmt(self, node, ind):
        return self.r_for_stmt(node, ind, "async for ")

    def r_while_stmt(self, node, ind):
        head = "while " + self.child(node, 0, ind)
        return head + self.suite(node, node.children[1], ind) + self._else(node, 2, ind)

    def r_if_stmt(self, node, ind, keyword="if "):
        head = keyword + self.child(node, 0, ind)
        return head + self.suite(node, node.children[1], ind) + self._else(node, 2, ind)

    def r_elif_stmt(self, node, ind):
        return self.r_if_stmt(node, ind, "elif ")

    def r_with_stmt(self, node, ind, prefix="with "):
        items = self.join_children(node, ind, ", ", 0, -1)
        return prefix + items + self.suite(node, node.children[-1], ind)

    def r_async_with_stmt(self, node, ind):
        return self.r_with_stmt(node, ind, "async with ")

    def r_with_item(self, node, ind):
        text = self.child(node, 0, ind)
        if node.children[1].kind != "empty":
            text += " as " + self.child(node, 1, ind)
        return text

    def r_raise_stmt(self, node, ind):
        exc, cause = node.children
        text = "raise"
        if exc.kind != "empty":
            text += " " + self.child(node, 0, ind)
        if cause.kind != "empty":
            text += " from " + self.child(node, 1, ind)
        return text

    def r_try_stmt(self, node, ind):
        body, handlers, orelse, final = node.children
        text = "try" + self.suite(node, body, ind)
        if handlers.children:
            sep = self.gap(body, handlers, node.base_indent, ind) if self.adjacent(node, body, handlers) else self.nl + ind
            text += sep + self.emit(handlers, ind)
        text += self._else(node, 2, ind)
        if final.kind != "empty":
            prev = orelse if orelse.kind != "empty" else handlers
            colon = final.meta.get("colon")
            if self.adjacent(node, prev, final) and colon is not None and prev.children:
                text += self.shift(sp(prev).end, colon, node.base_indent, ind) + self.suite(node, final, ind)
            else:
                text += self.nl + ind + "finally" + self.suite(node, final, ind)
        return text

    r_try_star_stmt = r_try_stmt

    def r_handlers(self, node, ind):
        return self.join_children(node, ind, self.nl + ind)

    def r_except_handler(self, node, ind):
        typ, body = node.children
        star = node.parent is not None and node.parent.parent is not None \
            and node.parent.parent.kind == "try-star-stmt"
        text = "except*" if star else "except"
        if typ.kind != "empty":
            text += " " + self.child(node, 0, ind)
        if node.label:
            text += " as " + node.label
        return text + self.suite(node, body, ind)

    def r_assert_stmt(self, node, ind):
        text = "assert " + self.child(node, 0, ind)
        if node.children[1].kind != "empty":
            text += ", " + self.child(node, 1, ind)
        return text

    def r_import_stmt(self, node, ind):
        return "import " + self.join_children(node, ind, ", ")

    def r_import_from(self, node, ind):
        return "from " + node.label + " import " + self.join_children(node, ind, ", ")

    def r_alias(self, node, ind):
        return node.label

    def r_global_stmt(self, node, ind):
        return "global " + node.label

    def r_nonlocal_stmt(self, node, ind):
        return "nonlocal " + node.label

    def r_expr_stmt(self, node, ind):
        return self.child(node, 0, ind)

    def r_pass_stmt(self, node, ind):
        return "pass"

    def r_break_stmt(self, node, ind):
        return "break"

    def r_continue_stmt(self, node, ind):
        return "continue"

    def r_opaque_stmt(self, node, ind):
        lines = node.label.splitlines(keepends=True)
        return "".join(lines[:1] + [ind + ln if ln.strip() else ln for ln in lines[1:]])

    # -- parameters ---------------------------------------------------------

    def r_arguments(self, node, ind):
        return self.join_children(node, ind, ", ")

    def r_param(self, node, ind, prefix=""):
        text = prefix + node.label
        ann = node.children[0]
        if ann.kind != "empty":
            text += ": " + self.child(node, 0, ind)
        if len(node.children) > 1 and node.children[1].kind != "empty":
            text += (" = " if ann.kind != "empty" else "=") + self.child(node, 1, ind)
        return text

    def r_vararg(self, node, ind):
        return self.r_param(node, ind, "*")

    def r_kwarg(self, node, ind):
        return self.r_param(node, ind, "**")

    def r_posonly_marker(self, node, ind):
        return "/"

    def r_kwonly_marker(self, node, ind):
        return "*"

    # -- expressions -------------------------------------------------------

    def r_empty(self, node, ind):
        return ""

    def r_name(self, node, ind):
        return node.label

    r_literal = r_name
    r_opaque_expr = r_name

    def r_attribute(self, node, ind):
        return self.child(node, 0, ind) + "." + node.label

    def r_call(self, node, ind):
        func = self.child(node, 0, ind)
        args = node.children[1:]
        if len(args) == 1 and args[0].kind == "generator-exp":
            text = self.emit(args[0], ind)
            if text.startswith("("):
                return func + text
        return func + "(" + self.join_children(node, ind, ", ", 1) + ")"

    def r_keyword(self, node, ind):
        value = self.child(node, 0, ind)
        return "**" + value if node.label == "**" else node.label + "=" + value

    def r_starred(self, node, ind):
        return "*" + self.child(node, 0, ind)

    def r_subscript(self, node, ind):
        return self.child(node, 0, ind) + "[" + self.child(node, 1, ind) + "]"

    def r_slice(self, node, ind):
        lower, upper, step = (self.child(node, i, ind) for i in range(3))
        text = lower + ":" + upper
        if node.children[2].kind != "empty":
            text += ":" + step
        return text

    def r_bin_op(self, node, ind):
        return self.child(node, 0, ind) + " " + node.label + " " + self.child(node, 1, ind)

    def r_unary_op(self, node, ind):
        operand = self.child(node, 0, ind)
        return "not " + operand if node.label == "not" else node.label + operand

    def r_bool_op(self, node, ind):
        return self.join_children(node, ind, f" {node.label} ")

    def r_compare(self, node, ind):
        ops = node.label.split(",")
        parts = [self.child(node, 0, ind)]
        for i, op in enumerate(ops, start=1):
            if i < len(node.children):
                parts.append(f" {op} " + self.child(node, i, ind))
        return "".join(parts)

    def r_if_exp(self, node, ind):
        body, test, orelse = (self.child(node, i, ind) for i in range(3))
        return f"{body} if {test} else {orelse}"

    def r_lambda(self, node, ind):
        args = self.emit(node.children[0], ind)
        return "lambda" + (" " + args if args else "") + ": " + self.child(node, 1, ind)

    def r_named_expr(self, node, ind):
        return self.child(node, 0, ind) + " := " + self.child(node, 1, ind)

    def r_dict(self, node, ind):
        return "{" + self.join_children(node, ind, ", ") + "}"

    def r_dict_item(self, node, ind):
        return self.child(node, 0, ind) + ": " + self.child(node, 1, ind)

    def r_dict_unpack(self, node, ind):
        return "**" + self.child(node, 0, ind)

    def r_set(self, node, ind):
        if not node.children:
            return "set()"
        return "{" + self.join_children(node, ind, ", ") + "}"

    def r_list(self, node, ind):
        return "[" + self.join_children(node, ind, ", ") + "]"

    def r_tuple(self, node, ind):
        inner = self.join_children(node, ind, ", ")
        if len(node.children) == 1:
            inner += ","
        ctx = child_context(node.parent, node.index_in_parent()) if node.parent else None
        if ctx and ctx[1] and node.children:
            return inner
        return "(" + inner + ")"

    def _comp(self, node, ind, heads, open_, close):
        parts = [self.join_children(node, ind, ": ", 0, heads)]
        for i in range(heads, len(node.children)):
            parts.append(" " + self.emit(node.children[i], ind))
        return open_ + "".join(parts) + close

    def r_list_comp(self, node, ind):
        return self._comp(node, ind, 1, "[", "]")

    def r_set_comp(self, node, ind):
        return self._comp(node, ind, 1, "{", "}")

    def r_generator_exp(self, node, ind):
        return self._comp(node, ind, 1, "(", ")")

    def r_dict_comp(self, node, ind):
        return self._comp(node, ind, 2, "{", "}")

    def r_comprehension(self, node, ind):
        text = ("async " if node.label else "") + "for " + self.child(node, 0, ind)
        text += " in " + self.child(node, 1, ind)
        for i in range(2, len(node.children)):
            text += " if " + self.child(node, i, ind)
        return text

    def r_await(self, node, ind):
        return "await " + self.child(node, 0, ind)

    def r_yield(self, node, ind):
        v = node.children[0]
        return "yield" if v.kind == "empty" else "yield " + self.child(node, 0, ind)

    def r_yield_from(self, node, ind):
        return "yield from " + self.child(node, 0, ind)


def render(tree: SyntaxTree, original_source: str | None = None, touched=None) -> str:
    """Print ``tree``; untouched regions are copied from the original bytes."""
    if original_source is not None and original_source != tree.source:
        raise RenderError("tree does not derive from the given source")
    r = _Renderer(tree, touched)
    if tree.root.id not in r.dirty:
        return tree.source
    return r.emit(tree.root, "")
