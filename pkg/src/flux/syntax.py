"""Concrete syntax: one lexer, recursive-descent parsers and printers.

Covers values (``a[b[], "text"]``), types and schema files, queries,
core statements with procedure declarations, and source statements.
Keywords are case-insensitive; comments are written ``(* ... *)``.
Printers produce text that parses back to an equal syntax tree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional

from . import core_update as c
from . import query_lang as q
from . import source_lang as sl
from . import type_algebra as ta
from .data_model import Bool, Element, Text
from .errors import FluxSyntaxError


@dataclass(frozen=True)
class Span:
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}"


@dataclass
class Token:
    kind: str  # NAME, VAR, STRING, PUNCT, EOF
    value: str
    line: int
    col: int

    @property
    def span(self):
        return Span(self.line, self.col)

    def describe(self):
        if self.kind == "EOF":
            return "end of input"
        if self.kind == "STRING":
            return "string literal"
        if self.kind == "VAR":
            return "$" + self.value
        return repr(self.value)


_PUNCT = [":=", "=>", "::", "(", ")", "[", "]", "{", "}", ",", "|", "*", "+",
          "?", ";", "=", "/", ":", "."]
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")
_ESC = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


def tokenize(text: str) -> List[Token]:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k):
        nonlocal i, line, col
        for ch in text[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = text[i]
        if ch.isspace():
            advance(1)
            continue
        if text.startswith("(*", i):
            depth, sl_, sc = 0, line, col
            while True:
                if i >= n:
                    raise FluxSyntaxError("unterminated comment", sl_, sc)
                if text.startswith("(*", i):
                    depth += 1
                    advance(2)
                elif text.startswith("*)", i):
                    depth -= 1
                    advance(2)
                    if depth == 0:
                        break
                else:
                    advance(1)
            continue
        if ch == '"':
            sl_, sc = line, col
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise FluxSyntaxError("unterminated string literal", sl_, sc)
                if text[j] == "\\" and j + 1 < n:
                    buf.append(_ESC.get(text[j + 1], text[j + 1]))
                    j += 2
                    continue
                if text[j] == '"':
                    break
                buf.append(text[j])
                j += 1
            advance(j + 1 - i)
            toks.append(Token("STRING", "".join(buf), sl_, sc))
            continue
        if ch == "$":
            m = _NAME.match(text, i + 1)
            if not m:
                raise FluxSyntaxError("expected a variable name after $", line, col)
            toks.append(Token("VAR", m.group(0), line, col))
            advance(m.end() - i)
            continue
        m = _NAME.match(text, i)
        if m:
            toks.append(Token("NAME", m.group(0), line, col))
            advance(m.end() - i)
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("PUNCT", p, line, col))
                advance(len(p))
                break
        else:
            raise FluxSyntaxError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks


QUERY_KEYWORDS = {"let", "if", "then", "else", "for", "in", "return", "true", "false",
                  "transform", "by"}


class Parser:
    def __init__(self, text, tree_vars=(), enable_transform=True):
        self.toks = tokenize(text)
        self.pos = 0
        self.tree_scope = [set(tree_vars)]
        self.enable_transform = enable_transform
        self.fresh_count = 0

    # token helpers ------------------------------------------------------

    @property
    def tok(self):
        return self.toks[self.pos]

    def peek(self, k=1):
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self):
        t = self.tok
        self.pos += 1
        return t

    def error(self, expected, tok=None):
        tok = tok or self.tok
        exp = [expected] if isinstance(expected, str) else list(expected)
        raise FluxSyntaxError(f"unexpected {tok.describe()}", tok.line, tok.col, exp)

    def is_punct(self, p, tok=None):
        tok = tok or self.tok
        return tok.kind == "PUNCT" and tok.value == p

    def is_kw(self, kw, tok=None):
        tok = tok or self.tok
        return tok.kind == "NAME" and tok.value.lower() == kw

    def expect_punct(self, p):
        if not self.is_punct(p):
            self.error(repr(p))
        return self.next()

    def expect_kw(self, kw):
        if not self.is_kw(kw):
            self.error(kw.upper() if kw.isupper() else kw)
        return self.next()

    def expect_name(self, what="name"):
        if self.tok.kind != "NAME":
            self.error(what)
        return self.next().value

    def expect_var(self):
        if self.tok.kind != "VAR":
            self.error("$variable")
        return self.next().value

    def at_end(self):
        return self.tok.kind == "EOF"

    def expect_end(self):
        if not self.at_end():
            self.error("end of input")

    # variable scope -----------------------------------------------------

    def is_tree_var(self, name):
        return name in self.tree_scope[-1]

    def push_scope(self, name, tree):
        scope = set(self.tree_scope[-1])
        if tree:
            scope.add(name)
        else:
            scope.discard(name)
        self.tree_scope.append(scope)

    def pop_scope(self):
        self.tree_scope.pop()

    def fresh_tree_var(self):
        while True:
            name = f"_t{self.fresh_count}"
            self.fresh_count += 1
            if name not in self.tree_scope[-1]:
                return name

    # values ---------------------------------------------------------------

    def value_forest(self):
        if self.is_punct("(") and self.is_punct(")", self.peek()):
            self.next()
            self.next()
            return ()
        items = [self.value_tree()]
        while self.is_punct(","):
            self.next()
            items.append(self.value_tree())
        return tuple(items)

    def value_tree(self):
        tok = self.tok
        if tok.kind == "STRING":
            self.next()
            return Text(tok.value)
        if tok.kind == "NAME" and not self.is_punct("[", self.peek()):
            if tok.value == "true":
                self.next()
                return Bool(True)
            if tok.value == "false":
                self.next()
                return Bool(False)
        if tok.kind == "NAME":
            label = self.next().value
            self.expect_punct("[")
            kids = () if self.is_punct("]") else self.value_forest()
            self.expect_punct("]")
            return Element(label, kids)
        if self.is_punct("("):
            self.next()
            self.error("a tree value (parenthesized forests are not trees)", tok)
        self.error(["string literal", "true", "false", "name[...]"])

    # types ----------------------------------------------------------------

    def type_expr(self):
        branches = [self.type_seq()]
        while self.is_punct("|"):
            self.next()
            branches.append(self.type_seq())
        return ta.alt(*branches)

    def type_seq(self):
        parts = [self.type_post()]
        while self.is_punct(","):
            self.next()
            parts.append(self.type_post())
        return ta.seq(*parts)

    def type_post(self):
        t = self.type_prim()
        while self.tok.kind == "PUNCT" and self.tok.value in ("*", "+", "?"):
            op = self.next().value
            t = ta.Star(t) if op == "*" else ta.plus(t) if op == "+" else ta.opt(t)
        return t

    def type_prim(self):
        tok = self.tok
        if self.is_punct("("):
            self.next()
            if self.is_punct(")"):
                self.next()
                return ta.EMPTY
            t = self.type_expr()
            self.expect_punct(")")
            return t
        if tok.kind == "NAME":
            name = self.next().value
            if self.is_punct("["):
                self.next()
                body = ta.EMPTY if self.is_punct("]") else self.type_expr()
                self.expect_punct("]")
                return ta.Elem(name, body)
            if name == "string":
                return ta.STRING
            if name == "bool":
                return ta.BOOL
            return ta.Var(name)
        self.error(["()", "(", "string", "bool", "name[...]", "type variable"])

    def schema(self):
        """``type X = t`` lines followed by an optional ``schema t``."""
        defs = []
        doc = None
        while not self.at_end():
            if self.is_kw("type"):
                self.next()
                name = self.expect_name("type variable")
                self.expect_punct("=")
                defs.append((name, self.type_expr()))
            elif self.is_kw("schema"):
                if doc is not None:
                    self.error("end of input")
                self.next()
                doc = self.type_expr()
            else:
                self.error(["type", "schema"])
            if self.is_punct(";"):
                self.next()
        return ta.Signature(defs), doc

    # queries --------------------------------------------------------------

    def query(self):
        parts = [self.query_single()]
        while self.is_punct(","):
            self.next()
            parts.append(self.query_single())
        return q.seq_query(*parts)

    def query_single(self):
        if self.is_kw("let") and self.peek().kind == "VAR":
            self.next()
            name = self.expect_var()
            self.expect_punct(":=")
            bound = self.query_single()
            self.expect_kw("return")
            self.push_scope(name, tree=False)
            body = self.query_single()
            self.pop_scope()
            return q.Let(name, bound, body)
        if self.is_kw("for") and self.peek().kind == "VAR":
            self.next()
            name = self.expect_var()
            self.expect_kw("in")
            source = self.query_single()
            self.expect_kw("return")
            self.push_scope(name, tree=True)
            body = self.query_single()
            self.pop_scope()
            return q.For(name, source, body)
        if self.is_kw("if") and not self.is_punct("[", self.peek()):
            self.next()
            cond = self.query_single()
            self.expect_kw("then")
            then = self.query_single()
            self.expect_kw("else")
            else_ = self.query_single()
            return q.If(cond, then, else_)
        if self.is_kw("transform") and not self.is_punct("[", self.peek()):
            tok = self.next()
            if not self.enable_transform:
                raise FluxSyntaxError("transform expressions are disabled (use --enable-transform)",
                                      tok.line, tok.col)
            e = self.query_single()
            self.expect_kw("by")
            self.expect_punct("{")
            s = self.core_stmt()
            self.expect_punct("}")
            return q.Transform(e, s)
        return self.query_eq()

    def query_eq(self):
        left = self.query_postfix()
        if self.is_punct("="):
            self.next()
            return q.StrEq(left, self.query_postfix())
        return left

    def query_postfix(self):
        e = self.query_prim()
        while True:
            if self.is_punct("::"):
                self.next()
                e = q.LabelFilter(e, self.expect_name("label"))
            elif self.is_punct("/") and self.peek().kind == "NAME":
                self.next()
                name = self.next().value
                e = self.child_of(e)
                if name != "child":
                    e = q.LabelFilter(e, name)
            else:
                return e

    def child_of(self, e):
        if isinstance(e, q.TreeVar):
            return q.ChildAxis(e.name)
        v = self.fresh_tree_var()
        return q.For(v, e, q.ChildAxis(v))

    def query_prim(self):
        tok = self.tok
        if self.is_punct("("):
            self.next()
            if self.is_punct(")"):
                self.next()
                return q.EmptySeq()
            e = self.query()
            self.expect_punct(")")
            return e
        if tok.kind == "STRING":
            self.next()
            return q.StrLit(tok.value)
        if tok.kind == "VAR":
            self.next()
            if self.is_tree_var(tok.value):
                return q.TreeVar(tok.value)
            return q.ForestVar(tok.value)
        if tok.kind == "NAME":
            if self.is_punct("[", self.peek()):
                label = self.next().value
                self.next()
                body = q.EmptySeq() if self.is_punct("]") else self.query()
                self.expect_punct("]")
                return q.Elem(label, body)
            if self.is_kw("true"):
                self.next()
                return q.TrueLit()
            if self.is_kw("false"):
                self.next()
                return q.FalseLit()
        self.error(["()", "(", "string literal", "$variable", "true", "false", "name[...]",
                    "let", "for", "if"])

    # tests ------------------------------------------------------------------

    def at_test(self):
        tok = self.tok
        if self.is_punct("*"):
            return self.is_punct("?", self.peek())
        if tok.kind == "NAME":
            if tok.value.lower() in ("node", "text") and self.is_punct("(", self.peek()):
                return self.is_punct(")", self.peek(2)) and self.is_punct("?", self.peek(3))
            return self.is_punct("?", self.peek())
        return False

    def test(self):
        if self.is_punct("*"):
            self.next()
            return ta.NodeTest()
        name = self.expect_name("test")
        if name.lower() in ("node", "text") and self.is_punct("("):
            self.next()
            self.expect_punct(")")
            return ta.NodeTest() if name.lower() == "node" else ta.TextTest()
        return ta.LabelTest(name)

    # core statements ----------------------------------------------------------

    def core_script(self):
        """Procedure declarations followed by one statement."""
        decls = []
        while self.is_kw("procedure"):
            decls.append(self.proc_decl())
            if self.is_punct(";"):
                self.next()
        s = c.Skip() if self.at_end() else self.core_stmt()
        self.expect_end()
        seen = set()
        for d in decls:
            if d.name in seen:
                raise FluxSyntaxError(f"procedure {d.name} declared twice", d.span.line, d.span.column)
            seen.add(d.name)
        return c.ProcEnv(decls), s

    def proc_decl(self):
        tok = self.expect_kw("procedure")
        name = self.expect_name("procedure name")
        self.expect_punct("(")
        params = []
        while not self.is_punct(")"):
            pname = self.expect_var()
            self.expect_punct(":")
            params.append((pname, self.type_expr()))
            if not self.is_punct(","):
                break
            self.next()
        self.expect_punct(")")
        self.expect_punct(":")
        t1 = self.type_expr()
        self.expect_punct("=>")
        t2 = self.type_expr()
        self.expect_punct("=")
        self.tree_scope.append(set())
        body = self.core_unary()
        self.tree_scope.pop()
        if len({p for p, _ in params}) != len(params):
            raise FluxSyntaxError(f"procedure {name} repeats a parameter", tok.line, tok.col)
        return c.ProcDecl(name, tuple(params), t1, t2, body, span=tok.span)

    def core_stmt(self):
        parts = [self.core_unary()]
        while self.is_punct(";"):
            self.next()
            parts.append(self.core_unary())
        out = parts[-1]
        for s in reversed(parts[:-1]):
            out = c.Seq(s, out, span=s.span)
        return out

    def core_unary(self):
        tok = self.tok
        sp = tok.span
        if self.is_punct("(") or self.is_punct("{"):
            close = ")" if tok.value == "(" else "}"
            self.next()
            s = self.core_stmt()
            self.expect_punct(close)
            return s
        if self.at_test():
            phi = self.test()
            self.expect_punct("?")
            return c.TestGuard(phi, self.core_unary(), span=sp)
        if tok.kind != "NAME":
            self.error(["statement"])
        kw = tok.value.lower()
        nxt = self.peek()
        if kw in ("left", "right", "children", "iter") and self.is_punct("[", nxt):
            self.next()
            self.next()
            body = self.core_stmt()
            self.expect_punct("]")
            cls = {"left": c.Left, "right": c.Right, "children": c.Children, "iter": c.Iter}[kw]
            return cls(body, span=sp)
        if kw == "skip":
            self.next()
            return c.Skip(span=sp)
        if kw == "delete":
            self.next()
            return c.Delete(span=sp)
        if kw == "rename":
            self.next()
            return c.Rename(self.expect_name("label"), span=sp)
        if kw == "insert":
            self.next()
            return c.Insert(self.query(), span=sp)
        if kw == "if":
            self.next()
            cond = self.query_single()
            self.expect_kw("then")
            s1 = self.core_unary()
            self.expect_kw("else")
            s2 = self.core_unary()
            return c.If(cond, s1, s2, span=sp)
        if kw == "let" and nxt.kind == "VAR":
            self.next()
            name = self.expect_var()
            self.expect_punct(":=")
            e = self.query_single()
            self.expect_kw("in")
            self.push_scope(name, tree=False)
            body = self.core_unary()
            self.pop_scope()
            return c.Let(name, e, body, span=sp)
        if kw == "snapshot" and nxt.kind == "VAR":
            self.next()
            name = self.expect_var()
            self.expect_kw("in")
            self.push_scope(name, tree=False)
            body = self.core_unary()
            self.pop_scope()
            return c.Snapshot(name, body, span=sp)
        if self.is_punct("(", nxt):
            name = self.next().value
            self.next()
            args = []
            while not self.is_punct(")"):
                args.append(self.query_single())
                if not self.is_punct(","):
                    break
                self.next()
            self.expect_punct(")")
            return c.Call(name, tuple(args), span=sp)
        self.error(["skip", "delete", "rename", "insert", "if", "let", "snapshot",
                    "test?", "left[", "right[", "children[", "iter[", "procedure call"])

    # source statements --------------------------------------------------------

    def source_stmt(self):
        parts = [self.source_unary()]
        while self.is_punct(";"):
            self.next()
            if self.at_end() or self.is_punct("}"):
                break  # tolerate a trailing separator
            parts.append(self.source_unary())
        return sl.seq_source(*parts) if len(parts) > 1 else parts[0]

    def source_unary(self, no_where=False):
        """One statement; ``no_where`` is set inside an unbraced UPDATE body,
        whose trailing WHERE belongs to the enclosing UPDATE."""
        tok = self.tok
        sp = tok.span
        if self.is_punct("{"):
            self.next()
            body = self.source_stmt()
            self.expect_punct("}")
            # braces only group; Block nodes are never produced by parsing
            return body
        if self.is_kw("if"):
            self.next()
            cond = self.query_single()
            self.expect_kw("then")
            return sl.IfThen(cond, self.source_unary(no_where), span=sp)
        if self.is_kw("let"):
            self.next()
            name = self.expect_var()
            self.expect_punct(":=")
            e = self.query_single()
            self.expect_kw("in")
            self.push_scope(name, tree=False)
            body = self.source_unary(no_where)
            self.pop_scope()
            return sl.LetStmt(name, e, body, span=sp)
        upd, bound = self.source_upd()
        where = None
        if self.is_kw("where") and not no_where:
            self.next()
            for name in bound:
                self.push_scope(name, tree=False)
            where = self.query_single()
            for _ in bound:
                self.pop_scope()
        return sl.UpdStmt(upd, where, span=sp)

    def _scoped(self, bound, fn):
        for name in bound:
            self.push_scope(name, tree=False)
        try:
            return fn()
        finally:
            for _ in bound:
                self.pop_scope()

    def source_upd(self):
        tok = self.tok
        sp = tok.span
        if self.is_kw("insert"):
            self.next()
            if self.is_kw("before") or self.is_kw("after"):
                cls = sl.InsertBefore if self.next().value.lower() == "before" else sl.InsertAfter
            elif self.is_kw("as"):
                self.next()
                if self.is_kw("first"):
                    cls = sl.InsertFirstInto
                elif self.is_kw("last"):
                    cls = sl.InsertLastInto
                else:
                    self.error(["FIRST", "LAST"])
                self.next()
                self.expect_kw("into")
            elif self.is_kw("into"):
                self.next()
                cls = sl.InsertLastInto
            else:
                self.error(["BEFORE", "AFTER", "AS", "INTO"])
            path, bound = self.path()
            self.expect_kw("value")
            e = self._scoped(bound, self.query)
            return cls(path, e, span=sp), bound
        if self.is_kw("delete"):
            self.next()
            cls = sl.Delete
            if self.is_kw("from") and not self._path_ends_after_name():
                self.next()
                cls = sl.DeleteFrom
            path, bound = self.path()
            return cls(path, span=sp), bound
        if self.is_kw("rename"):
            self.next()
            path, bound = self.path()
            self.expect_kw("to")
            return sl.Rename(path, self.expect_name("label"), span=sp), bound
        if self.is_kw("replace"):
            self.next()
            cls = sl.Replace
            if self.is_kw("in") and not self._path_ends_after_name():
                self.next()
                cls = sl.ReplaceIn
            path, bound = self.path()
            self.expect_kw("with")
            e = self._scoped(bound, self.query)
            return cls(path, e, span=sp), bound
        if self.is_kw("update"):
            self.next()
            path, bound = self.path()
            self.expect_kw("by")
            body = self._scoped(bound, lambda: self.source_unary(no_where=True))
            return sl.UpdateBy(path, body, span=sp), bound
        self.error(["INSERT", "DELETE", "RENAME", "REPLACE", "UPDATE", "IF", "LET", "{"])

    def _path_ends_after_name(self):
        """True when the current keyword-like name is itself the whole path
        (``DELETE from`` deletes elements labelled ``from``)."""
        nxt = self.peek()
        if nxt.kind == "EOF" or self.is_punct(";", nxt) or self.is_punct("}", nxt):
            return True
        return nxt.kind == "NAME" and nxt.value.lower() in ("where", "with", "to", "value", "by")

    # paths ----------------------------------------------------------------------

    def path(self):
        """Parse a path; returns it with the variables it binds."""
        bound = []
        p = self._path(bound)
        return p, bound

    def _path(self, bound):
        if self.tok.kind == "VAR" and self.is_kw("as", self.peek()):
            tok = self.next()
            self.next()
            inner = self._path(bound)
            bound.append(tok.value)
            return sl.Bind(tok.value, inner, span=tok.span)
        left = self._path_seg(bound)
        while self.is_punct("/"):
            self.next()
            if self.tok.kind == "VAR" and self.is_kw("as", self.peek()):
                right = self._path(bound)
                return sl.Slash(left, right, span=left.span)
            left = sl.Slash(left, self._path_seg(bound), span=left.span)
        return left

    def _path_seg(self, bound):
        tok = self.tok
        sp = tok.span
        if self.is_punct("("):
            self.next()
            p = self._path(bound)
            self.expect_punct(")")
        elif self.is_punct("."):
            self.next()
            p = sl.Here(span=sp)
        elif self.is_punct("*"):
            self.next()
            p = sl.Step(ta.NodeTest(), span=sp)
        elif tok.kind == "NAME":
            name = self.next().value
            if name.lower() in ("node", "text") and self.is_punct("("):
                self.next()
                self.expect_punct(")")
                p = sl.Step(ta.NodeTest() if name.lower() == "node" else ta.TextTest(), span=sp)
            else:
                p = sl.Step(ta.LabelTest(name), span=sp)
        else:
            self.error(["path", ".", "label", "node()", "text()", "*", "$x AS"])
        while self.is_punct("["):
            self.next()
            cond = self._scoped(list(bound), self.query)
            self.expect_punct("]")
            p = sl.Filter(p, cond, span=sp)
        return p


# --------------------------------------------------------------- entry points


def parse_value(text):
    p = Parser(text)
    v = p.value_forest()
    p.expect_end()
    return v


def parse_type(text):
    p = Parser(text)
    t = p.type_expr()
    p.expect_end()
    return t


def parse_schema(text):
    p = Parser(text)
    return p.schema()


def parse_query(text, tree_vars=(), enable_transform=True):
    p = Parser(text, tree_vars, enable_transform)
    e = p.query()
    p.expect_end()
    return e


def parse_core(text, tree_vars=(), enable_transform=True):
    p = Parser(text, tree_vars, enable_transform)
    s = p.core_stmt()
    p.expect_end()
    return s


def parse_core_script(text, enable_transform=True, tree_vars=()):
    return Parser(text, tree_vars, enable_transform).core_script()


def parse_source(text, tree_vars=(), enable_transform=True):
    p = Parser(text, tree_vars, enable_transform)
    s = p.source_stmt()
    p.expect_end()
    return s


# ------------------------------------------------------------------ printers


def _quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'


def show_value(v) -> str:
    v = tuple(v) if not isinstance(v, (Text, Bool, Element)) else (v,)
    if not v:
        return "()"
    return ", ".join(_show_tree(t) for t in v)


def _show_tree(t):
    if isinstance(t, Text):
        return _quote(t.text)
    if isinstance(t, Bool):
        return "true" if t.value else "false"
    return f"{t.label}[{', '.join(_show_tree(x) for x in t.children)}]"


show_type = ta.show_type


def show_schema(E, doc=None) -> str:
    lines = [f"type {name} = {show_type(body)}" for name, body in E.items()]
    if doc is not None:
        lines.append(f"schema {show_type(doc)}")
    return "\n".join(lines) + "\n"


def _qprec(e):
    if isinstance(e, q.SeqComp):
        return 0
    if isinstance(e, (q.Let, q.For, q.If, q.Transform)):
        return 1
    if isinstance(e, q.StrEq):
        return 2
    if isinstance(e, (q.LabelFilter, q.ChildAxis)):
        return 3
    return 4


def show_query(e, need=0) -> str:
    s = _show_query(e)
    return f"({s})" if _qprec(e) < need else s


def _show_query(e):
    if isinstance(e, q.EmptySeq):
        return "()"
    if isinstance(e, q.SeqComp):
        return show_query(e.left, 1) + ", " + show_query(e.right, 0)
    if isinstance(e, q.Elem):
        inner = "" if isinstance(e.body, q.EmptySeq) else show_query(e.body, 0)
        return f"{e.label}[{inner}]"
    if isinstance(e, q.StrLit):
        return _quote(e.text)
    if isinstance(e, (q.ForestVar, q.TreeVar)):
        return "$" + e.name
    if isinstance(e, q.TrueLit):
        return "true"
    if isinstance(e, q.FalseLit):
        return "false"
    if isinstance(e, q.Let):
        return f"let ${e.name} := {show_query(e.bound, 1)} return {show_query(e.body, 1)}"
    if isinstance(e, q.For):
        return f"for ${e.name} in {show_query(e.source, 1)} return {show_query(e.body, 1)}"
    if isinstance(e, q.If):
        return (f"if {show_query(e.cond, 1)} then {show_query(e.then, 1)} "
                f"else {show_query(e.else_, 1)}")
    if isinstance(e, q.StrEq):
        return f"{show_query(e.left, 3)} = {show_query(e.right, 3)}"
    if isinstance(e, q.ChildAxis):
        return f"${e.name}/child"
    if isinstance(e, q.LabelFilter):
        return f"{show_query(e.expr, 3)}::{e.label}"
    if isinstance(e, q.Transform):
        return f"transform {show_query(e.expr, 1)} by {{ {show_stmt(e.stmt)} }}"
    raise TypeError(f"not a query: {e!r}")


def show_test(phi):
    return str(phi)


def show_stmt(s, unary=False) -> str:
    text = _show_stmt(s)
    if unary and isinstance(s, c.Seq):
        return f"({text})"
    return text


def _show_stmt(s):
    if isinstance(s, c.Skip):
        return "skip"
    if isinstance(s, c.Seq):
        return show_stmt(s.first, True) + "; " + show_stmt(s.second)
    if isinstance(s, c.If):
        return (f"if {show_query(s.cond, 1)} then {show_stmt(s.then, True)} "
                f"else {show_stmt(s.else_, True)}")
    if isinstance(s, c.Let):
        return f"let ${s.name} := {show_query(s.expr, 1)} in {show_stmt(s.body, True)}"
    if isinstance(s, c.Insert):
        return f"insert {show_query(s.expr, 0)}"
    if isinstance(s, c.Delete):
        return "delete"
    if isinstance(s, c.Rename):
        return f"rename {s.label}"
    if isinstance(s, c.Snapshot):
        return f"snapshot ${s.name} in {show_stmt(s.body, True)}"
    if isinstance(s, c.TestGuard):
        return f"{show_test(s.test)}?{show_stmt(s.body, True)}"
    if isinstance(s, (c.Left, c.Right, c.Children, c.Iter)):
        return f"{type(s).__name__.lower()}[{show_stmt(s.body)}]"
    if isinstance(s, c.Call):
        return f"{s.name}({', '.join(show_query(a, 1) for a in s.args)})"
    raise TypeError(f"not a statement: {s!r}")


def show_proc(d) -> str:
    params = ", ".join(f"${n}: {show_type(t)}" for n, t in d.params)
    return (f"procedure {d.name}({params}) : {show_type(d.in_type)} => {show_type(d.out_type)}"
            f" = {show_stmt(d.body, True)}")


def show_core_script(procs, s) -> str:
    lines = [show_proc(d) + ";" for d in procs]
    lines.append(show_stmt(s))
    return "\n".join(lines) + "\n"


def _show_test_path(phi):
    return str(phi)


def show_path(p, ctx="top", followed=False) -> str:
    """ctx: 'top', 'left' or 'right' of a slash, or 'seg' (under a filter).

    ``followed`` is true when more path text comes after this one; a
    binder there needs parentheses because it scopes to the end.
    """
    if isinstance(p, sl.Here):
        return "."
    if isinstance(p, sl.Step):
        return _show_test_path(p.test)
    if isinstance(p, sl.Filter):
        return f"{show_path(p.path, 'seg', True)}[{show_query(p.cond, 0)}]"
    if isinstance(p, sl.Slash):
        text = show_path(p.left, "left", True) + "/" + show_path(p.right, "right", followed)
        return f"({text})" if ctx in ("right", "seg") else text
    if isinstance(p, sl.Bind):
        text = f"${p.name} AS {show_path(p.path, 'top')}"
        return f"({text})" if followed or ctx == "seg" else text
    raise TypeError(f"not a path: {p!r}")


def show_upd(u) -> str:
    p = show_path(u.path)
    if isinstance(u, sl.InsertBefore):
        return f"INSERT BEFORE {p} VALUE {show_query(u.expr, 1)}"
    if isinstance(u, sl.InsertAfter):
        return f"INSERT AFTER {p} VALUE {show_query(u.expr, 1)}"
    if isinstance(u, sl.InsertFirstInto):
        return f"INSERT AS FIRST INTO {p} VALUE {show_query(u.expr, 1)}"
    if isinstance(u, sl.InsertLastInto):
        return f"INSERT AS LAST INTO {p} VALUE {show_query(u.expr, 1)}"
    if isinstance(u, sl.Delete):
        return f"DELETE {p}"
    if isinstance(u, sl.DeleteFrom):
        return f"DELETE FROM {p}"
    if isinstance(u, sl.Rename):
        return f"RENAME {p} TO {u.label}"
    if isinstance(u, sl.Replace):
        return f"REPLACE {p} WITH {show_query(u.expr, 1)}"
    if isinstance(u, sl.ReplaceIn):
        return f"REPLACE IN {p} WITH {show_query(u.expr, 1)}"
    if isinstance(u, sl.UpdateBy):
        body = show_source(u.body, True)
        if _has_where_tail(u.body):
            # an unbraced WHERE here would belong to this UPDATE
            body = "{ " + body + " }"
        return f"UPDATE {p} BY {body}"
    raise TypeError(f"not an update: {u!r}")


def show_source(s, unary=False) -> str:
    if isinstance(s, sl.SeqStmt):
        text = show_source(s.first, True) + "; " + show_source(s.second)
        return "{ " + text + " }" if unary else text
    if isinstance(s, sl.UpdStmt):
        text = show_upd(s.upd)
        if s.where is not None:
            text += f" WHERE {show_query(s.where, 1)}"
        return text
    if isinstance(s, sl.IfThen):
        return f"IF {show_query(s.cond, 1)} THEN {show_source(s.body, True)}"
    if isinstance(s, sl.LetStmt):
        return f"LET ${s.name} := {show_query(s.expr, 1)} IN {show_source(s.body, True)}"
    if isinstance(s, sl.Block):
        return "{ " + show_source(s.body) + " }"
    raise TypeError(f"not a source statement: {s!r}")


def _has_where_tail(s):
    """Does the unbraced text of ``s`` contain a WHERE of its own?"""
    if isinstance(s, sl.UpdStmt):
        return s.where is not None
    if isinstance(s, (sl.IfThen, sl.LetStmt)):
        return _has_where_tail(s.body)
    return False
