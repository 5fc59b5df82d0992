"""Core update statements and their big-step interpreter."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

from . import query_lang as q
from .data_model import DOCUMENT_LABEL, Bool, Element, QueryEnv, as_forest
from .errors import ConditionNotBool, FuelExhausted, Stuck, UnboundProcedure
from .type_algebra import test_member

DEFAULT_FUEL = 10 ** 6


class Statement:
    __slots__ = ()

    def __str__(self):
        from .syntax import show_stmt
        return show_stmt(self)


def _span():
    return field(default=None, compare=False, kw_only=True, repr=False)


@dataclass(frozen=True)
class Skip(Statement):
    span: object = _span()


@dataclass(frozen=True)
class Seq(Statement):
    first: Statement
    second: Statement
    span: object = _span()


@dataclass(frozen=True)
class If(Statement):
    cond: q.QueryExpr
    then: Statement
    else_: Statement
    span: object = _span()


@dataclass(frozen=True)
class Let(Statement):
    name: str
    expr: q.QueryExpr
    body: Statement
    span: object = _span()


@dataclass(frozen=True)
class Insert(Statement):
    expr: q.QueryExpr
    span: object = _span()


@dataclass(frozen=True)
class Delete(Statement):
    span: object = _span()


@dataclass(frozen=True)
class Rename(Statement):
    label: str
    span: object = _span()


@dataclass(frozen=True)
class Snapshot(Statement):
    name: str
    body: Statement
    span: object = _span()


@dataclass(frozen=True)
class TestGuard(Statement):
    test: object
    body: Statement
    span: object = _span()

    __test__ = False


@dataclass(frozen=True)
class Left(Statement):
    body: Statement
    span: object = _span()


@dataclass(frozen=True)
class Right(Statement):
    body: Statement
    span: object = _span()


@dataclass(frozen=True)
class Children(Statement):
    body: Statement
    span: object = _span()


@dataclass(frozen=True)
class Iter(Statement):
    body: Statement
    span: object = _span()


@dataclass(frozen=True)
class Call(Statement):
    name: str
    args: Tuple[q.QueryExpr, ...] = ()
    span: object = _span()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class ProcDecl:
    name: str
    params: Tuple[Tuple[str, object], ...]
    in_type: object
    out_type: object
    body: Statement
    span: object = _span()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(tuple(p) for p in self.params))
        names = [p[0] for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError(f"procedure {self.name} repeats a parameter name")


class ProcEnv:
    """Immutable map from procedure names to declarations."""

    def __init__(self, decls=()):
        self.decls = {}
        for d in decls.values() if isinstance(decls, Mapping) else decls:
            if d.name in self.decls:
                raise ValueError(f"procedure {d.name} declared twice")
            self.decls[d.name] = d

    def get(self, name) -> Optional[ProcDecl]:
        return self.decls.get(name)

    def __contains__(self, name):
        return name in self.decls

    def __iter__(self):
        return iter(self.decls.values())

    def __len__(self):
        return len(self.decls)


EMPTY_PROCS = ProcEnv()


def seq_stmt(*ss):
    if not ss:
        return Skip()
    out = ss[-1]
    for s in reversed(ss[:-1]):
        out = Seq(s, out)
    return out


# ----------------------------------------------------- generic traversal

_STMT_FIELDS = {
    Skip: (), Delete: (), Rename: (), Insert: (), Call: (),
    Seq: ("first", "second"), If: ("then", "else_"), Let: ("body",),
    Snapshot: ("body",), TestGuard: ("body",), Left: ("body",),
    Right: ("body",), Children: ("body",), Iter: ("body",),
}


def sub_stmts(s) -> tuple:
    return tuple(getattr(s, f) for f in _STMT_FIELDS[type(s)])


def with_subs(s, subs):
    names = _STMT_FIELDS[type(s)]
    if not names:
        return s
    return dataclasses.replace(s, **dict(zip(names, subs)))


def stmt_size(s) -> int:
    return 1 + sum(stmt_size(c) for c in sub_stmts(s))


def queries_of(s):
    if isinstance(s, If):
        return (s.cond,)
    if isinstance(s, (Let,)):
        return (s.expr,)
    if isinstance(s, Insert):
        return (s.expr,)
    if isinstance(s, Call):
        return s.args
    return ()


def stmt_free_vars(s, bound=frozenset()):
    out = set()
    for e in queries_of(s):
        out |= q.free_vars(e, bound)
    if isinstance(s, (Let, Snapshot)):
        bound = bound | {("forest", s.name)}
    for c in sub_stmts(s):
        out |= stmt_free_vars(c, bound)
    return out


def strip_spans(s):
    subs = tuple(strip_spans(c) for c in sub_stmts(s))
    s = with_subs(s, subs)
    return dataclasses.replace(s, span=None) if s.span is not None else s


# ----------------------------------------------------------- interpreter


def exec_update(env: QueryEnv, v, s: Statement, procs: Optional[ProcEnv] = None,
                fuel: int = DEFAULT_FUEL, reverse_iter: bool = False):
    """Run ``s`` on focus ``v``; returns the updated forest."""
    return _Interp(procs or EMPTY_PROCS, fuel, reverse_iter).run(env, as_forest(v), s, ())


class _Interp:
    def __init__(self, procs, fuel, reverse_iter):
        self.procs = procs
        self.fuel = fuel
        self.left = fuel
        self.reverse_iter = reverse_iter

    def query(self, env, e):
        return q.eval_query(env, e, self.procs, self.fuel)

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise FuelExhausted(self.fuel)

    def single(self, v, what, path, s):
        if len(v) != 1:
            raise Stuck(f"{what} needs a single tree but the focus has {len(v)} items", path, s.span)
        return v[0]

    def run(self, env, v, s, path):
        self.tick()
        if isinstance(s, Skip):
            return v
        if isinstance(s, Seq):
            return self.run(env, self.run(env, v, s.first, path), s.second, path)
        if isinstance(s, If):
            c = self.query(env, s.cond)
            if len(c) != 1 or not isinstance(c[0], Bool):
                raise ConditionNotBool(f"condition {s.cond} is not a boolean", s.span)
            return self.run(env, v, s.then if c[0].value else s.else_, path)
        if isinstance(s, Let):
            return self.run(env.bind_forest(s.name, self.query(env, s.expr)), v, s.body, path)
        if isinstance(s, Insert):
            if v:
                raise Stuck("insert needs an empty focus", path, s.span)
            return self.query(env, s.expr)
        if isinstance(s, Delete):
            return ()
        if isinstance(s, Rename):
            t = self.single(v, "rename", path, s)
            if not isinstance(t, Element):
                raise Stuck("rename needs an element", path, s.span)
            return (Element(s.label, t.children),)
        if isinstance(s, Snapshot):
            return self.run(env.bind_forest(s.name, v), v, s.body, path)
        if isinstance(s, TestGuard):
            t = self.single(v, f"test {s.test}", path, s)
            if test_member(t, s.test):
                return self.run(env, v, s.body, path)
            return v
        if isinstance(s, Children):
            t = self.single(v, "children", path, s)
            if not isinstance(t, Element):
                raise Stuck("children needs an element", path, s.span)
            return (Element(t.label, self.run(env, t.children, s.body, path)),)
        if isinstance(s, Left):
            return self.run(env, (), s.body, path) + v
        if isinstance(s, Right):
            return v + self.run(env, (), s.body, path)
        if isinstance(s, Iter):
            idx = range(len(v) - 1, -1, -1) if self.reverse_iter else range(len(v))
            parts = [None] * len(v)
            for i in idx:
                parts[i] = self.run(env, (v[i],), s.body, path + (i,))
            return tuple(t for part in parts for t in part)
        if isinstance(s, Call):
            decl = self.procs.get(s.name)
            if decl is None:
                raise UnboundProcedure(s.name, s.span)
            if len(decl.params) != len(s.args):
                raise Stuck(f"procedure {s.name} expects {len(decl.params)} arguments", path, s.span)
            vals = [self.query(env, a) for a in s.args]
            inner = env
            for (name, _), val in zip(decl.params, vals):
                inner = inner.bind_forest(name, val)
            return self.run(inner, v, decl.body, path)
        raise TypeError(f"not a statement: {s!r}")


def run_document(doc, s: Statement, procs: Optional[ProcEnv] = None, fuel: int = DEFAULT_FUEL,
                 env: Optional[QueryEnv] = None, reverse_iter: bool = False):
    """Run a script on a whole document.

    The document forest is wrapped in a virtual root so that top-level
    trees can be reached by a path step; the root is removed afterwards.
    """
    root = Element(DOCUMENT_LABEL, as_forest(doc))
    out = exec_update(env or QueryEnv(), root, s, procs, fuel, reverse_iter)
    if len(out) != 1 or not isinstance(out[0], Element) or out[0].label != DOCUMENT_LABEL:
        raise Stuck("the script did not leave a single document behind")
    return out[0].children
