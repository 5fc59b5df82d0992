"""High-level update statements and their normalization to core statements."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from . import core_update as c
from . import query_lang as q


def _span():
    return field(default=None, compare=False, kw_only=True, repr=False)


# ------------------------------------------------------------------ paths


class SourcePath:
    __slots__ = ()

    def __str__(self):
        from .syntax import show_path
        return show_path(self)


@dataclass(frozen=True)
class Here(SourcePath):
    span: object = _span()


@dataclass(frozen=True)
class Step(SourcePath):
    test: object
    span: object = _span()


@dataclass(frozen=True)
class Slash(SourcePath):
    left: SourcePath
    right: SourcePath
    span: object = _span()


@dataclass(frozen=True)
class Filter(SourcePath):
    path: SourcePath
    cond: q.QueryExpr
    span: object = _span()


@dataclass(frozen=True)
class Bind(SourcePath):
    name: str
    path: SourcePath
    span: object = _span()


# ---------------------------------------------------------------- updates


class SourceUpd:
    __slots__ = ()


@dataclass(frozen=True)
class InsertBefore(SourceUpd):
    path: SourcePath
    expr: q.QueryExpr
    span: object = _span()


@dataclass(frozen=True)
class InsertAfter(SourceUpd):
    path: SourcePath
    expr: q.QueryExpr
    span: object = _span()


@dataclass(frozen=True)
class InsertFirstInto(SourceUpd):
    path: SourcePath
    expr: q.QueryExpr
    span: object = _span()


@dataclass(frozen=True)
class InsertLastInto(SourceUpd):
    path: SourcePath
    expr: q.QueryExpr
    span: object = _span()


@dataclass(frozen=True)
class Delete(SourceUpd):
    path: SourcePath
    span: object = _span()


@dataclass(frozen=True)
class DeleteFrom(SourceUpd):
    path: SourcePath
    span: object = _span()


@dataclass(frozen=True)
class Rename(SourceUpd):
    path: SourcePath
    label: str
    span: object = _span()


@dataclass(frozen=True)
class Replace(SourceUpd):
    path: SourcePath
    expr: q.QueryExpr
    span: object = _span()


@dataclass(frozen=True)
class ReplaceIn(SourceUpd):
    path: SourcePath
    expr: q.QueryExpr
    span: object = _span()


@dataclass(frozen=True)
class UpdateBy(SourceUpd):
    path: SourcePath
    body: "SourceStmt"
    span: object = _span()


# ------------------------------------------------------------- statements


class SourceStmt:
    __slots__ = ()

    def __str__(self):
        from .syntax import show_source
        return show_source(self)


@dataclass(frozen=True)
class UpdStmt(SourceStmt):
    upd: SourceUpd
    where: Optional[q.QueryExpr] = None
    span: object = _span()


@dataclass(frozen=True)
class IfThen(SourceStmt):
    cond: q.QueryExpr
    body: SourceStmt
    span: object = _span()


@dataclass(frozen=True)
class SeqStmt(SourceStmt):
    first: SourceStmt
    second: SourceStmt
    span: object = _span()


@dataclass(frozen=True)
class LetStmt(SourceStmt):
    name: str
    expr: q.QueryExpr
    body: SourceStmt
    span: object = _span()


@dataclass(frozen=True)
class Block(SourceStmt):
    body: SourceStmt
    span: object = _span()


def seq_source(*ss):
    out = ss[-1]
    for s in reversed(ss[:-1]):
        out = SeqStmt(s, out)
    return out


# ------------------------------------------------------------ desugaring


def desugar_where(u: SourceUpd, cond: q.QueryExpr) -> SourceUpd:
    """``u WHERE c`` abbreviates ``u`` with its path ``p`` replaced by ``p[c]``."""
    return dataclasses.replace(u, path=Filter(u.path, cond, span=getattr(u.path, "span", None)))


def upd_of(s: UpdStmt) -> SourceUpd:
    return s.upd if s.where is None else desugar_where(s.upd, s.where)


# ---------------------------------------------------------- normalization


def kernel(u: SourceUpd):
    """The core statement a simple update applies at each selected focus.

    ``UpdateBy`` has no fixed kernel; callers handle it separately.
    """
    sp = u.span
    if isinstance(u, InsertBefore):
        return c.Left(c.Insert(u.expr, span=sp), span=sp)
    if isinstance(u, InsertAfter):
        return c.Right(c.Insert(u.expr, span=sp), span=sp)
    if isinstance(u, InsertFirstInto):
        return c.Children(c.Left(c.Insert(u.expr, span=sp), span=sp), span=sp)
    if isinstance(u, InsertLastInto):
        return c.Children(c.Right(c.Insert(u.expr, span=sp), span=sp), span=sp)
    if isinstance(u, Delete):
        return c.Delete(span=sp)
    if isinstance(u, DeleteFrom):
        return c.Children(c.Delete(span=sp), span=sp)
    if isinstance(u, Rename):
        return c.Rename(u.label, span=sp)
    if isinstance(u, Replace):
        return c.Seq(c.Delete(span=sp), c.Insert(u.expr, span=sp), span=sp)
    if isinstance(u, ReplaceIn):
        return c.Children(c.Seq(c.Delete(span=sp), c.Insert(u.expr, span=sp), span=sp), span=sp)
    raise TypeError(f"no fixed kernel for {type(u).__name__}")


def normalize_path(p: SourcePath, k):
    sp = p.span
    if isinstance(p, Here):
        return k
    if isinstance(p, Slash):
        return normalize_path(p.left, normalize_path(p.right, k))
    if isinstance(p, Step):
        return c.Children(c.Iter(c.TestGuard(p.test, k, span=sp), span=sp), span=sp)
    if isinstance(p, Filter):
        return normalize_path(p.path, c.If(p.cond, k, c.Skip(span=sp), span=sp))
    if isinstance(p, Bind):
        return normalize_path(p.path, c.Snapshot(p.name, k, span=sp))
    raise TypeError(f"not a path: {p!r}")


def normalize_upd(u: SourceUpd):
    if isinstance(u, UpdateBy):
        return normalize_path(u.path, normalize_stmt(u.body))
    return normalize_path(u.path, kernel(u))


def normalize_stmt(s: SourceStmt):
    if isinstance(s, UpdStmt):
        return normalize_upd(upd_of(s))
    if isinstance(s, IfThen):
        return c.If(s.cond, normalize_stmt(s.body), c.Skip(span=s.span), span=s.span)
    if isinstance(s, SeqStmt):
        return c.Seq(normalize_stmt(s.first), normalize_stmt(s.second), span=s.span)
    if isinstance(s, LetStmt):
        return c.Let(s.name, s.expr, normalize_stmt(s.body), span=s.span)
    if isinstance(s, Block):
        return normalize_stmt(s.body)
    raise TypeError(f"not a source statement: {s!r}")
