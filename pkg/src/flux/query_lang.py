"""The query language: syntax, big-step evaluation and typing.

Tree variables (bound by ``for``) and forest variables (bound by ``let``,
``snapshot``, path binders and procedure parameters) live in separate
namespaces; the parser decides the kind from the binding construct.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from . import type_algebra as ta
from .data_model import Bool, Element, QueryEnv, Text, as_forest, children_of, value_eq
from .errors import ConditionNotBool, FluxTypeError, SubtypeFailure, UnboundVariable


class QueryExpr:
    __slots__ = ()

    def __str__(self):
        from .syntax import show_query
        return show_query(self)


@dataclass(frozen=True)
class EmptySeq(QueryExpr):
    pass


@dataclass(frozen=True)
class SeqComp(QueryExpr):
    left: QueryExpr
    right: QueryExpr


@dataclass(frozen=True)
class Elem(QueryExpr):
    label: str
    body: QueryExpr


@dataclass(frozen=True)
class StrLit(QueryExpr):
    text: str


@dataclass(frozen=True)
class ForestVar(QueryExpr):
    name: str


@dataclass(frozen=True)
class TreeVar(QueryExpr):
    name: str


@dataclass(frozen=True)
class Let(QueryExpr):
    name: str
    bound: QueryExpr
    body: QueryExpr


@dataclass(frozen=True)
class TrueLit(QueryExpr):
    pass


@dataclass(frozen=True)
class FalseLit(QueryExpr):
    pass


@dataclass(frozen=True)
class If(QueryExpr):
    cond: QueryExpr
    then: QueryExpr
    else_: QueryExpr


@dataclass(frozen=True)
class StrEq(QueryExpr):
    left: QueryExpr
    right: QueryExpr


@dataclass(frozen=True)
class ChildAxis(QueryExpr):
    name: str


@dataclass(frozen=True)
class LabelFilter(QueryExpr):
    expr: QueryExpr
    label: str


@dataclass(frozen=True)
class For(QueryExpr):
    name: str
    source: QueryExpr
    body: QueryExpr


@dataclass(frozen=True)
class Transform(QueryExpr):
    """``transform e by { s }``: run update ``s`` on the value of ``e``."""
    expr: QueryExpr
    stmt: object


def seq_query(*es):
    if not es:
        return EmptySeq()
    out = es[-1]
    for e in reversed(es[:-1]):
        out = SeqComp(e, out)
    return out


def value_query(v):
    """A query that evaluates to the forest ``v``."""
    parts = []
    for t in as_forest(v):
        if isinstance(t, Text):
            parts.append(StrLit(t.text))
        elif isinstance(t, Bool):
            parts.append(TrueLit() if t.value else FalseLit())
        else:
            parts.append(Elem(t.label, value_query(t.children)))
    return seq_query(*parts)


def free_vars(e, bound=frozenset()):
    """Free variables as a set of ('forest'|'tree', name) pairs."""
    out = set()

    def go(x, bound):
        if isinstance(x, ForestVar):
            if ("forest", x.name) not in bound:
                out.add(("forest", x.name))
        elif isinstance(x, (TreeVar, ChildAxis)):
            if ("tree", x.name) not in bound:
                out.add(("tree", x.name))
        elif isinstance(x, SeqComp) or isinstance(x, StrEq):
            go(x.left, bound)
            go(x.right, bound)
        elif isinstance(x, Elem):
            go(x.body, bound)
        elif isinstance(x, Let):
            go(x.bound, bound)
            go(x.body, bound | {("forest", x.name)})
        elif isinstance(x, If):
            go(x.cond, bound)
            go(x.then, bound)
            go(x.else_, bound)
        elif isinstance(x, LabelFilter):
            go(x.expr, bound)
        elif isinstance(x, For):
            go(x.source, bound)
            go(x.body, bound | {("tree", x.name)})
        elif isinstance(x, Transform):
            go(x.expr, bound)
            from .core_update import stmt_free_vars
            out.update(v for v in stmt_free_vars(x.stmt) if v not in bound)

    go(e, frozenset(bound))
    return out


# ------------------------------------------------------------ evaluation


def eval_query(env: QueryEnv, e: QueryExpr, procs=None, fuel=None):
    """Evaluate ``e`` under ``env`` to a forest."""
    return _Eval(procs, fuel).run(env, e)


class _Eval:
    def __init__(self, procs, fuel):
        self.procs = procs
        self.fuel = fuel

    def run(self, env, e):
        if isinstance(e, EmptySeq):
            return ()
        if isinstance(e, SeqComp):
            return self.run(env, e.left) + self.run(env, e.right)
        if isinstance(e, Elem):
            return (Element(e.label, self.run(env, e.body)),)
        if isinstance(e, StrLit):
            return (Text(e.text),)
        if isinstance(e, TrueLit):
            return (Bool(True),)
        if isinstance(e, FalseLit):
            return (Bool(False),)
        if isinstance(e, ForestVar):
            try:
                return env.forests[e.name]
            except KeyError:
                raise UnboundVariable(e.name) from None
        if isinstance(e, TreeVar):
            return (self._tree(env, e.name),)
        if isinstance(e, ChildAxis):
            return children_of(self._tree(env, e.name))
        if isinstance(e, Let):
            return self.run(env.bind_forest(e.name, self.run(env, e.bound)), e.body)
        if isinstance(e, If):
            if self.truth(env, e.cond):
                return self.run(env, e.then)
            return self.run(env, e.else_)
        if isinstance(e, StrEq):
            return (Bool(value_eq(self.run(env, e.left), self.run(env, e.right))),)
        if isinstance(e, LabelFilter):
            return tuple(t for t in self.run(env, e.expr)
                         if isinstance(t, Element) and t.label == e.label)
        if isinstance(e, For):
            out = []
            for t in self.run(env, e.source):
                out.extend(self.run(env.bind_tree(e.name, t), e.body))
            return tuple(out)
        if isinstance(e, Transform):
            from .core_update import exec_update
            v = self.run(env, e.expr)
            return exec_update(env, v, e.stmt, self.procs,
                               fuel=self.fuel if self.fuel is not None else 10 ** 6)
        raise TypeError(f"not a query: {e!r}")

    def _tree(self, env, name):
        try:
            return env.trees[name]
        except KeyError:
            raise UnboundVariable(name) from None

    def truth(self, env, cond):
        v = self.run(env, cond)
        if len(v) == 1 and isinstance(v[0], Bool):
            return v[0].value
        raise ConditionNotBool(f"condition {cond} evaluated to a non-boolean value")


# ---------------------------------------------------------------- typing


class QueryTypeEnv:
    """Immutable typing context: forest variables map to sequence types,
    tree variables to atoms."""

    __slots__ = ("forests", "trees")

    def __init__(self, forests: Optional[Mapping] = None, trees: Optional[Mapping] = None):
        self.forests = dict(forests or {})
        self.trees = dict(trees or {})

    def bind_forest(self, name, t) -> "QueryTypeEnv":
        trees = {k: v for k, v in self.trees.items() if k != name}
        return QueryTypeEnv({**self.forests, name: t}, trees)

    def bind_tree(self, name, a) -> "QueryTypeEnv":
        if not ta.is_atom(a):
            raise ValueError("tree variables are bound to atomic types only")
        forests = {k: v for k, v in self.forests.items() if k != name}
        return QueryTypeEnv(forests, {**self.trees, name: a})

    def items(self):
        for k, v in self.forests.items():
            yield k, v
        for k, v in self.trees.items():
            yield k, v

    def __eq__(self, other):
        return (isinstance(other, QueryTypeEnv) and self.forests == other.forests
                and self.trees == other.trees)

    def __hash__(self):
        return hash((tuple(sorted(self.forests.items(), key=lambda kv: kv[0])),
                     tuple(sorted(self.trees.items(), key=lambda kv: kv[0]))))

    def __repr__(self):
        parts = [f"${k}: {v}" for k, v in self.forests.items()]
        parts += [f"${k}: {v} (tree)" for k, v in self.trees.items()]
        return "{" + ", ".join(parts) + "}"


EMPTY_ENV = QueryTypeEnv()


def label_project(t, n, E=ta.EMPTY_SIG):
    """The projection t::n keeping only the n-labelled atoms of t."""
    if isinstance(t, ta.Elem):
        return t if t.label == n else ta.EMPTY
    if isinstance(t, (ta.StringT, ta.BoolT, ta.Empty)):
        return ta.EMPTY
    if isinstance(t, ta.Star):
        return ta.Star(label_project(t.body, n, E))
    if isinstance(t, ta.Seq):
        return ta.Seq(label_project(t.left, n, E), label_project(t.right, n, E))
    if isinstance(t, ta.Alt):
        return ta.Alt(label_project(t.left, n, E), label_project(t.right, n, E))
    if isinstance(t, ta.Var):
        return label_project(E[t.name], n, E)
    raise TypeError(f"cannot project {t!r}")


def infer_query_type(gamma: QueryTypeEnv, e: QueryExpr, E=ta.EMPTY_SIG, procs=None):
    return _QueryTyper(E, procs).infer(gamma, e)


def iterate_query_type(gamma, name, t, e, E=ta.EMPTY_SIG, procs=None):
    return _QueryTyper(E, procs).iterate(gamma, name, t, e)


def check_query_type(gamma, e, expected, E=ta.EMPTY_SIG, procs=None):
    found = infer_query_type(gamma, e, E, procs)
    if not ta.subtype(found, expected, E):
        raise SubtypeFailure(found, expected, what=f"query {e} has type")
    return found


class _QueryTyper:
    def __init__(self, E, procs):
        self.E = E
        self.procs = procs

    def require(self, gamma, e, expected, rule):
        t = self.infer(gamma, e)
        if not ta.subtype(t, expected, self.E):
            raise FluxTypeError(f"{rule}: {e} has type {t}, expected {expected}",
                                expected=expected, found=t, rule=rule)
        return t

    def infer(self, gamma, e):
        if isinstance(e, EmptySeq):
            return ta.EMPTY
        if isinstance(e, StrLit):
            return ta.STRING
        if isinstance(e, (TrueLit, FalseLit)):
            return ta.BOOL
        if isinstance(e, SeqComp):
            return ta.Seq(self.infer(gamma, e.left), self.infer(gamma, e.right))
        if isinstance(e, Elem):
            return ta.Elem(e.label, self.infer(gamma, e.body))
        if isinstance(e, ForestVar):
            if e.name not in gamma.forests:
                raise FluxTypeError(f"unbound variable ${e.name}", rule="var")
            return gamma.forests[e.name]
        if isinstance(e, TreeVar):
            if e.name not in gamma.trees:
                raise FluxTypeError(f"unbound tree variable ${e.name}", rule="tree-var")
            return gamma.trees[e.name]
        if isinstance(e, Let):
            t1 = self.infer(gamma, e.bound)
            return self.infer(gamma.bind_forest(e.name, t1), e.body)
        if isinstance(e, If):
            self.require(gamma, e.cond, ta.BOOL, "if")
            return ta.Alt(self.infer(gamma, e.then), self.infer(gamma, e.else_))
        if isinstance(e, StrEq):
            self.require(gamma, e.left, ta.STRING, "string-equality")
            self.require(gamma, e.right, ta.STRING, "string-equality")
            return ta.BOOL
        if isinstance(e, ChildAxis):
            if e.name not in gamma.trees:
                raise FluxTypeError(f"unbound tree variable ${e.name}", rule="child")
            a = gamma.trees[e.name]
            if not isinstance(a, ta.Elem):
                raise FluxTypeError(f"${e.name}/child needs an element, found {a}",
                                    expected="n[...]", found=a, rule="child")
            return a.body
        if isinstance(e, LabelFilter):
            return label_project(self.infer(gamma, e.expr), e.label, self.E)
        if isinstance(e, For):
            t1 = self.infer(gamma, e.source)
            return self.iterate(gamma, e.name, t1, e.body)
        if isinstance(e, Transform):
            from .core_typing import PLURAL, infer_update_type
            t1 = self.infer(gamma, e.expr)
            return infer_update_type(gamma, PLURAL, t1, e.stmt, self.procs, self.E)
        raise TypeError(f"not a query: {e!r}")

    def iterate(self, gamma, name, t, e):
        if isinstance(t, ta.Empty):
            return ta.EMPTY
        if ta.is_atom(t):
            return self.infer(gamma.bind_tree(name, t), e)
        if isinstance(t, ta.Star):
            return ta.Star(self.iterate(gamma, name, t.body, e))
        if isinstance(t, ta.Seq):
            return ta.Seq(self.iterate(gamma, name, t.left, e), self.iterate(gamma, name, t.right, e))
        if isinstance(t, ta.Alt):
            return ta.Alt(self.iterate(gamma, name, t.left, e), self.iterate(gamma, name, t.right, e))
        if isinstance(t, ta.Var):
            return self.iterate(gamma, name, self.E[t.name], e)
        raise TypeError(f"cannot iterate over {t!r}")
