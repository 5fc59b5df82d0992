"""Type inference and checking for core update statements.

The judgment is algorithmic: it synthesizes an output type from the
input type and only falls back on subtyping where a rule demands a
particular shape (booleans, an empty focus, procedure signatures).

Constructs that inspect a single tree (tests, ``children``, ``rename``)
require an input type that denotes single trees only; unions of
same-labelled elements are merged first (see ``atomize``). Everything
else accepts any input type.
"""
from __future__ import annotations

from enum import Enum

from . import core_update as c
from . import query_lang as q
from . import type_algebra as ta
from .errors import ArityError, FluxTypeError, SubtypeFailure, UnknownProcedure


class Arity(Enum):
    SINGULAR = "1"
    PLURAL = "*"

    def __str__(self):
        return self.value


SINGULAR = Arity.SINGULAR
PLURAL = Arity.PLURAL


def infer_update_type(gamma, a, t, s, procs=None, E=ta.EMPTY_SIG):
    return _UpdateTyper(procs or c.EMPTY_PROCS, E).infer(gamma, a, t, s)


def infer_iter_type(gamma, t, s, procs=None, E=ta.EMPTY_SIG):
    return _UpdateTyper(procs or c.EMPTY_PROCS, E).iterate(gamma, t, s)


def check_update_type(gamma, a, t, s, expected, procs=None, E=ta.EMPTY_SIG):
    found = infer_update_type(gamma, a, t, s, procs, E)
    if not ta.subtype(found, expected, E):
        raise SubtypeFailure(found, expected, getattr(s, "span", None), what="output type")
    return found


def check_declarations(procs, E=ta.EMPTY_SIG):
    """Check every procedure body from its input to its output type."""
    for d in procs:
        try:
            for _, pt in d.params:
                ta.check_type(pt, E)
            ta.check_type(d.in_type, E)
            ta.check_type(d.out_type, E)
            gamma = q.QueryTypeEnv({name: pt for name, pt in d.params})
            check_update_type(gamma, PLURAL, d.in_type, d.body, d.out_type, procs, E)
        except FluxTypeError as err:
            err.message = f"in procedure {d.name}: {err.message}"
            err.args = (err.message,)
            if err.span is None:
                err.span = d.span
            raise


def single_tree_type(t, E, what, span=None):
    """The atom equal to ``t`` or an ArityError."""
    a = ta.atomize(t, E)
    if a is None:
        raise ArityError(f"{what} needs a single tree, but the input type {t} is not atomic",
                         span, expected="an atomic type", found=t, rule=what)
    return a


class _UpdateTyper:
    def __init__(self, procs, E):
        self.procs = procs
        self.E = E

    def query(self, gamma, e):
        return q.infer_query_type(gamma, e, self.E, self.procs)

    def infer(self, gamma, a, t, s):
        E = self.E
        if isinstance(s, c.Skip):
            return t
        if isinstance(s, c.Seq):
            return self.infer(gamma, a, self.infer(gamma, a, t, s.first), s.second)
        if isinstance(s, c.If):
            ct = self.query(gamma, s.cond)
            if not ta.subtype(ct, ta.BOOL, E):
                raise FluxTypeError(f"condition {s.cond} has type {ct}, expected bool", s.span,
                                    expected=ta.BOOL, found=ct, rule="if")
            return ta.Alt(self.infer(gamma, a, t, s.then), self.infer(gamma, a, t, s.else_))
        if isinstance(s, c.Let):
            return self.infer(gamma.bind_forest(s.name, self.query(gamma, s.expr)), a, t, s.body)
        if isinstance(s, c.Insert):
            if not ta.subtype(t, ta.EMPTY, E):
                raise FluxTypeError(f"insert needs an empty focus, but the input type is {t}",
                                    s.span, expected=ta.EMPTY, found=t, rule="insert")
            return self.query(gamma, s.expr)
        if isinstance(s, c.Delete):
            return ta.EMPTY
        if isinstance(s, c.Rename):
            at = single_tree_type(t, E, "rename", s.span)
            if not isinstance(at, ta.Elem):
                raise FluxTypeError(f"rename needs an element, found {at}", s.span,
                                    expected="n[...]", found=at, rule="rename")
            return ta.Elem(s.label, at.body)
        if isinstance(s, c.Snapshot):
            return self.infer(gamma.bind_forest(s.name, t), a, t, s.body)
        if isinstance(s, c.TestGuard):
            at = single_tree_type(t, E, f"test {s.test}", s.span)
            if ta.test_match(at, s.test):
                return self.infer(gamma, SINGULAR, at, s.body)
            return at
        if isinstance(s, c.Children):
            at = single_tree_type(t, E, "children", s.span)
            if not isinstance(at, ta.Elem):
                raise FluxTypeError(f"children needs an element, found {at}", s.span,
                                    expected="n[...]", found=at, rule="children")
            return ta.Elem(at.label, self.infer(gamma, PLURAL, at.body, s.body))
        if isinstance(s, c.Left):
            return ta.Seq(self.infer(gamma, PLURAL, ta.EMPTY, s.body), t)
        if isinstance(s, c.Right):
            return ta.Seq(t, self.infer(gamma, PLURAL, ta.EMPTY, s.body))
        if isinstance(s, c.Iter):
            return self.iterate(gamma, t, s.body)
        if isinstance(s, c.Call):
            return self.call(gamma, t, s)
        raise TypeError(f"not a statement: {s!r}")

    def iterate(self, gamma, t, s):
        if isinstance(t, ta.Empty):
            return ta.EMPTY
        if ta.is_atom(t):
            return self.infer(gamma, SINGULAR, t, s)
        if isinstance(t, ta.Star):
            return ta.Star(self.iterate(gamma, t.body, s))
        if isinstance(t, ta.Seq):
            return ta.Seq(self.iterate(gamma, t.left, s), self.iterate(gamma, t.right, s))
        if isinstance(t, ta.Alt):
            return ta.Alt(self.iterate(gamma, t.left, s), self.iterate(gamma, t.right, s))
        if isinstance(t, ta.Var):
            # E(X) has no top-level variables and s is strictly smaller than
            # iter[s], so this unfolding cannot loop
            return self.iterate(gamma, self.E[t.name], s)
        raise TypeError(f"cannot iterate over {t!r}")

    def call(self, gamma, t, s):
        d = self.procs.get(s.name)
        if d is None:
            raise UnknownProcedure(s.name, s.span)
        if len(d.params) != len(s.args):
            raise FluxTypeError(f"{s.name} expects {len(d.params)} arguments, got {len(s.args)}",
                                s.span, rule="call")
        for (name, pt), arg in zip(d.params, s.args):
            at = self.query(gamma, arg)
            if not ta.subtype(at, pt, self.E):
                raise SubtypeFailure(at, pt, s.span, what=f"argument ${name} of {s.name} has type")
        if not ta.subtype(t, d.in_type, self.E):
            raise SubtypeFailure(t, d.in_type, s.span, what=f"input of {s.name} has type")
        return d.out_type
