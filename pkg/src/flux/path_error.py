"""Path-error analysis: find subexpressions that can never change the result.

A location is unproductive when replacing the subexpression there by
``skip`` yields the same output on every input of the given type. The
analysis runs alongside type inference and collects such locations;
those not already ``skip`` are reported.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from . import core_typing as ct
from . import core_update as c
from . import query_lang as q
from . import type_algebra as ta
from .errors import FluxTypeError, UnknownLabel


@dataclass(frozen=True)
class LabeledStatement:
    node: c.Statement
    label: int
    children: Tuple["LabeledStatement", ...]

    def strip(self) -> c.Statement:
        return c.with_subs(self.node, tuple(ch.strip() for ch in self.children))

    def walk(self):
        yield self
        for ch in self.children:
            yield from ch.walk()

    def find(self, label):
        for n in self.walk():
            if n.label == label:
                return n
        raise UnknownLabel(label)

    def labels(self):
        return [n.label for n in self.walk()]


def label_statement(s: c.Statement, start: int = 0) -> LabeledStatement:
    """Number the subexpressions of ``s`` in preorder."""
    counter = [start]

    def go(x):
        label = counter[0]
        counter[0] += 1
        kids = tuple(go(ch) for ch in c.sub_stmts(x))
        return LabeledStatement(x, label, kids)

    return go(s)


def replace_at(ls: LabeledStatement, label) -> c.Statement:
    """The statement with the subexpression at ``label`` replaced by skip."""
    ls.find(label)

    def go(n):
        if n.label == label:
            return c.Skip(span=n.node.span)
        return c.with_subs(n.node, tuple(go(ch) for ch in n.children))

    return go(ls)


def cond_union(L, triggers, label):
    L = frozenset(L)
    return L | {label} if set(triggers) <= L else L


def analyze(gamma, a, t, ls: LabeledStatement, procs=None, E=ta.EMPTY_SIG):
    """Return (output type, set of unproductive locations)."""
    return _Analyzer(procs or c.EMPTY_PROCS, E).run(gamma, a, t, ls)


def report_errors(ls: LabeledStatement, L):
    """Unproductive locations whose subexpression is not already skip."""
    return sorted(n.label for n in ls.walk() if n.label in L and not isinstance(n.node, c.Skip))


def optimize(ls: LabeledStatement, L) -> c.Statement:
    """Replace every reported location by skip, outermost first."""
    reported = set(report_errors(ls, L))

    def go(n):
        if n.label in reported:
            return c.Skip(span=n.node.span)
        return c.with_subs(n.node, tuple(go(ch) for ch in n.children))

    return go(ls)


class _Analyzer:
    def __init__(self, procs, E):
        self.procs = procs
        self.E = E
        self.typer = ct._UpdateTyper(procs, E)

    def query(self, gamma, e):
        return q.infer_query_type(gamma, e, self.E, self.procs)

    def run(self, gamma, a, t, n):
        s, l, kids = n.node, n.label, n.children
        E = self.E
        if isinstance(s, c.Skip):
            return t, frozenset({l})
        if isinstance(s, c.Seq):
            t1, L1 = self.run(gamma, a, t, kids[0])
            t2, L2 = self.run(gamma, a, t1, kids[1])
            return t2, cond_union(L1 | L2, [kids[0].label, kids[1].label], l)
        if isinstance(s, c.If):
            ctype = self.query(gamma, s.cond)
            if not ta.subtype(ctype, ta.BOOL, E):
                raise FluxTypeError(f"condition {s.cond} has type {ctype}, expected bool", s.span,
                                    expected=ta.BOOL, found=ctype, rule="if")
            t1, L1 = self.run(gamma, a, t, kids[0])
            t2, L2 = self.run(gamma, a, t, kids[1])
            return ta.Alt(t1, t2), cond_union(L1 | L2, [kids[0].label, kids[1].label], l)
        if isinstance(s, c.Let):
            te = self.query(gamma, s.expr)
            t1, L = self.run(gamma.bind_forest(s.name, te), a, t, kids[0])
            return t1, cond_union(L, [kids[0].label], l)
        if isinstance(s, c.Insert):
            out = self.typer.infer(gamma, a, t, s)
            return out, frozenset({l}) if ta.subtype(out, ta.EMPTY, E) else frozenset()
        if isinstance(s, c.Delete):
            return ta.EMPTY, frozenset({l}) if ta.subtype(t, ta.EMPTY, E) else frozenset()
        if isinstance(s, c.Rename):
            out = self.typer.infer(gamma, a, t, s)
            at = ta.atomize(t, E)
            return out, frozenset({l}) if at.label == s.label else frozenset()
        if isinstance(s, c.Snapshot):
            t1, L = self.run(gamma.bind_forest(s.name, t), a, t, kids[0])
            return t1, cond_union(L, [kids[0].label], l)
        if isinstance(s, c.TestGuard):
            at = ct.single_tree_type(t, E, f"test {s.test}", s.span)
            if ta.test_match(at, s.test):
                t1, L = self.run(gamma, ct.SINGULAR, at, kids[0])
                return t1, cond_union(L, [kids[0].label], l)
            return at, frozenset({l})
        if isinstance(s, c.Children):
            at = ct.single_tree_type(t, E, "children", s.span)
            if not isinstance(at, ta.Elem):
                raise FluxTypeError(f"children needs an element, found {at}", s.span,
                                    expected="n[...]", found=at, rule="children")
            t1, L = self.run(gamma, ct.PLURAL, at.body, kids[0])
            return ta.Elem(at.label, t1), cond_union(L, [kids[0].label], l)
        if isinstance(s, c.Left):
            t1, L = self.run(gamma, ct.PLURAL, ta.EMPTY, kids[0])
            return ta.Seq(t1, t), cond_union(L, [kids[0].label], l)
        if isinstance(s, c.Right):
            t1, L = self.run(gamma, ct.PLURAL, ta.EMPTY, kids[0])
            return ta.Seq(t, t1), cond_union(L, [kids[0].label], l)
        if isinstance(s, c.Iter):
            t1, L = self.iterate(gamma, t, kids[0])
            return t1, cond_union(L, [kids[0].label], l)
        if isinstance(s, c.Call):
            return self.typer.infer(gamma, a, t, s), frozenset()
        raise TypeError(f"not a statement: {s!r}")

    def iterate(self, gamma, t, n):
        if isinstance(t, ta.Empty):
            return ta.EMPTY, frozenset({n.label})
        if ta.is_atom(t):
            return self.run(gamma, ct.SINGULAR, t, n)
        if isinstance(t, ta.Star):
            t1, L = self.iterate(gamma, t.body, n)
            return ta.Star(t1), L
        if isinstance(t, (ta.Seq, ta.Alt)):
            t1, L1 = self.iterate(gamma, t.left, n)
            t2, L2 = self.iterate(gamma, t.right, n)
            return type(t)(t1, t2), L1 & L2
        if isinstance(t, ta.Var):
            return self.iterate(gamma, self.E[t.name], n)
        raise TypeError(f"cannot iterate over {t!r}")


def analyze_procedures(procs, E=ta.EMPTY_SIG):
    """Analyze each procedure body on its own; yields (decl, labeled body, L)."""
    for d in procs:
        gamma = q.QueryTypeEnv({name: pt for name, pt in d.params})
        ls = label_statement(d.body)
        _, L = analyze(gamma, ct.PLURAL, d.in_type, ls, procs, E)
        yield d, ls, L
