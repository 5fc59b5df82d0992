"""Seeded random generators for types, values, queries and statements.

Every generator takes a ``random.Random`` so that failures reproduce from
a seed. Statement and query generators are type-directed and then
filtered through the typechecker, so their output is well-typed by
construction of the filter rather than by trusting the generator.
"""
from __future__ import annotations

import random

from flux import core_typing as ct
from flux import core_update as c
from flux import query_lang as q
from flux import sampling
from flux import source_lang as sl
from flux import type_algebra as ta
from flux.data_model import DOCUMENT_LABEL
from flux.errors import FluxTypeError

LABELS = ("a", "b", "c")
STRINGS = ("", "x", "Lewis Carroll")


# ------------------------------------------------------------------ types


def gen_type(rng: random.Random, depth: int = 2, labels=LABELS, size: int = 4, strings=True):
    """A non-recursive type with element nesting at most ``depth``."""
    if size <= 1 or rng.random() < 0.3:
        return _gen_leaf(rng, depth, labels, size, strings)
    k = rng.random()
    if k < 0.3:
        return ta.Seq(gen_type(rng, depth, labels, size // 2, strings),
                      gen_type(rng, depth, labels, size - size // 2, strings))
    if k < 0.6:
        return ta.Alt(gen_type(rng, depth, labels, size // 2, strings),
                      gen_type(rng, depth, labels, size - size // 2, strings))
    if k < 0.8:
        return ta.Star(gen_type(rng, depth, labels, size - 1, strings))
    return _gen_leaf(rng, depth, labels, size, strings)


def _gen_leaf(rng, depth, labels, size, strings):
    # strings and elements both occupy one level of nesting
    k = rng.random()
    if k < 0.1 or depth <= 0:
        return ta.EMPTY
    if strings and k < 0.2:
        return ta.STRING
    body = ta.EMPTY if depth == 1 and rng.random() < 0.5 else \
        gen_type(rng, depth - 1, labels, max(1, size - 1), strings)
    return ta.Elem(rng.choice(labels), body)


def gen_atom(rng, depth=2, labels=LABELS, size=4):
    k = rng.random()
    if k < 0.15:
        return ta.STRING
    if k < 0.2:
        return ta.BOOL
    return ta.Elem(rng.choice(labels), gen_type(rng, depth - 1, labels, size))


def level_atoms(t) -> int:
    """Largest number of atom occurrences in one forest level of ``t``."""
    def count(x):
        if ta.is_atom(x):
            return 1
        if isinstance(x, (ta.Seq, ta.Alt)):
            return count(x.left) + count(x.right)
        if isinstance(x, ta.Star):
            return count(x.body)
        return 0

    def inner(x):
        if isinstance(x, ta.Elem):
            return max(count(x.body), inner(x.body))
        if isinstance(x, (ta.Seq, ta.Alt)):
            return max(inner(x.left), inner(x.right))
        if isinstance(x, ta.Star):
            return inner(x.body)
        return 0

    return max(count(t), inner(t))


def gen_type_pair(rng, labels=LABELS, depth=2, max_atoms=3):
    """Two related non-recursive types of element depth at most ``depth``.

    Each forest level mentions at most ``max_atoms`` atoms, which keeps
    both types inside the universe a bounded enumeration can cover.
    """
    while True:
        t1, t2 = _pair(rng, labels, depth)
        if level_atoms(t1) <= max_atoms and level_atoms(t2) <= max_atoms:
            return t1, t2


def _pair(rng, labels, depth):
    t1 = gen_type(rng, depth, labels, rng.randint(1, 6))
    k = rng.random()
    if k < 0.3:
        t2 = gen_type(rng, depth, labels, rng.randint(1, 6))
    elif k < 0.5:
        t2 = ta.Alt(t1, gen_type(rng, depth, labels, 2))
    elif k < 0.7:
        t2 = mutate_type(rng, t1, labels, depth)
    else:
        m = mutate_type(rng, t1, labels, depth)
        t2 = ta.Star(m) if rng.random() < 0.5 else m
    return (t1, t2) if rng.random() < 0.5 else (t2, t1)


def mutate_type(rng, t, labels=LABELS, depth=2):
    """A small random edit of ``t`` that stays within ``depth``."""
    if isinstance(t, ta.Elem):
        if rng.random() < 0.3:
            return ta.Elem(rng.choice(labels), t.body)
        return ta.Elem(t.label, mutate_type(rng, t.body, labels, depth - 1))
    if isinstance(t, (ta.Seq, ta.Alt)):
        if rng.random() < 0.2:
            return type(t)(t.right, t.left)
        if rng.random() < 0.5:
            return type(t)(mutate_type(rng, t.left, labels, depth), t.right)
        return type(t)(t.left, mutate_type(rng, t.right, labels, depth))
    if isinstance(t, ta.Star):
        return t.body if rng.random() < 0.3 else ta.Star(mutate_type(rng, t.body, labels, depth))
    k = rng.random()
    if k < 0.3:
        return ta.Star(t)
    if k < 0.6:
        return ta.opt(t)
    return gen_type(rng, depth, labels, 2)


def gen_schema(rng, labels=("db", "a", "b", "c", "d"), size=6):
    """A random non-recursive document type with a single root."""
    return ta.Elem(labels[0], gen_type(rng, 3, labels[1:], size))


def sample_nonempty(t, E, rng, **kw):
    v = sampling.sample(t, E, rng, **kw)
    if v is None:
        raise ValueError(f"type {t} has no members")
    return v


# ---------------------------------------------------------------- queries


class QueryGen:
    """Type-directed generation of well-typed queries."""

    def __init__(self, rng, E=ta.EMPTY_SIG, labels=LABELS, transform=False):
        self.rng = rng
        self.E = E
        self.labels = labels
        self.transform = transform
        self.counter = 0

    def fresh(self, prefix):
        self.counter += 1
        return f"{prefix}{self.counter}"

    def gen(self, gamma, depth=3):
        """Any query; may be ill-typed, callers filter."""
        rng = self.rng
        if depth <= 0:
            return self.leaf(gamma)
        k = rng.randrange(14)
        if k == 0:
            return q.SeqComp(self.gen(gamma, depth - 1), self.gen(gamma, depth - 1))
        if k == 1:
            return q.Elem(rng.choice(self.labels), self.gen(gamma, depth - 1))
        if k == 2:
            name = self.fresh("v")
            bound = self.gen(gamma, depth - 1)
            try:
                bt = q.infer_query_type(gamma, bound, self.E)
            except FluxTypeError:
                return bound
            return q.Let(name, bound, self.gen(gamma.bind_forest(name, bt), depth - 1))
        if k == 3:
            return q.If(self.cond(gamma, depth - 1), self.gen(gamma, depth - 1), self.gen(gamma, depth - 1))
        if k == 4:
            return self.cond(gamma, depth - 1)
        if k in (5, 6):
            src = self.gen(gamma, depth - 1) if rng.random() < 0.5 else self.var(gamma)
            try:
                st = q.infer_query_type(gamma, src, self.E)
            except FluxTypeError:
                return src
            name = self.fresh("t")
            atoms = _atoms_of(st, self.E)
            if not atoms:
                return q.For(name, src, q.EmptySeq())
            g2 = gamma.bind_tree(name, rng.choice(atoms))
            body = self.gen_tree_body(g2, name, depth - 1)
            return q.For(name, src, body)
        if k == 7:
            return q.LabelFilter(self.gen(gamma, depth - 1), rng.choice(self.labels))
        if k == 8:
            trees = [x for x, t in gamma.trees.items() if isinstance(t, ta.Elem)]
            if trees:
                return q.ChildAxis(rng.choice(trees))
        if k == 9 and self.transform:
            e = self.gen(gamma, depth - 1)
            try:
                et = q.infer_query_type(gamma, e, self.E)
            except FluxTypeError:
                return e
            s = StmtGen(self.rng, self.E, self.labels).gen(gamma, ct.PLURAL, et, 2)
            return q.Transform(e, s)
        return self.leaf(gamma)

    def gen_tree_body(self, gamma, name, depth):
        rng = self.rng
        k = rng.random()
        if k < 0.3:
            return q.TreeVar(name)
        if k < 0.6 and isinstance(gamma.trees[name], ta.Elem):
            e = q.ChildAxis(name)
            return q.LabelFilter(e, rng.choice(self.labels)) if rng.random() < 0.4 else e
        return self.gen(gamma, depth)

    def var(self, gamma):
        names = [("f", x) for x in gamma.forests] + [("t", x) for x in gamma.trees]
        if not names:
            return q.EmptySeq()
        kind, x = self.rng.choice(names)
        return q.ForestVar(x) if kind == "f" else q.TreeVar(x)

    def leaf(self, gamma):
        rng = self.rng
        k = rng.randrange(6)
        if k == 0:
            return q.EmptySeq()
        if k == 1:
            return q.StrLit(rng.choice(STRINGS))
        if k == 2:
            return q.Elem(rng.choice(self.labels), q.EmptySeq())
        if k == 3:
            return q.TrueLit() if rng.random() < 0.5 else q.FalseLit()
        return self.var(gamma)

    def string_expr(self, gamma, depth):
        rng = self.rng
        strs = [x for x, t in gamma.forests.items() if ta.subtype(t, ta.STRING, self.E)
                and not ta.is_empty_language(t, self.E)]
        strs += [x for x, t in gamma.trees.items() if isinstance(t, ta.StringT)]
        kids = [x for x, t in gamma.trees.items() if isinstance(t, ta.Elem)
                and ta.subtype(t.body, ta.STRING, self.E)]
        k = rng.random()
        if strs and k < 0.35:
            x = rng.choice(strs)
            return q.TreeVar(x) if x in gamma.trees else q.ForestVar(x)
        if kids and k < 0.7:
            return q.ChildAxis(rng.choice(kids))
        if depth > 0 and k < 0.8:
            return q.If(self.cond(gamma, depth - 1), self.string_expr(gamma, depth - 1),
                        self.string_expr(gamma, depth - 1))
        return q.StrLit(rng.choice(STRINGS))

    def cond(self, gamma, depth):
        rng = self.rng
        k = rng.random()
        if k < 0.25:
            return q.TrueLit() if rng.random() < 0.5 else q.FalseLit()
        if k < 0.7:
            return q.StrEq(self.string_expr(gamma, depth), self.string_expr(gamma, depth))
        if depth > 0 and k < 0.85:
            return q.If(self.cond(gamma, depth - 1), self.cond(gamma, depth - 1), self.cond(gamma, depth - 1))
        bools = [x for x, t in gamma.forests.items() if ta.subtype(t, ta.BOOL, self.E)
                 and not ta.is_empty_language(t, self.E)]
        if bools:
            return q.ForestVar(rng.choice(bools))
        return q.StrEq(q.StrLit(rng.choice(STRINGS)), self.string_expr(gamma, depth))


def _atoms_of(t, E, seen=frozenset()):
    if ta.is_atom(t):
        return [t]
    if isinstance(t, (ta.Seq, ta.Alt)):
        return _atoms_of(t.left, E, seen) + _atoms_of(t.right, E, seen)
    if isinstance(t, ta.Star):
        return _atoms_of(t.body, E, seen)
    if isinstance(t, ta.Var) and t.name not in seen:
        return _atoms_of(E[t.name], E, seen | {t.name})
    return []


def gen_query_env(rng, E=ta.EMPTY_SIG, labels=LABELS, n=None):
    """A random type environment with a few forest and tree variables."""
    gamma = q.EMPTY_ENV
    for i in range(rng.randint(0, 2) if n is None else n):
        gamma = gamma.bind_forest(f"x{i}", gen_type(rng, 2, labels, 3))
    for i in range(rng.randint(0, 2) if n is None else n):
        gamma = gamma.bind_tree(f"y{i}", gen_atom(rng, 2, labels, 3))
    return gamma


def sample_env(gamma, E, rng):
    """A value environment whose bindings are members of ``gamma``."""
    from flux.data_model import QueryEnv
    env = QueryEnv()
    for x, t in gamma.forests.items():
        env = env.bind_forest(x, sample_nonempty(t, E, rng, depth=2))
    for x, t in gamma.trees.items():
        v = sample_nonempty(t, E, rng, depth=2)
        env = env.bind_tree(x, v[0])
    return env


def env_inhabited(gamma, E):
    return all(not ta.is_empty_language(t, E) for t in list(gamma.forests.values()) + list(gamma.trees.values()))


def gen_typed_query(rng, E=ta.EMPTY_SIG, labels=LABELS, depth=3, tries=50, transform=False):
    """(gamma, e, type) with e well-typed under gamma."""
    for _ in range(tries):
        gamma = gen_query_env(rng, E, labels)
        if not env_inhabited(gamma, E):
            continue
        e = QueryGen(rng, E, labels, transform).gen(gamma, depth)
        try:
            t = q.infer_query_type(gamma, e, E)
        except FluxTypeError:
            continue
        return gamma, e, t
    raise RuntimeError("no well-typed query found")


# ------------------------------------------------------------- statements


class StmtGen:
    """Type-directed generation of core statements."""

    def __init__(self, rng, E=ta.EMPTY_SIG, labels=LABELS, procs=None):
        self.rng = rng
        self.E = E
        self.labels = labels
        self.procs = procs or c.EMPTY_PROCS
        self.queries = QueryGen(rng, E, labels)

    def out_type(self, gamma, a, t, s):
        return ct.infer_update_type(gamma, a, t, s, self.procs, self.E)

    def gen(self, gamma, a, t, depth=3):
        """A statement for input type t; usually but not always well-typed."""
        rng = self.rng
        E = self.E
        at = ta.atomize(t, E)
        empty_focus = ta.subtype(t, ta.EMPTY, E)
        if depth <= 0:
            return self._leaf(gamma, t, at, empty_focus)
        choices = ["skip", "delete", "seq", "if", "let", "snapshot", "left", "right", "iter", "iter"]
        if empty_focus:
            choices += ["insert"] * 3
        if at is not None:
            choices += ["test", "test"]
            if isinstance(at, ta.Elem):
                choices += ["children", "children", "rename"]
        if len(self.procs):
            choices.append("call")
        k = rng.choice(choices)
        if k == "skip":
            return c.Skip()
        if k == "delete":
            return c.Delete()
        if k == "insert":
            return c.Insert(self.queries.gen(gamma, 2))
        if k == "rename":
            return c.Rename(rng.choice(self.labels))
        if k == "seq":
            s1 = self.gen(gamma, a, t, depth - 1)
            try:
                t1 = self.out_type(gamma, a, t, s1)
            except FluxTypeError:
                return s1
            return c.Seq(s1, self.gen(gamma, a, t1, depth - 1))
        if k == "if":
            return c.If(self.queries.cond(gamma, 1), self.gen(gamma, a, t, depth - 1),
                        self.gen(gamma, a, t, depth - 1))
        if k == "let":
            name = self.queries.fresh("l")
            e = self.queries.gen(gamma, 2)
            try:
                et = q.infer_query_type(gamma, e, E)
            except FluxTypeError:
                return c.Skip()
            return c.Let(name, e, self.gen(gamma.bind_forest(name, et), a, t, depth - 1))
        if k == "snapshot":
            name = self.queries.fresh("s")
            return c.Snapshot(name, self.gen(gamma.bind_forest(name, t), a, t, depth - 1))
        if k in ("left", "right"):
            body = self.gen(gamma, ct.PLURAL, ta.EMPTY, depth - 1)
            return c.Left(body) if k == "left" else c.Right(body)
        if k == "children":
            return c.Children(self.gen(gamma, ct.PLURAL, at.body, depth - 1))
        if k == "test":
            phi = self._test_for(at)
            if ta.test_match(at, phi):
                return c.TestGuard(phi, self.gen(gamma, ct.SINGULAR, at, depth - 1))
            return c.TestGuard(phi, self.gen(gamma, ct.SINGULAR, ta.EMPTY, depth - 1))
        if k == "iter":
            return c.Iter(self._iter_body(gamma, t, depth - 1))
        if k == "call":
            d = rng.choice(list(self.procs))
            args = tuple(self._arg_for(gamma, pt) for _, pt in d.params)
            return c.Call(d.name, args)
        raise AssertionError(k)

    def _leaf(self, gamma, t, at, empty_focus):
        rng = self.rng
        opts = ["skip", "delete"]
        if empty_focus:
            opts += ["insert", "insert"]
        if isinstance(at, ta.Elem):
            opts.append("rename")
        k = rng.choice(opts)
        if k == "insert":
            return c.Insert(self.queries.gen(gamma, 1))
        if k == "rename":
            return c.Rename(rng.choice(self.labels))
        return c.Delete() if k == "delete" else c.Skip()

    def _test_for(self, at):
        rng = self.rng
        k = rng.random()
        if k < 0.15:
            return ta.NodeTest()
        if k < 0.3:
            return ta.TextTest()
        if isinstance(at, ta.Elem) and k < 0.8:
            return ta.LabelTest(at.label)
        return ta.LabelTest(rng.choice(self.labels))

    def _iter_body(self, gamma, t, depth):
        """Body for iter over t: guard by a test when atoms differ."""
        atoms = _atoms_of(t, self.E)
        if not atoms:
            return self.gen(gamma, ct.SINGULAR, ta.EMPTY, depth)
        target = self.rng.choice(atoms)
        merged = ta.atomize(ta.alt(*atoms), self.E)
        if merged is not None and self.rng.random() < 0.5:
            return self.gen(gamma, ct.SINGULAR, merged, depth)
        if isinstance(target, ta.Elem):
            phi = ta.LabelTest(target.label)
        elif isinstance(target, ta.StringT):
            phi = ta.TextTest()
        else:
            phi = ta.NodeTest()
        same = [x for x in atoms if ta.test_match(x, phi)]
        inner = ta.atomize(ta.alt(*same), self.E) or target
        return c.TestGuard(phi, self.gen(gamma, ct.SINGULAR, inner, depth))

    def _arg_for(self, gamma, pt):
        v = sampling.sample(pt, self.E, self.rng, depth=1)
        from flux.query_lang import value_query
        return value_query(v or ())


def gen_procs(rng, E=ta.EMPTY_SIG, labels=LABELS, n=None):
    """A few well-typed procedures (no recursion, no parameters beyond one)."""
    decls = []
    for i in range(rng.randint(0, 2) if n is None else n):
        procs = c.ProcEnv(decls)
        t_in = gen_type(rng, 2, labels, 3)
        params = ()
        gamma = q.EMPTY_ENV
        if rng.random() < 0.5:
            pt = gen_type(rng, 1, labels, 2)
            params = (("p", pt),)
            gamma = gamma.bind_forest("p", pt)
        g = StmtGen(rng, E, labels, procs)
        for _ in range(20):
            body = g.gen(gamma, ct.PLURAL, t_in, 2)
            try:
                t_out = ct.infer_update_type(gamma, ct.PLURAL, t_in, body, procs, E)
            except FluxTypeError:
                continue
            decls.append(c.ProcDecl(f"P{i}", params, t_in, t_out, body))
            break
    return c.ProcEnv(decls)


def gen_typed_stmt(rng, E=ta.EMPTY_SIG, labels=LABELS, depth=3, tries=100, with_procs=True):
    """(gamma, procs, a, t, s, out) with s well-typed at (gamma, a, t)."""
    for _ in range(tries):
        procs = gen_procs(rng, E, labels) if with_procs and rng.random() < 0.3 else c.EMPTY_PROCS
        gamma = gen_query_env(rng, E, labels)
        if not env_inhabited(gamma, E):
            continue
        if rng.random() < 0.4:
            a, t = ct.SINGULAR, gen_atom(rng, 2, labels, 4)
        else:
            a, t = ct.PLURAL, gen_type(rng, 2, labels, rng.randint(1, 6))
        if ta.is_empty_language(t, E):
            continue
        if len(procs) and rng.random() < 0.5:
            # make calls possible by starting from a procedure's input type
            d = rng.choice(list(procs))
            a, t = ct.PLURAL, d.in_type
        s = StmtGen(rng, E, labels, procs).gen(gamma, a, t, depth)
        try:
            out = ct.infer_update_type(gamma, a, t, s, procs, E)
        except FluxTypeError:
            continue
        return gamma, procs, a, t, s, out
    raise RuntimeError("no well-typed statement found")


# ------------------------------------------------------- source statements


class SourceGen:
    """Random source statements over the labels of a schema.

    Paths mostly follow the schema so that updates select something, but
    nothing forces the result to typecheck.
    """

    def __init__(self, rng, doc_type, E=ta.EMPTY_SIG, labels=("db", "a", "b", "c", "d")):
        self.rng = rng
        self.doc_type = doc_type
        self.E = E
        self.labels = labels
        self.queries = QueryGen(rng, E, labels)
        self.counter = 0

    def fresh(self):
        self.counter += 1
        return f"x{self.counter}"

    def path(self, gamma, t, length=None):
        """A path starting at focus type t; returns (path, bound names)."""
        rng = self.rng
        length = rng.randint(1, 3) if length is None else length
        steps = []
        bound = []
        cur = t
        for i in range(length):
            at = ta.atomize(cur, self.E)
            kids = _atoms_of(at.body, self.E) if isinstance(at, ta.Elem) else []
            elems = [x for x in kids if isinstance(x, ta.Elem)]
            k = rng.random()
            if elems and k < 0.75:
                pick = rng.choice(elems)
                step = sl.Step(ta.LabelTest(pick.label))
                same = [x for x in elems if x.label == pick.label]
                cur = ta.alt(*same)
            elif k < 0.85:
                step = sl.Step(ta.NodeTest())
                cur = ta.alt(*kids) if kids else ta.EMPTY
            elif k < 0.92:
                step = sl.Step(ta.TextTest())
                cur = ta.STRING
            else:
                step = sl.Step(ta.LabelTest(rng.choice(self.labels)))
                cur = ta.EMPTY
            if rng.random() < 0.25:
                name = self.fresh()
                step = sl.Bind(name, step)
                bound.append((name, cur))
            if rng.random() < 0.15:
                g = gamma
                for b, bt in bound:
                    g = g.bind_forest(b, bt)
                step = sl.Filter(step, self.queries.cond(g, 1))
            steps.append(step)
        p = steps[0]
        for s in steps[1:]:
            p = sl.Slash(p, s)
        if rng.random() < 0.1:
            p = sl.Slash(p, sl.Here()) if rng.random() < 0.5 else sl.Here()
        return p, bound, cur

    def value(self, gamma):
        rng = self.rng
        k = rng.random()
        if k < 0.5:
            return q.Elem(rng.choice(self.labels[1:]), q.EmptySeq())
        if k < 0.7:
            return q.StrLit(rng.choice(STRINGS))
        if k < 0.8:
            return q.EmptySeq()
        return q.SeqComp(q.Elem(rng.choice(self.labels[1:]), q.StrLit("x")), q.Elem("c", q.EmptySeq()))

    def upd(self, gamma, t, depth):
        rng = self.rng
        p, bound, cur = self.path(gamma, t)
        kind = rng.choice(["ib", "ia", "if", "il", "del", "delf", "ren", "rep", "repin", "upd"])
        if kind == "upd" and depth > 0:
            return sl.UpdateBy(p, self.stmt(gamma, cur, depth - 1)), bound
        if kind == "ib":
            return sl.InsertBefore(p, self.value(gamma)), bound
        if kind == "ia":
            return sl.InsertAfter(p, self.value(gamma)), bound
        if kind == "if":
            return sl.InsertFirstInto(p, self.value(gamma)), bound
        if kind == "il":
            return sl.InsertLastInto(p, self.value(gamma)), bound
        if kind == "delf":
            return sl.DeleteFrom(p), bound
        if kind == "ren":
            return sl.Rename(p, rng.choice(self.labels[1:])), bound
        if kind == "rep":
            return sl.Replace(p, self.value(gamma)), bound
        if kind == "repin":
            return sl.ReplaceIn(p, self.value(gamma)), bound
        return sl.Delete(p), bound

    def stmt(self, gamma=q.EMPTY_ENV, t=None, depth=2):
        rng = self.rng
        t = ta.Elem(DOCUMENT_LABEL, self.doc_type) if t is None else t
        k = rng.random()
        if depth > 0 and k < 0.2:
            return sl.SeqStmt(self.stmt(gamma, t, depth - 1), self.stmt(gamma, t, depth - 1))
        if depth > 0 and k < 0.28:
            return sl.IfThen(self.queries.cond(gamma, 1), self.stmt(gamma, t, depth - 1))
        if depth > 0 and k < 0.33:
            name = self.fresh()
            return sl.LetStmt(name, q.StrLit("x"), self.stmt(gamma.bind_forest(name, ta.STRING), t, depth - 1))
        u, bound = self.upd(gamma, t, depth)
        where = None
        if bound and rng.random() < 0.5:
            g = gamma
            for b, bt in bound:
                g = g.bind_forest(b, bt)
            where = self.queries.cond(g, 1)
        return sl.UpdStmt(u, where)
