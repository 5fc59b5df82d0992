"""Direct typechecking of source updates with context-tagged substitutions.

A path splits the input type into a skeleton containing placeholders Z
and a substitution mapping each Z to the typing context and type of the
part the path selects. The update is applied to every binding and the
results are substituted back into the skeleton.
"""
from __future__ import annotations

from . import core_typing as ct
from . import query_lang as q
from . import source_lang as sl
from . import type_algebra as ta
from .data_model import DOCUMENT_LABEL
from .errors import DomainMismatch, DomainOverlap, FluxTypeError, NonAtomicSimpleUpdate, PathTypeError


class CtxSubst:
    """Ordered bindings Z -> (context, type); immutable."""

    __slots__ = ("_items",)

    def __init__(self, items=()):
        items = tuple(items)
        names = [z for z, _, _ in items]
        if len(set(names)) != len(names):
            raise DomainOverlap("substitution binds a placeholder twice")
        self._items = items

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __bool__(self):
        return bool(self._items)

    def domain(self):
        return [z for z, _, _ in self._items]

    def lookup(self, z):
        for name, gamma, t in self._items:
            if name == z:
                return gamma, t
        raise KeyError(z)

    def __eq__(self, other):
        return isinstance(other, CtxSubst) and self._items == other._items

    def __hash__(self):
        return hash(self._items)

    def __repr__(self):
        inner = ", ".join(f"{z} -> ({g} |> {t})" for z, g, t in self._items)
        return "{" + inner + "}"


EMPTY_SUBST = CtxSubst()


class FreshGen:
    """Mints Z0, Z1, ... within one typechecking run."""

    def __init__(self, prefix="Z"):
        self.prefix = prefix
        self.counter = 0

    def fresh(self):
        z = ta.Flex(f"{self.prefix}{self.counter}")
        self.counter += 1
        return z


def apply_subst(t, theta: CtxSubst):
    """Replace each placeholder bound in ``theta`` by its type (one pass)."""
    table = {z: ty for z, _, ty in theta}
    if not table:
        return t

    def go(x):
        if isinstance(x, ta.Flex):
            return table.get(x.name, x)
        if isinstance(x, ta.Elem):
            return ta.Elem(x.label, go(x.body))
        if isinstance(x, ta.Seq):
            return ta.Seq(go(x.left), go(x.right))
        if isinstance(x, ta.Alt):
            return ta.Alt(go(x.left), go(x.right))
        if isinstance(x, ta.Star):
            return ta.Star(go(x.body))
        return x

    return go(t)


def subst_subst(theta: CtxSubst, other: CtxSubst) -> CtxSubst:
    """Apply ``other`` to every type in ``theta``, ignoring contexts."""
    return CtxSubst((z, g, apply_subst(t, other)) for z, g, t in theta)


def merge_disjoint(t1: CtxSubst, t2: CtxSubst) -> CtxSubst:
    overlap = set(t1.domain()) & set(t2.domain())
    if overlap:
        raise DomainOverlap(f"substitutions overlap on {sorted(overlap)}")
    return CtxSubst(tuple(t1) + tuple(t2))


def merge_or(t1: CtxSubst, t2: CtxSubst) -> CtxSubst:
    if t1.domain() != t2.domain():
        raise DomainMismatch("substitutions have different domains")
    out = []
    for (z, g1, a), (_, g2, b) in zip(t1, t2):
        if g1 != g2:
            raise DomainMismatch(f"contexts for {z} differ")
        out.append((z, g1, ta.Alt(a, b)))
    return CtxSubst(out)


def extend_scope(theta: CtxSubst, x: str) -> CtxSubst:
    return CtxSubst((z, g.bind_forest(x, t), t) for z, g, t in theta)


def maybe(theta: CtxSubst) -> CtxSubst:
    return CtxSubst((z, g, ta.Alt(ta.Flex(z), t)) for z, g, t in theta)


# ------------------------------------------------------------- judgments


class SourceTyper:
    """One typechecking run; owns the placeholder counter."""

    def __init__(self, E=ta.EMPTY_SIG, procs=None, fresh=None, warnings=None):
        self.E = E
        self.procs = procs
        self.fresh = fresh or FreshGen()
        # (span, message) pairs for updates whose path selects nothing
        self.warnings = warnings

    # filters -----------------------------------------------------------

    def check_filter(self, gamma, t, phi):
        E = self.E
        if isinstance(t, ta.Empty):
            return ta.EMPTY, EMPTY_SUBST
        if ta.is_atom(t):
            if not ta.test_match(t, phi):
                return t, EMPTY_SUBST
            z = self.fresh.fresh()
            return z, CtxSubst([(z.name, gamma, t)])
        if isinstance(t, (ta.Seq, ta.Alt)):
            l, th1 = self.check_filter(gamma, t.left, phi)
            r, th2 = self.check_filter(gamma, t.right, phi)
            return type(t)(l, r), merge_disjoint(th1, th2)
        if isinstance(t, ta.Star):
            b, th = self.check_filter(gamma, t.body, phi)
            return ta.Star(b), th
        if isinstance(t, ta.Var):
            return self.check_filter(gamma, E[t.name], phi)
        raise TypeError(f"cannot filter {t!r}")

    # paths --------------------------------------------------------------

    def check_path(self, gamma, t, p):
        if isinstance(p, sl.Here):
            # the whole focus is selected; a placeholder keeps it updatable
            z = self.fresh.fresh()
            return z, CtxSubst([(z.name, gamma, t)])
        if isinstance(p, sl.Step):
            at = ta.atomize(t, self.E)
            if at is None:
                raise NonAtomicSimpleUpdate(
                    f"path step {p.test} needs a single tree, but the focus has type {t}",
                    p.span, expected="an atomic type", found=t, rule="path-step")
            if not isinstance(at, ta.Elem):
                raise PathTypeError(f"path step {p.test} needs an element, found {at}",
                                    p.span, expected="n[...]", found=at, rule="path-step")
            body, theta = self.check_filter(gamma, at.body, p.test)
            return ta.Elem(at.label, body), theta
        if isinstance(p, sl.Slash):
            a1, th1 = self.check_path(gamma, t, p.left)
            th2, th2b = self.simult_path(th1, p.right)
            return apply_subst(a1, th2), th2b
        if isinstance(p, sl.Filter):
            a1, th = self.check_path(gamma, t, p.path)
            self.simult_expr(th, p.cond, ta.BOOL)
            return apply_subst(a1, maybe(th)), th
        if isinstance(p, sl.Bind):
            a1, th = self.check_path(gamma, t, p.path)
            return a1, extend_scope(th, p.name)
        raise TypeError(f"not a path: {p!r}")

    # simultaneous judgments -------------------------------------------

    def simult_expr(self, theta, e, expected):
        for z, gamma, _ in theta:
            try:
                q.check_query_type(gamma, e, expected, self.E, self.procs)
            except FluxTypeError as err:
                _annotate(err, z, gamma)
                raise

    def simult_core(self, theta, s):
        out = []
        for z, gamma, t in theta:
            try:
                out.append((z, gamma, ct.infer_update_type(gamma, ct.SINGULAR, t, s, self.procs, self.E)))
            except FluxTypeError as err:
                _annotate(err, z, gamma)
                raise
        return CtxSubst(out)

    def simult_stmt(self, theta, s):
        out = []
        for z, gamma, t in theta:
            try:
                out.append((z, gamma, self.check_compound(gamma, t, s)))
            except FluxTypeError as err:
                _annotate(err, z, gamma)
                raise
        return CtxSubst(out)

    def simult_path(self, theta, p):
        first, rest = [], EMPTY_SUBST
        for z, gamma, t in theta:
            a, th = self.check_path(gamma, t, p)
            first.append((z, gamma, a))
            rest = merge_disjoint(rest, th)
        return CtxSubst(first), rest

    # updates and statements -------------------------------------------

    def check_simple(self, gamma, t, u):
        a1, theta = self.check_path(gamma, t, u.path)
        if not theta and self.warnings is not None:
            self.warnings.append((u.span, f"path {u.path} selects nothing under input type {t}"))
        if isinstance(u, sl.UpdateBy):
            theta2 = self.simult_stmt(theta, u.body)
        else:
            theta2 = self.simult_core(theta, sl.kernel(u))
        return apply_subst(a1, theta2)

    def check_compound(self, gamma, t, s):
        if isinstance(s, sl.UpdStmt):
            return self.check_simple(gamma, t, sl.upd_of(s))
        if isinstance(s, sl.IfThen):
            c = q.infer_query_type(gamma, s.cond, self.E, self.procs)
            if not ta.subtype(c, ta.BOOL, self.E):
                raise FluxTypeError(f"condition {s.cond} has type {c}, expected bool", s.span,
                                    expected=ta.BOOL, found=c, rule="if")
            return ta.Alt(self.check_compound(gamma, t, s.body), t)
        if isinstance(s, sl.SeqStmt):
            return self.check_compound(gamma, self.check_compound(gamma, t, s.first), s.second)
        if isinstance(s, sl.LetStmt):
            t0 = q.infer_query_type(gamma, s.expr, self.E, self.procs)
            return self.check_compound(gamma.bind_forest(s.name, t0), t, s.body)
        if isinstance(s, sl.Block):
            return self.check_compound(gamma, t, s.body)
        raise TypeError(f"not a source statement: {s!r}")


def _annotate(err, z, gamma):
    note = f" [while checking placeholder {z} in context {gamma}]"
    if note not in err.message:
        err.message += note
        err.args = (err.message,)


# --------------------------------------------------- module-level wrappers


def check_filter(gamma, t, phi, fresh=None, E=ta.EMPTY_SIG):
    return SourceTyper(E, None, fresh).check_filter(gamma, t, phi)


def check_path(gamma, t, p, fresh=None, E=ta.EMPTY_SIG, procs=None):
    return SourceTyper(E, procs, fresh).check_path(gamma, t, p)


def check_simple(gamma, t, u, fresh=None, E=ta.EMPTY_SIG, procs=None):
    return SourceTyper(E, procs, fresh).check_simple(gamma, t, u)


def check_compound(gamma, t, s, fresh=None, E=ta.EMPTY_SIG, procs=None):
    return SourceTyper(E, procs, fresh).check_compound(gamma, t, s)


def simult_core(theta, s, E=ta.EMPTY_SIG, procs=None):
    return SourceTyper(E, procs).simult_core(theta, s)


def simult_expr(theta, e, expected, E=ta.EMPTY_SIG, procs=None):
    return SourceTyper(E, procs).simult_expr(theta, e, expected)


def simult_stmt(theta, s, E=ta.EMPTY_SIG, procs=None):
    return SourceTyper(E, procs).simult_stmt(theta, s)


def simult_path(theta, p, fresh=None, E=ta.EMPTY_SIG, procs=None):
    return SourceTyper(E, procs, fresh).simult_path(theta, p)


# ------------------------------------------------------------ documents


def document_type(t):
    """The atom standing for a whole document whose content has type ``t``."""
    return ta.Elem(DOCUMENT_LABEL, t)


def document_content(t, E=ta.EMPTY_SIG):
    """Inverse of :func:`document_type` up to type equivalence."""
    at = ta.atomize(t, E)
    if not isinstance(at, ta.Elem) or at.label != DOCUMENT_LABEL:
        raise FluxTypeError(f"the script does not leave a single document behind (found {t})",
                            expected=document_type(ta.Var("...")), found=t, rule="document")
    return at.body


def check_source_script(doc_type, s, E=ta.EMPTY_SIG, procs=None, gamma=None, warnings=None):
    """Type of the document content after running source statement ``s``."""
    typer = SourceTyper(E, procs, FreshGen(), warnings)
    out = typer.check_compound(gamma or q.EMPTY_ENV, document_type(doc_type), s)
    if ta.flex_vars(out):
        raise AssertionError(f"placeholders leaked into {out}")
    return document_content(out, E)


def check_core_script(doc_type, s, E=ta.EMPTY_SIG, procs=None, gamma=None):
    out = ct.infer_update_type(gamma or q.EMPTY_ENV, ct.PLURAL, document_type(doc_type), s, procs, E)
    return document_content(out, E)
