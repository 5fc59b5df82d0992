"""Tree and forest values, query environments and the forest algebra.

A forest is a plain tuple of trees. A tree is a :class:`Text`, a
:class:`Bool` or an :class:`Element`. Trees and singleton forests are
interchangeable through :func:`as_forest`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping, Tuple, Union

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*\Z")

# label of the virtual node wrapping a whole document; not a legal user name
DOCUMENT_LABEL = "#document"


@dataclass(frozen=True)
class Text:
    text: str

    def __repr__(self):
        return f"Text({self.text!r})"


@dataclass(frozen=True)
class Bool:
    value: bool

    def __repr__(self):
        return "Bool(true)" if self.value else "Bool(false)"


@dataclass(frozen=True)
class Element:
    label: str
    children: Tuple["Tree", ...] = ()

    def __post_init__(self):
        if not self.label:
            raise ValueError("element labels must be nonempty")
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))


Tree = Union[Text, Bool, Element]
Forest = Tuple[Tree, ...]

EMPTY: Forest = ()


def is_tree(x) -> bool:
    return isinstance(x, (Text, Bool, Element))


def valid_label(name: str) -> bool:
    return bool(NAME_RE.match(name))


def as_forest(v) -> Forest:
    """Identify a tree with the singleton forest containing it."""
    if is_tree(v):
        return (v,)
    return tuple(v)


def children_of(t: Tree) -> Forest:
    if isinstance(t, Element):
        return t.children
    return ()


def concat(v1: Forest, v2: Forest) -> Forest:
    return tuple(v1) + tuple(v2)


def for_each(v: Forest, f: Callable[[Tree], Forest]) -> Forest:
    out = []
    for t in v:
        out.extend(as_forest(f(t)))
    return tuple(out)


def value_eq(v1, v2) -> bool:
    # dataclass equality is already deep and ordered
    return as_forest(v1) == as_forest(v2)


def forest_size(v: Forest) -> int:
    return sum(1 + forest_size(t.children) if isinstance(t, Element) else 1 for t in v)


class QueryEnv:
    """Immutable pair of forest-variable and tree-variable bindings."""

    __slots__ = ("forests", "trees")

    def __init__(self, forests: Mapping[str, Forest] | None = None,
                 trees: Mapping[str, Tree] | None = None):
        self.forests = dict(forests or {})
        self.trees = dict(trees or {})

    def bind_forest(self, name, value) -> "QueryEnv":
        forests = dict(self.forests)
        forests[name] = as_forest(value)
        trees = self.trees
        if name in trees:
            trees = {k: v for k, v in trees.items() if k != name}
        return QueryEnv(forests, trees)

    def bind_tree(self, name, value: Tree) -> "QueryEnv":
        trees = dict(self.trees)
        trees[name] = value
        forests = self.forests
        if name in forests:
            forests = {k: v for k, v in forests.items() if k != name}
        return QueryEnv(forests, trees)

    def __repr__(self):
        return f"QueryEnv(forests={self.forests!r}, trees={self.trees!r})"
