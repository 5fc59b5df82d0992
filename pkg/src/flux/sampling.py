"""Random generation of type members, used by fuzzing and property tests."""
from __future__ import annotations

import random
from functools import lru_cache

from . import type_algebra as ta
from .data_model import Bool, Element, Text

STRINGS = ("", "a", "x y", "1859", "Darwin")


@lru_cache(maxsize=None)
def min_height(t, E: ta.Signature = ta.EMPTY_SIG):
    """Smallest element nesting depth of a member of ``t`` (None if empty)."""
    heights = _heights(E)
    return _h(t, heights)


@lru_cache(maxsize=None)
def _heights(E):
    # least fixpoint over the signature; variables start at "no member"
    hs = {name: None for name, _ in E.items()}
    changed = True
    while changed:
        changed = False
        for name, body in E.items():
            h = _h(body, hs)
            if h is not None and (hs[name] is None or h < hs[name]):
                hs[name] = h
                changed = True
    return hs


def _h(t, hs):
    if isinstance(t, (ta.Empty, ta.Star)):
        return 0
    if isinstance(t, (ta.StringT, ta.BoolT)):
        return 0
    if isinstance(t, ta.Elem):
        b = _h(t.body, hs)
        return None if b is None else b + 1
    if isinstance(t, ta.Seq):
        l, r = _h(t.left, hs), _h(t.right, hs)
        return None if l is None or r is None else max(l, r)
    if isinstance(t, ta.Alt):
        l, r = _h(t.left, hs), _h(t.right, hs)
        if l is None:
            return r
        return l if r is None else min(l, r)
    if isinstance(t, ta.Var):
        return hs[t.name]
    raise TypeError(f"cannot measure {t!r}")


def sample(t, E: ta.Signature = ta.EMPTY_SIG, rng=None, depth: int = 4, max_rep: int = 3):
    """A random member of ``t`` as a forest, or None if ``t`` is empty.

    ``depth`` bounds element nesting beyond what recursion forces.
    """
    rng = rng or random.Random()
    if min_height(t, E) is None:
        return None
    return tuple(_gen(t, E, rng, depth + min_height(t, E), max_rep))


def _gen(t, E, rng, budget, max_rep):
    if isinstance(t, ta.Empty):
        return []
    if isinstance(t, ta.StringT):
        return [Text(rng.choice(STRINGS))]
    if isinstance(t, ta.BoolT):
        return [Bool(rng.random() < 0.5)]
    if isinstance(t, ta.Elem):
        return [Element(t.label, tuple(_gen(t.body, E, rng, budget - 1, max_rep)))]
    if isinstance(t, ta.Seq):
        return _gen(t.left, E, rng, budget, max_rep) + _gen(t.right, E, rng, budget, max_rep)
    if isinstance(t, ta.Alt):
        options = [b for b in (t.left, t.right) if _fits(b, E, budget)]
        return _gen(rng.choice(options), E, rng, budget, max_rep)
    if isinstance(t, ta.Star):
        if not _fits(t.body, E, budget) or min_height(t.body, E) is None:
            return []
        out = []
        for _ in range(rng.randint(0, max_rep)):
            out += _gen(t.body, E, rng, budget, max_rep)
        return out
    if isinstance(t, ta.Var):
        return _gen(E[t.name], E, rng, budget, max_rep)
    raise TypeError(f"cannot sample {t!r}")


def _fits(t, E, budget):
    h = min_height(t, E)
    return h is not None and h <= budget
