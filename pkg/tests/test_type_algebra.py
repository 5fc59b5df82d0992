import random

import pytest
from hypothesis import given, settings, strategies as st

from flux import sampling
from flux import type_algebra as ta
from flux.data_model import Bool, Element, Text
from flux.errors import UndeclaredTypeVar, UnguardedTypeVar
from flux.syntax import parse_schema, parse_type, parse_value
from tests import generators as G
from tests import oracles as O

seeds = st.integers(0, 2 ** 32 - 1)
T = parse_type


def sig(text):
    return parse_schema(text)[0]


def test_check_signature():
    ta.check_signature(sig("type X = a[X]?"))
    with pytest.raises(UndeclaredTypeVar):
        ta.check_signature(sig("type X = Y"))
    with pytest.raises(UnguardedTypeVar):
        ta.check_signature(sig("type X = X"))


def test_member_examples():
    assert ta.member((), ta.EMPTY)
    assert ta.member(parse_value("b[],c[]"), T("(b[]|c[])*"))
    assert not ta.member((Text("w"),), ta.BOOL)
    assert ta.member((Bool(False),), ta.BOOL)


def test_subtype_examples():
    assert ta.subtype(T("b[]"), T("b[]|c[]"))
    assert not ta.subtype(T("b[]|c[]"), T("b[]"))
    assert ta.subtype(T("(b[]*)*"), T("b[]*")) and ta.subtype(T("b[]*"), T("(b[]*)*"))
    assert ta.type_equiv(T("b[], ()"), T("b[]"))
    assert not ta.type_equiv(T("b[]"), T("c[]"))


def test_tests():
    assert ta.test_match(ta.STRING, ta.TextTest())
    assert not ta.test_match(T("n[]"), ta.LabelTest("m"))
    assert ta.test_match(ta.BOOL, ta.NodeTest())
    assert ta.test_member(Text("w"), ta.TextTest())
    assert ta.test_member(parse_value("a[b[]]")[0], ta.LabelTest("a"))
    assert ta.test_member(Bool(True), ta.NodeTest())


@settings(max_examples=200)
@given(seeds)
def test_tests_agree_with_members(seed):
    rng = random.Random(seed)
    a = G.gen_atom(rng)
    v = sampling.sample(a, ta.EMPTY_SIG, rng)
    if v is None:
        return
    for phi in (ta.NodeTest(), ta.TextTest(), ta.LabelTest("a"), ta.LabelTest("b")):
        assert ta.test_match(a, phi) == ta.test_member(v[0], phi)


@settings(max_examples=200)
@given(seeds)
def test_member_agrees_with_backtracking(seed):
    rng = random.Random(seed)
    t = G.gen_type(rng, 2, size=4)
    for v in O.universe_forests(2, 2, ("a", "b"))[:200]:
        assert ta.member(v, t) == O.bt_member(v, t)


def test_member_recursive_type():
    E = sig("type X = a[X?, b[]*]")
    for v in O.universe_forests(3, 2, ("a", "b"), strings=False):
        assert ta.member(v, T("X"), E) == O.bt_member(v, T("X"), E)


@settings(max_examples=150)
@given(seeds)
def test_subtype_agrees_with_enumeration(seed):
    t1, t2 = G.gen_type_pair(random.Random(seed))
    assert ta.subtype(t1, t2) == O.bounded_subtype(t1, t2)


@settings(max_examples=100)
@given(seeds)
def test_subtype_is_a_preorder(seed):
    rng = random.Random(seed)
    t1, t2, t3 = (G.gen_type(rng, 2, size=3) for _ in range(3))
    assert ta.subtype(t1, t1)
    if ta.subtype(t1, t2) and ta.subtype(t2, t3):
        assert ta.subtype(t1, t3)


@settings(max_examples=100)
@given(seeds)
def test_type_laws(seed):
    rng = random.Random(seed)
    t1, t2, t3 = (G.gen_type(rng, 2, size=3) for _ in range(3))
    assert ta.type_equiv(ta.Seq(ta.Seq(t1, t2), t3), ta.Seq(t1, ta.Seq(t2, t3)))
    assert ta.type_equiv(ta.Seq(t1, ta.EMPTY), t1)
    assert ta.type_equiv(ta.Star(ta.Star(t1)), ta.Star(t1))
    assert ta.type_equiv(ta.Alt(t1, t2), ta.Alt(t2, t1))
    assert ta.type_equiv(ta.simplify(t1), t1)


def test_recursive_subtyping():
    E = sig("type X = a[X*]\ntype Y = a[Y*] | b[]")
    assert ta.subtype(T("X"), T("Y"), E)
    assert not ta.subtype(T("Y"), T("X"), E)


def test_atomize():
    assert ta.atomize(T("a[b[]] | a[c[]]")) == ta.Elem("a", ta.Alt(T("b[]"), T("c[]")))
    assert ta.atomize(T("(), string")) == ta.STRING
    assert ta.atomize(T("a[] | b[]")) is None
    assert ta.atomize(T("a[]*")) is None
    assert ta.atomize(T("X"), sig("type X = b[]")) == T("b[]")


@settings(max_examples=200)
@given(seeds)
def test_samples_are_members(seed):
    rng = random.Random(seed)
    t = G.gen_type(rng, 3, size=5)
    v = sampling.sample(t, ta.EMPTY_SIG, rng)
    if v is None:
        assert ta.is_empty_language(t)
    else:
        assert ta.member(v, t)


def test_sampling_recursive():
    E = sig("type X = a[X?]")
    rng = random.Random(0)
    for _ in range(20):
        assert ta.member(sampling.sample(T("X"), E, rng), T("X"), E)
    assert sampling.min_height(T("X"), E) == 1


@settings(max_examples=200)
@given(seeds)
def test_show_parse_roundtrip(seed):
    t = G.gen_type(random.Random(seed), 3, size=6)
    assert parse_type(ta.show_type(t)) == t


def test_element_value_round_trip():
    v = parse_value('a[b[], "x", true], c[]')
    assert v == (Element("a", (Element("b"), Text("x"), Bool(True))), Element("c"))
