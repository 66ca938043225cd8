from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lingraph.automata import (BLANK, HoleError, TupleAutomaton, complement_within, concat_via, convolve,
                               cylindrify, deconvolve, determinize, diagonal, difference, empty, free_product,
                               from_json, from_tuples, hole_free_filter, intersection, join, loose_product,
                               project_onto, project_out, rename, to_json, union, universe, upturn)

ALPHA = ("a", "b")


def words_upto(n, alphabet=ALPHA):
    return [w for k in range(n + 1) for w in product(alphabet, repeat=k)]


def equality_pair():
    return TupleAutomaton(("x", "y"), ALPHA, {(0, (c, c), 0) for c in ALPHA}, {0}, {0})


@st.composite
def random_automata(draw, max_arity=3):
    arity = draw(st.integers(1, max_arity))
    comps = tuple(f"y{k}" for k in range(arity))
    nstates = draw(st.integers(1, 3))
    letters = [l for l in product((BLANK,) + ALPHA, repeat=arity) if any(s is not BLANK for s in l)]
    trans = draw(st.sets(st.tuples(st.integers(0, nstates - 1), st.sampled_from(letters),
                                   st.integers(0, nstates - 1)), max_size=5))
    finals = draw(st.sets(st.integers(0, nstates - 1), max_size=nstates))
    return hole_free_filter(TupleAutomaton(comps, ALPHA, trans, {0}, finals))


@st.composite
def automaton_and_sigma(draw):
    a = draw(random_automata())
    n = draw(st.integers(1, 3))
    xs = tuple(f"x{k}" for k in range(n))
    sigma = {}
    for x in xs:
        target = draw(st.sampled_from((None,) + a.components))
        if target is not None:
            sigma[x] = target
    if len([x for x in xs if x not in sigma]) > 2:
        sigma[xs[0]] = a.components[0]
    return a, xs, sigma


def upturn_oracle(a, xs, sigma, length):
    """Relation-level upturn of a bounded enumeration, restricted to convolution length."""
    nstates = max(len(a.states), 1)
    base = a.enumerate(length + nstates)
    free = [x for x in xs if x not in sigma]
    pool = words_upto(length)
    out = set()
    for t in base:
        bound = {x: t[a.components.index(sigma[x])] for x in sigma}
        if any(len(w) > length for w in bound.values()):
            continue
        for fill in product(pool, repeat=len(free)):
            s = dict(bound)
            s.update(zip(free, fill))
            out.add(tuple(s[x] for x in xs))
    return out


@settings(max_examples=60, deadline=None)
@given(automaton_and_sigma())
def test_upturn_matches_relation_level_upturn(case):
    a, xs, sigma = case
    got = upturn(a, sigma, xs).enumerate(4)
    assert got == upturn_oracle(a, xs, sigma, 4)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.sampled_from(ALPHA), max_size=6).map(tuple), min_size=1, max_size=4))
def test_convolution_round_trip(words):
    assert deconvolve(convolve(words), len(words)) == tuple(words)


def test_convolution_examples():
    assert convolve([("a", "b"), ("a",)]) == [("a", "a"), ("b", BLANK)]
    assert convolve([(), ()]) == []
    with pytest.raises(HoleError):
        deconvolve([(BLANK, "a"), ("b", "b")])


def test_upturn_identity_preserves_language():
    eq = equality_pair()
    assert upturn(eq, {"x": "x", "y": "y"}, ("x", "y")).enumerate(4) == eq.enumerate(4)


def test_cylindrify_leaves_new_component_free():
    dom = from_tuples(("x",), ALPHA, [("a",), ("ab",)])
    cyl = cylindrify(dom, ("x", "y"))
    expect = {(x, y) for x in [("a",), ("a", "b")] for y in words_upto(3)}
    assert cyl.enumerate(3) == expect


def test_projection_of_equality_is_domain():
    assert project_out(equality_pair(), ["y"]).enumerate(4) == universe(("x",), ALPHA).enumerate(4)
    assert project_onto(equality_pair(), ["y"]).enumerate(3) == {(w,) for w in words_upto(3)}


def test_boolean_identities():
    a = from_tuples(("x",), ALPHA, [("a",), ("bb",), ("",)])
    b = from_tuples(("x",), ALPHA, [("bb",), ("aa",)])
    e = empty(("x",), ALPHA)
    assert union(a, e).enumerate(3) == a.enumerate(3)
    assert intersection(a, a).enumerate(3) == a.enumerate(3)
    assert difference(union(a, b), b).enumerate(3) == difference(a, b).enumerate(3)
    u = universe(("x",), ALPHA)
    assert complement_within(e, u).enumerate(3) == u.enumerate(3)
    twice = complement_within(complement_within(a, u), u)
    assert twice.enumerate(3) == a.enumerate(3)


@settings(max_examples=40, deadline=None)
@given(random_automata(max_arity=2), random_automata(max_arity=2))
def test_de_morgan_within_universe(a, b):
    b = rename(b, dict(zip(b.components, a.components)))
    if b.arity != a.arity:
        return
    u = universe(a.components, ALPHA)
    lhs = complement_within(union(a, b), u)
    rhs = intersection(complement_within(a, u), complement_within(b, u))
    assert lhs.enumerate(4) == rhs.enumerate(4)
    assert determinize(a).enumerate(4) == a.enumerate(4)


def test_join_on_shared_component():
    eq = equality_pair()
    chain = join(eq, rename(eq, {"x": "y", "y": "z"}))
    assert chain.components == ("x", "y", "z")
    assert chain.enumerate(2) == {(w, w, w) for w in words_upto(2)}


def test_free_product_allows_unequal_lengths():
    dom = from_tuples(("x",), ALPHA, [("a",), ("ab",)])
    fp = free_product(dom, ("x", "y")).enumerate(4)
    lp = loose_product(dom, rename(dom, {"x": "y"})).enumerate(4)
    assert (("a",), ("a", "b")) in fp
    assert (("a",), ("a", "b")) not in lp
    assert all(len(x) == len(y) for x, y in lp)


def test_diagonal_and_loose_product():
    single = from_tuples(("x",), ALPHA, [("ab",)])
    assert diagonal(single).enumerate(3) == {(("a", "b"), ("a", "b"))}
    assert diagonal(empty(("x",), ALPHA)).is_empty()
    assert project_onto(diagonal(single), ["x"]).enumerate(3) == single.enumerate(3)
    ab = from_tuples(("x",), ALPHA, [("ab",)])
    cd = from_tuples(("y",), ("c", "d"), [("cd",)])
    assert loose_product(ab, cd).enumerate(3) == {(("a", "b"), ("c", "d"))}
    c = from_tuples(("y",), ("c",), [("c",)])
    assert loose_product(ab, c).is_empty()


def test_concat_via():
    first = TupleAutomaton(("x",), ALPHA, {(0, ("a",), 1)}, {0}, {1})
    second = TupleAutomaton(("x",), ALPHA, {(2, ("b",), 3)}, {2}, {3})
    assert concat_via(first, [], second).is_empty()
    joined = concat_via(first, [(1, ("b",), 2)], second)
    assert joined.enumerate(4) == {(("a", "b", "b"),)}
    with pytest.raises(ValueError):
        concat_via(first, [], first)


def test_queries_and_json():
    eq = equality_pair()
    assert eq.accepts([("a", "b"), ("a", "b")])
    assert not eq.accepts([("a", "b"), ("b", "a")])
    assert empty(("x",), ALPHA).is_empty()
    assert eq.witness() == ((), ())
    back = from_json(to_json(eq))
    assert back.enumerate(3) == eq.enumerate(3)
