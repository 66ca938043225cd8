import json

import pytest

from lingraph.decisions import (MAX_PATTERN_ELEMENTS, UnsupportedGrammar, abstract_membership, check_accessibility,
                                check_emptiness, check_finiteness, check_usefulness, language_check,
                                pattern_sentence, usefulness_by_trigger)
from lingraph.derivation import derive_layers
from lingraph.logic import Const, FormulaError, Signature, graph_structure, parse_formula, satisfies
from lingraph.model import ConcreteGraph, Incidence, word


@pytest.mark.parametrize("name, finite", [("grid", False), ("hypercube", False), ("extinction", True),
                                          ("alternating", False), ("dormant", False)])
def test_finiteness(grammar, name, finite):
    assert check_finiteness(grammar(name)).verdict is finite


@pytest.mark.parametrize("name, empty", [("grid", False), ("extinction", False), ("stuck", True),
                                         ("alternating", False)])
def test_emptiness(grammar, name, empty):
    assert check_emptiness(grammar(name)).verdict is empty


def test_accessibility_separates_produced_labels(grammar):
    g = grammar("dormant")
    assert check_accessibility(g, "A").verdict and check_accessibility(g, "a").verdict
    assert not check_accessibility(g, "C").verdict
    assert not check_accessibility(grammar("alternating"), "B").verdict
    with pytest.raises(KeyError):
        check_accessibility(g, "Z")


@pytest.mark.parametrize("name", ["grid", "hypercube", "alternating", "extinction", "dormant"])
def test_usefulness_routes_agree(grammar, name):
    g = grammar(name)
    for prod in list(g.vprod) + list(g.eprod):
        assert check_usefulness(g, prod).verdict == usefulness_by_trigger(g, prod).verdict, prod


def test_dormant_production_is_useless(grammar):
    g = grammar("dormant")
    assert not check_usefulness(g, "PC").verdict
    assert all(check_usefulness(g, p).verdict for p in ("P0", "PA", "EA"))


def brute(g, text, depth=4):
    f = parse_formula(text, Signature.of_grammar(g))
    for layer in derive_layers(g, depth):
        for x in layer.graphs:
            labels = set(x.vertex_labels.values()) | {i.label for i in x.incidences}
            if not labels & g.nonterminals and satisfies(graph_structure(x, g.vertex_labels, g.edge_labels), f, {}):
                return True
    return False


@pytest.mark.parametrize("name, text", [
    ("alternating", "EX x y w. a(x,w,y)"),
    ("alternating", "EX x w. a(x,w,x)"),
    ("extinction", "ALL x. B(x)"),
    ("extinction", "EX x. A(x) & ~EX y. y != x"),
    ("hypercube", "EX x y z w v. a(x,w,y) & a(y,v,z) & x != z"),
])
def test_language_check_agrees_with_bounded_search(grammar, name, text):
    g = grammar(name)
    f = parse_formula(text, Signature.of_grammar(g))
    assert language_check(g, f).verdict == brute(g, text)


def test_empty_graph_counts_only_when_derived(grammar):
    assert language_check(grammar("extinction"), parse_formula("ALL x. A(x) & B(x)")).verdict
    assert not language_check(grammar("stuck"), Const(True)).verdict


def test_language_check_rejects_open_formulas_and_nondeterminism(grammar):
    with pytest.raises(FormulaError):
        language_check(grammar("grid"), parse_formula("A(x)"))
    with pytest.raises(UnsupportedGrammar, match="D0L"):
        language_check(grammar("flip"), Const(True))


def test_pattern_sentence_characterizes_isomorphism_class():
    h = ConcreteGraph({word("u"): "A", word("v"): "A"}, {Incidence("a", word("u"), word("e"), word("v"))})
    f = pattern_sentence(h)
    same = ConcreteGraph({word("p"): "A", word("q"): "A"}, {Incidence("a", word("q"), word("r"), word("p"))})
    extra = ConcreteGraph({**same.vertex_labels, word("s"): "A"}, same.incidences)
    assert satisfies(graph_structure(same), f, {})
    assert not satisfies(graph_structure(extra), f, {})


def test_membership(grammar):
    g = grammar("alternating")
    layers = derive_layers(g, 3)
    x = layers[3].graphs[0]
    assert abstract_membership(g, x).verdict
    looped = ConcreteGraph(x.vertex_labels, {Incidence(i.label, i.src, i.edge, i.src) for i in x.incidences})
    assert not abstract_membership(g, looped).verdict
    assert not abstract_membership(g, ConcreteGraph({word("u"): "Q"})).verdict


def test_membership_refuses_large_patterns(grammar):
    big = ConcreteGraph({word(f"v{k}"): "A" for k in range(MAX_PATTERN_ELEMENTS + 1)})
    with pytest.raises(ValueError, match="at most"):
        abstract_membership(grammar("grid"), big)


def test_reports_serialize(grammar):
    r = check_finiteness(grammar("extinction"))
    data = json.loads(json.dumps(r.to_json()))
    assert data["verdict"] is True and data["answer"] == "finite" and data["trace"]
