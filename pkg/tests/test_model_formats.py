import json

import pytest

from lingraph import expanders as ex
from lingraph import tm
from lingraph.formats import (FormatError, dump_graph_json, format_grammar, graph_from_json, graph_to_dot,
                              graph_to_json, parse_grammar)
from lingraph.model import ConcreteGraph, Incidence, classify_grammar, completeness_gaps, graph_isomorphic, \
    validate_grammar, validate_graph, word

NAMES = ["flip", "flip_mixed", "grid", "hypercube", "extinction", "alternating", "stuck", "dormant", "fragile", "tm_accept3"]


def same_grammar(a, b):
    return (format_grammar(a) == format_grammar(b) and a.nonterminals == b.nonterminals
            and a.vertex_labels == b.vertex_labels and a.edge_labels == b.edge_labels)


@pytest.mark.parametrize("name", NAMES)
def test_shipped_grammars_validate_and_round_trip(grammar, name):
    g = grammar(name)
    assert validate_grammar(g) == []
    assert same_grammar(parse_grammar(format_grammar(g)), g)


@pytest.mark.parametrize("build", [
    lambda: tm.build_tm_grammar(tm.sample_machines()["accept3"]),
    lambda: tm.extend_collapse(tm.sample_machines()["accept3"], "endpoints"),
    lambda: ex.zigzag_grammar(ex.k5_pair_ported(), ex.square_on_pairs()),
    lambda: ex.two_lift_grammar(ex.complete_bipartite(3, 3)),
])
def test_generated_grammars_round_trip(build):
    g = build()
    assert validate_grammar(g) == []
    assert same_grammar(parse_grammar(format_grammar(g)), g)


def test_classification_of_examples(grammar):
    grid = classify_grammar(grammar("grid"))
    assert grid.complete and grid.deterministic and grid.non_erasing
    flip = classify_grammar(grammar("flip"))
    assert flip.edge_deterministic and not flip.vertex_deterministic and not flip.complete
    assert not classify_grammar(grammar("extinction")).non_erasing


def test_incomplete_grammar_reports_missing_edge_productions(grammar):
    gaps = completeness_gaps(grammar("flip"))
    assert any("G1 -a-> G2" in gap for gap in gaps)
    assert any("G2 -a-> G1" in gap for gap in gaps)


@pytest.mark.parametrize("text, fragment", [
    ("axiom A\nvprod P: A -> { v: 0:A }\nvprod P: A -> { v: 1:A }", "production-name"),
    ("axiom A\nvprod P: A -> { v: 0:A }\nvprod Q: A -> { v: 0:A }", "rhs-overlap"),
    ("axiom A\nvprod P: A -> { v: 0:A }\neprod E: P -a-> R { }", "edge-lhs"),
    ("axiom A\nvprod P: A -> { v: 0:A }\neprod E: P -a-> P { >a(0,e,9) }", "dangling-attachment"),
    ("axiom A\nvprod P: A -> { v: 0:A ; i: a(0,e,1) }", "dangling"),
])
def test_validation_diagnostics(text, fragment):
    assert any(d.code == fragment for d in validate_grammar(parse_grammar(text)))


def test_parse_errors_carry_line_numbers():
    with pytest.raises(FormatError, match="line 2"):
        parse_grammar("axiom A\nvprod broken")


def test_graph_json_round_trip_and_dot():
    g = ConcreteGraph({word("u"): "A", word("v"): "B"},
                      {Incidence("a", word("u"), word("e"), word("v"))})
    back = graph_from_json(json.loads(dump_graph_json(g)))
    assert graph_to_json(back) == graph_to_json(g)
    dot = graph_to_dot(g)
    assert dot.startswith("digraph") and "A" in dot and "a" in dot


def test_graph_validation_and_isomorphism():
    bad = ConcreteGraph({word("u"): "A"}, {Incidence("a", word("u"), word("u"), word("u"))})
    assert validate_graph(bad)
    g1 = ConcreteGraph({word("u"): "A", word("v"): "A"}, {Incidence("a", word("u"), word("e"), word("v"))})
    g2 = ConcreteGraph({word("x"): "A", word("y"): "A"}, {Incidence("a", word("y"), word("f"), word("x"))})
    g3 = ConcreteGraph({word("x"): "A", word("y"): "B"}, {Incidence("a", word("y"), word("f"), word("x"))})
    iso = graph_isomorphic(g1, g2)
    assert iso is not None and iso[word("u")] == word("y")
    assert graph_isomorphic(g1, g3) is None
