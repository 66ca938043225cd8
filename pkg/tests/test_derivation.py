from itertools import product

import pytest

from lingraph.derivation import (CapExceeded, children, complete_grammar, cooccurrence_incompatibility, derive_layers,
                                 enumerate_homomorphisms, filter_nonterminals, incompatibility, is_homomorphism,
                                 maximal_cliques, maximal_compatible_sets, unix_check_bounded)
from lingraph.model import classify_grammar, validate_grammar


def chain_choices(pairs, n):
    """Production choices along a three-vertex path whose consecutive pairs must be allowed."""
    return [c for c in product(("G1", "G2"), repeat=n) if all((c[k], c[k + 1]) in pairs for k in range(n - 1))]


def test_flip_layer_sizes(grammar):
    g = grammar("flip")
    layers = derive_layers(g, 3)
    same = {("G1", "G1"), ("G2", "G2")}
    assert [len(x) for x in layers] == [1, 1, len(chain_choices(same, 3)), 4]


def test_mixed_edge_production_admits_more_graphs(grammar):
    pairs = {("G1", "G1"), ("G2", "G2"), ("G1", "G2")}
    assert len(derive_layers(grammar("flip_mixed"), 2)[2]) == len(chain_choices(pairs, 3))


@pytest.mark.parametrize("name", ["flip", "flip_mixed"])
def test_completion_gives_every_vertex_choice(grammar, name):
    g = complete_grammar(grammar(name))
    assert validate_grammar(g) == []
    cls = classify_grammar(g)
    assert cls.complete and cls.edge_deterministic
    assert {"i", "!"} <= g.nonterminals and {"i", "!"} <= g.synthetic
    assert [len(x) for x in derive_layers(g, 3)] == [1, 1, 2 ** 3, 2 ** 6]


def test_completion_keeps_complete_grammars_layers(grammar):
    g = grammar("grid")
    gc = complete_grammar(g)
    for a, b in zip(derive_layers(g, 2), derive_layers(gc, 2)):
        assert [x.name_set for x in a.graphs] == [x.name_set for x in b.graphs]


def test_every_enumerated_homomorphism_is_valid(grammar):
    g = complete_grammar(grammar("flip_mixed"))
    for parent in derive_layers(g, 2)[2].graphs[:3]:
        hs = enumerate_homomorphisms(parent, g)
        assert hs and all(is_homomorphism(parent, h, g) for h in hs)
        assert len(list(children(parent, g))) == len(hs)


def test_unix_detects_multiple_derivations(grammar):
    assert unix_check_bounded(grammar("grid"), 3) == (True, None)
    assert unix_check_bounded(grammar("flip"), 3) == (False, 2)


def test_completion_can_break_unambiguity(grammar):
    # the competing vertex production only survives once completion supplies its edge productions
    g = grammar("fragile")
    assert classify_grammar(g).edge_deterministic
    assert unix_check_bounded(g, 4) == (True, None)
    assert unix_check_bounded(complete_grammar(g), 4) == (False, 2)


def test_nonterminal_layers_are_filtered(grammar):
    g = grammar("alternating")
    sizes = [len(filter_nonterminals(layer, g.nonterminals)) for layer in derive_layers(g, 5)[1:]]
    assert sizes == [1, 0, 1, 0, 1]


@pytest.mark.parametrize("name", ["flip", "flip_mixed"])
@pytest.mark.parametrize("level", [1, 2, 3])
def test_clause_incompatibility_equals_cooccurrence(grammar, name, level):
    g = complete_grammar(grammar(name))
    layers = derive_layers(g, level)
    assert incompatibility(g, level, layers=layers) == cooccurrence_incompatibility(layers[level])


@pytest.mark.parametrize("name", ["flip", "flip_mixed"])
def test_maximal_compatible_sets_are_the_graphs(grammar, name):
    g = complete_grammar(grammar(name))
    layers = derive_layers(g, 2)
    got = sorted(sorted(s) for s in maximal_compatible_sets(g, 2, layers=layers))
    assert got == sorted(sorted(x.name_set) for x in layers[2].graphs)


def test_maximal_cliques_small_graph():
    nodes = [("a",), ("b",), ("c",), ("d",)]
    edges = {(("a",), ("b",)), (("b",), ("c",)), (("a",), ("c",)), (("c",), ("d",))}
    adjacent = edges | {(y, x) for x, y in edges}
    assert maximal_cliques(nodes, adjacent) == [frozenset({("a",), ("b",), ("c",)}), frozenset({("c",), ("d",)})]


def test_caps_raise_and_honour_the_environment(grammar, monkeypatch):
    g = complete_grammar(grammar("flip"))
    with pytest.raises(CapExceeded):
        derive_layers(g, 3, cap=10)
    monkeypatch.setenv("LINGRAPH_CAP", "10")
    with pytest.raises(CapExceeded):
        derive_layers(g, 3)
