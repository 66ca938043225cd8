import pytest

from lingraph.derivation import complete_grammar, derive_layers
from lingraph.model import classify_grammar
from lingraph.presentation import (IncompleteGrammar, brute_force_structure, build_presentation, is_deterministic,
                                   presentation_tables, restrict_interpretation)


def presentable(grammar, name):
    g = grammar(name)
    return g if classify_grammar(g).complete else complete_grammar(g)


@pytest.mark.parametrize("name", ["flip", "flip_mixed", "grid", "hypercube", "extinction", "alternating"])
def test_presentation_matches_derivation(grammar, name):
    g = presentable(grammar, name)
    got = presentation_tables(build_presentation(g), 3)
    want = brute_force_structure(g, 3)
    for pred in sorted(set(got) | set(want)):
        assert got.get(pred) == want.get(pred), pred


def test_incomplete_grammar_needs_completion(grammar):
    with pytest.raises(IncompleteGrammar):
        build_presentation(grammar("flip"))
    p = build_presentation(grammar("flip"), auto_complete=True)
    assert {"i", "!"} <= p.synthetic


def test_base_relations_are_deterministic(grammar):
    p = build_presentation(grammar("grid"))
    for name in ("vrt", "edg", "A", "a", "b"):
        assert is_deterministic(p.relations[name]), name


def test_restriction_to_terminal_layers(grammar):
    g = grammar("alternating")
    p = restrict_interpretation(build_presentation(g), g.nonterminals)
    layers = derive_layers(g, 4)
    terminal = {(w,) for layer in layers[1:] for x in layer.graphs
                if "B" not in x.vertex_labels.values() for w in x.name_set}
    assert p.domain.enumerate(4) == terminal
    assert p.relations["B"].enumerate(4) == frozenset()
