import pytest

from lingraph.derivation import complete_grammar, derive_layers
from lingraph.logic import Signature, free_vars, graph_structure, parse_formula, query_result, tau_translate
from lingraph.presentation import build_presentation
from lingraph.query import compile_query, model_check

QUERIES = [
    "A(x)",
    "~A(x)",
    "a(x,w,y)",
    "EX w y. a(x,w,y)",
    "~EX w y. a(y,w,x)",
    "EX w. (a(x,w,y) | a(y,w,x))",
    "A(x) & A(y) & x != y",
]


@pytest.fixture(scope="module")
def hypercube(grammar):
    g = grammar("hypercube")
    return g, build_presentation(g), derive_layers(g, 3)


@pytest.mark.parametrize("text", QUERIES)
def test_context_and_literal_strategies_agree(hypercube, text):
    g, p, _ = hypercube
    f = tau_translate(parse_formula(text, Signature.of_grammar(g)))
    variables = tuple(sorted(free_vars(f)))
    context = compile_query(p, f, variables, "context").enumerate(3)
    literal = compile_query(p, f, variables, "literal").enumerate(3)
    assert context == literal


@pytest.mark.parametrize("text", QUERIES)
def test_translated_queries_collect_layer_answers(hypercube, text):
    g, p, layers = hypercube
    f = parse_formula(text, Signature.of_grammar(g))
    variables = tuple(sorted(free_vars(f)))
    want = set()
    for layer in layers[1:]:
        for x in layer.graphs:
            want |= query_result(graph_structure(x, g.vertex_labels, g.edge_labels), f, variables)
    assert compile_query(p, tau_translate(f), variables).enumerate(3) == want


def test_sentences_over_the_whole_structure(grammar):
    g = complete_grammar(grammar("flip"))
    p = build_presentation(g)
    sig = Signature.of_grammar(g)
    assert model_check(p, parse_formula("EX x y. pre(x,y) & x != y", sig))
    assert not model_check(p, parse_formula("EX x. (A(x) & EX w y. a(x,w,y) & x = w)", sig))


def test_requested_variables_must_match(hypercube):
    g, p, _ = hypercube
    f = parse_formula("A(x)", Signature.of_grammar(g))
    with pytest.raises(ValueError):
        compile_query(p, f, ("y",))
    with pytest.raises(ValueError):
        compile_query(p, f, ("x",), "bogus")
