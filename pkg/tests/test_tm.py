import json

import pytest

from lingraph import tm
from lingraph.derivation import derive_layers, filter_nonterminals, unix_check_bounded
from lingraph.model import classify_grammar, validate_grammar

MACHINES = tm.sample_machines()


def terminal_graphs(g, depth):
    return [x for layer in derive_layers(g, depth)[1:] for x in filter_nonterminals(layer, g.nonterminals).graphs]


@pytest.mark.parametrize("name", sorted(MACHINES))
def test_layers_follow_the_machine(name):
    t = MACHINES[name]
    r = tm.acceptance_agreement(t, 8)
    assert r.agree and r.fidelity
    assert r.machine_accepts == (name.startswith("accept"))
    assert r.layers == len(tm.run(t, 7))


@pytest.mark.parametrize("name", sorted(MACHINES))
def test_grammar_class_and_unix(name):
    g = tm.build_tm_grammar(MACHINES[name])
    assert validate_grammar(g) == []
    cls = classify_grammar(g)
    assert cls.edge_deterministic and not cls.vertex_deterministic and not cls.complete
    assert tm.unix_up_to(MACHINES[name], 8)


def test_simulation_halts_when_the_head_leaves_the_tape():
    t = tm.TuringMachine(("q0", "f"), ("1",), {("q0", "_"): tm.Rule("L", "f", "1")}, "q0", "f")
    assert len(tm.run(t, 5)) == 1
    assert not tm.acceptance_agreement(t, 5).grammar_accepts


def test_configurations_are_read_back():
    t = MACHINES["accept3"]
    layers = derive_layers(tm.build_tm_grammar(t), 4)
    confs = [tm.read_configuration(t, layer.graphs[0]) for layer in layers[1:]]
    assert confs == tm.run(t, 3)
    assert confs[-1].state == "f"


@pytest.mark.parametrize("name", sorted(MACHINES))
def test_blackout_language_is_one_diamond_path_iff_accepting(name):
    t = MACHINES[name]
    g = tm.extend_collapse(t, "blackout")
    assert unix_check_bounded(g, 8)[0]
    found = terminal_graphs(g, 9)
    if name.startswith("accept"):
        assert len(found) == 1
        (x,) = found
        assert set(x.vertex_labels.values()) == {tm.DIAMOND}
        assert tm.path_labels(x) == [tm.DIAMOND] * len(x.vertex_labels)
    else:
        assert found == []


@pytest.mark.parametrize("name", sorted(MACHINES))
def test_endpoint_collapse_reaches_two_isolated_vertices_iff_accepting(name):
    t = MACHINES[name]
    g = tm.extend_collapse(t, "endpoints")
    assert not g.nonterminals and unix_check_bounded(g, 9)[0]
    assert classify_grammar(g).edge_deterministic
    ends = [x for x in terminal_graphs(g, 9)
            if sorted(x.vertex_labels.values()) == [tm.LEFT_DONE, tm.RIGHT_DONE] and not x.incidences]
    assert bool(ends) == name.startswith("accept")


def test_collapse_needs_a_final_accepting_state():
    t = tm.TuringMachine(("q0", "f"), ("1",), {("q0", "_"): tm.Rule("R", "f", "1"),
                                               ("f", "_"): tm.Rule("R", "f", "1")}, "q0", "f")
    with pytest.raises(ValueError, match="no rules"):
        tm.extend_collapse(t)


def test_machine_json_round_trip_and_errors():
    t = MACHINES["accept5"]
    assert tm.machine_from_json(json.loads(json.dumps(tm.machine_to_json(t)))) == t
    data = tm.machine_to_json(t)
    data["rules"].append(dict(data["rules"][0]))
    with pytest.raises(ValueError, match="deterministic"):
        tm.machine_from_json(data)
    with pytest.raises(ValueError, match="reserved"):
        tm.TuringMachine(("q0", "f"), ("left",), {}, "q0", "f")
    with pytest.raises(ValueError, match="direction"):
        tm.TuringMachine(("q0", "f"), ("1",), {("q0", "1"): tm.Rule("U", "f", "1")}, "q0", "f")
