import json

import pytest
from click.testing import CliRunner

from lingraph.cli import EXIT_CAP, EXIT_INVALID, EXIT_IO, EXIT_UNSUPPORTED, main

from conftest import DATA, GRAMMARS


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_version():
    r = run("--version")
    assert r.exit_code == 0 and r.output.strip()


def test_validate_valid_and_invalid(tmp_path):
    assert run("grammar", "validate", GRAMMARS / "flip.0lg").exit_code == 0
    bad = tmp_path / "bad.0lg"
    bad.write_text("axiom A\nvprod P: A -> { v: 0:A }\nvprod Q: A -> { v: 0:A }\n")
    r = run("grammar", "validate", bad)
    assert r.exit_code == EXIT_INVALID


def test_missing_file_is_io_error(tmp_path):
    assert run("grammar", "classify", tmp_path / "nope.0lg").exit_code == EXIT_IO


def test_parse_error_is_invalid(tmp_path):
    bad = tmp_path / "bad.0lg"
    bad.write_text("this is not a grammar\n")
    assert run("grammar", "classify", bad).exit_code == EXIT_INVALID


def test_classify_json():
    r = run("grammar", "classify", GRAMMARS / "grid.0lg", "--json")
    assert r.exit_code == 0
    data = json.loads(r.output)
    assert data["edge_deterministic"] and data["vertex_deterministic"]


def test_complete_writes_parseable_grammar(tmp_path):
    out = tmp_path / "c.0lg"
    assert run("grammar", "complete", GRAMMARS / "flip.0lg", "-o", out).exit_code == 0
    r = run("grammar", "classify", out, "--json")
    assert json.loads(r.output)["complete"]


def test_derive_writes_layers_and_manifest(tmp_path):
    out = tmp_path / "layers"
    r = run("grammar", "derive", GRAMMARS / "hypercube.0lg", "--depth", 3, "--out", out)
    assert r.exit_code == 0, r.output
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["artifacts"] == ["layer1_graph0.json", "layer2_graph0.json", "layer3_graph0.json"]
    assert len(manifest["inputs"]) == 1
    layer3 = json.loads((out / "layer3_graph0.json").read_text())
    assert len(layer3["vertices"]) == 8


def test_derive_dot(tmp_path):
    out = tmp_path / "dot"
    assert run("grammar", "derive", GRAMMARS / "grid.0lg", "--depth", 2, "--format", "dot", "--out", out).exit_code == 0
    assert (out / "layer2_graph0.dot").read_text().startswith("digraph")


def test_derive_cap_exceeded(tmp_path):
    done = tmp_path / "c.0lg"
    run("grammar", "complete", GRAMMARS / "flip.0lg", "-o", done)
    r = run("grammar", "derive", done, "--depth", 3, "--cap", 10, "--out", tmp_path / "x")
    assert r.exit_code == EXIT_CAP


def test_compat_json(tmp_path):
    done = tmp_path / "c.0lg"
    run("grammar", "complete", GRAMMARS / "flip.0lg", "-o", done)
    r = run("grammar", "compat", done, "--layer", 2, "--json")
    assert r.exit_code == 0
    data = json.loads(r.output)
    assert data["agrees_with_cooccurrence"] and data["cliques_equal_name_sets"]


def test_compat_needs_completion_to_match():
    # without edge productions for every label pair, co-occurring names can still be marked incompatible
    data = json.loads(run("grammar", "compat", GRAMMARS / "flip.0lg", "--layer", 2, "--json").output)
    assert not data["agrees_with_cooccurrence"]


def test_present_writes_automata(tmp_path):
    out = tmp_path / "p"
    r = run("present", GRAMMARS / "hypercube.0lg", "--out", out)
    assert r.exit_code == 0, r.output
    manifest = json.loads((out / "manifest.json").read_text())
    assert "domain.json" in manifest["artifacts"]
    assert json.loads((out / "domain.json").read_text())["components"] == ["x"]


def test_present_incomplete_needs_flag(tmp_path):
    assert run("present", GRAMMARS / "flip.0lg", "--out", tmp_path / "a").exit_code == EXIT_UNSUPPORTED
    assert run("present", GRAMMARS / "flip.0lg", "--out", tmp_path / "b", "--auto-complete").exit_code == 0


@pytest.mark.parametrize("name,answer", [("grid", False), ("hypercube", False), ("extinction", True)])
def test_check_finite(name, answer):
    r = run("check", "finite", GRAMMARS / f"{name}.0lg", "--json")
    assert r.exit_code == 0
    assert json.loads(r.output)["verdict"] is answer


def test_check_empty_and_useful():
    assert json.loads(run("check", "empty", GRAMMARS / "stuck.0lg", "--json").output)["verdict"] is True
    assert json.loads(run("check", "empty", GRAMMARS / "grid.0lg", "--json").output)["verdict"] is False
    r = run("check", "useful", GRAMMARS / "dormant.0lg", "PC", "--json")
    assert r.exit_code == 0 and json.loads(r.output)["verdict"] is False


def test_check_accessible():
    r = run("check", "accessible", GRAMMARS / "dormant.0lg", "C", "--json")
    assert r.exit_code == 0 and json.loads(r.output)["verdict"] is False


def test_check_sentence():
    r = run("check", "sentence", GRAMMARS / "hypercube.0lg", "--sentence", "EX x. A(x)", "--json")
    assert r.exit_code == 0 and json.loads(r.output)["verdict"] is True


def test_check_sentence_unsupported_on_tm_grammar():
    r = run("check", "sentence", GRAMMARS / "tm_accept3.0lg", "--sentence", "EX x. f__(x)")
    assert r.exit_code == EXIT_UNSUPPORTED


def test_check_sentence_bad_formula():
    r = run("check", "sentence", GRAMMARS / "hypercube.0lg", "--sentence", "EX x. Q(x)")
    assert r.exit_code == EXIT_INVALID


def test_check_query_witness():
    r = run("check", "query", GRAMMARS / "hypercube.0lg", "--formula", "EX y e. a(x, e, y)", "--json")
    assert r.exit_code == 0
    data = json.loads(r.output)
    assert data["nonempty"] and data["variables"] == ["x"] and len(data["witness"]) == 1


def test_check_member(tmp_path):
    out = tmp_path / "layers"
    run("grammar", "derive", GRAMMARS / "hypercube.0lg", "--depth", 1, "--out", out)
    r = run("check", "member", GRAMMARS / "hypercube.0lg", "--graph", out / "layer1_graph0.json", "--json")
    assert r.exit_code == 0, r.output
    assert json.loads(r.output)["verdict"] is True


def test_tm_reduce_run_agree(tmp_path):
    machine = DATA / "machines" / "accept3.json"
    out = tmp_path / "tm.0lg"
    assert run("tm", "reduce", machine, "-o", out).exit_code == 0
    assert run("grammar", "validate", out).exit_code == 0
    r = run("tm", "run", machine, "--steps", 3)
    assert r.exit_code == 0 and r.output.count("\n") >= 2
    data = json.loads(run("tm", "agree", machine, "--depth", 8, "--json").output)
    assert data["agree"] and data["fidelity"] and data["grammar_accepts"]


def test_tm_reduce_collapse(tmp_path):
    out = tmp_path / "b.0lg"
    assert run("tm", "reduce", DATA / "machines" / "accept1.json", "--collapse", "blackout", "-o", out).exit_code == 0
    assert "sz" in out.read_text()


def test_tm_bad_machine(tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text("{\"states\": []}")
    assert run("tm", "run", bad).exit_code == EXIT_INVALID


def test_expander_analyze():
    r = run("expander", "analyze", "--graph", DATA / "graphs" / "k4.json", "--checks", "spectrum,cheeger,ramanujan",
            "--json")
    assert r.exit_code == 0, r.output
    data = json.loads(r.output)
    assert data["cheeger"] == "2" and data["ramanujan"] is True


def test_expander_analyze_unknown_check():
    r = run("expander", "analyze", "--graph", DATA / "graphs" / "k4.json", "--checks", "nope")
    assert r.exit_code == EXIT_INVALID


def test_expander_gen_zigzag(tmp_path):
    out = tmp_path / "zz"
    r = run("expander", "gen", "--kind", "zigzag", "--g0", DATA / "graphs" / "k5_pairs.json",
            "--h", DATA / "graphs" / "looped_path_pairs.json", "--depth", 1, "--out", out)
    assert r.exit_code == 0, r.output
    depth1 = json.loads((out / "depth1.json").read_text())
    assert len(depth1["vertices"]) == 20
    assert (out / "grammar.0lg").exists() and (out / "manifest.json").exists()


def test_expander_gen_lift(tmp_path):
    out = tmp_path / "lift"
    r = run("expander", "gen", "--kind", "2-lift", "--g0", DATA / "graphs" / "k33.json", "--out", out)
    assert r.exit_code == 0, r.output
    assert "ramanujan True" in r.output.splitlines()[-1]


def test_expander_gen_cap(tmp_path):
    r = run("expander", "gen", "--kind", "2-lift", "--g0", DATA / "graphs" / "k33.json", "--cap", 16,
            "--out", tmp_path / "c")
    assert r.exit_code == EXIT_CAP
