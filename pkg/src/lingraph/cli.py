"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 file error, 3 enumeration cap exceeded, 4 grammar class unsupported.
"""
from __future__ import annotations

import functools
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import click

from . import __version__
from . import automata as au
from . import expanders as ex
from . import tm as tmr
from .decisions import (UnsupportedGrammar, abstract_membership, check_accessibility, check_emptiness,
                        check_finiteness, check_usefulness, language_check)
from .derivation import (CapExceeded, complete_grammar, cooccurrence_incompatibility, derive_layers,
                         filter_nonterminals, incompatibility, maximal_compatible_sets)
from .formats import FormatError, format_grammar, graph_from_json, graph_to_dot, graph_to_json, load_grammar
from .logic import FormulaError, Signature, free_vars, parse_formula
from .model import classify_grammar, show_word, validate_grammar
from .presentation import IncompleteGrammar, build_presentation
from .query import compile_query

EXIT_INVALID, EXIT_IO, EXIT_CAP, EXIT_UNSUPPORTED = 1, 2, 3, 4


@dataclass
class RunManifest:
    command: str
    inputs: dict[str, str] = field(default_factory=dict)
    version: str = __version__
    elapsed_seconds: float = 0.0
    artifacts: list[str] = field(default_factory=list)

    def add_input(self, path: str) -> None:
        self.inputs[str(path)] = hashlib.sha256(Path(path).read_bytes()).hexdigest()

    def write(self, out_dir: Path, started: float) -> Path:
        self.elapsed_seconds = round(time.perf_counter() - started, 3)
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=1, sort_keys=True) + "\n")
        return path


def _fail(code: int, message: str) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def handled(fn):
    """Map library exceptions onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (UnsupportedGrammar, IncompleteGrammar) as exc:
            _fail(EXIT_UNSUPPORTED, f"unsupported: {exc}. Language checking is decidable for D0L grammars "
                                    "(non-terminals allowed) and model checking for complete grammars; "
                                    "for unix eD0L grammars it is undecidable in general.")
        except CapExceeded as exc:
            _fail(EXIT_CAP, f"cap exceeded: {exc} (raise --cap or LINGRAPH_CAP)")
        except OSError as exc:
            _fail(EXIT_IO, f"file error: {exc}")
        except (FormatError, FormulaError, KeyError, ValueError, json.JSONDecodeError) as exc:
            _fail(EXIT_INVALID, f"invalid input: {exc}")

    return wrapper


def _grammar(path: str):
    g = load_grammar(path)
    problems = validate_grammar(g)
    if problems:
        raise FormatError("; ".join(str(p) for p in problems))
    return g


def _emit(data, as_json: bool, text: str) -> None:
    click.echo(json.dumps(data, indent=1, sort_keys=True) if as_json else text)


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Derive, present and decide properties of 0L graph grammars."""


# --- grammar --------------------------------------------------------------------------------

@main.group()
def grammar() -> None:
    """Grammar files: validation, classification, completion, derivation."""


@grammar.command("validate")
@click.argument("path", type=click.Path())
@handled
def grammar_validate(path: str) -> None:
    problems = validate_grammar(load_grammar(path))
    for p in problems:
        click.echo(str(p))
    if problems:
        sys.exit(EXIT_INVALID)
    click.echo("valid")


@grammar.command("classify")
@click.argument("path", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
@handled
def grammar_classify(path: str, as_json: bool) -> None:
    cls = classify_grammar(_grammar(path))
    _emit(asdict(cls), as_json, cls.summary())


@grammar.command("complete")
@click.argument("path", type=click.Path())
@click.option("-o", "--output", type=click.Path(), help="write here instead of standard output")
@handled
def grammar_complete(path: str, output: Optional[str]) -> None:
    text = format_grammar(complete_grammar(_grammar(path)))
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


@grammar.command("derive")
@click.argument("path", type=click.Path())
@click.option("--depth", type=int, required=True)
@click.option("--cap", type=int, default=None)
@click.option("--nonterminals", default="", help="comma-separated labels whose graphs are dropped")
@click.option("--format", "fmt", type=click.Choice(["dot", "json"]), default="json")
@click.option("--out", type=click.Path(), default=None, help="output directory (default: <stem>_layers)")
@handled
def grammar_derive(path: str, depth: int, cap: Optional[int], nonterminals: str, fmt: str, out: Optional[str]) -> None:
    started = time.perf_counter()
    g = _grammar(path)
    out_dir = Path(out or f"{Path(path).stem}_layers")
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(f"grammar derive --depth {depth} --format {fmt}")
    manifest.add_input(path)
    n = [x for x in nonterminals.split(",") if x] or sorted(g.nonterminals)
    for layer in derive_layers(g, depth, cap)[1:]:
        layer = filter_nonterminals(layer, n)
        for k, graph in enumerate(layer.graphs):
            name = f"layer{layer.depth}_graph{k}.{fmt}"
            text = graph_to_dot(graph, name) if fmt == "dot" else json.dumps(graph_to_json(graph), indent=1,
                                                                              sort_keys=True) + "\n"
            (out_dir / name).write_text(text)
            manifest.artifacts.append(name)
    manifest.write(out_dir, started)
    click.echo(f"{len(manifest.artifacts)} graphs written to {out_dir}")


@grammar.command("compat")
@click.argument("path", type=click.Path())
@click.option("--layer", "l", type=int, required=True)
@click.option("--json", "as_json", is_flag=True)
@handled
def grammar_compat(path: str, l: int, as_json: bool) -> None:
    g = _grammar(path)
    layers = derive_layers(g, l)
    chi = incompatibility(g, l, layers=layers)
    direct = cooccurrence_incompatibility(layers[l])
    sets = maximal_compatible_sets(g, l, layers=layers)
    names = sorted(x.name_set for x in layers[l].graphs)
    data = {"layer": l, "incompatible": [[list(a), list(b)] for a, b in sorted(chi)],
            "agrees_with_cooccurrence": chi == direct,
            "maximal_compatible_sets": [sorted(list(w) for w in s) for s in sets],
            "cliques_equal_name_sets": sorted(map(sorted, sets)) == sorted(map(sorted, names))}
    text = "\n".join([f"layer {l}: {len(chi)} incompatible ordered pairs",
                      f"agrees with co-occurrence: {data['agrees_with_cooccurrence']}",
                      f"maximal compatible sets: {len(sets)}",
                      f"cliques equal name sets: {data['cliques_equal_name_sets']}"]
                     + ["  {" + ", ".join(show_word(w) for w in sorted(s)) + "}" for s in sets])
    _emit(data, as_json, text)


# --- presentation ---------------------------------------------------------------------------

@main.command("present")
@click.argument("path", type=click.Path())
@click.option("--out", type=click.Path(), default=None, help="output directory (default: <stem>_presentation)")
@click.option("--auto-complete", is_flag=True, help="complete the grammar first when it is not complete")
@handled
def present(path: str, out: Optional[str], auto_complete: bool) -> None:
    """Write the automata of the whole-language structure as JSON."""
    started = time.perf_counter()
    g = _grammar(path)
    p = build_presentation(g, auto_complete=auto_complete)
    out_dir = Path(out or f"{Path(path).stem}_presentation")
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("present" + (" --auto-complete" if auto_complete else ""))
    manifest.add_input(path)
    items = {"domain": p.domain, **p.relations}
    for name, a in sorted(items.items()):
        fname = f"{name}.json"
        (out_dir / fname).write_text(au.dumps(a) + "\n")
        manifest.artifacts.append(fname)
    manifest.write(out_dir, started)
    click.echo(f"{len(items)} automata written to {out_dir}")


# --- decisions ------------------------------------------------------------------------------

@main.group()
def check() -> None:
    """Decision procedures."""


def _report(report, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(report.to_json(), indent=1, sort_keys=True))
        return
    click.echo(report.answer)
    for stage, formula in report.trace:
        click.echo(f"  {stage}: {formula}")


_json_flag = click.option("--json", "as_json", is_flag=True)


@check.command("finite")
@click.argument("path", type=click.Path())
@_json_flag
@handled
def check_finite(path: str, as_json: bool) -> None:
    _report(check_finiteness(_grammar(path)), as_json)


@check.command("empty")
@click.argument("path", type=click.Path())
@_json_flag
@handled
def check_empty(path: str, as_json: bool) -> None:
    _report(check_emptiness(_grammar(path)), as_json)


@check.command("accessible")
@click.argument("path", type=click.Path())
@click.argument("label")
@_json_flag
@handled
def check_accessible(path: str, label: str, as_json: bool) -> None:
    _report(check_accessibility(_grammar(path), label), as_json)


@check.command("useful")
@click.argument("path", type=click.Path())
@click.argument("production")
@_json_flag
@handled
def check_useful(path: str, production: str, as_json: bool) -> None:
    _report(check_usefulness(_grammar(path), production), as_json)


@check.command("sentence")
@click.argument("path", type=click.Path())
@click.option("--sentence", required=True)
@_json_flag
@handled
def check_sentence(path: str, sentence: str, as_json: bool) -> None:
    g = _grammar(path)
    _report(language_check(g, parse_formula(sentence, Signature.of_grammar(g))), as_json)


@check.command("member")
@click.argument("path", type=click.Path())
@click.option("--graph", "graph_path", type=click.Path(), required=True, help="graph JSON")
@_json_flag
@handled
def check_member(path: str, graph_path: str, as_json: bool) -> None:
    h = graph_from_json(json.loads(Path(graph_path).read_text()))
    _report(abstract_membership(_grammar(path), h), as_json)


@check.command("query")
@click.argument("path", type=click.Path())
@click.option("--formula", required=True)
@click.option("--auto-complete", is_flag=True)
@_json_flag
@handled
def check_query(path: str, formula: str, auto_complete: bool, as_json: bool) -> None:
    """Evaluate a formula on the whole-language structure and print its least answer tuple."""
    g = _grammar(path)
    p = build_presentation(g, auto_complete=auto_complete)
    f = parse_formula(formula, Signature.of_grammar(p.grammar))
    variables = tuple(sorted(free_vars(f)))
    a = compile_query(p, f, variables)
    witness = a.witness()
    data = {"formula": str(f), "variables": list(variables), "nonempty": not a.is_empty(),
            "states": len(a.states), "witness": None if witness is None else [list(w) for w in witness]}
    text = "yes" if data["nonempty"] else "no"
    if witness is not None and variables:
        text += "\n  " + ", ".join(f"{v} = {show_word(w)}" for v, w in zip(variables, witness))
    _emit(data, as_json, text)


# --- expanders ------------------------------------------------------------------------------

@main.group()
def expander() -> None:
    """Lift and product grammars and spectral certificates."""


def _load_any_graph(path: str):
    data = json.loads(Path(path).read_text())
    if "rotation" in data:
        return ex.rotation_from_json(data)
    return graph_from_json(data)


def _matrix(obj):
    """Rotation graphs and port-labelled twin-incidence graphs count ports; other graphs count incidences both ways."""
    if isinstance(obj, ex.RotationGraph):
        return obj.adjacency()
    try:
        return ex.graph_to_rotation(obj).adjacency()
    except ValueError:
        return ex.undirected_adjacency(obj)[1]


@expander.command("gen")
@click.option("--kind", type=click.Choice(["2-lift", "4-lift", *ex.PRODUCT_KINDS]), required=True)
@click.option("--g0", "g0_path", type=click.Path(), required=True,
              help="base graph: graph JSON for lifts, rotation JSON for products")
@click.option("--h", "h_path", type=click.Path(), default=None, help="rotation JSON of the small graph")
@click.option("--depth", type=int, default=1)
@click.option("--out", type=click.Path(), default=None)
@click.option("--cap", type=int, default=4096, help="most lift children examined per step")
@handled
def expander_gen(kind: str, g0_path: str, h_path: Optional[str], depth: int, out: Optional[str], cap: int) -> None:
    """Write the grammar and its derived graphs; lifts follow the child with the least second eigenvalue."""
    started = time.perf_counter()
    out_dir = Path(out or f"{kind}_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(f"expander gen --kind {kind} --depth {depth}")
    manifest.add_input(g0_path)
    if kind in ("2-lift", "4-lift"):
        base = _load_any_graph(g0_path)
        if isinstance(base, ex.RotationGraph):
            base = ex.single_incidences(ex.rotation_to_graph(base)[0])
        g = ex.two_lift_grammar(base) if kind == "2-lift" else ex.shift4_lift_grammar(base)
        current = g.vprod["P0"].rhs
        graphs = [current]
        for _ in range(depth):
            copies = 2 if kind == "2-lift" else 4
            count = copies ** len(ex.single_incidences(current).incidences)
            if count > cap:
                raise CapExceeded(f"{count} lift children exceed the cap {cap}")
            kids = ex.lift_children(current, kind)
            current = min(kids, key=lambda c: (ex.spectrum_of(_matrix(c)).second, sorted(c.name_set)))
            graphs.append(current)
    else:
        if h_path is None:
            raise ValueError("products need --h")
        manifest.add_input(h_path)
        g0, h = ex.load_rotation(g0_path), ex.load_rotation(h_path)
        g = ex.product_grammar(kind, g0, h)
        graphs = [layer.graphs[0] for layer in derive_layers(g, depth + 1)[1:]]
    (out_dir / "grammar.0lg").write_text(format_grammar(g))
    manifest.artifacts.append("grammar.0lg")
    for k, graph in enumerate(graphs):
        name = f"depth{k}.json"
        (out_dir / name).write_text(json.dumps(graph_to_json(graph), indent=1, sort_keys=True) + "\n")
        manifest.artifacts.append(name)
        s = ex.spectrum_of(_matrix(graph))
        click.echo(f"depth {k}: {len(graph.vertex_labels)} vertices, degree {s.degree}, "
                   f"second eigenvalue {s.second:.6f}, ramanujan {ex.ramanujan_check(_matrix(graph))}")
    manifest.write(out_dir, started)


@expander.command("analyze")
@click.option("--graph", "graph_path", type=click.Path(), required=True, help="rotation JSON or graph JSON")
@click.option("--checks", default="spectrum,ramanujan", help="comma list of spectrum,cheeger,ramanujan,isoperimetric,bounds")
@click.option("--kind", type=click.Choice(ex.PRODUCT_KINDS), default=None, help="product kind for the bounds check")
@click.option("--parent", "parent_path", type=click.Path(), default=None, help="graph the product was formed from")
@click.option("--h", "h_path", type=click.Path(), default=None, help="small graph of the product")
@_json_flag
@handled
def expander_analyze(graph_path: str, checks: str, kind: Optional[str], parent_path: Optional[str],
                     h_path: Optional[str], as_json: bool) -> None:
    m = _matrix(_load_any_graph(graph_path))
    wanted = [c for c in checks.split(",") if c]
    unknown = set(wanted) - {"spectrum", "cheeger", "ramanujan", "isoperimetric", "bounds"}
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}")
    s = ex.spectrum_of(m)
    data: dict = {"convention": "spectrum unnormalized; normalized values divide by the degree"}
    lines = []
    if "spectrum" in wanted:
        data["spectrum"] = s.to_json()
        lines.append(f"degree {s.degree}, second eigenvalue {s.second:.6f}, normalized {s.normalized:.6f}")
    if "ramanujan" in wanted:
        data["ramanujan"] = ex.ramanujan_check(m)
        lines.append(f"ramanujan (unnormalized second <= 2 sqrt(d-1)): {'yes' if data['ramanujan'] else 'no'}")
    if "cheeger" in wanted:
        data["cheeger"] = str(ex.cheeger(m))
        lines.append(f"cheeger constant {data['cheeger']}")
    if "isoperimetric" in wanted:
        rep = ex.isoperimetric_check(m)
        data["isoperimetric"] = rep.to_json()
        lines.append(f"isoperimetric {rep.lower:.6f} <= {rep.cheeger} <= {rep.upper:.6f}: {rep.holds}")
    if "bounds" in wanted:
        if not (kind and parent_path and h_path):
            raise ValueError("the bounds check needs --kind, --parent and --h")
        l1 = ex.spectrum_of(_matrix(_load_any_graph(parent_path))).normalized_abs
        hs = ex.lambda2(ex.load_rotation(h_path))
        bound = ex.lambda_bound(kind, l1, hs.normalized_abs, hs.degree)
        data["bounds"] = {"kind": kind, "bound": bound, "normalized": s.normalized, "normalized_abs": s.normalized_abs,
                          "holds": s.normalized_abs <= bound + 1e-6}
        lines.append(f"{kind} bound {bound:.6f} vs normalized {s.normalized_abs:.6f}: {data['bounds']['holds']}")
    _emit(data, as_json, "\n".join(lines))


# --- Turing machines ------------------------------------------------------------------------

@main.group()
def tm() -> None:
    """Grammars simulating deterministic Turing machines."""


@tm.command("reduce")
@click.argument("path", type=click.Path())
@click.option("--collapse", type=click.Choice(["none", "blackout", "endpoints"]), default="none")
@click.option("-o", "--output", type=click.Path(), default=None)
@handled
def tm_reduce(path: str, collapse: str, output: Optional[str]) -> None:
    t = tmr.load_machine(path)
    g = tmr.build_tm_grammar(t) if collapse == "none" else tmr.extend_collapse(t, collapse)
    text = format_grammar(g)
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


@tm.command("agree")
@click.argument("path", type=click.Path())
@click.option("--depth", type=int, default=8)
@_json_flag
@handled
def tm_agree(path: str, depth: int, as_json: bool) -> None:
    r = tmr.acceptance_agreement(tmr.load_machine(path), depth)
    text = (f"grammar reaches the accepting state within depth {depth}: {'yes' if r.grammar_accepts else 'no'}\n"
            f"machine accepts within {depth - 1} steps: {'yes' if r.machine_accepts else 'no'}\n"
            f"agree: {r.agree}; configurations match: {r.fidelity}; nonempty layers: {r.layers}")
    _emit(r.to_json(), as_json, text)


@tm.command("run")
@click.argument("path", type=click.Path())
@click.option("--steps", type=int, default=8)
@handled
def tm_run(path: str, steps: int) -> None:
    t = tmr.load_machine(path)
    for k, c in enumerate(tmr.run(t, steps)):
        cells = [f"[{x}]" if j == c.head else x for j, x in enumerate(c.tape + (t.blank,) * (c.head + 1 - len(c.tape)))]
        click.echo(f"{k}: {c.state} {' '.join(cells)}")


if __name__ == "__main__":
    main()
