"""Decision procedures on grammars by model checking the whole-language structure."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .derivation import complete_grammar, fresh_name
from .logic import (And, Atom, Const, Exists, FiniteStructure, Forall, Formula, FormulaError, FreshNames, Implies,
                    Not, Or, Signature, anchored_translate, conj, disj, free_vars, nonterminal_guard, satisfies)
from .model import ConcreteGraph, Grammar, VertexProduction, classify_grammar, validate_graph
from .presentation import Presentation, build_presentation
from .query import compile_query, nonterminal_free_layer

# the pattern sentence quantifies one variable per element; compilation cost grows exponentially with it
MAX_PATTERN_ELEMENTS = 6


class UnsupportedGrammar(ValueError):
    """The grammar lies outside the class a procedure is sound for."""


@dataclass
class DecisionReport:
    question: str
    verdict: bool
    answer: str
    witness: Optional[object] = None
    trace: list[tuple[str, str]] = field(default_factory=list)
    states: int = 0

    def to_json(self) -> dict:
        return {"question": self.question, "verdict": self.verdict, "answer": self.answer,
                "witness": None if self.witness is None else [list(w) for w in self.witness],
                "trace": [{"stage": s, "formula": f} for s, f in self.trace], "states": self.states}


@dataclass(frozen=True)
class Prepared:
    """A presentable grammar plus the labels whose layers must be excluded."""

    grammar: Grammar
    nonterminals: frozenset[str]
    presentation: Presentation

    def terminal(self, var: str, fresh: FreshNames) -> Formula:
        g = self.grammar
        return nonterminal_free_layer(self.nonterminals, g.vertex_labels, g.edge_labels, var, fresh)

    def check(self, sentence: Formula) -> tuple[bool, int, Optional[tuple]]:
        a = compile_query(self.presentation, sentence, ())
        return (not a.is_empty()), len(a.states), None


def prepare(g: Grammar, deterministic_only: bool = False) -> Prepared:
    """Complete grammars without non-terminals are used as they are; D0L grammars are completed when needed."""
    cls = classify_grammar(g)
    if cls.complete and not g.nonterminals and not deterministic_only:
        return Prepared(g, frozenset(), build_presentation(g))
    if not cls.deterministic:
        need = "a D0L grammar" if deterministic_only else "a complete grammar without non-terminals or a D0L grammar"
        raise UnsupportedGrammar(f"this procedure needs {need}; got: {cls.summary()}")
    gc = g if cls.complete else complete_grammar(g)
    return Prepared(gc, frozenset(gc.nonterminals), build_presentation(gc))


# --- building blocks -------------------------------------------------------------------

def _terminal_exists(prep: Prepared, fresh: FreshNames, body_of) -> Formula:
    x = fresh("x")
    return Exists((x,), And(prep.terminal(x, fresh), body_of(x)))


def _strictly_later(x: str, z: str, fresh: FreshNames) -> Formula:
    """``z`` lies in a later layer than ``x``."""
    y = fresh("y")
    return Exists((y,), conj([Atom("pre", (y, z)), Atom("sl", (x, y)), Not(Atom("=", (y, z)))]))


def infinitely_many_layers(prep: Prepared, fresh: Optional[FreshNames] = None) -> Formula:
    """Terminal layers with elements exist and each is followed by a later one."""
    fresh = fresh or FreshNames()
    x, z = fresh("x"), fresh("z")
    later = Exists((z,), And(prep.terminal(z, fresh), _strictly_later(x, z, fresh)))
    some = _terminal_exists(prep, fresh, lambda v: Atom("=", (v, v)))
    return And(some, Forall((x,), Implies(prep.terminal(x, fresh), later)))


def element_layers_end(fresh: Optional[FreshNames] = None) -> Formula:
    """Some layer has no element at all; every later layer is then empty too."""
    fresh = fresh or FreshNames()
    x, z = fresh("x"), fresh("z")
    return Not(And(Exists((x,), Atom("=", (x, x))),
                   Forall((x,), Exists((z,), _strictly_later(x, z, fresh)))))


def _report(question: str, verdict: bool, yes: str, no: str, trace, states: int, witness=None) -> DecisionReport:
    return DecisionReport(question, verdict, yes if verdict else no, witness, trace, states)


# --- the four structural questions --------------------------------------------------------

def check_finiteness(g: Grammar) -> DecisionReport:
    prep = prepare(g)
    f = infinitely_many_layers(prep)
    infinite, states, _ = prep.check(f)
    return _report("finite", not infinite, "finite", "infinite", [("infinite layers", str(f))], states)


def check_emptiness(g: Grammar) -> DecisionReport:
    if not g.nonterminals:
        empty = not g.axiom_productions
        return _report("empty", empty, "empty", "nonempty", [("axiom rewritable", str(not empty))], 0)
    report = language_check(g, Const(True))
    return _report("empty", not report.verdict, "empty", "nonempty", report.trace, report.states)


def _label_formula(g: Grammar, label: str, fresh: FreshNames, prep: Prepared) -> Formula:
    if label in g.vertex_labels:
        return _terminal_exists(prep, fresh, lambda x: Atom(label, (x,)))
    if label in g.edge_labels:
        u, v = fresh("u"), fresh("v")
        return _terminal_exists(prep, fresh, lambda w: Exists((u, v), Atom(label, (u, w, v))))
    raise KeyError(f"unknown label {label!r}")


def check_accessibility(g: Grammar, label: str) -> DecisionReport:
    prep = prepare(g)
    if label not in prep.grammar.vertex_labels | prep.grammar.edge_labels:
        raise KeyError(f"unknown label {label!r}")
    f = _label_formula(prep.grammar, label, FreshNames(), prep)
    ok, states, _ = prep.check(f)
    return _report(f"accessible {label}", ok, "accessible", "inaccessible", [("label occurs", str(f))], states)


def marked_grammar(g: Grammar, production: str) -> tuple[Grammar, str]:
    """Copy of ``g`` whose production also creates an isolated vertex with a fresh, self-reproducing label."""
    p = g.vprod[production]
    taken_labels = set(g.vertex_labels) | set(g.edge_labels) | {g.axiom}
    marker = fresh_name("mark", taken_labels)
    taken_names = set(g.vertex_names) | set(g.edge_names)
    v1, v2 = fresh_name("mk", taken_names), fresh_name("mk", taken_names)
    keep = fresh_name("K" + marker, set(g.vprod) | set(g.eprod))
    labels = dict(p.rhs.vertex_labels)
    labels[(v1,)] = marker
    marked = VertexProduction(p.name, p.lhs, ConcreteGraph(labels, p.rhs.incidences))
    persist = VertexProduction(keep, marker, ConcreteGraph({(v2,): marker}))
    vps = tuple(marked if q.name == production else q for q in g.vertex_productions) + (persist,)
    return g.with_(vertex_productions=vps), marker


def _followed_by_terminal(prep: Prepared, x: str, fresh: FreshNames) -> Formula:
    """A terminal graph is derived at or after the step rewriting the layer of ``x``."""
    if not prep.nonterminals:
        return Const(True)
    z = fresh("z")
    later = Exists((z,), And(prep.terminal(z, fresh), _strictly_later(x, z, fresh)))
    return Or(later, element_layers_end(fresh))


def usefulness_by_trigger(g: Grammar, production: str) -> DecisionReport:
    """Usefulness read directly from the unmarked structure: the rewritten configuration occurs before a terminal layer."""
    prep = prepare(g)
    gc = prep.grammar
    fresh = FreshNames()
    trace = []
    if production in gc.vprod:
        p = gc.vprod[production]
        parts = []
        if p.lhs == gc.axiom:
            # axiom productions rewrite the layer before the first one
            some = fresh("x")
            parts.append(Or(Exists((some,), prep.terminal(some, fresh)), element_layers_end(fresh))
                         if prep.nonterminals else Const(True))
        if p.lhs in gc.vertex_labels:
            x = fresh("x")
            parts.append(Exists((x,), And(Atom(p.lhs, (x,)), _followed_by_terminal(prep, x, fresh))))
        f = disj(parts) if parts else Const(False)
    elif production in gc.eprod:
        e = gc.eprod[production]
        l1, l2 = gc.vprod[e.source].lhs, gc.vprod[e.target].lhs
        x, w, y = fresh("x"), fresh("w"), fresh("y")
        body = conj([Atom(e.label, (x, w, y)), Atom(l1, (x,)) if l1 in gc.vertex_labels else Const(False),
                     Atom(l2, (y,)) if l2 in gc.vertex_labels else Const(False),
                     _followed_by_terminal(prep, w, fresh)])
        f = Exists((x, w, y), body)
    else:
        raise KeyError(f"unknown production {production!r}")
    trace.append(("configuration occurs", str(f)))
    ok, states, _ = prep.check(f)
    return _report(f"useful {production}", ok, "useful", "useless", trace, states)


def check_usefulness(g: Grammar, production: str) -> DecisionReport:
    if production in g.eprod:
        return usefulness_by_trigger(g, production)
    if production not in g.vprod:
        raise KeyError(f"unknown production {production!r}")
    marked, marker = marked_grammar(g, production)
    inner = check_accessibility(marked, marker)
    return _report(f"useful {production}", inner.verdict, "useful", "useless",
                   [("marker label", marker)] + inner.trace, inner.states)


# --- language checking ------------------------------------------------------------------

def _empty_graph_satisfies(f: Formula) -> bool:
    return satisfies(FiniteStructure(frozenset(), {}), f, {})


def language_check(g: Grammar, sentence: Formula) -> DecisionReport:
    """Does some graph of the terminal language satisfy the sentence?"""
    if free_vars(sentence):
        raise FormulaError(f"sentence has free variables {sorted(free_vars(sentence))}")
    prep = prepare(g, deterministic_only=True)
    gc = prep.grammar
    sig = Signature.of_grammar(gc)
    trace = [("input", str(sentence))]
    guarded = nonterminal_guard(sentence, g.nonterminals, sig)
    trace.append(("declared non-terminals excluded", str(guarded)))
    guarded = nonterminal_guard(guarded, gc.synthetic - g.nonterminals, sig)
    trace.append(("completion labels excluded", str(guarded)))
    anchored = anchored_translate(guarded)
    trace.append(("single layer", str(anchored)))
    a = compile_query(prep.presentation, anchored, ())
    ok = not a.is_empty()
    # a complete D0L grammar never blocks after the axiom step, so elementless layers are derived empty graphs
    if not ok and gc.axiom_productions and _empty_graph_satisfies(sentence):
        ends = element_layers_end()
        trace.append(("empty graph derived", str(ends)))
        ok = not compile_query(prep.presentation, ends, ()).is_empty()
    return _report("sentence", ok, "yes", "no", trace, len(a.states))


def pattern_sentence(h: ConcreteGraph) -> Formula:
    """Sentence whose models are exactly the graphs isomorphic to ``h``."""
    problems = validate_graph(h)
    if problems:
        raise ValueError("; ".join(str(p) for p in problems))
    elems = sorted(h.name_set)
    if len(elems) > MAX_PATTERN_ELEMENTS:
        raise ValueError(f"pattern has {len(elems)} elements; at most {MAX_PATTERN_ELEMENTS} are supported "
                         "(set by the cost of compiling one quantifier per element)")
    var = {w: f"e{k}" for k, w in enumerate(elems)}
    parts: list[Formula] = []
    for v, lab in sorted(h.vertex_labels.items()):
        parts.append(Atom(lab, (var[v],)))
    for i in sorted(h.incidences):
        parts.append(Atom(i.label, (var[i.src], var[i.edge], var[i.dst])))
    for k, a in enumerate(elems):
        for b in elems[k + 1:]:
            parts.append(Not(Atom("=", (var[a], var[b]))))
    other = "other"
    parts.append(Forall((other,), disj(Atom("=", (other, var[w])) for w in elems)))
    body = conj(parts)
    return Exists(tuple(var[w] for w in elems), body) if elems else body


def abstract_membership(g: Grammar, h: ConcreteGraph) -> DecisionReport:
    f = pattern_sentence(h)
    vlabels, elabels = h.used_labels()
    unknown = (vlabels - g.vertex_labels) | (elabels - g.edge_labels)
    if unknown:
        prepare(g, deterministic_only=True)
        return _report("member", False, "member", "non-member", [("labels never produced", " ".join(sorted(unknown)))], 0)
    inner = language_check(g, f)
    return _report("member", inner.verdict, "member", "non-member", inner.trace, inner.states)
