"""Automatic presentation of the whole-language structure of a complete grammar."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterator, Mapping, Optional

from . import automata as au
from .automata import TupleAutomaton
from .derivation import LayerIndex, complete_grammar, derive_layers, incompatibility
from .logic import Atom, And, Exists, Formula, Or, conj
from .model import EdgeProduction, Grammar, VertexProduction, Word, classify_grammar
from .query import DOMAIN_VAR, AutomaticStructure, QueryCompiler, nonterminal_free_layer, restrict_structure

INITIAL = "iota"
UNARY = (DOMAIN_VAR,)
BINARY = ("1", "2")
TERNARY = ("1", "2", "3")
ORDER_PREDICATES = ("vrt", "edg", "pre", "sl", "cp")


class IncompleteGrammar(ValueError):
    pass


def _require_complete(g: Grammar) -> None:
    if not classify_grammar(g).complete:
        raise IncompleteGrammar("grammar is not complete; complete it first")


def _alphabet(g: Grammar) -> frozenset[str]:
    return frozenset(g.vertex_names | g.edge_names)


def is_deterministic(a: TupleAutomaton) -> bool:
    if len(a.initial) > 1:
        return False
    seen: set[tuple[int, tuple]] = set()
    for p, x, _ in a.transitions:
        if (p, x) in seen:
            return False
        seen.add((p, x))
    return True


def swap(a: TupleAutomaton, first: str, second: str) -> TupleAutomaton:
    """Exchange the contents of two components, keeping the component order."""
    order = a.components
    return au.reorder(au.rename(a, {first: second, second: first}), order)


# --- vertices -----------------------------------------------------------------------

def _vertex_moves(g: Grammar, state: Hashable) -> Iterator[str]:
    """Vertex names reachable in one rewriting step from the vertex name ``state``."""
    lhs = g.axiom if state == INITIAL else g.name_label[state]
    for p in g.productions_for.get(lhs, ()):
        yield from sorted(p.vertex_names)


def _vertex_automaton(g: Grammar, label: Optional[str]) -> TupleAutomaton:
    _require_complete(g)
    names = sorted(g.vertex_names)
    states = [INITIAL] + names
    index = {s: k for k, s in enumerate(states)}
    trans = {(index[s], (j,), index[j]) for s in states for j in _vertex_moves(g, s)}
    finals = {index[j] for j in names if label is None or g.name_label[j] == label}
    return TupleAutomaton(UNARY, _alphabet(g), trans, {0}, finals)


def build_vrt(g: Grammar) -> TupleAutomaton:
    """Deterministic automaton on vertex names accepting every generated vertex word."""
    return _vertex_automaton(g, None)


def build_vertex_label(g: Grammar, label: str) -> TupleAutomaton:
    if label not in g.vertex_labels and label != g.axiom:
        raise KeyError(f"unknown vertex label {label!r}")
    return _vertex_automaton(g, label)


# --- incidences ---------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class IncidenceState:
    """Reading state of the incidence automaton.

    ``tag`` is None while all three components still spell the same vertex
    word; otherwise it is (label, forward).  ``src`` and ``dst`` hold the last
    vertex names read on the outer components, ``edge`` the last edge name.
    """

    tag: Optional[tuple[str, bool]]
    src: str
    edge: Optional[str]
    dst: str


def _innate(g: Grammar, p: VertexProduction) -> Iterator[tuple[tuple[str, str, str], IncidenceState]]:
    for inc in sorted(p.rhs.incidences):
        s, e, t = inc.src[0], inc.edge[0], inc.dst[0]
        yield (s, e, t), IncidenceState((inc.label, True), s, e, t)


def _inherited(g: Grammar, st: IncidenceState) -> Iterator[tuple[tuple[str, str, str], IncidenceState]]:
    label, forward = st.tag
    src_lhs, dst_lhs = g.name_label[st.src], g.name_label[st.dst]
    for e in g.edge_productions:
        if e.label != label:
            continue
        p1, p2 = g.vprod[e.source], g.vprod[e.target]
        # a forward tag reads the edge production left to right; a backward tag reads it mirrored
        first, second = (p1, p2) if forward else (p2, p1)
        if first.lhs != src_lhs or second.lhs != dst_lhs:
            continue
        for a in sorted(e.rhs):
            if forward:
                yield (a.source, a.edge, a.target), IncidenceState((a.label, a.forward), a.source, a.edge, a.target)
            else:
                yield (a.target, a.edge, a.source), IncidenceState((a.label, not a.forward), a.target, a.edge, a.source)


def _incidence_successors(g: Grammar, st: Hashable) -> Iterator[tuple[tuple[str, str, str], Hashable]]:
    if st == INITIAL or st.tag is None:
        lhs = g.axiom if st == INITIAL else g.name_label[st.src]
        for p in g.productions_for.get(lhs, ()):
            for v in sorted(p.vertex_names):
                yield (v, v, v), IncidenceState(None, v, None, v)
            yield from _innate(g, p)
        return
    yield from _inherited(g, st)


def build_incidence(g: Grammar) -> TupleAutomaton:
    """Direction-tagged incidence automaton with its structured states.

    Returns the automaton; ``incidence_states`` recovers the state meaning.
    """
    return _incidence_with_states(g)[0]


def _incidence_with_states(g: Grammar) -> tuple[TupleAutomaton, dict[int, Hashable]]:
    _require_complete(g)
    index: dict[Hashable, int] = {INITIAL: 0}
    queue = [INITIAL]
    trans: set[tuple[int, tuple, int]] = set()
    while queue:
        s = queue.pop()
        for letter, t in _incidence_successors(g, s):
            if t not in index:
                index[t] = len(index)
                queue.append(t)
            trans.add((index[s], letter, index[t]))
    states = {k: s for s, k in index.items()}
    finals = {k for k, s in states.items() if s != INITIAL and s.tag is not None}
    return TupleAutomaton(TERNARY, _alphabet(g), trans, {0}, finals), states


def incidence_states(g: Grammar) -> dict[int, Hashable]:
    return _incidence_with_states(g)[1]


def build_edge_relation(g: Grammar, label: str, incidence: Optional[tuple[TupleAutomaton, dict]] = None) -> TupleAutomaton:
    """Incidence triples with edge label ``label`` in forward orientation."""
    a, states = incidence if incidence is not None else _incidence_with_states(g)

    def tagged(forward: bool) -> TupleAutomaton:
        finals = {k for k in a.finals if states[k].tag == (label, forward)}
        return au.trim(TupleAutomaton(a.components, a.alphabet, a.transitions, a.initial, finals))

    return au.union(tagged(True), swap(tagged(False), "1", "3"))


def build_edg_delta(g: Grammar, incidence: Optional[tuple[TupleAutomaton, dict]] = None) -> tuple[TupleAutomaton, TupleAutomaton]:
    """Edge words and the whole domain, both read off the middle component of the incidence automaton."""
    a, states = incidence if incidence is not None else _incidence_with_states(g)
    trans = frozenset((p, (x[1],), q) for p, x, q in a.transitions)
    edg = TupleAutomaton(UNARY, a.alphabet, trans, a.initial, a.finals)
    delta = TupleAutomaton(UNARY, a.alphabet, trans, a.initial, frozenset(a.states) - a.initial)
    return au.trim(edg), au.trim(delta)


# --- order relations ----------------------------------------------------------------

def build_prefix(delta: TupleAutomaton) -> TupleAutomaton:
    """Pairs (u, uv) of domain words."""
    d = au.determinize(delta)
    blank = au.BLANK

    def succ(s):
        q, split = s
        for (x,), r in d.successors(q):
            if not split:
                yield (x, x), (r, False)
            if split or q in d.finals:
                yield (blank, x), (r, True)

    init = [(q, False) for q in sorted(d.initial)]
    return au.trim(au.build(BINARY, d.alphabet, init, succ, lambda s: s[0] in d.finals))


def build_order_relations(g: Grammar, delta: Optional[TupleAutomaton] = None) -> tuple[TupleAutomaton, TupleAutomaton, TupleAutomaton]:
    """Equality, prefix order and same-layer relation on the domain."""
    delta = delta if delta is not None else build_edg_delta(g)[1]
    one = au.rename(delta, {DOMAIN_VAR: "1"})
    eq = au.diagonal(one, ("2",))
    same = au.loose_product(one, au.rename(delta, {DOMAIN_VAR: "2"}))
    return eq, build_prefix(delta), same


def build_chi0(g: Grammar, delta: Optional[TupleAutomaton] = None) -> TupleAutomaton:
    """Equal-length pairs whose first difference comes from two productions with one left hand side."""
    delta = au.determinize(delta if delta is not None else build_edg_delta(g)[1])

    def diverge(i: str, j: str) -> bool:
        return i != j and g.prd[i] != g.prd[j] and g.lhs_key(i) == g.lhs_key(j)

    def succ(s):
        if s[0] == "common":
            q = s[1]
            moves = delta.successors(q)
            for (x,), r in moves:
                yield (x, x), ("common", r)
            for (x,), r in moves:
                for (y,), t in moves:
                    if diverge(x, y):
                        yield (x, y), ("apart", r, t)
        else:
            _, q1, q2 = s
            for (x,), r in delta.successors(q1):
                for (y,), t in delta.successors(q2):
                    yield (x, y), ("apart", r, t)

    init = [("common", q) for q in sorted(delta.initial)]
    return au.trim(au.build(BINARY, delta.alphabet, init, succ,
                            lambda s: s[0] == "apart" and s[1] in delta.finals and s[2] in delta.finals))


# --- compatibility ------------------------------------------------------------------

ENDPOINT = Exists(("z",), Or(Atom("inc", ("v", "w", "z")), Atom("inc", ("z", "w", "v"))))

CHI1 = And(Atom("sl", ("x", "y")),
           Exists(("u", "w"), conj([
               Atom("pre", ("u", "x")), Atom("pre", ("w", "y")),
               Exists(("v",), And(Atom("end", ("w", "v")), Atom("chi0", ("u", "v"))))])))

CHI2 = And(Atom("sl", ("x", "y")),
           Exists(("w", "v"), conj([
               Atom("pre", ("w", "x")), Atom("pre", ("v", "y")),
               Exists(("e",), And(Atom("end", ("w", "e")), Atom("chi1", ("e", "v"))))])))


def _as_positional(a: TupleAutomaton, variables: tuple[str, ...]) -> TupleAutomaton:
    return au.rename(au.reorder(a, variables), dict(zip(variables, BINARY)))


def build_compat(g: Grammar, delta: TupleAutomaton, relations: Mapping[str, TupleAutomaton]) -> tuple[TupleAutomaton, TupleAutomaton]:
    """Incompatibility and its layerwise complement, the compatibility relation.

    ``relations`` must hold pre, sl, chi0 and inc (all incidence triples).
    """
    structure = AutomaticStructure(delta, {k: au.minimize(v) for k, v in relations.items()})
    end = _as_positional(QueryCompiler(structure).compile(ENDPOINT, ("w", "v")), ("w", "v"))
    structure = AutomaticStructure(delta, {**structure.relations, "end": au.minimize(end)})
    chi1 = _as_positional(QueryCompiler(structure).compile(CHI1, ("x", "y")), ("x", "y"))
    chi1 = au.minimize(chi1)
    structure = AutomaticStructure(delta, {**structure.relations, "chi1": chi1})
    chi2 = _as_positional(QueryCompiler(structure).compile(CHI2, ("x", "y")), ("x", "y"))
    chi = relations["chi0"]
    for part in (chi1, swap(chi1, "1", "2"), chi2, swap(chi2, "1", "2")):
        chi = au.union(chi, part)
    chi = au.minimize(chi)
    return chi, au.difference(relations["sl"], chi)


# --- assembly -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Presentation(AutomaticStructure):
    """Automata for every predicate of the whole-language structure.

    Relations use components "1", "2", "3"; the domain uses the component "x".
    """

    grammar: Grammar = None
    equality: TupleAutomaton = None
    incompatible: TupleAutomaton = None
    synthetic: frozenset[str] = field(default_factory=frozenset)

    @property
    def vertex_labels(self) -> frozenset[str]:
        return self.grammar.vertex_labels

    @property
    def edge_labels(self) -> frozenset[str]:
        return self.grammar.edge_labels

    def symbols(self) -> list[str]:
        return sorted(self.relations)


def build_presentation(g: Grammar, auto_complete: bool = False) -> Presentation:
    if not classify_grammar(g).complete:
        if not auto_complete:
            raise IncompleteGrammar("grammar is not complete; pass auto_complete to complete it first")
        g = complete_grammar(g)
    incidence = _incidence_with_states(g)
    edg, delta = build_edg_delta(g, incidence)
    eq, pre, same = build_order_relations(g, delta)
    rels: dict[str, TupleAutomaton] = {"vrt": build_vrt(g), "edg": edg, "pre": pre, "sl": same}
    for label in sorted(g.vertex_labels):
        rels[label] = build_vertex_label(g, label)
    inc = au.trim(TupleAutomaton(TERNARY, incidence[0].alphabet, incidence[0].transitions,
                                 incidence[0].initial, incidence[0].finals))
    edge_union = None
    for label in sorted(g.edge_labels):
        rels[label] = build_edge_relation(g, label, incidence)
        edge_union = rels[label] if edge_union is None else au.union(edge_union, rels[label])
    chi0 = build_chi0(g, delta)
    support = {"pre": pre, "sl": same, "chi0": chi0,
               "inc": edge_union if edge_union is not None else au.empty(TERNARY, inc.alphabet)}
    chi, cp = build_compat(g, delta, support)
    rels["cp"] = cp
    return Presentation(domain=delta, relations=rels, grammar=g, equality=eq, incompatible=chi,
                        synthetic=frozenset(g.synthetic))


# --- brute-force interpretation -----------------------------------------------------

def brute_force_structure(g: Grammar, max_len: int, cap: Optional[int] = None) -> dict[str, frozenset[tuple[Word, ...]]]:
    """Every predicate of the whole-language structure on words of length 1..max_len, from explicit derivation."""
    layers = derive_layers(g, max_len, cap)
    out: dict[str, set[tuple[Word, ...]]] = {p: set() for p in ORDER_PREDICATES}
    out.update({a: set() for a in g.vertex_labels | g.edge_labels})
    out["chi"] = set()
    domain: set[Word] = set()
    for l in range(1, len(layers)):
        layer = layers[l]
        elems = layer.elements
        domain |= elems
        for graph in layer.graphs:
            for v, lab in graph.vertex_labels.items():
                out["vrt"].add((v,))
                out.setdefault(lab, set()).add((v,))
            for i in graph.incidences:
                out["edg"].add((i.edge,))
                out.setdefault(i.label, set()).add((i.src, i.edge, i.dst))
        out["sl"] |= {(a, b) for a in elems for b in elems}
        chi = incompatibility(g, l, layers=layers)
        out["chi"] |= chi
        out["cp"] |= {(a, b) for a in elems for b in elems if (a, b) not in chi}
    out["pre"] = {(u, v) for u in domain for v in domain if v[: len(u)] == u}
    out["="] = {(u, u) for u in domain}
    out["domain"] = {(u,) for u in domain}
    return {k: frozenset(v) for k, v in out.items()}


def presentation_tables(p: Presentation, max_len: int) -> dict[str, frozenset[tuple[Word, ...]]]:
    """Enumerate every presented predicate up to a word length."""
    out = {name: a.enumerate(max_len) for name, a in p.relations.items()}
    out["chi"] = p.incompatible.enumerate(max_len)
    out["="] = p.equality.enumerate(max_len)
    out["domain"] = p.domain.enumerate(max_len)
    return out


def restrict_interpretation(p: Presentation, nonterminals) -> Presentation:
    """Substructure on the layers free of non-terminal labels."""
    guard = nonterminal_free_layer(nonterminals, p.vertex_labels, p.edge_labels)
    sub = restrict_structure(AutomaticStructure(p.domain, {**p.relations, "chi": p.incompatible}), guard)
    rels = dict(sub.relations)
    chi = rels.pop("chi")
    return Presentation(domain=sub.domain, relations=rels, grammar=p.grammar,
                        equality=au.diagonal(au.rename(sub.domain, {DOMAIN_VAR: "1"}), ("2",)),
                        incompatible=chi, synthetic=p.synthetic)
