"""Concrete graphs, 0L graph grammars, validation, classification and isomorphism.

Vertex and edge names are words, i.e. tuples of name identifiers.  A graph
derived in ``l`` steps has all of its words of length ``l``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional

import networkx as nx
from networkx.algorithms import isomorphism

Word = tuple[str, ...]
EMPTY: Word = ()


def word(*names: str) -> Word:
    return tuple(names)


def show_word(w: Word) -> str:
    if not w:
        return "ε"
    if all(len(n) == 1 for n in w):
        return "".join(w)
    return ".".join(w)


@dataclass(frozen=True, order=True)
class Incidence:
    """Labelled incidence ``label(src, edge, dst)``."""

    label: str
    src: Word
    edge: Word
    dst: Word

    def __str__(self) -> str:
        return f"{self.label}({show_word(self.src)},{show_word(self.edge)},{show_word(self.dst)})"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


@dataclass(frozen=True, eq=False)
class ConcreteGraph:
    """Incidence structure (V, E, labelling, incidences) over word names."""

    vertex_labels: Mapping[Word, str]
    incidences: frozenset[Incidence] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertex_labels", dict(self.vertex_labels))
        object.__setattr__(self, "incidences", frozenset(self.incidences))

    @property
    def vertices(self) -> frozenset[Word]:
        return frozenset(self.vertex_labels)

    @cached_property
    def edges(self) -> frozenset[Word]:
        return frozenset(i.edge for i in self.incidences)

    @cached_property
    def name_set(self) -> frozenset[Word]:
        return self.vertices | self.edges

    @cached_property
    def incidence_of(self) -> dict[Word, Incidence]:
        return {i.edge: i for i in self.incidences}

    def label(self, v: Word) -> str:
        return self.vertex_labels[v]

    def used_labels(self) -> tuple[frozenset[str], frozenset[str]]:
        return frozenset(self.vertex_labels.values()), frozenset(i.label for i in self.incidences)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConcreteGraph):
            return NotImplemented
        return self.vertex_labels == other.vertex_labels and self.incidences == other.incidences

    def __hash__(self) -> int:
        return hash((frozenset(self.vertex_labels.items()), self.incidences))

    def __repr__(self) -> str:
        vs = " ".join(f"{show_word(v)}:{l}" for v, l in sorted(self.vertex_labels.items()))
        es = " ".join(str(i) for i in sorted(self.incidences))
        return f"ConcreteGraph({vs} | {es})"


EMPTY_GRAPH = ConcreteGraph({})


def validate_graph(g: ConcreteGraph, theta: Optional[Iterable[str]] = None,
                   omega: Optional[Iterable[str]] = None) -> list[Diagnostic]:
    """Check the graph invariants; one diagnostic per violation."""
    out: list[Diagnostic] = []
    seen: dict[Word, Incidence] = {}
    for inc in sorted(g.incidences):
        if inc.edge in seen:
            out.append(Diagnostic("edge-reuse", f"edge word {show_word(inc.edge)} used by {seen[inc.edge]} and {inc}"))
        else:
            seen[inc.edge] = inc
        for end in (inc.src, inc.dst):
            if end not in g.vertex_labels:
                out.append(Diagnostic("dangling", f"{inc} mentions unknown vertex {show_word(end)}"))
        if inc.edge in g.vertex_labels:
            out.append(Diagnostic("vertex-edge-clash", f"word {show_word(inc.edge)} is both vertex and edge"))
    lengths = {len(w) for w in g.name_set}
    if len(lengths) > 1:
        out.append(Diagnostic("mixed-layer", f"word lengths {sorted(lengths)} are not uniform"))
    if EMPTY in g.vertex_labels and (len(g.vertex_labels) > 1 or g.incidences):
        out.append(Diagnostic("empty-word", "the empty word only names the lone axiom vertex"))
    if theta is not None and omega is not None:
        th, om = set(theta), set(omega)
        for v in sorted(g.vertex_labels):
            if any(n not in th for n in v):
                out.append(Diagnostic("vertex-alphabet", f"vertex {show_word(v)} uses a non-vertex name"))
        for e in sorted(g.edges):
            k = len(e)
            while k > 0 and e[k - 1] in om:
                k -= 1
            if k == len(e) or any(n not in th for n in e[:k]):
                out.append(Diagnostic("edge-alphabet", f"edge {show_word(e)} does not match vertex-names* edge-names+"))
    return out


@dataclass(frozen=True)
class VertexProduction:
    name: str
    lhs: str
    rhs: ConcreteGraph

    @property
    def erasing(self) -> bool:
        return not self.rhs.vertex_labels

    @cached_property
    def vertex_names(self) -> frozenset[str]:
        return frozenset(v[0] for v in self.rhs.vertex_labels)

    @cached_property
    def edge_names(self) -> frozenset[str]:
        return frozenset(e[0] for e in self.rhs.edges)

    def label_of(self, name: str) -> str:
        return self.rhs.vertex_labels[(name,)]


@dataclass(frozen=True, order=True)
class Attachment:
    """Element of an edge production's right hand side.

    ``source`` names a vertex of the first endpoint production and ``target``
    one of the second.  ``forward`` selects the orientation of the created
    incidence: forward gives label(u.source, w.edge, v.target), backward
    gives label(v.target, w.edge, u.source).
    """

    forward: bool
    label: str
    source: str
    edge: str
    target: str

    def __str__(self) -> str:
        return f"{'>' if self.forward else '<'}{self.label}({self.source},{self.edge},{self.target})"


@dataclass(frozen=True)
class EdgeProduction:
    name: str
    source: str
    label: str
    target: str
    rhs: frozenset[Attachment] = frozenset()

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.source, self.label, self.target)

    @property
    def erasing(self) -> bool:
        return not self.rhs


@dataclass(frozen=True)
class GrammarClass:
    complete: bool
    edge_deterministic: bool
    vertex_deterministic: bool
    non_erasing: bool
    label_edge_deterministic: bool = True

    @property
    def deterministic(self) -> bool:
        return self.edge_deterministic and self.vertex_deterministic

    def summary(self) -> str:
        flags = [("complete", self.complete), ("eD0L", self.edge_deterministic),
                 ("vD0L", self.vertex_deterministic), ("D0L", self.deterministic),
                 ("non-erasing", self.non_erasing),
                 ("label-eD0L", self.label_edge_deterministic)]
        return " ".join(n if f else f"not-{n}" for n, f in flags)


@dataclass(frozen=True, eq=False)
class Grammar:
    """A 0L graph grammar: axiom label, vertex productions, edge productions."""

    axiom: str
    vertex_productions: tuple[VertexProduction, ...]
    edge_productions: tuple[EdgeProduction, ...] = ()
    declared_vertex_labels: frozenset[str] = frozenset()
    declared_edge_labels: frozenset[str] = frozenset()
    nonterminals: frozenset[str] = frozenset()
    twins: frozenset[frozenset[str]] = frozenset()
    synthetic: frozenset[str] = frozenset()
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertex_productions", tuple(self.vertex_productions))
        object.__setattr__(self, "edge_productions", tuple(self.edge_productions))
        for attr in ("declared_vertex_labels", "declared_edge_labels", "nonterminals", "twins", "synthetic"):
            object.__setattr__(self, attr, frozenset(getattr(self, attr)))

    # --- derived alphabets -------------------------------------------------
    @cached_property
    def vertex_labels(self) -> frozenset[str]:
        """Gamma: declared labels, production lhs labels other than a foreign axiom, rhs labels."""
        out = set(self.declared_vertex_labels)
        for p in self.vertex_productions:
            out.update(p.rhs.vertex_labels.values())
        for p in self.vertex_productions:
            if p.lhs != self.axiom or p.lhs in out:
                out.add(p.lhs)
        return frozenset(out)

    @cached_property
    def edge_labels(self) -> frozenset[str]:
        out = set(self.declared_edge_labels)
        for p in self.vertex_productions:
            out.update(i.label for i in p.rhs.incidences)
        for e in self.edge_productions:
            out.add(e.label)
            out.update(a.label for a in e.rhs)
        return frozenset(out)

    @property
    def axiom_in_labels(self) -> bool:
        return self.axiom in self.vertex_labels

    @cached_property
    def vertex_names(self) -> frozenset[str]:
        out: set[str] = set()
        for p in self.vertex_productions:
            out |= p.vertex_names
        return frozenset(out)

    @cached_property
    def edge_names(self) -> frozenset[str]:
        out: set[str] = set()
        for p in self.vertex_productions:
            out |= p.edge_names
        for e in self.edge_productions:
            out.update(a.edge for a in e.rhs)
        return frozenset(out)

    # --- lookups -----------------------------------------------------------
    @cached_property
    def vprod(self) -> dict[str, VertexProduction]:
        return {p.name: p for p in self.vertex_productions}

    @cached_property
    def eprod(self) -> dict[str, EdgeProduction]:
        return {e.name: e for e in self.edge_productions}

    def production(self, name: str) -> VertexProduction | EdgeProduction:
        return self.vprod[name] if name in self.vprod else self.eprod[name]

    @cached_property
    def productions_for(self) -> dict[str, tuple[VertexProduction, ...]]:
        out: dict[str, list[VertexProduction]] = defaultdict(list)
        for p in self.vertex_productions:
            out[p.lhs].append(p)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def edge_productions_for(self) -> dict[tuple[str, str, str], tuple[EdgeProduction, ...]]:
        out: dict[tuple[str, str, str], list[EdgeProduction]] = defaultdict(list)
        for e in self.edge_productions:
            out[e.key].append(e)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def prd(self) -> dict[str, str]:
        """Name of the production whose right hand side holds each name."""
        out: dict[str, str] = {}
        for p in self.vertex_productions:
            for n in sorted(p.vertex_names | p.edge_names):
                out.setdefault(n, p.name)
        for e in self.edge_productions:
            for a in sorted(e.rhs):
                out.setdefault(a.edge, e.name)
        return out

    @cached_property
    def name_label(self) -> dict[str, str]:
        """Label of every vertex name in some rhs."""
        out: dict[str, str] = {}
        for p in self.vertex_productions:
            for v, l in p.rhs.vertex_labels.items():
                out.setdefault(v[0], l)
        return out

    def lhs_key(self, name: str) -> object:
        """Left hand side of prd(name): a label or a (production, label, production) triple."""
        p = self.production(self.prd[name])
        return p.lhs if isinstance(p, VertexProduction) else p.key

    @cached_property
    def axiom_productions(self) -> tuple[VertexProduction, ...]:
        return self.productions_for.get(self.axiom, ())

    def rhs_incidences(self) -> Iterator[tuple[Incidence, str, str]]:
        """Every incidence written in a right hand side, oriented, with its endpoint labels."""
        for p in self.vertex_productions:
            for i in sorted(p.rhs.incidences):
                yield i, p.rhs.vertex_labels.get(i.src, "?"), p.rhs.vertex_labels.get(i.dst, "?")
        for e in self.edge_productions:
            for a in sorted(e.rhs):
                ls, lt = self.name_label.get(a.source, "?"), self.name_label.get(a.target, "?")
                if a.forward:
                    yield Incidence(a.label, (a.source,), (a.edge,), (a.target,)), ls, lt
                else:
                    yield Incidence(a.label, (a.target,), (a.edge,), (a.source,)), lt, ls

    def with_(self, **changes) -> "Grammar":
        kw = dict(axiom=self.axiom, vertex_productions=self.vertex_productions,
                  edge_productions=self.edge_productions,
                  declared_vertex_labels=self.declared_vertex_labels,
                  declared_edge_labels=self.declared_edge_labels,
                  nonterminals=self.nonterminals, twins=self.twins,
                  synthetic=self.synthetic, meta=dict(self.meta))
        kw.update(changes)
        return Grammar(**kw)


def validate_grammar(g: Grammar) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    names = [p.name for p in g.vertex_productions] + [e.name for e in g.edge_productions]
    for n in sorted({n for n in names if names.count(n) > 1}):
        out.append(Diagnostic("production-name", f"production name {n} used twice"))
    owner: dict[str, list[str]] = defaultdict(list)
    for p in g.vertex_productions:
        for d in validate_graph(p.rhs):
            out.append(Diagnostic(d.code, f"in {p.name}: {d.message}"))
        for v in p.rhs.vertex_labels:
            if len(v) != 1:
                out.append(Diagnostic("rhs-layer", f"in {p.name}: vertex {show_word(v)} is not a single name"))
        for e in p.rhs.edges:
            if len(e) != 1:
                out.append(Diagnostic("rhs-layer", f"in {p.name}: edge {show_word(e)} is not a single name"))
        for n in sorted(p.vertex_names | p.edge_names):
            owner[n].append(p.name)
        if p.lhs not in g.vertex_labels and p.lhs != g.axiom:
            out.append(Diagnostic("lhs-label", f"{p.name} rewrites unknown label {p.lhs}"))
    for e in g.edge_productions:
        for end in (e.source, e.target):
            if end not in g.vprod:
                out.append(Diagnostic("edge-lhs", f"{e.name} refers to unknown vertex production {end}"))
        src = g.vprod.get(e.source)
        dst = g.vprod.get(e.target)
        for a in sorted(e.rhs):
            owner[a.edge].append(e.name)
            if src is not None and a.source not in src.vertex_names:
                out.append(Diagnostic("dangling-attachment", f"{e.name}: {a} mentions {a.source} outside {e.source}"))
            if dst is not None and a.target not in dst.vertex_names:
                out.append(Diagnostic("dangling-attachment", f"{e.name}: {a} mentions {a.target} outside {e.target}"))
    for n, ps in sorted(owner.items()):
        if len(ps) > 1:
            out.append(Diagnostic("name-reuse", f"name {n} appears in {', '.join(ps)}"))
    vnames = {n for p in g.vertex_productions for n in p.vertex_names}
    enames = {n for p in g.vertex_productions for n in p.edge_names} | {a.edge for e in g.edge_productions for a in e.rhs}
    for n in sorted(vnames & enames):
        out.append(Diagnostic("name-kind", f"name {n} is both a vertex and an edge name"))
    vps = list(g.vertex_productions)
    for x in range(len(vps)):
        for y in range(x + 1, len(vps)):
            common = (vps[x].vertex_names | vps[x].edge_names) & (vps[y].vertex_names | vps[y].edge_names)
            if common:
                out.append(Diagnostic("rhs-overlap", f"{vps[x].name} and {vps[y].name} share {sorted(common)}"))
    return out


def classify_grammar(g: Grammar) -> GrammarClass:
    """Edge determinism is judged per endpoint-production pair; the label-triple reading is reported separately."""
    vdet = all(len(ps) <= 1 for lhs, ps in g.productions_for.items())
    edet = all(len(es) <= 1 for es in g.edge_productions_for.values())
    by_labels: dict[tuple[str, str, str], int] = defaultdict(int)
    for e in g.edge_productions:
        by_labels[(g.vprod[e.source].lhs, e.label, g.vprod[e.target].lhs)] += 1
    erasing = any(p.erasing for p in g.vertex_productions) or any(e.erasing for e in g.edge_productions)
    return GrammarClass(complete=not completeness_gaps(g), edge_deterministic=edet,
                        vertex_deterministic=vdet, non_erasing=not erasing,
                        label_edge_deterministic=all(n <= 1 for n in by_labels.values()))


def rewritable(g: Grammar, label: str) -> tuple[VertexProduction, ...]:
    """Vertex productions that may rewrite a vertex carrying ``label`` after layer 0."""
    if label == g.axiom and not g.axiom_in_labels:
        return ()
    return g.productions_for.get(label, ())


def completeness_gaps(g: Grammar) -> list[str]:
    """Missing edge or vertex productions witnessing incompleteness."""
    gaps: list[str] = []
    need: set[tuple[str, str, str]] = set()
    for inc, la, lb in g.rhs_incidences():
        need.add((la, inc.label, lb))
    for la, a, lb in sorted(need):
        for p1 in rewritable(g, la):
            for p2 in rewritable(g, lb):
                if (p1.name, a, p2.name) not in g.edge_productions_for:
                    gaps.append(f"missing edge production {p1.name} -{a}-> {p2.name}")
    for p in g.vertex_productions:
        touched = {i.src for i in p.rhs.incidences} | {i.dst for i in p.rhs.incidences}
        for v, lab in sorted(p.rhs.vertex_labels.items()):
            if v not in touched and lab not in g.productions_for:
                gaps.append(f"isolated vertex {show_word(v)}:{lab} in {p.name} has no production")
    return gaps


# --- isomorphism -------------------------------------------------------------

def _as_networkx(g: ConcreteGraph) -> nx.MultiDiGraph:
    out = nx.MultiDiGraph()
    for v, label in g.vertex_labels.items():
        out.add_node(v, label=label)
    for i in g.incidences:
        out.add_edge(i.src, i.dst, label=i.label)
    return out


def graph_isomorphic(g1: ConcreteGraph, g2: ConcreteGraph) -> Optional[dict[Word, Word]]:
    """Label-, direction- and incidence-multiplicity-preserving vertex bijection, if any."""
    if len(g1.vertex_labels) != len(g2.vertex_labels) or len(g1.incidences) != len(g2.incidences):
        return None
    same = lambda a, b: a["label"] == b["label"]  # noqa: E731
    labels = lambda a, b: sorted(e["label"] for e in a.values()) == sorted(e["label"] for e in b.values())  # noqa: E731
    matcher = isomorphism.MultiDiGraphMatcher(_as_networkx(g1), _as_networkx(g2), node_match=same, edge_match=labels)
    return dict(matcher.mapping) if matcher.is_isomorphic() else None
