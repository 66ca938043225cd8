"""Derivation semantics: homomorphisms, rewriting steps, layers, completion and compatibility."""
from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Optional

import networkx as nx

from .model import (Attachment, ConcreteGraph, EdgeProduction, Grammar, Incidence,
                    VertexProduction, Word, rewritable)

DEFAULT_GRAPH_CAP = 10_000
DEFAULT_SET_CAP = 200_000


class CapExceeded(RuntimeError):
    """Raised when an enumeration outgrows its configured cap."""


def resolve_cap(cap: Optional[int], default: int) -> int:
    if cap is not None:
        return cap
    env = os.environ.get("LINGRAPH_CAP")
    return int(env) if env else default


@dataclass(frozen=True)
class Homomorphism:
    """Assignment of vertex productions to vertices and edge productions to edges (by name)."""

    vertex: tuple[tuple[Word, str], ...]
    edge: tuple[tuple[Word, str], ...]

    @property
    def vertex_map(self) -> dict[Word, str]:
        return dict(self.vertex)

    @property
    def edge_map(self) -> dict[Word, str]:
        return dict(self.edge)


@dataclass(frozen=True)
class LayerSet:
    depth: int
    graphs: tuple[ConcreteGraph, ...]
    derivations: int = 0

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def vertices(self) -> frozenset[Word]:
        return frozenset(v for g in self.graphs for v in g.vertex_labels)

    @property
    def edges(self) -> frozenset[Word]:
        return frozenset(e for g in self.graphs for e in g.edges)

    @property
    def elements(self) -> frozenset[Word]:
        return self.vertices | self.edges

    @property
    def incidences(self) -> frozenset[Incidence]:
        return frozenset(i for g in self.graphs for i in g.incidences)


def axiom_graph(g: Grammar) -> ConcreteGraph:
    return ConcreteGraph({(): g.axiom})


def enumerate_homomorphisms(src: ConcreteGraph, g: Grammar) -> list[Homomorphism]:
    vertices = _adjacency_order(src)
    incident: dict[Word, list[Incidence]] = {v: [] for v in vertices}
    for inc in src.incidences:
        incident[inc.src].append(inc)
        incident[inc.dst].append(inc)
    position = {v: n for n, v in enumerate(vertices)}
    eprods = g.edge_productions_for
    results: list[Homomorphism] = []
    assign: dict[Word, str] = {}

    def edge_choices() -> list[list[tuple[Word, str]]]:
        out = []
        for inc in sorted(src.incidences):
            opts = eprods.get((assign[inc.src], inc.label, assign[inc.dst]), ())
            out.append([(inc.edge, e.name) for e in opts])
        return out

    def search(k: int) -> None:
        if k == len(vertices):
            vertex = tuple(sorted(assign.items()))
            for combo in product(*edge_choices()):
                results.append(Homomorphism(vertex, tuple(sorted(combo))))
            return
        v = vertices[k]
        for p in g.productions_for.get(src.vertex_labels[v], ()):
            assign[v] = p.name
            ok = True
            for inc in incident[v]:
                other = inc.dst if inc.src == v else inc.src
                if position[other] <= k and (assign[inc.src], inc.label, assign[inc.dst]) not in eprods:
                    ok = False
                    break
            if ok:
                search(k + 1)
            del assign[v]

    search(0)
    return results


def _adjacency_order(src: ConcreteGraph) -> list[Word]:
    """Vertices in breadth-first order so that edge constraints prune early."""
    nbrs: dict[Word, set[Word]] = {v: set() for v in src.vertex_labels}
    for inc in src.incidences:
        nbrs[inc.src].add(inc.dst)
        nbrs[inc.dst].add(inc.src)
    seen: set[Word] = set()
    order: list[Word] = []
    for root in sorted(nbrs):
        if root in seen:
            continue
        seen.add(root)
        queue = [root]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for w in sorted(nbrs[v] - seen):
                seen.add(w)
                queue.append(w)
    return order


def is_homomorphism(src: ConcreteGraph, h: Homomorphism, g: Grammar) -> bool:
    vm, em = h.vertex_map, h.edge_map
    if set(vm) != set(src.vertex_labels) or set(em) != set(src.edges):
        return False
    for v, p in vm.items():
        if p not in g.vprod or g.vprod[p].lhs != src.vertex_labels[v]:
            return False
    for inc in src.incidences:
        e = g.eprod.get(em[inc.edge])
        if e is None or e.key != (vm[inc.src], inc.label, vm[inc.dst]):
            return False
    return True


def derive_step(src: ConcreteGraph, h: Homomorphism, g: Grammar) -> ConcreteGraph:
    if not is_homomorphism(src, h, g):
        raise ValueError("not a homomorphism from the graph into the grammar")
    vm, em = h.vertex_map, h.edge_map
    labels: dict[Word, str] = {}
    incs: set[Incidence] = set()
    for u, pname in vm.items():
        rhs = g.vprod[pname].rhs
        for (i,), lab in rhs.vertex_labels.items():
            labels[u + (i,)] = lab
        for b in rhs.incidences:
            incs.add(Incidence(b.label, u + b.src, u + b.edge, u + b.dst))
    for inc in src.incidences:
        u, w, v = inc.src, inc.edge, inc.dst
        for a in g.eprod[em[w]].rhs:
            if a.forward:
                incs.add(Incidence(a.label, u + (a.source,), w + (a.edge,), v + (a.target,)))
            else:
                incs.add(Incidence(a.label, v + (a.target,), w + (a.edge,), u + (a.source,)))
    return ConcreteGraph(labels, frozenset(incs))


def children(src: ConcreteGraph, g: Grammar) -> Iterator[ConcreteGraph]:
    for h in enumerate_homomorphisms(src, g):
        yield derive_step(src, h, g)


def derive_layers(g: Grammar, depth: int, cap: Optional[int] = None) -> list[LayerSet]:
    """Layers 0..depth; layer 0 holds the axiom graph."""
    cap = resolve_cap(cap, DEFAULT_GRAPH_CAP)
    layers = [LayerSet(0, (axiom_graph(g),), 1)]
    for l in range(1, depth + 1):
        seen: dict[frozenset[Word], ConcreteGraph] = {}
        count = 0
        for parent in layers[-1].graphs:
            for h in enumerate_homomorphisms(parent, g):
                count += 1
                child = derive_step(parent, h, g)
                seen.setdefault(child.name_set, child)
                if len(seen) > cap:
                    raise CapExceeded(f"layer {l} exceeds {cap} graphs")
        graphs = tuple(sorted(seen.values(), key=lambda x: sorted(x.name_set)))
        layers.append(LayerSet(l, graphs, count))
    return layers


def filter_nonterminals(layer: LayerSet, nonterminals: Iterable[str]) -> LayerSet:
    n = frozenset(nonterminals)
    if not n:
        return layer
    keep = tuple(x for x in layer.graphs if not (set(x.vertex_labels.values()) | {i.label for i in x.incidences}) & n)
    return LayerSet(layer.depth, keep, len(keep))


def unix_check_bounded(g: Grammar, depth: int, cap: Optional[int] = None) -> tuple[bool, Optional[int]]:
    """(True, None) when every layer up to depth has at most one derivation, else (False, first bad layer)."""
    for layer in derive_layers(g, depth, cap)[1:]:
        if layer.derivations >= 2:
            return False, layer.depth
    return True, None


# --- completion ----------------------------------------------------------------

def fresh_name(base: str, taken: set[str]) -> str:
    name, k = base, 0
    while name in taken:
        k += 1
        name = f"{base}{k}"
    taken.add(name)
    return name


def complete_grammar(g: Grammar) -> Grammar:
    """Completion with a fresh isolated vertex label and a fresh edge label, both non-terminal."""
    labels_taken = set(g.vertex_labels) | set(g.edge_labels) | {g.axiom}
    blank = fresh_name("i", labels_taken)
    bang = fresh_name("!", labels_taken)
    names_taken = set(g.vertex_names) | set(g.edge_names)
    prods_taken = set(g.vprod) | set(g.eprod)

    missing: set[str] = set()
    for p in g.vertex_productions:
        touched = {i.src for i in p.rhs.incidences} | {i.dst for i in p.rhs.incidences}
        for v, lab in p.rhs.vertex_labels.items():
            if v not in touched and lab not in g.productions_for:
                missing.add(lab)
    new_vprods: list[VertexProduction] = []
    if missing:
        for lab in sorted(missing) + [blank]:
            v = fresh_name(f"{blank}_{lab}", names_taken)
            new_vprods.append(VertexProduction(fresh_name(f"V{blank}_{lab}", prods_taken), lab,
                                               ConcreteGraph({(v,): blank})))
    g1 = g.with_(vertex_productions=g.vertex_productions + tuple(new_vprods))

    def anchor(p: VertexProduction) -> Optional[str]:
        return min(p.vertex_names) if p.vertex_names else None

    def link(label: str, p1: VertexProduction, p2: VertexProduction, edge_base: str, prod_base: str) -> EdgeProduction:
        s, t = anchor(p1), anchor(p2)
        rhs: frozenset[Attachment] = frozenset()
        if s is not None and t is not None:
            rhs = frozenset({Attachment(True, bang, s, fresh_name(edge_base, names_taken), t)})
        return EdgeProduction(fresh_name(prod_base, prods_taken), p1.name, label, p2.name, rhs)

    need: set[tuple[str, str, str]] = {(la, inc.label, lb) for inc, la, lb in g1.rhs_incidences()}
    new_eprods: list[EdgeProduction] = []
    for la, a, lb in sorted(need):
        for p1 in rewritable(g1, la):
            for p2 in rewritable(g1, lb):
                if (p1.name, a, p2.name) in g1.edge_productions_for:
                    continue
                if any(e.key == (p1.name, a, p2.name) for e in new_eprods):
                    continue
                new_eprods.append(link(a, p1, p2, f"m_{p1.name}_{a}_{p2.name}", f"M_{p1.name}_{a}_{p2.name}"))
    live = [p for p in g1.vertex_productions if rewritable(g1, p.lhs)]
    for p1 in live:
        for p2 in live:
            new_eprods.append(link(bang, p1, p2, f"x_{p1.name}_{p2.name}", f"X_{p1.name}_{p2.name}"))
    return g1.with_(edge_productions=g.edge_productions + tuple(new_eprods),
                    nonterminals=g.nonterminals | {blank, bang},
                    synthetic=g.synthetic | {blank, bang},
                    declared_edge_labels=g.declared_edge_labels | {bang},
                    declared_vertex_labels=g.declared_vertex_labels | ({blank} if missing else set()))


# --- compatibility -------------------------------------------------------------

@dataclass(frozen=True)
class LayerIndex:
    """Per-layer elements and the incidence of every generated edge, up to some depth."""

    elements: tuple[frozenset[Word], ...]
    incidence: dict[Word, Incidence]

    @staticmethod
    def build(layers: list[LayerSet]) -> "LayerIndex":
        inc: dict[Word, Incidence] = {}
        for layer in layers:
            for i in layer.incidences:
                inc[i.edge] = i
        return LayerIndex(tuple(layer.elements for layer in layers), inc)


def chi0(g: Grammar, x: Word, y: Word) -> bool:
    if len(x) != len(y) or not x:
        return False
    for a, b in zip(x, y):
        if a != b:
            pa, pb = g.prd[a], g.prd[b]
            return pa != pb and g.lhs_key(a) == g.lhs_key(b)
    return False


def chi1(g: Grammar, idx: LayerIndex, x: Word, y: Word) -> bool:
    for m in range(1, len(y) + 1):
        inc = idx.incidence.get(y[:m])
        if inc is None:
            continue
        if chi0(g, x[:m], inc.src) or chi0(g, x[:m], inc.dst):
            return True
    return False


def chi2(g: Grammar, idx: LayerIndex, x: Word, y: Word) -> bool:
    for m in range(1, len(x) + 1):
        inc = idx.incidence.get(x[:m])
        if inc is None or y[:m] not in idx.incidence:
            continue
        if chi1(g, idx, inc.src, y[:m]) or chi1(g, idx, inc.dst, y[:m]):
            return True
    return False


def is_incompatible(g: Grammar, idx: LayerIndex, x: Word, y: Word) -> bool:
    if len(x) != len(y) or not x:
        return False
    if chi0(g, x, y) or chi1(g, idx, x, y) or chi1(g, idx, y, x):
        return True
    if x in idx.incidence and y in idx.incidence:
        return chi2(g, idx, x, y) or chi2(g, idx, y, x)
    return False


def incompatibility(g: Grammar, l: int, cap: Optional[int] = None,
                    layers: Optional[list[LayerSet]] = None) -> frozenset[tuple[Word, Word]]:
    """Incompatible pairs of layer ``l`` computed from the defining clauses."""
    layers = layers if layers is not None else derive_layers(g, l, cap)
    idx = LayerIndex.build(layers[: l + 1])
    elems = sorted(idx.elements[l]) if l < len(idx.elements) else []
    return frozenset((x, y) for x in elems for y in elems if is_incompatible(g, idx, x, y))


def cooccurrence_incompatibility(layer: LayerSet) -> frozenset[tuple[Word, Word]]:
    """Pairs of layer elements that never occur together in one graph of the layer."""
    together: set[tuple[Word, Word]] = set()
    for x in layer.graphs:
        names = sorted(x.name_set)
        together.update((a, b) for a in names for b in names)
    elems = sorted(layer.elements)
    return frozenset((a, b) for a in elems for b in elems if (a, b) not in together)


def maximal_cliques(nodes: Iterable[Word], adjacent: set[tuple[Word, Word]],
                    cap: Optional[int] = None) -> list[frozenset[Word]]:
    """Maximal cliques of an undirected graph, aborting once more than ``cap`` are found."""
    cap = resolve_cap(cap, DEFAULT_SET_CAP)
    graph = nx.Graph()
    graph.add_nodes_from(nodes)
    graph.add_edges_from((u, v) for u, v in adjacent if u != v and u in graph and v in graph)
    out: list[frozenset[Word]] = []
    for clique in nx.find_cliques(graph):
        out.append(frozenset(clique))
        if len(out) > cap:
            raise CapExceeded(f"more than {cap} maximal compatible sets")
    return sorted(out, key=sorted)


def maximal_compatible_sets(g: Grammar, l: int, cap: Optional[int] = None,
                            layers: Optional[list[LayerSet]] = None) -> list[frozenset[Word]]:
    layers = layers if layers is not None else derive_layers(g, l)
    chi = incompatibility(g, l, layers=layers)
    elems = layers[l].elements
    compatible = {(a, b) for a in elems for b in elems if (a, b) not in chi}
    return maximal_cliques(elems, compatible, cap)
