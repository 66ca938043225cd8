"""Rotation-map graphs, spectral and Cheeger certificates, and grammars for lifts and graph products."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from typing import Hashable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .model import (Attachment, ConcreteGraph, Diagnostic, EdgeProduction, Grammar, Incidence, VertexProduction,
                    Word)

MAX_CHEEGER_VERTICES = 24
JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100
PRODUCT_KINDS = ("replacement", "balanced", "zigzag")

Vertex = Hashable
Port = str


class NonConvergence(RuntimeError):
    """The Jacobi iteration did not reach the off-diagonal threshold within its sweep cap."""


class NotRegular(ValueError):
    """A degree-dependent check was applied to a graph that is not regular."""


# --- rotation graphs ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RotationGraph:
    """Regular graph given by its rotation map ``(u, i) -> (v, j)``."""

    vertices: tuple
    ports: tuple[Port, ...]
    rot: Mapping[tuple, tuple]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "ports", tuple(self.ports))
        object.__setattr__(self, "rot", dict(self.rot))

    @property
    def degree(self) -> int:
        return len(self.ports)

    def enriched_edges(self) -> frozenset[frozenset]:
        return frozenset(frozenset({a, b}) for a, b in self.rot.items())

    def adjacency(self) -> np.ndarray:
        """Port counts between vertices; a loop using two ports adds 2 on the diagonal."""
        index = {v: k for k, v in enumerate(self.vertices)}
        m = np.zeros((len(self.vertices), len(self.vertices)))
        for (u, _), (v, _) in self.rot.items():
            m[index[u], index[v]] += 1
        return m

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, RotationGraph) and set(self.vertices) == set(other.vertices)
                and self.ports == other.ports and self.rot == other.rot)

    __hash__ = None  # type: ignore[assignment]


def validate_rotation(g: RotationGraph) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    vs, ps = set(g.vertices), set(g.ports)
    if len(vs) != len(g.vertices):
        out.append(Diagnostic("vertex-repeat", "vertex listed twice"))
    if len(ps) != len(g.ports):
        out.append(Diagnostic("port-repeat", "port listed twice"))
    for u in g.vertices:
        for i in g.ports:
            if (u, i) not in g.rot:
                out.append(Diagnostic("rotation-total", f"no rotation for ({u}, {i})"))
    for (u, i), (v, j) in g.rot.items():
        if u not in vs or i not in ps:
            out.append(Diagnostic("rotation-domain", f"({u}, {i}) is not a vertex-port pair"))
        if v not in vs or j not in ps:
            out.append(Diagnostic("rotation-range", f"({u}, {i}) maps to ({v}, {j}), not a vertex-port pair"))
        elif g.rot.get((v, j)) != (u, i):
            out.append(Diagnostic("rotation-involution", f"Rot(Rot({u}, {i})) != ({u}, {i})"))
    return out


def complete_graph(n: int) -> RotationGraph:
    """K_n with port i of u leading to the i-th other vertex in increasing order."""
    vs = tuple(range(n))
    others = {u: [v for v in vs if v != u] for u in vs}
    rot = {(u, str(k + 1)): (v, str(others[v].index(u) + 1)) for u in vs for k, v in enumerate(others[u])}
    return RotationGraph(vs, tuple(str(k + 1) for k in range(n - 1)), rot)


def cycle_graph(n: int, vertices: Optional[Sequence] = None) -> RotationGraph:
    """Cycle with port 1 stepping forward and port 2 stepping back."""
    vs = tuple(vertices) if vertices is not None else tuple(range(n))
    if len(vs) != n or n < 3:
        raise ValueError("a cycle needs at least three distinct vertices")
    rot = {}
    for k, u in enumerate(vs):
        rot[(u, "1")] = (vs[(k + 1) % n], "2")
        rot[(u, "2")] = (vs[(k - 1) % n], "1")
    return RotationGraph(vs, ("1", "2"), rot)


def rotation_from_adjacency(vertices: Sequence, edges: Iterable[tuple]) -> RotationGraph:
    """Rotation map of a simple regular graph: ports number neighbours in increasing order."""
    vs = tuple(vertices)
    nbrs: dict = {u: [] for u in vs}
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    for u in vs:
        nbrs[u].sort()
    degrees = {len(x) for x in nbrs.values()}
    if len(degrees) != 1:
        raise NotRegular(f"degrees {sorted(degrees)} differ")
    d = degrees.pop()
    rot = {(u, str(k + 1)): (v, str(nbrs[v].index(u) + 1)) for u in vs for k, v in enumerate(nbrs[u])}
    return RotationGraph(vs, tuple(str(k + 1) for k in range(d)), rot)


def port_symmetric_numbering_exists(vertices: Sequence, edges: Iterable[tuple], ports: Sequence[Port]) -> bool:
    """Exhaustively look for a rotation map with Rot(u, i) = (v, i) on every edge of a simple graph."""
    vs = tuple(vertices)
    nbrs: dict = {u: [] for u in vs}
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    if any(len(x) != len(ports) for x in nbrs.values()):
        raise NotRegular("port count differs from a vertex degree")
    choices = [list(permutations(ports)) for _ in vs]
    for pick in product(*choices):
        port_of = {(u, w): pick[k][m] for k, u in enumerate(vs) for m, w in enumerate(nbrs[u])}
        if all(port_of[(u, w)] == port_of[(w, u)] for u in vs for w in nbrs[u]):
            return True
    return False


# --- rotation graphs as incidence graphs ----------------------------------------------------

def port_label(i: Port, j: Port) -> str:
    return f"r{i}_{j}"


def parse_port_label(label: str) -> tuple[Port, Port]:
    if not label.startswith("r") or label.count("_") != 1:
        raise ValueError(f"{label!r} is not a port-pair label")
    i, j = label[1:].split("_")
    return i, j


def _check_ports(ports: Iterable[Port]) -> None:
    for p in ports:
        if not p or "_" in p or not p.isalnum():
            raise ValueError(f"port {p!r} must be alphanumeric without underscores")


def rotation_to_graph(g: RotationGraph, vertex_label: str = "A", vertex_prefix: str = "g",
                      edge_prefix: str = "a") -> tuple[ConcreteGraph, dict]:
    """Twin-incidence graph: each rotation entry becomes one incidence labelled by its port pair."""
    _check_ports(g.ports)
    names = {v: (f"{vertex_prefix}{k}",) for k, v in enumerate(g.vertices)}
    incs = set()
    for k, ((u, i), (v, j)) in enumerate(sorted(g.rot.items(), key=lambda kv: (g.vertices.index(kv[0][0]), kv[0][1]))):
        incs.add(Incidence(port_label(i, j), names[u], (f"{edge_prefix}{k}",), names[v]))
    return ConcreteGraph({w: vertex_label for w in names.values()}, frozenset(incs)), names


def graph_to_rotation(h: ConcreteGraph, ports: Optional[Sequence[Port]] = None) -> RotationGraph:
    """Inverse of ``rotation_to_graph`` on graphs whose incidences carry port-pair labels."""
    rot = {}
    seen_ports: set[Port] = set()
    for inc in h.incidences:
        i, j = parse_port_label(inc.label)
        key = (inc.src, i)
        if key in rot and rot[key] != (inc.dst, j):
            raise ValueError(f"port {i} of {inc.src} leads to two places")
        rot[key] = (inc.dst, j)
        seen_ports.update((i, j))
    port_tuple = tuple(ports) if ports is not None else tuple(sorted(seen_ports))
    return RotationGraph(tuple(sorted(h.vertex_labels)), port_tuple, rot)


def undirected_adjacency(h: ConcreteGraph) -> tuple[tuple[Word, ...], np.ndarray]:
    """Adjacency reading every incidence as one undirected edge; a loop adds 2."""
    vs = tuple(sorted(h.vertex_labels))
    index = {v: k for k, v in enumerate(vs)}
    m = np.zeros((len(vs), len(vs)))
    for inc in h.incidences:
        m[index[inc.src], index[inc.dst]] += 1
        m[index[inc.dst], index[inc.src]] += 1
    return vs, m


def single_incidences(h: ConcreteGraph) -> ConcreteGraph:
    """Drop the reverse copy of every twin pair, keeping one incidence per undirected edge."""
    keep: dict[tuple, Incidence] = {}
    pending: dict[tuple, list[Incidence]] = {}
    for inc in sorted(h.incidences):
        back = (inc.label, inc.dst, inc.src)
        if pending.get(back):
            pending[back].pop()
            continue
        pending.setdefault((inc.label, inc.src, inc.dst), []).append(inc)
        keep[(inc.label, inc.src, inc.edge, inc.dst)] = inc
    return ConcreteGraph(h.vertex_labels, frozenset(keep.values()))


def rotation_to_json(g: RotationGraph) -> dict:
    return {"vertices": [str(v) for v in g.vertices], "ports": list(g.ports),
            "rotation": [{"from": [str(u), i], "to": [str(v), j]}
                         for (u, i), (v, j) in sorted(g.rot.items(), key=lambda kv: (str(kv[0][0]), kv[0][1]))]}


def rotation_from_json(data: dict) -> RotationGraph:
    rot = {(a["from"][0], str(a["from"][1])): (a["to"][0], str(a["to"][1])) for a in data["rotation"]}
    return RotationGraph(tuple(data["vertices"]), tuple(str(p) for p in data["ports"]), rot)


def load_rotation(path) -> RotationGraph:
    with open(path) as fh:
        return rotation_from_json(json.load(fh))


# --- spectra ------------------------------------------------------------------------------

def jacobi_eigenvalues(matrix, tol: float = JACOBI_TOLERANCE, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, sorted descending."""
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T):
        raise ValueError("Jacobi iteration needs a square symmetric matrix")
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps + 1):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= tol * scale:
            return np.sort(np.diag(a))[::-1]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-300 or abs(diff) > 1e150 * abs(apq):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * col_p - s * col_q, s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :], a[q, :] = c * row_p - s * row_q, s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    raise NonConvergence(f"off-diagonal mass {off:.3e} after {max_sweeps} sweeps")


@dataclass(frozen=True)
class Spectrum:
    """Adjacency eigenvalues sorted descending, with the degree used for normalizing."""

    eigenvalues: tuple[float, ...]
    degree: int

    @property
    def second(self) -> float:
        """Second largest unnormalized eigenvalue."""
        return self.eigenvalues[1] if len(self.eigenvalues) > 1 else self.eigenvalues[0]

    @property
    def normalized(self) -> float:
        """Second largest eigenvalue of the adjacency matrix scaled by 1/d."""
        return self.second / self.degree

    @property
    def normalized_abs(self) -> float:
        """Largest absolute value among the normalized eigenvalues after the top one."""
        return max((abs(x) for x in self.eigenvalues[1:]), default=0.0) / self.degree

    def to_json(self) -> dict:
        return {"eigenvalues": list(self.eigenvalues), "degree": self.degree, "second": self.second,
                "normalized_lambda2": self.normalized, "normalized_abs": self.normalized_abs}


def regular_degree(m: np.ndarray) -> int:
    sums = {int(round(x)) for x in m.sum(axis=1)}
    if len(sums) != 1:
        raise NotRegular(f"row sums {sorted(sums)} differ")
    return sums.pop()


def spectrum_of(m: np.ndarray) -> Spectrum:
    return Spectrum(tuple(float(x) for x in jacobi_eigenvalues(m)), regular_degree(m))


def lambda2(g: RotationGraph) -> Spectrum:
    return spectrum_of(g.adjacency())


def ramanujan_check(g: RotationGraph | np.ndarray) -> bool:
    """Second largest unnormalized eigenvalue at most 2 sqrt(d - 1)."""
    s = lambda2(g) if isinstance(g, RotationGraph) else spectrum_of(g)
    return s.second <= 2.0 * math.sqrt(s.degree - 1) + 1e-9


# --- Cheeger constant -----------------------------------------------------------------------

def cheeger(g: RotationGraph | np.ndarray) -> Fraction:
    """Exact minimum of |boundary(S)| / |S| over nonempty S with at most half the vertices."""
    m = g.adjacency() if isinstance(g, RotationGraph) else np.asarray(g)
    n = m.shape[0]
    if n > MAX_CHEEGER_VERTICES:
        raise ValueError(f"exhaustive Cheeger search supports at most {MAX_CHEEGER_VERTICES} vertices, got {n}")
    if n < 2:
        raise ValueError("Cheeger constant needs at least two vertices")
    adj = [[int(round(m[u, v])) for v in range(n)] for u in range(n)]
    nbrs = [[(v, adj[u][v]) for v in range(n) if v != u and adj[u][v]] for u in range(n)]
    outer = [sum(c for _, c in nbrs[u]) for u in range(n)]
    inside = [0] * n  # edges from u into S
    member = [False] * n
    boundary = size = 0
    best: Optional[Fraction] = None
    # Gray code walk: step k flips the vertex at the lowest set bit of k
    for k in range(1, 1 << n):
        u = (k & -k).bit_length() - 1
        if member[u]:
            member[u] = False
            size -= 1
            boundary -= outer[u] - 2 * inside[u]
            for v, c in nbrs[u]:
                inside[v] -= c
        else:
            boundary += outer[u] - 2 * inside[u]
            member[u] = True
            size += 1
            for v, c in nbrs[u]:
                inside[v] += c
        if 2 * size <= n and (best is None or boundary * best.denominator < best.numerator * size):
            best = Fraction(boundary, size)
    assert best is not None
    return best


@dataclass(frozen=True)
class IsoperimetricReport:
    """Both sides of (d - mu)/2 <= h <= sqrt(2 d (d - mu)) with mu the second largest unnormalized eigenvalue."""

    degree: int
    second: float
    cheeger: Fraction
    lower: float
    upper: float

    @property
    def lower_holds(self) -> bool:
        return self.lower <= float(self.cheeger) + 1e-9

    @property
    def upper_holds(self) -> bool:
        return float(self.cheeger) <= self.upper + 1e-9

    @property
    def holds(self) -> bool:
        return self.lower_holds and self.upper_holds

    def to_json(self) -> dict:
        return {"convention": "unnormalized", "degree": self.degree, "second": self.second,
                "cheeger": str(self.cheeger), "lower": self.lower, "upper": self.upper,
                "lower_holds": self.lower_holds, "upper_holds": self.upper_holds}


def isoperimetric_check(g: RotationGraph | np.ndarray) -> IsoperimetricReport:
    s = lambda2(g) if isinstance(g, RotationGraph) else spectrum_of(g)
    h = cheeger(g)
    gap = max(0.0, s.degree - s.second)
    return IsoperimetricReport(s.degree, s.second, h, gap / 2.0, math.sqrt(2.0 * s.degree * gap))


# --- product bounds -----------------------------------------------------------------------

def _zigzag_core(l1: float, l2: float) -> float:
    return 0.5 * (1 - l2 * l2) * l1 + 0.5 * math.sqrt((1 - l2 * l2) * l1 * l1 + 4 * l2 * l2)


def lambda_bound(kind: str, l1: float, l2: float, d2: int) -> float:
    """Upper bound on the normalized spectral parameter of a product from those of its factors."""
    for x in (l1, l2):
        if not -1e-9 <= x <= 1.0 + 1e-9:
            raise ValueError(f"spectral parameters must lie in [0, 1], got {x}")
    l1, l2 = min(max(l1, 0.0), 1.0), min(max(l2, 0.0), 1.0)
    core = _zigzag_core(l1, l2)
    if kind == "replacement":
        p = d2 ** 3 / (d2 ** 3 + 1)
        return (p + (1 - p) * core) ** (1 / 3)
    if kind == "balanced":
        return (7 / 8 + core / 8) ** (1 / 3)
    if kind == "zigzag":
        return core ** (1 / 3)
    raise ValueError(f"unknown product kind {kind!r}; expected one of {PRODUCT_KINDS}")


# --- grammar constructors -------------------------------------------------------------------

AXIOM = "Ax"
VERTEX = "A"


def _axiom_production(h: ConcreteGraph) -> VertexProduction:
    return VertexProduction("P0", AXIOM, h)


def _relabel(h: ConcreteGraph, label: str) -> ConcreteGraph:
    names = {v: (f"b{k}",) for k, v in enumerate(sorted(h.vertex_labels))}
    incs = frozenset(Incidence(i.label, names[i.src], (f"c{k}",), names[i.dst])
                     for k, i in enumerate(sorted(h.incidences)))
    return ConcreteGraph({w: label for w in names.values()}, incs)


def _lift_grammar(b: ConcreteGraph, copies: int, shifts: Sequence[int], kind: str) -> Grammar:
    base = _relabel(single_incidences(b), VERTEX)
    labels = sorted({i.label for i in base.incidences})
    split = VertexProduction("D", VERTEX, ConcreteGraph({(f"v{k}",): VERTEX for k in range(copies)}))
    eps = []
    for lab in labels:
        for s in shifts:
            rhs = frozenset(Attachment(True, lab, f"v{k}", f"{lab}s{s}e{k}", f"v{(k + s) % copies}")
                            for k in range(copies))
            eps.append(EdgeProduction(f"E{lab}s{s}", "D", lab, "D", rhs))
    return Grammar(AXIOM, (_axiom_production(base), split), tuple(eps), meta={"construction": kind})


def two_lift_grammar(b: ConcreteGraph) -> Grammar:
    """Each step doubles every vertex; each edge lifts to a parallel or a crossing pair."""
    return _lift_grammar(b, 2, (0, 1), "2-lift")


def shift4_lift_grammar(b: ConcreteGraph) -> Grammar:
    """Each step makes four copies; copy k of u joins copy k + s (mod 4) of v for a shift s."""
    return _lift_grammar(b, 4, (0, 1, 2, 3), "shift 4-lift")


def _require_ports_as_vertices(g0: RotationGraph, h: RotationGraph, ports: Sequence[Port]) -> None:
    for d in validate_rotation(g0) + validate_rotation(h):
        raise ValueError(str(d))
    if set(h.vertices) != set(ports):
        raise ValueError(f"H must have the vertex set {sorted(ports)}, got {sorted(map(str, h.vertices))}")
    _check_ports(list(g0.ports) + list(h.ports))


def _copy_of_h(h: RotationGraph) -> VertexProduction:
    labels = {(f"v{k}",): VERTEX for k in h.vertices}
    incs = frozenset(Incidence(port_label(i, j), (f"v{u}",), (f"h{n}",), (f"v{v}",))
                     for n, ((u, i), (v, j)) in enumerate(sorted(h.rot.items())))
    return VertexProduction("V", VERTEX, ConcreteGraph(labels, incs))


def _axiom_from_rotation(g0: RotationGraph) -> VertexProduction:
    graph, _ = rotation_to_graph(g0, VERTEX, "g", "a")
    return _axiom_production(graph)


def replacement_grammar(g0: RotationGraph, h: RotationGraph) -> Grammar:
    """Every vertex becomes a copy of H; each edge joins the copies through the extra port."""
    d = h.degree
    if g0.degree != d + 1:
        raise ValueError(f"G0 must have degree {d + 1}, got {g0.degree}")
    _require_ports_as_vertices(g0, h, g0.ports)
    if set(h.ports) | {g0.ports[-1]} != set(g0.ports):
        raise ValueError("H ports must be the first d ports of G0")
    extra = [p for p in g0.ports if p not in h.ports][0]
    eps = [EdgeProduction(f"P{k}x{l}", "V", port_label(k, l), "V",
                          frozenset({Attachment(True, port_label(extra, extra), f"v{k}", f"e{k}x{l}", f"v{l}")}))
           for k, l in product(g0.ports, repeat=2)]
    return Grammar(AXIOM, (_axiom_from_rotation(g0), _copy_of_h(h)), tuple(eps), meta={"construction": "replacement"})


def balanced_replacement_grammar(g0: RotationGraph, h: RotationGraph) -> Grammar:
    """Like the replacement product, with d parallel edges between copies on ports d+1..2d."""
    d = h.degree
    if g0.degree != 2 * d:
        raise ValueError(f"G0 must have degree {2 * d}, got {g0.degree}")
    _require_ports_as_vertices(g0, h, g0.ports)
    if not set(h.ports) <= set(g0.ports):
        raise ValueError("H ports must be among the ports of G0")
    extra = [p for p in g0.ports if p not in h.ports]
    eps = [EdgeProduction(f"P{k}x{l}", "V", port_label(k, l), "V",
                          frozenset(Attachment(True, port_label(i, i), f"v{k}", f"e{k}x{l}y{i}", f"v{l}")
                                    for i in extra))
           for k, l in product(g0.ports, repeat=2)]
    return Grammar(AXIOM, (_axiom_from_rotation(g0), _copy_of_h(h)), tuple(eps), meta={"construction": "balanced"})


def zigzag_ports(h_ports: Sequence[Port]) -> tuple[Port, ...]:
    return tuple(a + b for a, b in product(h_ports, repeat=2))


def _zigzag_rhs(h: RotationGraph, k2: Port, l2: Port) -> frozenset[Attachment]:
    """Edges for a G-edge entering the copies at k2 and l2: one H-step on each side."""
    out = set()
    for i2 in h.ports:
        k, i = h.rot[(k2, i2)]
        for j in h.ports:
            l, j2 = h.rot[(l2, j)]
            out.add(Attachment(True, port_label(i + j, j2 + i2), f"v{k}", f"e{k2}x{l2}y{i2}{j}", f"v{l}"))
    return frozenset(out)


def zigzag_grammar(g0: RotationGraph, h: RotationGraph, trimmed: bool = False) -> Grammar:
    """Every vertex becomes the edgeless vertex set of H; edges follow an H-step, the G-edge, an H-step."""
    pair_ports = zigzag_ports(h.ports)
    if g0.degree != h.degree ** 2 or set(g0.ports) != set(pair_ports):
        raise ValueError(f"G0 must use the {h.degree ** 2} port pairs {pair_ports}")
    _require_ports_as_vertices(g0, h, pair_ports)
    rhs = {(k, l): _zigzag_rhs(h, k, l) for k, l in product(pair_ports, repeat=2)}
    keys = list(rhs)
    if trimmed:
        axiom_graph, _ = rotation_to_graph(g0)
        live = {parse_port_label(i.label) for i in axiom_graph.incidences}
        frontier = list(live)
        while frontier:
            key = frontier.pop()
            for a in rhs[key]:
                nxt = parse_port_label(a.label)
                if nxt not in live:
                    live.add(nxt)
                    frontier.append(nxt)
        keys = [k for k in keys if k in live]
    eps = [EdgeProduction(f"P{k}x{l}", "V", port_label(k, l), "V", rhs[(k, l)]) for k, l in keys]
    spread = VertexProduction("V", VERTEX, ConcreteGraph({(f"v{k}",): VERTEX for k in h.vertices}))
    return Grammar(AXIOM, (_axiom_from_rotation(g0), spread), tuple(eps), meta={"construction": "zigzag"})


def product_grammar(kind: str, g0: RotationGraph, h: RotationGraph) -> Grammar:
    if kind == "replacement":
        return replacement_grammar(g0, h)
    if kind == "balanced":
        return balanced_replacement_grammar(g0, h)
    if kind == "zigzag":
        return zigzag_grammar(g0, h)
    raise ValueError(f"unknown product kind {kind!r}; expected one of {PRODUCT_KINDS}")


def product_layers(kind: str, g0: RotationGraph, h: RotationGraph, depth: int) -> list[RotationGraph]:
    """G0 followed by ``depth`` product steps, read back as rotation graphs."""
    from .derivation import derive_layers
    g = product_grammar(kind, g0, h)
    ports = g0.ports if kind != "zigzag" else zigzag_ports(h.ports)
    layers = derive_layers(g, depth + 1)
    return [graph_to_rotation(layer.graphs[0], ports) for layer in layers[1:]]


# --- reference graphs ---------------------------------------------------------------------

def k5_pair_ported() -> RotationGraph:
    """K5 with port pairs over {1, 2}: one Hamiltonian cycle on ports 11/12, the other on 21/22."""
    rot: dict = {}
    first = [0, 1, 2, 3, 4]
    for k, u in enumerate(first):
        v = first[(k + 1) % 5]
        rot[(u, "11")], rot[(v, "12")] = (v, "12"), (u, "11")
    # second cycle 0-2-4-1-3-0 with each vertex using 21 on one side and 22 on the other
    for u, pu, v, pv in ((0, "21", 2, "21"), (2, "22", 4, "22"), (4, "21", 1, "22"), (1, "21", 3, "21"),
                         (3, "22", 0, "22")):
        rot[(u, pu)], rot[(v, pv)] = (v, pv), (u, pu)
    return RotationGraph(tuple(range(5)), zigzag_ports(("1", "2")), rot)


def square_on_pairs() -> RotationGraph:
    """Two-regular graph on {1, 2}^2: the 4-cycle 11-12-22-21."""
    return cycle_graph(4, ("11", "12", "22", "21"))


def edge_label_types(g: RotationGraph) -> frozenset[frozenset[Port]]:
    """Distinct unordered port pairs used by the enriched edges."""
    return frozenset(frozenset({i, j}) for (_, i), (_, j) in g.rot.items())


def complete_bipartite(m: int, n: int) -> ConcreteGraph:
    """K_{m,n} with one incidence per edge, from the left side to the right side."""
    left = [(f"l{k}",) for k in range(m)]
    right = [(f"r{k}",) for k in range(n)]
    incs = frozenset(Incidence("a", u, (f"e{a}x{b}",), v) for a, u in enumerate(left) for b, v in enumerate(right))
    return ConcreteGraph({w: VERTEX for w in left + right}, incs)


def lift_children(b: ConcreteGraph, kind: str = "2-lift") -> list[ConcreteGraph]:
    """All graphs one lift step away from ``b``."""
    from .derivation import children
    g = two_lift_grammar(b) if kind == "2-lift" else shift4_lift_grammar(b)
    base = g.vprod["P0"].rhs
    return list(children(base, g))


def looped_path_on_pairs() -> RotationGraph:
    """Two-regular graph on {1, 2}^2 that is not bipartite: the path 11-12-22-21 with a half-loop at each end."""
    rot = {("11", "1"): ("12", "2"), ("12", "2"): ("11", "1"), ("12", "1"): ("22", "2"), ("22", "2"): ("12", "1"),
           ("22", "1"): ("21", "2"), ("21", "2"): ("22", "1"), ("11", "2"): ("11", "2"), ("21", "1"): ("21", "1")}
    return RotationGraph(("11", "12", "22", "21"), ("1", "2"), rot)
