"""Deterministic Turing machines and the edge-deterministic grammar whose unique derivation runs them."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .derivation import derive_layers, unix_check_bounded
from .model import Attachment, ConcreteGraph, EdgeProduction, Grammar, VertexProduction, Word

SUCC = "s"
COLLAPSED = "sz"
LEFT_END = "left"
RIGHT_END = "right"
DIAMOND = "dia"
LEFT_DONE = "leftdone"
RIGHT_DONE = "rightdone"
AXIOM = "Ax"
_IDENT = re.compile(r"[A-Za-z0-9]+")


@dataclass(frozen=True)
class Rule:
    direction: str  # "R" or "L"
    state: str
    write: str


@dataclass(frozen=True)
class TuringMachine:
    """Deterministic machine started on the empty tape with the head on cell 0."""

    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    rules: dict[tuple[str, str], Rule]
    initial: str
    accepting: str
    blank: str = "_"

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "rules", dict(self.rules))
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def symbols(self) -> tuple[str, ...]:
        """Tape symbols including the blank."""
        return tuple(self.alphabet) + ((self.blank,) if self.blank not in self.alphabet else ())

    def problems(self) -> list[str]:
        out = []
        for s in self.states:
            if not _IDENT.fullmatch(s):
                out.append(f"state {s!r} must be alphanumeric")
        for c in self.alphabet:
            if not _IDENT.fullmatch(c):
                out.append(f"symbol {c!r} must be alphanumeric")
        if self.blank != "_" and not _IDENT.fullmatch(self.blank):
            out.append(f"blank {self.blank!r} must be '_' or alphanumeric")
        for q in (self.initial, self.accepting):
            if q not in self.states:
                out.append(f"state {q!r} is not declared")
        for (p, a), r in self.rules.items():
            if p not in self.states or r.state not in self.states:
                out.append(f"rule ({p}, {a}) mentions an undeclared state")
            if a not in self.symbols or r.write not in self.symbols:
                out.append(f"rule ({p}, {a}) mentions an undeclared symbol")
            if r.direction not in ("R", "L"):
                out.append(f"rule ({p}, {a}) has direction {r.direction!r}; expected R or L")
        reserved = {LEFT_END, RIGHT_END, DIAMOND, LEFT_DONE, RIGHT_DONE, AXIOM, SUCC, COLLAPSED}
        labels = list(self.symbols) + [head_label(p, c) for p in self.states for c in self.symbols]
        if len(set(labels)) != len(labels) or reserved & set(labels):
            out.append("state and symbol names collide with each other or with reserved labels")
        return out


def head_label(state: str, symbol: str) -> str:
    return f"{state}_{symbol}"


def machine_from_json(data: dict) -> TuringMachine:
    rules: dict[tuple[str, str], Rule] = {}
    for r in data["rules"]:
        key = (r["from"][0], r["from"][1])
        if key in rules:
            raise ValueError(f"two rules for state {key[0]} reading {key[1]}: the machine is not deterministic")
        rules[key] = Rule(r["to"]["dir"], r["to"]["state"], r["to"]["write"])
    return TuringMachine(tuple(data["states"]), tuple(data["alphabet"]), rules, data["initial"], data["accepting"],
                         data.get("blank", "_"))


def machine_to_json(t: TuringMachine) -> dict:
    return {"states": list(t.states), "alphabet": list(t.alphabet), "blank": t.blank, "initial": t.initial,
            "accepting": t.accepting,
            "rules": [{"from": [p, a], "to": {"dir": r.direction, "state": r.state, "write": r.write}}
                      for (p, a), r in sorted(t.rules.items())]}


def load_machine(path) -> TuringMachine:
    with open(path) as fh:
        return machine_from_json(json.load(fh))


# --- direct simulation ------------------------------------------------------------------------

@dataclass(frozen=True)
class Configuration:
    state: str
    head: int
    tape: tuple[str, ...]

    def normalized(self, blank: str) -> "Configuration":
        tape = list(self.tape)
        while tape and tape[-1] == blank:
            tape.pop()
        return Configuration(self.state, self.head, tuple(tape))


def run(t: TuringMachine, steps: int) -> list[Configuration]:
    """Configurations after 0, 1, ... steps; stops when no rule applies or the head falls off the left end."""
    conf = Configuration(t.initial, 0, ())
    out = [conf]
    for _ in range(steps):
        tape = list(conf.tape) + [t.blank] * (conf.head + 1 - len(conf.tape))
        rule = t.rules.get((conf.state, tape[conf.head]))
        if rule is None:
            break
        tape[conf.head] = rule.write
        head = conf.head + (1 if rule.direction == "R" else -1)
        if head < 0:
            break
        conf = Configuration(rule.state, head, tuple(tape)).normalized(t.blank)
        out.append(conf)
    return out


# --- the grammar ----------------------------------------------------------------------------

class _Names:
    """Distinct single names for right hand sides."""

    def __init__(self) -> None:
        self.k = 0

    def __call__(self, stem: str) -> str:
        self.k += 1
        return f"{stem}{self.k}"


@dataclass
class _Builder:
    vps: list[VertexProduction] = field(default_factory=list)
    eps: list[EdgeProduction] = field(default_factory=list)
    names: _Names = field(default_factory=_Names)
    # production name -> (vertex name at the left end, vertex name at the right end) of its rhs path
    ends: dict[str, tuple[Optional[str], Optional[str]]] = field(default_factory=dict)

    def vertex(self, name: str, lhs: str, path: Iterable[str]) -> str:
        labels = list(path)
        vnames = [self.names("n") for _ in labels]
        incs = frozenset(_inc(vnames[k], self.names("x"), vnames[k + 1]) for k in range(len(vnames) - 1))
        rhs = ConcreteGraph({(n,): lab for n, lab in zip(vnames, labels)}, incs)
        self.vps.append(VertexProduction(name, lhs, rhs))
        self.ends[name] = (vnames[0], vnames[-1]) if vnames else (None, None)
        return name

    def edge(self, left: str, right: str, erase: bool = False, parent: str = SUCC, emit: str = SUCC) -> None:
        """Edge labelled ``emit`` from the last vertex of ``left`` to the first vertex of ``right``."""
        rhs = frozenset() if erase else frozenset(
            {Attachment(True, emit, self.ends[left][1], self.names("e"), self.ends[right][0])})
        self.eps.append(EdgeProduction(f"E{left}x{right}", left, parent, right, rhs))


def _inc(src: str, edge: str, dst: str):
    from .model import Incidence
    return Incidence(SUCC, (src,), (edge,), (dst,))


def _base(t: TuringMachine) -> _Builder:
    b = _Builder()
    blank = t.blank
    syms = t.symbols
    b.vertex("Pax", AXIOM, [LEFT_END, head_label(t.initial, blank), blank, RIGHT_END])
    b.vertex("Kleft", LEFT_END, [LEFT_END])
    b.vertex("Gright", RIGHT_END, [blank, RIGHT_END])
    for c in syms:
        b.vertex(f"K{c}", c, [c])
    right_targets = sorted({r.state for r in t.rules.values() if r.direction == "R"})
    left_targets = sorted({r.state for r in t.rules.values() if r.direction == "L"})
    for (p, a), r in sorted(t.rules.items()):
        b.vertex(f"H{p}x{a}", head_label(p, a), [r.write])
    for q in right_targets:
        for c in syms:
            b.vertex(f"Mr{q}x{c}", c, [head_label(q, c)])
    for q in left_targets:
        for c in syms:
            b.vertex(f"Ml{q}x{c}", c, [head_label(q, c)])
    copies = ["Kleft"] + [f"K{c}" for c in syms]
    plain = [f"K{c}" for c in syms]
    # tape copy and right extension
    for d in copies:
        for c in plain:
            b.edge(d, c)
    for c in plain:
        b.edge(c, "Gright")
    for q in right_targets:
        for c in syms:
            m = f"Mr{q}x{c}"
            for c2 in plain:
                b.edge(m, c2)
            b.edge(m, "Gright")
    for (p, a), r in sorted(t.rules.items()):
        h = f"H{p}x{a}"
        if r.direction == "R":
            for d in copies:
                b.edge(d, h)
            for c in syms:
                b.edge(h, f"Mr{r.state}x{c}")
        else:
            for c in syms:
                b.edge(f"Ml{r.state}x{c}", h)
            for c in plain:
                b.edge(h, c)
            b.edge(h, "Gright")
    for q in left_targets:
        for c in syms:
            for d in copies:
                b.edge(d, f"Ml{q}x{c}")
    return b


def build_tm_grammar(t: TuringMachine) -> Grammar:
    """Grammar whose layer l is the path of the configuration after l - 1 steps, padded with blanks."""
    b = _base(t)
    return Grammar(AXIOM, tuple(b.vps), tuple(b.eps), meta={"construction": "turing machine"})


def extend_collapse(t: TuringMachine, mode: str = "blackout") -> Grammar:
    """Collapse an accepting configuration to a path of diamonds; ``endpoints`` then erases it to two vertices."""
    if mode not in ("blackout", "endpoints"):
        raise ValueError(f"unknown collapse mode {mode!r}")
    if any(p == t.accepting for p, _ in t.rules):
        raise ValueError("the accepting state must have no rules for the collapse to be the unique derivation")
    b = _base(t)
    syms = t.symbols
    left_end = LEFT_DONE if mode == "endpoints" else DIAMOND
    right_end = RIGHT_DONE if mode == "endpoints" else DIAMOND
    b.vertex("Zleft", LEFT_END, [left_end])
    b.vertex("Zright", RIGHT_END, [right_end])
    for c in syms:
        b.vertex(f"Z{c}", c, [DIAMOND])
        b.vertex(f"Zf{c}", head_label(t.accepting, c), [DIAMOND])
    lefts = ["Zleft"] + [f"Z{c}" for c in syms]
    rights = [f"Z{c}" for c in syms] + ["Zright"]
    # collapsed paths carry their own edge label, so the machine's labels can all be non-terminal
    for d in lefts:
        for c in rights:
            b.edge(d, c, emit=COLLAPSED)
    for c in syms:
        for d in rights:
            b.edge(f"Zf{c}", d, emit=COLLAPSED)
    for c in lefts:
        for d in syms:
            b.edge(c, f"Zf{d}", emit=COLLAPSED)
    nonterminals: frozenset[str] = frozenset()
    if mode == "endpoints":
        b.vertex("Kleftdone", LEFT_DONE, [LEFT_DONE])
        b.vertex("Krightdone", RIGHT_DONE, [RIGHT_DONE])
        b.vertex("Zdia", DIAMOND, [])
        b.edge("Kleftdone", "Zdia", erase=True, parent=COLLAPSED)
        b.edge("Zdia", "Zdia", erase=True, parent=COLLAPSED)
        b.edge("Zdia", "Krightdone", erase=True, parent=COLLAPSED)
    else:
        labels = {v for p in b.vps for v in p.rhs.vertex_labels.values()} | {p.lhs for p in b.vps}
        nonterminals = frozenset(labels - {DIAMOND, AXIOM}) | {SUCC}
    return Grammar(AXIOM, tuple(b.vps), tuple(b.eps), nonterminals=nonterminals,
                   meta={"construction": f"turing machine, {mode} collapse"})


# --- reading layers back ------------------------------------------------------------------------

def path_labels(g: ConcreteGraph) -> list[str]:
    """Vertex labels along a successor path, from its unique source."""
    nxt: dict[Word, Word] = {}
    has_pred: set[Word] = set()
    for inc in g.incidences:
        if inc.src in nxt:
            raise ValueError("layer graph is not a path")
        nxt[inc.src] = inc.dst
        has_pred.add(inc.dst)
    starts = [v for v in g.vertex_labels if v not in has_pred]
    if len(starts) != 1:
        raise ValueError("layer graph is not a path")
    out, v, seen = [], starts[0], set()
    while v is not None:
        if v in seen:
            raise ValueError("layer graph is not a path")
        seen.add(v)
        out.append(g.vertex_labels[v])
        v = nxt.get(v)
    if len(out) != len(g.vertex_labels):
        raise ValueError("layer graph is not connected")
    return out


def read_configuration(t: TuringMachine, g: ConcreteGraph) -> Configuration:
    labels = path_labels(g)
    if labels[0] != LEFT_END or labels[-1] != RIGHT_END:
        raise ValueError("layer path lacks its end markers")
    cells = labels[1:-1]
    heads = {head_label(p, c): (p, c) for p in t.states for c in t.symbols}
    found = [(k, heads[x]) for k, x in enumerate(cells) if x in heads]
    if len(found) != 1:
        raise ValueError(f"expected one head cell, found {len(found)}")
    k, (p, c) = found[0]
    tape = tuple(c if j == k else x for j, x in enumerate(cells))
    return Configuration(p, k, tape).normalized(t.blank)


@dataclass(frozen=True)
class AcceptanceAgreement:
    depth: int
    grammar_accepts: bool
    machine_accepts: bool
    fidelity: bool
    layers: int

    @property
    def agree(self) -> bool:
        return self.grammar_accepts == self.machine_accepts

    def to_json(self) -> dict:
        return {"depth": self.depth, "grammar_accepts": self.grammar_accepts, "machine_accepts": self.machine_accepts,
                "agree": self.agree, "fidelity": self.fidelity, "layers": self.layers}


def acceptance_agreement(t: TuringMachine, depth: int) -> AcceptanceAgreement:
    """Does some layer up to ``depth`` carry an accepting head label, and does the machine accept as soon?"""
    g = build_tm_grammar(t)
    layers = derive_layers(g, depth)
    accepting = {head_label(t.accepting, c) for c in t.symbols}
    grammar_yes = any(set(x.vertex_labels.values()) & accepting for layer in layers[1:] for x in layer.graphs)
    confs = run(t, max(0, depth - 1))
    machine_yes = any(c.state == t.accepting for c in confs)
    fidelity = True
    nonempty = [layer for layer in layers[1:] if layer.graphs]
    if len(nonempty) != len(confs) or any(len(layer.graphs) != 1 for layer in nonempty):
        fidelity = False
    else:
        for layer, conf in zip(nonempty, confs):
            if read_configuration(t, layer.graphs[0]) != conf:
                fidelity = False
    return AcceptanceAgreement(depth, grammar_yes, machine_yes, fidelity, len(nonempty))


def unix_up_to(t: TuringMachine, depth: int) -> bool:
    return unix_check_bounded(build_tm_grammar(t), depth)[0]


# --- sample machines ------------------------------------------------------------------------

def _machine(rules: dict[tuple[str, str], tuple[str, str, str]], states: Iterable[str]) -> TuringMachine:
    return TuringMachine(tuple(states), ("0", "1"), {k: Rule(*v) for k, v in rules.items()}, "q0", "f")


def sample_machines() -> dict[str, TuringMachine]:
    """Small machines covering acceptance after 1, 3 and 5 steps, a non-accepting halt and a run that never halts."""
    return {
        "accept1": _machine({("q0", "_"): ("R", "f", "_")}, ("q0", "f")),
        "accept3": _machine({("q0", "_"): ("R", "q1", "1"), ("q1", "_"): ("L", "q2", "1"),
                             ("q2", "1"): ("R", "f", "0")}, ("q0", "q1", "q2", "f")),
        "accept5": _machine({("q0", "_"): ("R", "q1", "1"), ("q1", "_"): ("R", "q2", "1"),
                             ("q2", "_"): ("L", "q3", "1"), ("q3", "1"): ("L", "q4", "1"),
                             ("q4", "1"): ("R", "f", "1")}, ("q0", "q1", "q2", "q3", "q4", "f")),
        "reject": _machine({("q0", "_"): ("R", "q1", "1")}, ("q0", "q1", "f")),
        "bounce": _machine({("q0", "_"): ("R", "q1", "1"), ("q1", "_"): ("R", "q0", "0")}, ("q0", "q1", "f")),
    }
