"""Text formats: the line-oriented grammar format, graph JSON and DOT export.

Grammar format::

    # comment
    labels vertex: A B edge: a
    nonterminals i !
    axiom Ax
    vprod P0: Ax -> { v: 0:A 1:A ; i: a(0,al,1) ~a(1,e,0) }
    eprod E1: P1 -a-> P1 { >a(3,ga,3) <a(3,de,3) ~a(3,x,3) }

``~`` is undirected sugar.  Inside a vertex production ``~a(i,e,k)`` becomes
``a(i,e.f,k)`` and ``a(k,e.b,i)``; inside an edge production it becomes
``>a(i,e.f,k)`` and ``<a(i,e.b,k)``.
"""
from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Iterable

from .model import (Attachment, ConcreteGraph, EdgeProduction, Grammar, Incidence,
                    VertexProduction, Word, show_word)


class FormatError(ValueError):
    pass


_NAME = r"[^\s(),:{};<>~]+"
_INC = re.compile(rf"([<>~]?)({_NAME})\(\s*({_NAME})\s*,\s*({_NAME})\s*,\s*({_NAME})\s*\)")
_VPROD = re.compile(rf"vprod\s+({_NAME})\s*:\s*({_NAME})\s*->\s*\{{(.*)\}}\s*$", re.S)
_EPROD = re.compile(rf"eprod\s+({_NAME})\s*:\s*({_NAME})\s+-({_NAME})->\s+({_NAME})\s*\{{(.*)\}}\s*$", re.S)


def _statements(text: str) -> list[tuple[int, str]]:
    out: list[tuple[int, str]] = []
    buf: list[str] = []
    start = 0
    depth = 0
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not buf:
            start = no
        buf.append(line)
        depth += line.count("{") - line.count("}")
        if depth < 0:
            raise FormatError(f"line {no}: unbalanced '}}'")
        if depth == 0:
            out.append((start, " ".join(buf)))
            buf = []
    if buf:
        raise FormatError(f"line {start}: unterminated '{{'")
    return out


def _incidences(body: str, where: str) -> list[tuple[str, str, str, str, str]]:
    consumed = _INC.sub("", body).strip()
    if consumed:
        raise FormatError(f"{where}: cannot parse {consumed!r}")
    return [m.groups() for m in _INC.finditer(body)]


def _parse_vprod(m: re.Match, where: str, twins: set) -> VertexProduction:
    name, lhs, body = m.group(1), m.group(2), m.group(3)
    vpart, ipart = body, ""
    if ";" in body:
        vpart, ipart = body.split(";", 1)
    labels: dict[Word, str] = {}
    vpart = vpart.strip()
    if vpart:
        if not vpart.startswith("v:"):
            raise FormatError(f"{where}: vertex section must start with 'v:'")
        for tok in vpart[2:].split():
            if ":" not in tok:
                raise FormatError(f"{where}: vertex token {tok!r} lacks ':label'")
            v, lab = tok.split(":", 1)
            if (v,) in labels:
                raise FormatError(f"{where}: vertex {v} declared twice")
            labels[(v,)] = lab
    ipart = ipart.strip()
    incs: list[Incidence] = []
    if ipart:
        if not ipart.startswith("i:"):
            raise FormatError(f"{where}: incidence section must start with 'i:'")
        for mark, lab, s, e, t in _incidences(ipart[2:], where):
            if mark == "~":
                incs.append(Incidence(lab, (s,), (e + ".f",), (t,)))
                incs.append(Incidence(lab, (t,), (e + ".b",), (s,)))
                twins.add(frozenset({e + ".f", e + ".b"}))
            elif mark:
                raise FormatError(f"{where}: orientation marks belong to edge productions")
            else:
                incs.append(Incidence(lab, (s,), (e,), (t,)))
    return VertexProduction(name, lhs, ConcreteGraph(labels, frozenset(incs)))


def _parse_eprod(m: re.Match, where: str, twins: set) -> EdgeProduction:
    name, p1, lab, p2, body = m.groups()
    atts: list[Attachment] = []
    for mark, b, i, w, k in _incidences(body, where):
        if mark == "~":
            atts.append(Attachment(True, b, i, w + ".f", k))
            atts.append(Attachment(False, b, i, w + ".b", k))
            twins.add(frozenset({w + ".f", w + ".b"}))
        elif mark in (">", "<"):
            atts.append(Attachment(mark == ">", b, i, w, k))
        else:
            raise FormatError(f"{where}: edge production incidences need '>' or '<'")
    return EdgeProduction(name, p1, lab, p2, frozenset(atts))


def parse_grammar(text: str) -> Grammar:
    axiom = None
    vps: list[VertexProduction] = []
    eps: list[EdgeProduction] = []
    vlabels: set[str] = set()
    elabels: set[str] = set()
    nonterminals: set[str] = set()
    twins: set = set()
    meta: dict[str, str] = {}
    for no, st in _statements(text):
        where = f"line {no}"
        head = st.split(None, 1)[0]
        rest = st[len(head):].strip()
        if head == "axiom":
            if not re.fullmatch(_NAME, rest):
                raise FormatError(f"{where}: bad axiom {rest!r}")
            axiom = rest
        elif head == "labels":
            m = re.fullmatch(r"(?:vertex:\s*(.*?))?\s*(?:edge:\s*(.*))?", rest)
            if not m:
                raise FormatError(f"{where}: bad labels line")
            vlabels.update((m.group(1) or "").split())
            elabels.update((m.group(2) or "").split())
        elif head == "nonterminals":
            nonterminals.update(rest.split())
        elif head == "meta":
            k, _, v = rest.partition(" ")
            meta[k] = v.strip()
        elif head == "vprod":
            m = _VPROD.fullmatch(st)
            if not m:
                raise FormatError(f"{where}: bad vertex production")
            vps.append(_parse_vprod(m, where, twins))
        elif head == "eprod":
            m = _EPROD.fullmatch(st)
            if not m:
                raise FormatError(f"{where}: bad edge production")
            eps.append(_parse_eprod(m, where, twins))
        else:
            raise FormatError(f"{where}: unknown statement {head!r}")
    if axiom is None:
        raise FormatError("missing 'axiom' line")
    return Grammar(axiom=axiom, vertex_productions=tuple(vps), edge_productions=tuple(eps),
                   declared_vertex_labels=frozenset(vlabels), declared_edge_labels=frozenset(elabels),
                   nonterminals=frozenset(nonterminals), twins=frozenset(twins), meta=meta)


def load_grammar(path: str | Path) -> Grammar:
    return parse_grammar(Path(path).read_text())


def format_grammar(g: Grammar) -> str:
    lines: list[str] = []
    for k, v in sorted(g.meta.items()):
        lines.append(f"meta {k} {v}")
    lines.append(f"labels vertex: {' '.join(sorted(g.vertex_labels))} edge: {' '.join(sorted(g.edge_labels))}")
    if g.nonterminals:
        lines.append(f"nonterminals {' '.join(sorted(g.nonterminals))}")
    lines.append(f"axiom {g.axiom}")
    for p in g.vertex_productions:
        vs = " ".join(f"{v[0]}:{l}" for v, l in sorted(p.rhs.vertex_labels.items()))
        inc = " ".join(f"{i.label}({i.src[0]},{i.edge[0]},{i.dst[0]})" for i in sorted(p.rhs.incidences))
        body = (f"v: {vs}" if vs else "") + (f" ; i: {inc}" if inc else "")
        lines.append(f"vprod {p.name}: {p.lhs} -> {{ {body} }}".replace("{  }", "{ }"))
    for e in g.edge_productions:
        atts = " ".join(str(a) for a in sorted(e.rhs))
        lines.append(f"eprod {e.name}: {e.source} -{e.label}-> {e.target} {{ {atts} }}".replace("{  }", "{ }"))
    return "\n".join(lines) + "\n"


# --- graphs ------------------------------------------------------------------

def graph_to_json(g: ConcreteGraph) -> dict:
    return {
        "vertices": [{"word": list(v), "label": l} for v, l in sorted(g.vertex_labels.items())],
        "incidences": [{"label": i.label, "src": list(i.src), "edge": list(i.edge), "dst": list(i.dst)}
                       for i in sorted(g.incidences)],
    }


def graph_from_json(data: dict) -> ConcreteGraph:
    try:
        labels = {tuple(v["word"]): v["label"] for v in data["vertices"]}
        incs = frozenset(Incidence(i["label"], tuple(i["src"]), tuple(i["edge"]), tuple(i["dst"]))
                         for i in data.get("incidences", []))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed graph JSON: {exc}") from exc
    return ConcreteGraph(labels, incs)


def dump_graph_json(g: ConcreteGraph) -> str:
    return json.dumps(graph_to_json(g), indent=1, sort_keys=True)


def graph_to_dot(g: ConcreteGraph, name: str = "G") -> str:
    ids = {v: f"v{n}" for n, v in enumerate(sorted(g.vertex_labels))}
    out = [f"digraph {json.dumps(name)} {{"]
    for v, l in sorted(g.vertex_labels.items()):
        out.append(f"  {ids[v]} [label={json.dumps(f'{l}({show_word(v)})')}];")
    for i in sorted(g.incidences):
        out.append(f"  {ids[i.src]} -> {ids[i.dst]} [label={json.dumps(f'{i.label}({show_word(i.edge)})')}];")
    out.append("}")
    return "\n".join(out) + "\n"


def words_to_json(words: Iterable[Word]) -> list[list[str]]:
    return [list(w) for w in sorted(words)]
