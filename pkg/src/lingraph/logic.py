"""First-order formulas over graph signatures: syntax, parsing, normal forms, translations, finite evaluation.

Surface syntax::

    EX x y. phi      ALL x. phi      ~phi      phi & psi      phi | psi      phi -> psi
    A(x)   a(x,y,z)   x = y   x != y   vrt(x)   edg(x)   pre(x,y)   cp(x,y)   sl(x,y)   TRUE   FALSE

``pre`` is the prefix order, ``cp`` compatibility and ``sl`` the same-layer relation.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .model import ConcreteGraph, Word

BUILTIN_ARITY = {"=": 2, "vrt": 1, "edg": 1, "pre": 2, "cp": 2, "sl": 2}
GRAPH_BUILTINS = frozenset({"=", "vrt", "edg"})


class FormulaError(ValueError):
    pass


# --- syntax tree --------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        if self.pred == "=":
            return f"{self.args[0]} = {self.args[1]}"
        return f"{self.pred}({','.join(self.args)})"


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self) -> str:
        return "TRUE" if self.value else "FALSE"


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self) -> str:
        return f"~{_wrap(self.body)}"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} & {_wrap(self.right)}"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} | {_wrap(self.right)}"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} -> {_wrap(self.right)}"


@dataclass(frozen=True)
class Exists:
    vars: tuple[str, ...]
    body: "Formula"

    def __str__(self) -> str:
        return f"EX {' '.join(self.vars)}. {self.body}"


@dataclass(frozen=True)
class Forall:
    vars: tuple[str, ...]
    body: "Formula"

    def __str__(self) -> str:
        return f"ALL {' '.join(self.vars)}. {self.body}"


Formula = Union[Atom, Const, Not, And, Or, Implies, Exists, Forall]


def _wrap(f: Formula) -> str:
    return str(f) if isinstance(f, (Atom, Const, Not)) else f"({f})"


def conj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return Const(True)
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return Const(False)
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or, Implies)):
        return free_vars(f.left) | free_vars(f.right)
    return free_vars(f.body) - frozenset(f.vars)


def all_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Not):
        return all_vars(f.body)
    if isinstance(f, (And, Or, Implies)):
        return all_vars(f.left) | all_vars(f.right)
    return all_vars(f.body) | frozenset(f.vars)


def predicates(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset({f.pred})
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Not):
        return predicates(f.body)
    if isinstance(f, (And, Or, Implies)):
        return predicates(f.left) | predicates(f.right)
    return predicates(f.body)


def substitute(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename free variables."""
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(mapping.get(a, a) for a in f.args))
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(substitute(f.left, mapping), substitute(f.right, mapping))
    inner = {k: v for k, v in mapping.items() if k not in f.vars}
    return type(f)(f.vars, substitute(f.body, inner))


class FreshNames:
    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)

    def __call__(self, base: str) -> str:
        stem = base.rstrip("0123456789_") or "v"
        k = 0
        while True:
            name = f"{stem}_{k}"
            if name not in self.taken:
                self.taken.add(name)
                return name
            k += 1


# --- signature and parser --------------------------------------------------------------

@dataclass(frozen=True)
class Signature:
    vertex_labels: frozenset[str]
    edge_labels: frozenset[str]

    def __post_init__(self) -> None:
        clash = (set(self.vertex_labels) | set(self.edge_labels)) & set(BUILTIN_ARITY)
        if clash:
            raise FormulaError(f"labels {sorted(clash)} collide with built-in predicates")
        both = set(self.vertex_labels) & set(self.edge_labels)
        if both:
            raise FormulaError(f"labels {sorted(both)} are both vertex and edge labels")

    def arity(self, pred: str) -> int:
        if pred in BUILTIN_ARITY:
            return BUILTIN_ARITY[pred]
        if pred in self.vertex_labels:
            return 1
        if pred in self.edge_labels:
            return 3
        raise FormulaError(f"unknown predicate {pred!r}")

    @staticmethod
    def of_grammar(g) -> "Signature":
        return Signature(frozenset(g.vertex_labels), frozenset(g.edge_labels))


_TOKEN = re.compile(r"\s*(?:(->|!=|[()~&|.,=])|([A-Za-z0-9_']+|!))")
KEYWORDS = {"EX", "ALL", "TRUE", "FALSE"}
COUNTING = {"EXN", "COUNT"}


class _Parser:
    def __init__(self, text: str, sig: Optional[Signature]):
        self.text = text
        self.sig = sig
        self.toks: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise FormulaError(f"unexpected character at position {pos}: {text[pos]!r}")
            tok = m.group(1) or m.group(2)
            self.toks.append((tok, m.start(m.lastindex)))
            pos = m.end()
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def where(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def take(self, expect: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise FormulaError(f"expected {expect or 'token'} at position {self.where()}, found {tok!r}")
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.implication()
        if self.peek() is not None:
            raise FormulaError(f"trailing input at position {self.where()}: {self.peek()!r}")
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok in COUNTING:
            raise FormulaError(f"counting quantifier {tok} at position {self.where()} is not implemented")
        if tok in ("EX", "ALL"):
            self.take()
            names: list[str] = []
            while self.peek() not in (".", None):
                names.append(self.variable())
            self.take(".")
            if not names:
                raise FormulaError(f"quantifier without variables at position {self.where()}")
            body = self.implication()
            return Exists(tuple(names), body) if tok == "EX" else Forall(tuple(names), body)
        if tok == "(":
            self.take()
            f = self.implication()
            self.take(")")
            return f
        if tok in ("TRUE", "FALSE"):
            self.take()
            return Const(tok == "TRUE")
        return self.atom()

    def variable(self) -> str:
        at = self.where()
        tok = self.take()
        if tok in KEYWORDS or not re.fullmatch(r"[A-Za-z0-9_']+", tok):
            raise FormulaError(f"expected a variable at position {at}, found {tok!r}")
        return tok

    def atom(self) -> Formula:
        at = self.where()
        name = self.take()
        if self.peek() == "(":
            self.take()
            args = [self.variable()]
            while self.peek() == ",":
                self.take()
                args.append(self.variable())
            self.take(")")
            if self.sig is not None:
                n = self.sig.arity(name)
                if n != len(args):
                    raise FormulaError(f"{name} at position {at} expects {n} arguments, got {len(args)}")
            elif name in BUILTIN_ARITY and BUILTIN_ARITY[name] != len(args):
                raise FormulaError(f"{name} at position {at} expects {BUILTIN_ARITY[name]} arguments")
            return Atom(name, tuple(args))
        if self.peek() in ("=", "!="):
            op = self.take()
            other = self.variable()
            eq = Atom("=", (name, other))
            return eq if op == "=" else Not(eq)
        raise FormulaError(f"expected an atom at position {at}, found {name!r}")


def parse_formula(text: str, sig: Optional[Signature] = None) -> Formula:
    return _Parser(text, sig).parse()


# --- normal forms -------------------------------------------------------------------------

def eliminate_connectives(f: Formula) -> Formula:
    """Rewrite into negation, disjunction and existential quantification only."""
    if isinstance(f, (Atom, Const)):
        return f
    if isinstance(f, Not):
        return Not(eliminate_connectives(f.body))
    if isinstance(f, Or):
        return Or(eliminate_connectives(f.left), eliminate_connectives(f.right))
    if isinstance(f, And):
        return Not(Or(Not(eliminate_connectives(f.left)), Not(eliminate_connectives(f.right))))
    if isinstance(f, Implies):
        return Or(Not(eliminate_connectives(f.left)), eliminate_connectives(f.right))
    if isinstance(f, Exists):
        return Exists(f.vars, eliminate_connectives(f.body))
    return Not(Exists(f.vars, Not(eliminate_connectives(f.body))))


def _prenex_parts(f: Formula, fresh: FreshNames) -> tuple[list[tuple[str, tuple[str, ...]]], Formula]:
    if isinstance(f, (Atom, Const)):
        return [], f
    if isinstance(f, Not):
        prefix, m = _prenex_parts(f.body, fresh)
        return [("A" if q == "E" else "E", vs) for q, vs in prefix], Not(m)
    if isinstance(f, Implies):
        return _prenex_parts(Or(Not(f.left), f.right), fresh)
    if isinstance(f, (And, Or)):
        lp, lm = _prenex_parts(f.left, fresh)
        rp, rm = _prenex_parts(f.right, fresh)
        return lp + rp, type(f)(lm, rm)
    kind = "E" if isinstance(f, Exists) else "A"
    renamed = {v: fresh(v) for v in f.vars}
    prefix, m = _prenex_parts(substitute(f.body, renamed), fresh)
    return [(kind, tuple(renamed[v] for v in f.vars))] + prefix, m


def prenex(f: Formula) -> Formula:
    """Equivalent prenex form with universal blocks written as negated existential blocks.

    Bound variables are renamed apart; adjacent blocks of one kind are merged.
    """
    fresh = FreshNames(all_vars(f))
    prefix, matrix = _prenex_parts(f, fresh)
    blocks: list[tuple[str, tuple[str, ...]]] = []
    for q, vs in prefix:
        if blocks and blocks[-1][0] == q:
            blocks[-1] = (q, blocks[-1][1] + vs)
        else:
            blocks.append((q, vs))
    out = matrix
    for q, vs in reversed(blocks):
        out = Exists(vs, out) if q == "E" else Not(Exists(vs, Not(out)))
    return _drop_double_negation(out)


def _drop_double_negation(f: Formula) -> Formula:
    if isinstance(f, Not) and isinstance(f.body, Not):
        return _drop_double_negation(f.body.body)
    if isinstance(f, Not):
        return Not(_drop_double_negation(f.body))
    if isinstance(f, Exists):
        return Exists(f.vars, _drop_double_negation(f.body))
    return f


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Atom, Const)):
        return True
    if isinstance(f, Not):
        return is_quantifier_free(f.body)
    if isinstance(f, (And, Or, Implies)):
        return is_quantifier_free(f.left) and is_quantifier_free(f.right)
    return False


def same_layer_chain(variables: Iterable[str]) -> Formula:
    vs = sorted(variables)
    return conj(Atom("sl", (vs[k], vs[k + 1])) for k in range(len(vs) - 1))


def _check_graph_formula(f: Formula) -> None:
    bad = {p for p in predicates(f) if p in BUILTIN_ARITY and p not in GRAPH_BUILTINS}
    if bad:
        raise FormulaError(f"graph formulas may not use {sorted(bad)}")


def tau_translate(f: Formula) -> Formula:
    """Guard every quantifier-free core and every negation by a same-layer chain over its free variables."""
    _check_graph_formula(f)

    def tau(g: Formula) -> Formula:
        if is_quantifier_free(g):
            guard = same_layer_chain(free_vars(g))
            return g if isinstance(guard, Const) else And(guard, g)
        if isinstance(g, Exists):
            return Exists(g.vars, tau(g.body))
        if isinstance(g, Not):
            guard = same_layer_chain(free_vars(g))
            inner = Not(tau(g.body))
            return inner if isinstance(guard, Const) else And(guard, inner)
        raise FormulaError("translation expects prenex input")

    return tau(prenex(f))


def relativize_to_layer(f: Formula, anchor: str) -> Formula:
    """Restrict every quantifier and free variable to the layer of ``anchor``."""
    _check_graph_formula(f)

    def rel(g: Formula) -> Formula:
        if isinstance(g, (Atom, Const)):
            return g
        if isinstance(g, Not):
            return Not(rel(g.body))
        if isinstance(g, (And, Or, Implies)):
            return type(g)(rel(g.left), rel(g.right))
        guard = conj(Atom("sl", (v, anchor)) for v in g.vars)
        if isinstance(g, Exists):
            return Exists(g.vars, And(guard, rel(g.body)))
        return Forall(g.vars, Implies(guard, rel(g.body)))

    if anchor in all_vars(f):
        raise FormulaError(f"anchor {anchor} already used in the formula")
    body = rel(f)
    guards = [Atom("sl", (v, anchor)) for v in sorted(free_vars(f))]
    return conj(guards + [body])


def anchored_translate(f: Formula) -> Formula:
    """Sentence true in the whole-language structure iff some single layer satisfies ``f``."""
    if free_vars(f):
        raise FormulaError("anchored translation expects a sentence")
    anchor = FreshNames(all_vars(f))("layer")
    return Exists((anchor,), relativize_to_layer(f, anchor))


def nonterminal_guard(f: Formula, nonterminals: Iterable[str], sig: Signature) -> Formula:
    n = set(nonterminals)
    fresh = FreshNames(all_vars(f))
    parts = [f]
    vlabels = sorted(n & set(sig.vertex_labels))
    elabels = sorted(n & set(sig.edge_labels))
    if vlabels:
        x = fresh("x")
        parts.append(Not(Exists((x,), disj(Atom(a, (x,)) for a in vlabels))))
    if elabels:
        x, y, z = fresh("x"), fresh("y"), fresh("z")
        parts.append(Not(Exists((x, y, z), disj(Atom(a, (x, y, z)) for a in elabels))))
    return conj(parts)


# --- finite evaluation ------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteStructure:
    domain: frozenset
    relations: Mapping[str, frozenset[tuple]]

    def holds(self, pred: str, args: tuple) -> bool:
        if pred == "=":
            return args[0] == args[1]
        return args in self.relations.get(pred, frozenset())


def graph_structure(g: ConcreteGraph, vertex_labels: Iterable[str] = (), edge_labels: Iterable[str] = ()) -> FiniteStructure:
    rel: dict[str, set[tuple]] = {"vrt": {(v,) for v in g.vertex_labels}, "edg": {(e,) for e in g.edges}}
    for lab in vertex_labels:
        rel.setdefault(lab, set())
    for lab in edge_labels:
        rel.setdefault(lab, set())
    for v, lab in g.vertex_labels.items():
        rel.setdefault(lab, set()).add((v,))
    for i in g.incidences:
        rel.setdefault(i.label, set()).add((i.src, i.edge, i.dst))
    return FiniteStructure(frozenset(g.name_set), {k: frozenset(v) for k, v in rel.items()})


@dataclass(frozen=True)
class Table:
    """A finite relation over named columns."""

    columns: tuple[str, ...]
    rows: frozenset[tuple]

    def project(self, keep: Sequence[str]) -> "Table":
        pos = [self.columns.index(c) for c in keep]
        return Table(tuple(keep), frozenset(tuple(r[i] for i in pos) for r in self.rows))


UNIT = Table((), frozenset({()}))


def _join(a: Table, b: Table) -> Table:
    shared = [c for c in a.columns if c in b.columns]
    extra = [c for c in b.columns if c not in a.columns]
    sb = [b.columns.index(c) for c in shared]
    eb = [b.columns.index(c) for c in extra]
    index: dict[tuple, list[tuple]] = {}
    for r in b.rows:
        index.setdefault(tuple(r[i] for i in sb), []).append(tuple(r[i] for i in eb))
    sa = [a.columns.index(c) for c in shared]
    rows = {r + tail for r in a.rows for tail in index.get(tuple(r[i] for i in sa), ())}
    return Table(a.columns + tuple(extra), frozenset(rows))


def _atom_table(s: FiniteStructure, f: Atom) -> Table:
    cols = tuple(dict.fromkeys(f.args))
    if f.pred == "=":
        tuples = {(d, d) for d in s.domain}
    else:
        tuples = s.relations.get(f.pred, frozenset())
    rows = set()
    for t in tuples:
        env: dict[str, object] = {}
        if all(env.setdefault(v, x) == x for v, x in zip(f.args, t)):
            rows.add(tuple(env[c] for c in cols))
    return Table(cols, frozenset(rows))


def _extend(s: FiniteStructure, t: Table, variables: Iterable[str]) -> Table:
    for v in sorted(set(variables) - set(t.columns)):
        t = Table(t.columns + (v,), frozenset(r + (d,) for r in t.rows for d in s.domain))
    return t


def _evaluate(s: FiniteStructure, f: Formula, ctx: Table, fresh: FreshNames) -> Table:
    """Rows over the context columns plus the free variables of ``f`` that extend a context row."""
    if isinstance(f, Const):
        return ctx if f.value else Table(ctx.columns, frozenset())
    if isinstance(f, Atom):
        return _join(ctx, _atom_table(s, f))
    if isinstance(f, And):
        left, right = (f.right, f.left) if isinstance(f.left, Not) else (f.left, f.right)
        return _evaluate(s, right, _evaluate(s, left, ctx, fresh), fresh)
    if isinstance(f, Implies):
        return _evaluate(s, Or(Not(f.left), f.right), ctx, fresh)
    if isinstance(f, Or):
        cols = ctx.columns + tuple(sorted(free_vars(f) - set(ctx.columns)))
        left = _extend(s, _evaluate(s, f.left, ctx, fresh), cols).project(cols)
        right = _extend(s, _evaluate(s, f.right, ctx, fresh), cols).project(cols)
        return Table(cols, left.rows | right.rows)
    if isinstance(f, Not):
        wide = _extend(s, ctx, free_vars(f.body))
        inner = _evaluate(s, f.body, wide, fresh).project(wide.columns)
        return Table(wide.columns, wide.rows - inner.rows)
    if isinstance(f, Forall):
        return _evaluate(s, Not(Exists(f.vars, Not(f.body))), ctx, fresh)
    renamed = {v: fresh(v) for v in f.vars}
    inner = _extend(s, _evaluate(s, substitute(f.body, renamed), ctx, fresh), renamed.values())
    keep = ctx.columns + tuple(c for c in inner.columns if c not in ctx.columns and c not in renamed.values())
    return inner.project(keep)


def evaluate(s: FiniteStructure, f: Formula, variables: Sequence[str]) -> frozenset[tuple]:
    """All assignments to ``variables`` (covering the free variables) satisfying ``f``, by relational algebra."""
    fresh = FreshNames(all_vars(f) | set(variables))
    t = _extend(s, _evaluate(s, f, UNIT, fresh), variables)
    return t.project(tuple(variables)).rows


def satisfies(s: FiniteStructure, f: Formula, env: Mapping[str, object]) -> bool:
    names = tuple(sorted(env))
    fresh = FreshNames(all_vars(f) | set(names))
    ctx = Table(names, frozenset({tuple(env[n] for n in names)}))
    return bool(_evaluate(s, f, ctx, fresh).rows)


def satisfies_naive(s: FiniteStructure, f: Formula, env: Mapping[str, object]) -> bool:
    """Direct recursion over all assignments; exponential, used as an independent check."""
    if isinstance(f, Atom):
        return s.holds(f.pred, tuple(env[a] for a in f.args))
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not satisfies_naive(s, f.body, env)
    if isinstance(f, And):
        return satisfies_naive(s, f.left, env) and satisfies_naive(s, f.right, env)
    if isinstance(f, Or):
        return satisfies_naive(s, f.left, env) or satisfies_naive(s, f.right, env)
    if isinstance(f, Implies):
        return (not satisfies_naive(s, f.left, env)) or satisfies_naive(s, f.right, env)
    dom = sorted(s.domain)
    want_all = isinstance(f, Forall)
    for values in product(dom, repeat=len(f.vars)):
        inner = dict(env)
        inner.update(zip(f.vars, values))
        ok = satisfies_naive(s, f.body, inner)
        if want_all and not ok:
            return False
        if not want_all and ok:
            return True
    return want_all


def query_result(s: FiniteStructure, f: Formula, variables: Optional[Sequence[str]] = None) -> frozenset[tuple]:
    variables = tuple(sorted(free_vars(f))) if variables is None else tuple(variables)
    missing = free_vars(f) - set(variables)
    if missing:
        raise FormulaError(f"free variables {sorted(missing)} are not among the requested ones")
    return evaluate(s, f, variables)
