"""Query automata: compiling first-order formulas over an automatic structure into tuple automata."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from . import automata as au
from .automata import TupleAutomaton
from .logic import (And, Atom, Const, Exists, Forall, FormulaError, FreshNames, Formula, Implies, Not, Or,
                    all_vars, disj, eliminate_connectives, free_vars, substitute)

DOMAIN_VAR = "x"


def positions(n: int) -> tuple[str, ...]:
    return tuple(str(k + 1) for k in range(n))


@dataclass(frozen=True, eq=False)
class AutomaticStructure:
    """Domain automaton over one component plus one automaton per predicate over positional components."""

    domain: TupleAutomaton
    relations: Mapping[str, TupleAutomaton]

    @property
    def alphabet(self) -> frozenset[str]:
        return self.domain.alphabet

    def relation(self, pred: str) -> TupleAutomaton:
        if pred == "=":
            return au.diagonal(au.rename(self.domain, {DOMAIN_VAR: "1"}), ("2",))
        try:
            return self.relations[pred]
        except KeyError:
            raise FormulaError(f"predicate {pred!r} is not presented") from None

    def domain_over(self, var: str) -> TupleAutomaton:
        return au.rename(self.domain, {DOMAIN_VAR: var})


Part = "Formula | TupleAutomaton"


def _conjuncts(f: Formula) -> Iterable[Formula]:
    if isinstance(f, And):
        yield from _conjuncts(f.left)
        yield from _conjuncts(f.right)
    else:
        yield f


def _part_vars(p) -> frozenset[str]:
    return frozenset(p.components) if isinstance(p, TupleAutomaton) else free_vars(p)


def _unbound(parts: Sequence[Part]) -> set[str]:
    """Variables of compound conjuncts that no automaton or atom in the group binds."""
    bound = set().union(*(_part_vars(p) for p in parts if isinstance(p, (TupleAutomaton, Atom))))
    wanted = set().union(*(_part_vars(p) for p in parts if not isinstance(p, (TupleAutomaton, Atom))))
    return wanted - bound


def atom_automaton(rel: TupleAutomaton, args: Sequence[str]) -> TupleAutomaton:
    """Relation read through an argument list; repeated variables force equal components."""
    if len(args) != rel.arity:
        raise FormulaError(f"arity mismatch: {len(args)} arguments for a relation of arity {rel.arity}")
    distinct: list[str] = []
    for a in args:
        if a not in distinct:
            distinct.append(a)
    first = [args.index(v) for v in distinct]
    trans = set()
    for p, x, q in rel.transitions:
        if all(x[k] == x[args.index(a)] for k, a in enumerate(args)):
            trans.add((p, tuple(x[k] for k in first), q))
    return au.trim(TupleAutomaton(tuple(distinct), rel.alphabet, frozenset(trans), rel.initial, rel.finals))


class QueryCompiler:
    """Structural compilation of a formula into an automaton over its free variables.

    The default strategy threads a context automaton through conjunctions, so
    negations are complemented relative to the tuples already constrained.
    The literal strategy follows the textbook induction: atoms, complement
    within the domain power, union after cylindrification, projection.
    """

    def __init__(self, structure: AutomaticStructure, strategy: str = "context"):
        if strategy not in ("context", "literal"):
            raise ValueError(f"unknown strategy {strategy!r}")
        self.s = structure
        self.strategy = strategy
        self._atoms: dict[tuple[str, tuple[str, ...]], TupleAutomaton] = {}
        self.fresh = FreshNames()

    def atom(self, f: Atom) -> TupleAutomaton:
        key = (f.pred, f.args)
        if key not in self._atoms:
            self._atoms[key] = atom_automaton(self.s.relation(f.pred), f.args)
        return self._atoms[key]

    def extend(self, a: TupleAutomaton, variables: Iterable[str]) -> TupleAutomaton:
        for v in sorted(set(variables) - set(a.components)):
            a = au.join(a, self.s.domain_over(v))
        return a

    def compile(self, f: Formula, variables: Optional[Sequence[str]] = None) -> TupleAutomaton:
        self.fresh = FreshNames(all_vars(f))
        fv = free_vars(f)
        variables = tuple(sorted(fv)) if variables is None else tuple(variables)
        if set(variables) != set(fv):
            raise FormulaError(f"requested variables {variables} differ from free variables {sorted(fv)}")
        if self.strategy == "literal":
            out = self._literal(eliminate_connectives(f))
        else:
            out = self._in(f, au.epsilon((), self.s.alphabet))
        out = self.extend(out, variables)
        return au.trim(au.reorder(out, variables))

    # context strategy
    def _in(self, f: Formula, ctx: TupleAutomaton) -> TupleAutomaton:
        if isinstance(f, Const):
            return ctx if f.value else au.empty(ctx.components, ctx.alphabet)
        if isinstance(f, Atom):
            return au.join(ctx, self.atom(f))
        if isinstance(f, And):
            left, right = f.left, f.right
            if isinstance(left, Not) and not isinstance(right, Not):
                left, right = right, left
            return self._in(right, self._in(left, ctx))
        if isinstance(f, Implies):
            return self._in(Or(Not(f.left), f.right), ctx)
        if isinstance(f, Or):
            fv = free_vars(f)
            return au.union(self.extend(self._in(f.left, ctx), fv), self.extend(self._in(f.right, ctx), fv))
        if isinstance(f, Not):
            wide = self.extend(ctx, free_vars(f.body))
            return au.difference(wide, self._in(f.body, wide))
        if isinstance(f, Forall):
            return self._in(Not(Exists(f.vars, Not(f.body))), ctx)
        renamed = {v: self.fresh(v) for v in f.vars}
        body = substitute(f.body, renamed)
        if ctx.components and free_vars(f) <= set(ctx.components):
            return self._exists(list(renamed.values()), body, ctx)
        return au.join(ctx, self._exists(list(renamed.values()), body))

    def _exists(self, variables: list[str], body: Formula, ctx: Optional[TupleAutomaton] = None) -> TupleAutomaton:
        """Eliminate quantified variables one at a time, joining only the conjuncts that mention each.

        When a context binding every free variable is supplied, a group whose compound conjuncts
        need variables it does not bind joins the context instead of the bare domain.
        """
        parts: list[Part] = list(_conjuncts(body))
        remaining = list(variables)
        while remaining:
            v = min(remaining, key=lambda u: (sum(u in _part_vars(p) for p in parts), remaining.index(u)))
            remaining.remove(v)
            group = [p for p in parts if v in _part_vars(p)]
            parts = [p for p in parts if v not in _part_vars(p)]
            if ctx is not None and _unbound(group) & set(ctx.components):
                group.insert(0, ctx)
            a = self.extend(self._conjunction(group), [v])
            parts.append(au.minimize(au.project_out(a, [v])))
        out = self._conjunction(parts)
        return out if ctx is None else au.join(ctx, out)

    def _conjunction(self, parts: Sequence[Part]) -> TupleAutomaton:
        acc = au.epsilon((), self.s.alphabet)
        ordered = sorted(parts, key=lambda p: isinstance(p, Not))
        for p in ordered:
            acc = au.join(acc, p) if isinstance(p, TupleAutomaton) else self._in(p, acc)
        return acc

    # literal strategy
    def _literal(self, f: Formula) -> TupleAutomaton:
        if isinstance(f, Const):
            return au.epsilon((), self.s.alphabet) if f.value else au.empty((), self.s.alphabet)
        if isinstance(f, Atom):
            return self.atom(f)
        if isinstance(f, Not):
            body = self._literal(f.body)
            universe = au.free_product(self.s.domain, body.components)
            return au.complement_within(body, universe)
        if isinstance(f, Or):
            fv = free_vars(f)
            left = self.extend(self._literal(f.left), fv)
            right = self.extend(self._literal(f.right), fv)
            return au.union(left, right)
        if isinstance(f, Exists):
            body = self.extend(self._literal(f.body), f.vars)
            return au.project_out(body, f.vars)
        raise FormulaError(f"literal strategy expects negation, disjunction and existentials, got {type(f).__name__}")


def compile_query(structure: AutomaticStructure, f: Formula, variables: Optional[Sequence[str]] = None,
                  strategy: str = "context") -> TupleAutomaton:
    return QueryCompiler(structure, strategy).compile(f, variables)


def model_check(structure: AutomaticStructure, sentence: Formula, strategy: str = "context") -> bool:
    if free_vars(sentence):
        raise FormulaError(f"sentence has free variables {sorted(free_vars(sentence))}")
    return not compile_query(structure, sentence, (), strategy).is_empty()


def nonterminal_free_layer(nonterminals: Iterable[str], vertex_labels: Iterable[str],
                           edge_labels: Iterable[str], var: str = DOMAIN_VAR,
                           fresh: Optional[FreshNames] = None) -> Formula:
    """Elements whose layer carries no non-terminal label."""
    fresh = fresh if fresh is not None else FreshNames({var})
    n = set(nonterminals)
    y = fresh("s")
    bad = [Atom(a, (y,)) for a in sorted(n & set(vertex_labels))]
    elabels = sorted(n & set(edge_labels))
    if elabels:
        u, v = fresh("u"), fresh("v")
        bad.append(Exists((u, v), disj(Atom(a, (u, y, v)) for a in elabels)))
    if not bad:
        return Atom("=", (var, var))
    return Forall((y,), Implies(Atom("sl", (var, y)), Not(disj(bad))))


def restrict_structure(structure: AutomaticStructure, domain_formula: Formula) -> AutomaticStructure:
    """Substructure on the elements satisfying a unary formula in the domain variable."""
    if free_vars(domain_formula) - {DOMAIN_VAR}:
        raise FormulaError("restriction formula must only mention the domain variable")
    dom = compile_query(structure, domain_formula, (DOMAIN_VAR,))
    rels: dict[str, TupleAutomaton] = {}
    for name, rel in structure.relations.items():
        out = rel
        for c in rel.components:
            out = au.join(out, au.rename(dom, {DOMAIN_VAR: c}))
        rels[name] = au.trim(au.reorder(out, rel.components))
    return AutomaticStructure(dom, rels)
