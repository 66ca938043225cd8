"""Tuple automata: finite automata over tuples of padded letters and their relation algebra.

A letter is a tuple aligned with the automaton's components, ``None`` being the
blank.  Automata never carry the all-blank letter; an accepted padded word is
decoded to a word tuple by stripping blanks.
"""
from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Optional, Sequence

Letter = tuple[Optional[str], ...]
WordTuple = tuple[tuple[str, ...], ...]
BLANK = None


class HoleError(ValueError):
    """Raised when a padded word has a blank followed by a letter in one component."""


class ArityError(ValueError):
    pass


def convolve(words: Sequence[Sequence[str]]) -> list[Letter]:
    n = max((len(w) for w in words), default=0)
    return [tuple(w[j] if j < len(w) else BLANK for w in words) for j in range(n)]


def deconvolve(padded: Sequence[Letter], arity: Optional[int] = None) -> WordTuple:
    if arity is None:
        arity = len(padded[0]) if padded else 0
    out: list[list[str]] = [[] for _ in range(arity)]
    ended = [False] * arity
    for pos, letter in enumerate(padded):
        if len(letter) != arity:
            raise ArityError(f"letter {letter} at position {pos} has arity {len(letter)}, expected {arity}")
        for c, sym in enumerate(letter):
            if sym is BLANK:
                ended[c] = True
            elif ended[c]:
                raise HoleError(f"hole before position {pos} in component {c}")
            else:
                out[c].append(sym)
    return tuple(tuple(w) for w in out)


def is_hole_free(padded: Sequence[Letter]) -> bool:
    try:
        deconvolve(padded)
    except HoleError:
        return False
    return True


def _all_blank(letter: Letter) -> bool:
    return all(s is BLANK for s in letter)


@dataclass(frozen=True, eq=False)
class TupleAutomaton:
    """Nondeterministic automaton on tuples of padded letters.

    ``components`` names the tuple positions; ``alphabet`` is the base alphabet
    that free components range over.
    """

    components: tuple[str, ...]
    alphabet: frozenset[str]
    transitions: frozenset[tuple[int, Letter, int]]
    initial: frozenset[int]
    finals: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "finals", frozenset(self.finals))
        if len(set(self.components)) != len(self.components):
            raise ArityError(f"repeated component in {self.components}")
        for p, a, q in self.transitions:
            if len(a) != len(self.components):
                raise ArityError(f"letter {a} does not match components {self.components}")

    @property
    def arity(self) -> int:
        return len(self.components)

    @cached_property
    def states(self) -> frozenset[int]:
        out = set(self.initial) | set(self.finals)
        for p, _, q in self.transitions:
            out.update((p, q))
        return frozenset(out)

    @cached_property
    def out(self) -> dict[int, tuple[tuple[Letter, int], ...]]:
        d: dict[int, list[tuple[Letter, int]]] = defaultdict(list)
        keys: dict[Letter, tuple] = {}
        for p, a, q in self.transitions:
            if a not in keys:
                keys[a] = _letter_key(a)
            d[p].append((a, q))
        return {k: tuple(sorted(v, key=lambda t: (keys[t[0]], t[1]))) for k, v in sorted(d.items())}

    def successors(self, p: int) -> tuple[tuple[Letter, int], ...]:
        return self.out.get(p, ())

    def __repr__(self) -> str:
        return (f"TupleAutomaton(components={self.components}, states={len(self.states)}, "
                f"transitions={len(self.transitions)})")

    # --- queries ---------------------------------------------------------------
    def accepts_padded(self, padded: Sequence[Letter]) -> bool:
        cur = set(self.initial)
        for a in padded:
            a = tuple(a)
            cur = {q for p in cur for b, q in self.successors(p) if b == a}
            if not cur:
                return False
        return bool(cur & self.finals)

    def accepts(self, words: Sequence[Sequence[str]]) -> bool:
        if len(words) != self.arity:
            raise ArityError(f"expected {self.arity} words")
        return self.accepts_padded(convolve(words))

    def is_empty(self) -> bool:
        return not (_reachable(self) & self.finals)

    def padded_words(self, max_len: int) -> Iterator[tuple[Letter, ...]]:
        """Accepted padded words of length at most ``max_len`` in length-lexicographic order."""
        frontier: list[tuple[tuple[Letter, ...], frozenset[int]]] = [((), frozenset(self.initial))]
        for _ in range(max_len + 1):
            nxt: list[tuple[tuple[Letter, ...], frozenset[int]]] = []
            for w, cur in frontier:
                if cur & self.finals:
                    yield w
                step: dict[Letter, set[int]] = defaultdict(set)
                for p in cur:
                    for a, q in self.successors(p):
                        step[a].add(q)
                for a in sorted(step, key=_letter_key):
                    nxt.append((w + (a,), frozenset(step[a])))
            frontier = nxt

    def enumerate(self, max_len: int) -> frozenset[WordTuple]:
        out = set()
        for w in self.padded_words(max_len):
            try:
                out.add(deconvolve(w, self.arity))
            except HoleError:
                continue
        return frozenset(out)

    def witness(self, max_len: int = 64) -> Optional[WordTuple]:
        """Length-lexicographically least accepted hole-free tuple, searching by breadth over subsets."""
        start = frozenset(self.initial)
        seen = {start}
        frontier: list[tuple[tuple[Letter, ...], frozenset[int]]] = [((), start)]
        live = _coreachable(self)
        for _ in range(max_len + 1):
            nxt = []
            for w, cur in frontier:
                if cur & self.finals and is_hole_free(w):
                    return deconvolve(w, self.arity)
                step: dict[Letter, set[int]] = defaultdict(set)
                for p in cur:
                    for a, q in self.successors(p):
                        if q in live:
                            step[a].add(q)
                for a in sorted(step, key=_letter_key):
                    s = frozenset(step[a])
                    if s not in seen:
                        seen.add(s)
                        nxt.append((w + (a,), s))
            if not nxt:
                return None
            frontier = nxt
        return None


def _tkey(t: tuple[int, Letter, int]) -> tuple:
    return (t[0], _letter_key(t[1]), t[2])


def _letter_key(a: Letter) -> tuple:
    return tuple(("", "") if s is BLANK else ("~", s) for s in a)


def _reachable(a: TupleAutomaton) -> set[int]:
    seen = set(a.initial)
    stack = list(a.initial)
    while stack:
        p = stack.pop()
        for _, q in a.successors(p):
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def _coreachable(a: TupleAutomaton) -> set[int]:
    back: dict[int, set[int]] = defaultdict(set)
    for p, _, q in a.transitions:
        back[q].add(p)
    seen = set(a.finals)
    stack = list(a.finals)
    while stack:
        q = stack.pop()
        for p in back[q]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def build(components: Sequence[str], alphabet: Iterable[str], initial: Iterable[Hashable],
          successors: Callable[[Hashable], Iterable[tuple[Letter, Hashable]]],
          is_final: Callable[[Hashable], bool]) -> TupleAutomaton:
    """Explore reachable structured states and number them."""
    index: dict[Hashable, int] = {}
    queue: deque = deque()
    for s in initial:
        if s not in index:
            index[s] = len(index)
            queue.append(s)
    trans: set[tuple[int, Letter, int]] = set()
    finals: set[int] = set()
    init = set(index.values())
    while queue:
        s = queue.popleft()
        if is_final(s):
            finals.add(index[s])
        for a, t in successors(s):
            if t not in index:
                index[t] = len(index)
                queue.append(t)
            trans.add((index[s], tuple(a), index[t]))
    return TupleAutomaton(tuple(components), frozenset(alphabet), frozenset(trans), frozenset(init), frozenset(finals))


def trim(a: TupleAutomaton) -> TupleAutomaton:
    keep = _reachable(a) & _coreachable(a)
    if not keep:
        return empty(a.components, a.alphabet)
    ren = {q: n for n, q in enumerate(sorted(keep))}
    return TupleAutomaton(a.components, a.alphabet,
                          frozenset((ren[p], x, ren[q]) for p, x, q in a.transitions if p in keep and q in keep),
                          frozenset(ren[q] for q in a.initial if q in keep),
                          frozenset(ren[q] for q in a.finals if q in keep))


# --- basic automata -------------------------------------------------------------

def empty(components: Sequence[str], alphabet: Iterable[str]) -> TupleAutomaton:
    return TupleAutomaton(tuple(components), frozenset(alphabet), frozenset(), frozenset({0}), frozenset())


def epsilon(components: Sequence[str] = (), alphabet: Iterable[str] = ()) -> TupleAutomaton:
    """Accepts exactly the tuple of empty words."""
    return TupleAutomaton(tuple(components), frozenset(alphabet), frozenset(), frozenset({0}), frozenset({0}))


def universe(components: Sequence[str], alphabet: Iterable[str]) -> TupleAutomaton:
    """All word tuples over the alphabet."""
    alphabet = frozenset(alphabet)
    n = len(components)
    syms = sorted(alphabet)

    def succ(ended: frozenset[int]):
        choices = [[BLANK] if c in ended else [BLANK] + syms for c in range(n)]
        for letter in product(*choices):
            if not _all_blank(letter):
                yield letter, frozenset(ended | {c for c in range(n) if letter[c] is BLANK})

    return build(components, alphabet, [frozenset()], succ, lambda s: True)


def from_tuples(components: Sequence[str], alphabet: Iterable[str],
                tuples: Iterable[Sequence[Sequence[str]]]) -> TupleAutomaton:
    """Finite relation as a trie automaton."""
    trans: set[tuple[int, Letter, int]] = set()
    finals: set[int] = set()
    nodes: dict[tuple, int] = {(): 0}
    for t in tuples:
        w = tuple(convolve(t))
        for j in range(len(w)):
            key = w[: j + 1]
            if key not in nodes:
                nodes[key] = len(nodes)
            trans.add((nodes[w[:j]], w[j], nodes[key]))
        finals.add(nodes[w])
    return TupleAutomaton(tuple(components), frozenset(alphabet), frozenset(trans), frozenset({0}), frozenset(finals))


def rename(a: TupleAutomaton, mapping: Mapping[str, str]) -> TupleAutomaton:
    """Rename components injectively."""
    comps = tuple(mapping.get(c, c) for c in a.components)
    return TupleAutomaton(comps, a.alphabet, a.transitions, a.initial, a.finals)


def reorder(a: TupleAutomaton, components: Sequence[str]) -> TupleAutomaton:
    components = tuple(components)
    if sorted(components) != sorted(a.components):
        raise ArityError(f"{components} is not a permutation of {a.components}")
    if components == a.components:
        return a
    pos = [a.components.index(c) for c in components]
    return TupleAutomaton(components, a.alphabet,
                          frozenset((p, tuple(x[i] for i in pos), q) for p, x, q in a.transitions),
                          a.initial, a.finals)


# --- hole-freeness -----------------------------------------------------------------

def hole_free_filter(a: TupleAutomaton) -> TupleAutomaton:
    """Restrict to hole-free words by tracking ended components."""
    n = a.arity

    def succ(s):
        q, ended = s
        for x, r in a.successors(q):
            if any(x[c] is not BLANK for c in ended):
                continue
            yield x, (r, ended | frozenset(c for c in range(n) if x[c] is BLANK))

    return trim(build(a.components, a.alphabet, [(q, frozenset()) for q in sorted(a.initial)],
                      succ, lambda s: s[0] in a.finals))


# --- upturn ------------------------------------------------------------------------

def upturn(a: TupleAutomaton, sigma: Mapping[str, str], components: Sequence[str],
           alphabet: Optional[Iterable[str]] = None) -> TupleAutomaton:
    """Automaton over ``components`` for the upturn of the relation along the partial map ``sigma``.

    Components outside the domain of ``sigma`` are free and range over ``alphabet``.
    """
    components = tuple(components)
    alphabet = frozenset(a.alphabet if alphabet is None else alphabet)
    for x, y in sigma.items():
        if x not in components or y not in a.components:
            raise ArityError(f"sigma maps {x} to {y} outside the component sets")
    src_pos = {x: a.components.index(y) for x, y in sigma.items()}
    image = sorted(set(src_pos.values()))
    free = [c for c, x in enumerate(components) if x not in sigma]
    syms = [BLANK] + sorted(alphabet)

    # states that can still reach a final state by letters blank on the image
    back: dict[int, set[int]] = defaultdict(set)
    for p, x, q in a.transitions:
        if all(x[i] is BLANK for i in image):
            back[q].add(p)
    closed = set(a.finals)
    stack = list(a.finals)
    while stack:
        q = stack.pop()
        for p in back[q]:
            if p not in closed:
                closed.add(p)
                stack.append(p)

    def lift(x: Letter) -> list[Letter]:
        bound = [x[src_pos[name]] if name in src_pos else BLANK for name in components]
        out = []
        for fill in product(syms, repeat=len(free)):
            letter = list(bound)
            for c, sym in zip(free, fill):
                letter[c] = sym
            out.append(tuple(letter))
        return out

    tail = "tail"

    def succ(s):
        if s == tail:
            for letter in lift(tuple(BLANK for _ in a.components)):
                if not _all_blank(letter):
                    yield letter, tail
            return
        for x, q in a.successors(s):
            if all(x[i] is BLANK for i in image):
                continue
            for letter in lift(x):
                yield letter, q
        if s in closed and free:
            for letter in lift(tuple(BLANK for _ in a.components)):
                if not _all_blank(letter):
                    yield letter, tail

    raw = build(components, alphabet, sorted(a.initial), succ, lambda s: s == tail or s in closed)
    return hole_free_filter(raw)


def cylindrify(a: TupleAutomaton, components: Sequence[str], alphabet: Optional[Iterable[str]] = None) -> TupleAutomaton:
    return upturn(a, {c: c for c in a.components}, components, alphabet)


def project_onto(a: TupleAutomaton, keep: Sequence[str]) -> TupleAutomaton:
    return upturn(a, {c: c for c in keep}, tuple(keep))


def project_out(a: TupleAutomaton, drop: Iterable[str]) -> TupleAutomaton:
    drop = set(drop)
    return project_onto(a, [c for c in a.components if c not in drop])


# --- Boolean operations ---------------------------------------------------------------

def _same_shape(a: TupleAutomaton, b: TupleAutomaton) -> TupleAutomaton:
    if set(a.components) != set(b.components):
        raise ArityError(f"components differ: {a.components} vs {b.components}")
    return reorder(b, a.components)


def union(a: TupleAutomaton, b: TupleAutomaton) -> TupleAutomaton:
    b = _same_shape(a, b)
    off = max(a.states, default=-1) + 1
    return trim(TupleAutomaton(a.components, a.alphabet | b.alphabet,
                               a.transitions | {(p + off, x, q + off) for p, x, q in b.transitions},
                               a.initial | {q + off for q in b.initial},
                               a.finals | {q + off for q in b.finals}))


def join(a: TupleAutomaton, b: TupleAutomaton) -> TupleAutomaton:
    """Natural join: tuples over the union of components whose restrictions lie in both relations."""
    comps = a.components + tuple(c for c in b.components if c not in a.components)
    shared = [c for c in a.components if c in b.components]
    pa = [comps.index(c) for c in a.components]
    pb = [comps.index(c) for c in b.components]
    sa = [a.components.index(c) for c in shared]
    sb = [b.components.index(c) for c in shared]
    blank_a = tuple(BLANK for _ in a.components)
    blank_b = tuple(BLANK for _ in b.components)

    def moves(aut: TupleAutomaton, q: int, done: bool, blank: Letter):
        if not done:
            yield from ((x, r, False) for x, r in aut.successors(q))
        if q in aut.finals:
            yield blank, q, True

    def index_by(options, pos):
        d: dict[tuple, list] = defaultdict(list)
        for o in options:
            d[tuple(o[0][i] for i in pos)].append(o)
        return d

    def succ(s):
        qa, da, qb, db = s
        right = index_by(moves(b, qb, db, blank_b), sb)
        for xa, ra, nda in moves(a, qa, da, blank_a):
            for xb, rb, ndb in right.get(tuple(xa[i] for i in sa), ()):
                letter: list[Optional[str]] = [BLANK] * len(comps)
                for i, c in enumerate(pa):
                    letter[c] = xa[i]
                for i, c in enumerate(pb):
                    letter[c] = xb[i]
                if not _all_blank(tuple(letter)):
                    yield tuple(letter), (ra, nda, rb, ndb)

    init = [(p, False, q, False) for p in sorted(a.initial) for q in sorted(b.initial)]
    return trim(build(comps, a.alphabet | b.alphabet, init, succ,
                      lambda s: s[0] in a.finals and s[2] in b.finals))


def intersection(a: TupleAutomaton, b: TupleAutomaton) -> TupleAutomaton:
    b = _same_shape(a, b)
    return join(a, b)


def difference(a: TupleAutomaton, b: TupleAutomaton) -> TupleAutomaton:
    """Tuples of ``a`` not in ``b``; ``b`` is determinized on the fly along ``a``'s letters."""
    b = _same_shape(a, b)

    def succ(s):
        q, qs = s
        for x, r in a.successors(q):
            yield x, (r, frozenset(t for p in qs for y, t in b.successors(p) if y == x))

    init = [(q, frozenset(b.initial)) for q in sorted(a.initial)]
    return trim(build(a.components, a.alphabet | b.alphabet, init, succ,
                      lambda s: s[0] in a.finals and not (s[1] & b.finals)))


def complement_within(a: TupleAutomaton, universe_automaton: TupleAutomaton) -> TupleAutomaton:
    return difference(universe_automaton, a)


def determinize(a: TupleAutomaton) -> TupleAutomaton:
    def succ(qs):
        step: dict[Letter, set[int]] = defaultdict(set)
        for p in qs:
            for x, q in a.successors(p):
                step[x].add(q)
        for x in sorted(step, key=_letter_key):
            yield x, frozenset(step[x])

    return build(a.components, a.alphabet, [frozenset(a.initial)], succ, lambda qs: bool(qs & a.finals))


def minimize(a: TupleAutomaton) -> TupleAutomaton:
    """Minimal trim deterministic automaton by partition refinement."""
    d = trim(determinize(trim(a)))
    if not d.finals:
        return d
    block = {q: int(q in d.finals) for q in d.states}
    count = len(set(block.values()))
    while True:
        sig = {q: (block[q], tuple(sorted(((x, block[r]) for x, r in d.successors(q)), key=lambda t: (_letter_key(t[0]), t[1]))))
               for q in d.states}
        ids: dict[tuple, int] = {}
        for q in sorted(d.states):
            ids.setdefault(sig[q], len(ids))
        block = {q: ids[sig[q]] for q in d.states}
        if len(ids) == count:
            break
        count = len(ids)
    return TupleAutomaton(d.components, d.alphabet,
                          frozenset((block[p], x, block[q]) for p, x, q in d.transitions),
                          frozenset(block[q] for q in d.initial), frozenset(block[q] for q in d.finals))


def free_product(unary: TupleAutomaton, components: Sequence[str]) -> TupleAutomaton:
    """Tuples whose every component is independently accepted by a unary automaton."""
    if unary.arity != 1:
        raise ArityError("free product needs a unary automaton")
    n = len(components)

    def moves(q: int, done: bool):
        if not done:
            for x, r in unary.successors(q):
                yield x[0], (r, False)
        if q in unary.finals:
            yield BLANK, (q, True)

    def succ(s):
        for combo in product(*(list(moves(q, d)) for q, d in s)):
            letter = tuple(c[0] for c in combo)
            if not _all_blank(letter):
                yield letter, tuple(c[1] for c in combo)

    init = [tuple((q, False) for q in qs) for qs in product(sorted(unary.initial), repeat=n)]
    return trim(build(tuple(components), unary.alphabet, init, succ,
                      lambda s: all(q in unary.finals for q, _ in s)))


# --- presentation-specific constructions -------------------------------------------------

def diagonal(b: TupleAutomaton, primed: Optional[Sequence[str]] = None) -> TupleAutomaton:
    """Pairs every tuple of ``b`` with itself; new components default to primed names."""
    primed = tuple(primed) if primed is not None else tuple(c + "'" for c in b.components)
    return TupleAutomaton(b.components + primed, b.alphabet,
                          frozenset((p, x + x, q) for p, x, q in b.transitions), b.initial, b.finals)


def loose_product(a: TupleAutomaton, b: TupleAutomaton) -> TupleAutomaton:
    """Synchronous product of equal-length padded words with concatenated components."""
    if set(a.components) & set(b.components):
        raise ArityError("loose product needs disjoint components")

    def succ(s):
        p, q = s
        for x, r in a.successors(p):
            for y, t in b.successors(q):
                yield x + y, (r, t)

    init = [(p, q) for p in sorted(a.initial) for q in sorted(b.initial)]
    return trim(build(a.components + b.components, a.alphabet | b.alphabet, init, succ,
                      lambda s: s[0] in a.finals and s[1] in b.finals))


def concat_via(a: TupleAutomaton, switch: Iterable[tuple[int, Letter, int]], b: TupleAutomaton) -> TupleAutomaton:
    """Initial states of ``a``, final states of ``b``, joined by the ``switch`` transitions."""
    if a.states & b.states:
        raise ValueError("concatenation needs disjoint state sets")
    b = _same_shape(a, b)
    return TupleAutomaton(a.components, a.alphabet | b.alphabet,
                          a.transitions | frozenset(switch) | b.transitions, a.initial, b.finals)


def shift_states(a: TupleAutomaton, offset: int) -> TupleAutomaton:
    return TupleAutomaton(a.components, a.alphabet, frozenset((p + offset, x, q + offset) for p, x, q in a.transitions),
                          frozenset(q + offset for q in a.initial), frozenset(q + offset for q in a.finals))


# --- serialization -----------------------------------------------------------------------

def to_json(a: TupleAutomaton) -> dict:
    return {
        "components": list(a.components),
        "alphabet": sorted(a.alphabet),
        "transitions": [{"from": p, "letter": list(x), "to": q} for p, x, q in sorted(a.transitions, key=_tkey)],
        "initial": sorted(a.initial),
        "finals": sorted(a.finals),
    }


def from_json(data: dict) -> TupleAutomaton:
    return TupleAutomaton(tuple(data["components"]), frozenset(data["alphabet"]),
                          frozenset((t["from"], tuple(t["letter"]), t["to"]) for t in data["transitions"]),
                          frozenset(data["initial"]), frozenset(data["finals"]))


def dumps(a: TupleAutomaton) -> str:
    return json.dumps(to_json(a), sort_keys=True)
