"""LTL objectives: tableau translation to Büchi automata, Safra determinisation
to Rabin automata, lasso semantics, and optimal values on MDPs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx

from .logic import And, Atom, Formula, Next, Not, Or, Top, Until, atoms, to_text
from .probsolve import Solution, solve_until
from .product import Mdp

DEFAULT_BUDGET = 100_000


class StateBudgetExceeded(RuntimeError):
    def __init__(self, what: str, budget: int):
        super().__init__(f"{what} exceeds the state budget of {budget}")
        self.budget = budget


class NotLtl(ValueError):
    pass


# ---------------------------------------------------------------- negation normal form
#
# NNF terms are tuples: ("tt",) ("ff",) ("lit", name, positive) ("and", a, b)
# ("or", a, b) ("X", a) ("U", a, b) ("R", a, b)

TT = ("tt",)
FF = ("ff",)


def to_nnf(f: Formula, negate: bool = False) -> tuple:
    if isinstance(f, Top):
        return FF if negate else TT
    if isinstance(f, Atom):
        return ("lit", f.name, not negate)
    if isinstance(f, Not):
        return to_nnf(f.arg, not negate)
    if isinstance(f, And):
        return ("or" if negate else "and", to_nnf(f.left, negate), to_nnf(f.right, negate))
    if isinstance(f, Or):
        return ("and" if negate else "or", to_nnf(f.left, negate), to_nnf(f.right, negate))
    if isinstance(f, Next):
        return ("X", to_nnf(f.arg, negate))
    if isinstance(f, Until):
        return ("R" if negate else "U", to_nnf(f.left, negate), to_nnf(f.right, negate))
    raise NotLtl(f"not an LTL formula over atoms: {to_text(f)}")


def _untils(t: tuple, acc: list) -> list:
    if t[0] == "U" and t not in acc:
        acc.append(t)
    for c in t[1:]:
        if isinstance(c, tuple):
            _untils(c, acc)
    return acc


# ---------------------------------------------------------------- tableau


def _expand(todo: list, lits: frozenset, nexts: frozenset, postponed: frozenset, done: frozenset, out: list):
    if not todo:
        out.append((lits, nexts, postponed))
        return
    t, rest = todo[0], todo[1:]
    if t in done:
        _expand(rest, lits, nexts, postponed, done, out)
        return
    done = done | {t}
    kind = t[0]
    if kind == "tt":
        _expand(rest, lits, nexts, postponed, done, out)
    elif kind == "ff":
        return
    elif kind == "lit":
        if (t[1], not t[2]) in lits:
            return
        _expand(rest, lits | {(t[1], t[2])}, nexts, postponed, done, out)
    elif kind == "and":
        _expand([t[1], t[2]] + rest, lits, nexts, postponed, done, out)
    elif kind == "or":
        _expand([t[1]] + rest, lits, nexts, postponed, done, out)
        _expand([t[2]] + rest, lits, nexts, postponed, done, out)
    elif kind == "X":
        _expand(rest, lits, nexts | {t[1]}, postponed, done, out)
    elif kind == "U":
        _expand([t[2]] + rest, lits, nexts, postponed, done, out)
        _expand([t[1]] + rest, lits, nexts | {t}, postponed | {t}, done, out)
    elif kind == "R":
        _expand([t[1], t[2]] + rest, lits, nexts, postponed, done, out)
        _expand([t[2]] + rest, lits, nexts | {t}, postponed, done, out)
    else:
        raise ValueError(t)


def _letters(ap: Sequence[str]) -> list[frozenset[str]]:
    return [
        frozenset(p for p, bit in zip(ap, bits) if bit)
        for bits in itertools.product((False, True), repeat=len(ap))
    ]


def _lits_ok(lits: frozenset, letter: frozenset) -> bool:
    return all((name in letter) == pos for name, pos in lits)


@dataclass(frozen=True)
class Nba:
    """State-based Büchi automaton over explicit letters (sets of true atoms)."""

    states: tuple
    init: Hashable
    ap: tuple[str, ...]
    delta: Mapping[tuple, frozenset]
    accepting: frozenset
    formula: Formula | None = field(default=None, compare=False)

    @property
    def letters(self) -> list[frozenset[str]]:
        return _letters(self.ap)

    def letter(self, labels: Iterable[str]) -> frozenset[str]:
        return frozenset(labels) & frozenset(self.ap)

    def post(self, qs: Iterable, letter: frozenset) -> frozenset:
        out = set()
        for q in qs:
            out |= self.delta.get((q, letter), frozenset())
        return frozenset(out)


def ltl_to_nba(f: Formula, budget: int = DEFAULT_BUDGET) -> Nba:
    root = to_nnf(f)
    ap = tuple(sorted(atoms(f)))
    letters = _letters(ap)
    untils = _untils(root, [])
    m = len(untils)

    # generalised automaton over obligation sets
    start = frozenset({root})
    gstates = {start: 0}
    gtrans: dict = {}
    queue = [start]
    while queue:
        q = queue.pop()
        covers: list = []
        _expand(sorted(q, key=repr), frozenset(), frozenset(), frozenset(), frozenset(), covers)
        edges = []
        for lits, nexts, postponed in covers:
            acc = frozenset(i for i, u in enumerate(untils) if u not in postponed)
            edges.append((lits, nexts, acc))
            if nexts not in gstates:
                gstates[nexts] = len(gstates)
                queue.append(nexts)
                if len(gstates) > budget:
                    raise StateBudgetExceeded("Büchi tableau", budget)
        gtrans[q] = edges

    # counter degeneralisation: (q, i) is accepting iff i == m
    init = (start, 0)
    delta: dict = {}
    seen = {init}
    queue = [init]
    while queue:
        q, i = queue.pop()
        for lits, nxt, acc in gtrans[q]:
            j = 0 if i == m else i
            while j < m and j in acc:
                j += 1
            tgt = (nxt, j)
            for a in letters:
                if _lits_ok(lits, a):
                    delta.setdefault(((q, i), a), set()).add(tgt)
            if tgt not in seen:
                seen.add(tgt)
                queue.append(tgt)
                if len(seen) > budget:
                    raise StateBudgetExceeded("Büchi automaton", budget)
    order = sorted(seen, key=lambda qi: (qi != init, gstates[qi[0]], qi[1]))
    num = {q: k for k, q in enumerate(order)}
    return Nba(
        states=tuple(range(len(order))),
        init=num[init],
        ap=ap,
        delta={(num[q], a): frozenset(num[t] for t in ts) for (q, a), ts in delta.items()},
        accepting=frozenset(num[q] for q in order if q[1] == m),
        formula=f,
    )


# ---------------------------------------------------------------- Safra determinisation


@dataclass
class _Node:
    name: int
    label: frozenset
    marked: bool = False
    children: list = field(default_factory=list)

    def freeze(self) -> tuple:
        return (self.name, tuple(sorted(self.label)), self.marked, tuple(c.freeze() for c in self.children))


def _thaw(t: tuple) -> _Node:
    return _Node(t[0], frozenset(t[1]), t[2], [_thaw(c) for c in t[3]])


def _names(t: tuple | None) -> set:
    if t is None:
        return set()
    out = {t[0]}
    for c in t[3]:
        out |= _names(c)
    return out


def _marked_names(t: tuple | None) -> set:
    if t is None:
        return set()
    out = {t[0]} if t[2] else set()
    for c in t[3]:
        out |= _marked_names(c)
    return out


def _safra_step(tree: tuple | None, letter: frozenset, nba: Nba) -> tuple | None:
    if tree is None:
        return None
    root = _thaw(tree)
    used = _names(tree)

    def fresh() -> int:
        n = 1
        while n in used:
            n += 1
        used.add(n)
        return n

    def walk(v):
        yield v
        for c in v.children:
            yield from walk(c)

    # 1. unmark, 2. branch accepting states into new youngest children
    for v in list(walk(root)):
        v.marked = False
    for v in list(walk(root)):
        acc = v.label & nba.accepting
        if acc:
            v.children.append(_Node(fresh(), acc))
    # 3. powerset step
    for v in walk(root):
        v.label = nba.post(v.label, letter)

    # 4. horizontal merge: a state stays only in its oldest position
    def prune(v, taken: set):
        v.label = v.label - taken
        seen_here: set = set()
        for c in v.children:
            prune(c, taken | seen_here)
            seen_here |= c.label
        return v

    prune(root, set())

    # 5. drop empty nodes
    def drop(v):
        v.children = [drop(c) for c in v.children if c.label]
        return v

    if not root.label:
        return None
    drop(root)
    # 6. vertical merge
    for v in walk(root):
        if v.children and frozenset().union(*(c.label for c in v.children)) == v.label:
            v.children = []
            v.marked = True
    return root.freeze()


@dataclass(frozen=True)
class Dra:
    """Deterministic Rabin automaton; pair i is (E_i, F_i): visit E_i finitely
    often and F_i infinitely often."""

    states: tuple
    init: int
    ap: tuple[str, ...]
    delta: Mapping[tuple, int]
    pairs: tuple[tuple[frozenset, frozenset], ...]
    formula: Formula | None = field(default=None, compare=False)

    @property
    def letters(self) -> list[frozenset[str]]:
        return _letters(self.ap)

    def letter(self, labels: Iterable[str]) -> frozenset[str]:
        return frozenset(labels) & frozenset(self.ap)

    def step(self, d: int, labels: Iterable[str]) -> int:
        return self.delta[d, self.letter(labels)]

    def accepts_cycle(self, cycle: set) -> bool:
        return any(not (cycle & e) and (cycle & f) for e, f in self.pairs)


def nba_to_dra(nba: Nba, budget: int = DEFAULT_BUDGET) -> Dra:
    letters = nba.letters
    init_tree = _Node(1, frozenset({nba.init})).freeze()
    index = {init_tree: 0}
    trees = [init_tree]
    delta: dict = {}
    k = 0
    while k < len(trees):
        t = trees[k]
        for a in letters:
            u = _safra_step(t, a, nba)
            if u not in index:
                index[u] = len(trees)
                trees.append(u)
                if len(trees) > budget:
                    raise StateBudgetExceeded("Rabin automaton", budget)
            delta[index[t], a] = index[u]
        k += 1
    names = sorted(set().union(*(_names(t) for t in trees)))
    pairs = []
    for n in names:
        e = frozenset(i for i, t in enumerate(trees) if n not in _names(t))
        f = frozenset(i for i, t in enumerate(trees) if n in _marked_names(t))
        if f:
            pairs.append((e, f))
    return Dra(tuple(range(len(trees))), 0, nba.ap, delta, tuple(pairs), nba.formula)


def ltl_to_dra(f: Formula, budget: int = DEFAULT_BUDGET) -> Dra:
    return nba_to_dra(ltl_to_nba(f, budget), budget)


# ---------------------------------------------------------------- lassos


def _lasso_succ(prefix: Sequence, loop: Sequence) -> list[int]:
    n = len(prefix) + len(loop)
    return [i + 1 if i + 1 < n else len(prefix) for i in range(n)]


def lasso_holds(f: Formula, prefix: Sequence[frozenset], loop: Sequence[frozenset]) -> bool:
    """Direct LTL semantics on the word ``prefix . loop^omega`` (loop non-empty)."""
    if not loop:
        raise ValueError("the loop of a lasso must be non-empty")
    word = list(prefix) + list(loop)
    succ = _lasso_succ(prefix, loop)
    n = len(word)

    def sat(g: Formula) -> frozenset[int]:
        if isinstance(g, Top):
            return frozenset(range(n))
        if isinstance(g, Atom):
            return frozenset(i for i in range(n) if g.name in word[i])
        if isinstance(g, Not):
            return frozenset(range(n)) - sat(g.arg)
        if isinstance(g, And):
            return sat(g.left) & sat(g.right)
        if isinstance(g, Or):
            return sat(g.left) | sat(g.right)
        if isinstance(g, Next):
            inner = sat(g.arg)
            return frozenset(i for i in range(n) if succ[i] in inner)
        if isinstance(g, Until):
            a, b = sat(g.left), sat(g.right)
            cur = set(b)
            changed = True
            while changed:
                changed = False
                for i in range(n):
                    if i not in cur and i in a and succ[i] in cur:
                        cur.add(i)
                        changed = True
            return frozenset(cur)
        raise NotLtl(to_text(g))

    return 0 in sat(f)


def nba_accepts_lasso(nba: Nba, prefix: Sequence[frozenset], loop: Sequence[frozenset]) -> bool:
    word = [nba.letter(x) for x in list(prefix) + list(loop)]
    succ = _lasso_succ(prefix, loop)
    g = nx.DiGraph()
    start = (nba.init, 0)
    g.add_node(start)
    stack = [start]
    while stack:
        q, i = stack.pop()
        for t in nba.delta.get((q, word[i]), ()):
            node = (t, succ[i])
            if node not in g:
                g.add_node(node)
                stack.append(node)
            g.add_edge((q, i), node)
    for comp in nx.strongly_connected_components(g):
        if len(comp) == 1:
            (v,) = comp
            if not g.has_edge(v, v):
                continue
        if any(q in nba.accepting for q, _ in comp):
            return True
    return False


def dra_accepts_lasso(dra: Dra, prefix: Sequence[frozenset], loop: Sequence[frozenset]) -> bool:
    word = list(prefix) + list(loop)
    succ = _lasso_succ(prefix, loop)
    d, i = dra.init, 0
    seen: dict = {}
    trace = []
    while (d, i) not in seen:
        seen[d, i] = len(trace)
        trace.append(d)
        d, i = dra.step(d, word[i]), succ[i]
    cycle = set(trace[seen[d, i]:])
    return dra.accepts_cycle(cycle)


# ---------------------------------------------------------------- end components


def mecs(mdp: Mdp, allowed: set | None = None) -> list[tuple[frozenset, dict]]:
    """Maximal end components inside ``allowed``; each with its staying choices."""
    states = set(mdp.states if allowed is None else allowed)
    enabled = {s: [c for c in mdp.choices[s] if set(mdp.trans[s, c]) <= states] for s in states}
    work = [set(s for s in states if enabled[s])]
    done = []
    while work:
        part = work.pop()
        g = nx.DiGraph()
        g.add_nodes_from(part)
        for s in part:
            for c in enabled[s]:
                for t in mdp.trans[s, c]:
                    if t in part:
                        g.add_edge(s, t)
        comps = list(nx.strongly_connected_components(g))
        comp_of = {s: i for i, comp in enumerate(comps) for s in comp}
        changed = False
        for s in part:
            keep = [c for c in enabled[s] if all(comp_of.get(t) == comp_of[s] for t in mdp.trans[s, c])]
            if len(keep) != len(enabled[s]):
                enabled[s] = keep
                changed = True
        if not changed and len(comps) == 1:
            if all(enabled[s] for s in part):
                done.append((frozenset(part), {s: tuple(enabled[s]) for s in part}))
            else:
                work.append({s for s in part if enabled[s]})
            continue
        for comp in comps:
            sub = {s for s in comp if enabled[s]}
            if sub:
                work.append(sub)
    done.sort(key=lambda x: sorted(map(repr, x[0])))
    return done


# ---------------------------------------------------------------- MDP objectives


def _product(mdp: Mdp, dra: Dra, labeling: Mapping, budget: int) -> tuple[Mdp, dict]:
    roots = {s: (s, dra.step(dra.init, labeling[s])) for s in mdp.states}
    states = list(dict.fromkeys(roots.values()))
    seen = set(states)
    choices: dict = {}
    trans: dict = {}
    k = 0
    while k < len(states):
        node = states[k]
        k += 1
        s, d = node
        choices[node] = mdp.choices[s]
        for c in mdp.choices[s]:
            acc: dict = {}
            for t, p in mdp.trans[s, c].items():
                nxt = (t, dra.step(d, labeling[t]))
                acc[nxt] = acc.get(nxt, Fraction(0)) + p
                if nxt not in seen:
                    seen.add(nxt)
                    states.append(nxt)
                    if len(states) > budget:
                        raise StateBudgetExceeded("automaton product", budget)
            trans[node, c] = acc
    from .cgs import Distribution

    prod = Mdp(
        tuple(states),
        None,
        choices,
        {k2: Distribution(v) for k2, v in trans.items()},
        {n: frozenset() for n in states},
    )
    return prod, roots


def accepting_states(prod: Mdp, dra: Dra) -> set:
    good: set = set()
    for e, f in dra.pairs:
        allowed = {n for n in prod.states if n[1] not in e}
        for comp, _ in mecs(prod, allowed):
            if any(n[1] in f for n in comp):
                good |= comp
    return good


def mdp_omega(
    mdp: Mdp,
    f: Formula,
    mode: str = "max",
    labeling: Mapping | None = None,
    budget: int = DEFAULT_BUDGET,
    dra: Dra | None = None,
) -> Solution:
    """Optimal probability of the LTL objective ``f`` from every MDP state."""
    labeling = mdp.labels if labeling is None else labeling
    if mode == "min":
        neg = mdp_omega(mdp, Not(f), "max", labeling, budget)
        return Solution({s: 1 - v for s, v in neg.values.items()}, neg.policy, neg.iterations)
    if dra is None:
        dra = ltl_to_dra(f, budget)
    prod, roots = _product(mdp, dra, labeling, budget)
    good = accepting_states(prod, dra)
    sol = solve_until(prod, prod.states, good, "max")
    return Solution({s: sol.values[roots[s]] for s in mdp.states}, sol.policy, sol.iterations)


# ---------------------------------------------------------------- HOA output


def _hoa_label(letter: frozenset, ap: Sequence[str]) -> str:
    if not ap:
        return "t"
    return "&".join(str(i) if p in letter else f"!{i}" for i, p in enumerate(ap))


def to_hoa(aut: Nba | Dra, name: str = "") -> str:
    ap = aut.ap
    lines = ["HOA: v1"]
    if name or aut.formula is not None:
        lines.append(f'name: "{name or to_text(aut.formula)}"')
    lines.append(f"States: {len(aut.states)}")
    lines.append(f"Start: {aut.init}")
    lines.append(f"AP: {len(ap)}" + "".join(f' "{p}"' for p in ap))
    if isinstance(aut, Nba):
        lines += ["acc-name: Buchi", "Acceptance: 1 Inf(0)", "properties: explicit-labels state-acc"]
    else:
        k = len(aut.pairs)
        cond = " | ".join(f"(Fin({2 * i})&Inf({2 * i + 1}))" for i in range(k)) or "f"
        lines += [f"acc-name: Rabin {k}", f"Acceptance: {2 * k} {cond}", "properties: explicit-labels state-acc deterministic"]
    lines.append("--BODY--")
    for q in aut.states:
        if isinstance(aut, Nba):
            sets = [0] if q in aut.accepting else []
        else:
            sets = [j for i, (e, f) in enumerate(aut.pairs) for j, s in ((2 * i, e), (2 * i + 1, f)) if q in s]
        acc = " {" + " ".join(map(str, sets)) + "}" if sets else ""
        lines.append(f"State: {q}{acc}")
        for a in aut.letters:
            if isinstance(aut, Nba):
                for t in sorted(aut.delta.get((q, a), ())):
                    lines.append(f"[{_hoa_label(a, ap)}] {t}")
            else:
                lines.append(f"[{_hoa_label(a, ap)}] {aut.delta[q, a]}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"
