"""Natural strategies: guard regexes, guard automata, matching and enumeration.

Regex text syntax (loosest first): ``+`` choice, ``.`` concatenation,
``|``/``&`` Boolean or/and, postfix ``*``, prefix ``!``; ``T`` is the
always-true condition.  Boolean operators only combine single conditions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .cgs import Cgs, Distribution, History
from .logic import (
    And,
    Atom,
    Formula,
    FormulaSyntaxError,
    Not,
    Or,
    Top,
    TokenStream,
    atoms,
    bool_size,
    eval_labels,
    parse_number,
    to_text,
)


class InvalidStrategy(ValueError):
    pass


class NoMatch(InvalidStrategy):
    pass


class VocabularyEmpty(ValueError):
    pass


# ---------------------------------------------------------------- regex AST


class Regex:
    def size(self) -> int:
        raise NotImplementedError

    def __str__(self) -> str:
        return regex_text(self)


@dataclass(frozen=True)
class Sym(Regex):
    cond: Formula

    def size(self) -> int:
        return bool_size(self.cond)


@dataclass(frozen=True)
class Cat(Regex):
    parts: tuple[Regex, ...]

    def size(self) -> int:
        return sum(p.size() for p in self.parts) + len(self.parts) - 1


@dataclass(frozen=True)
class Alt(Regex):
    options: tuple[Regex, ...]

    def size(self) -> int:
        return sum(p.size() for p in self.options) + len(self.options) - 1


@dataclass(frozen=True)
class Star(Regex):
    arg: Regex

    def size(self) -> int:
        return self.arg.size() + 1


TOP = Sym(Top())
TOP_STAR = Star(TOP)


def cat(*parts: Regex) -> Regex:
    flat: list[Regex] = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, Cat) else (p,))
    return flat[0] if len(flat) == 1 else Cat(tuple(flat))


def alt(*options: Regex) -> Regex:
    flat: list[Regex] = []
    for p in options:
        flat.extend(p.options if isinstance(p, Alt) else (p,))
    return flat[0] if len(flat) == 1 else Alt(tuple(flat))


def canonical(r: Regex) -> Regex:
    """Flatten nested concatenations/choices and sort choice operands."""
    if isinstance(r, Cat):
        return cat(*(canonical(p) for p in r.parts))
    if isinstance(r, Alt):
        ops = {canonical(p) for p in r.options}
        flat: set[Regex] = set()
        for o in ops:
            flat.update(o.options if isinstance(o, Alt) else (o,))
        ordered = sorted(flat, key=regex_text)
        return ordered[0] if len(ordered) == 1 else Alt(tuple(ordered))
    if isinstance(r, Star):
        inner = canonical(r.arg)
        return inner if isinstance(inner, Star) else Star(inner)
    return r


def regex_size(r: Regex) -> int:
    return r.size()


def regex_leaves(r: Regex) -> list[Formula]:
    if isinstance(r, Sym):
        return [r.cond]
    if isinstance(r, Star):
        return regex_leaves(r.arg)
    parts = r.parts if isinstance(r, Cat) else r.options
    return [leaf for p in parts for leaf in regex_leaves(p)]


def regex_text(r: Regex) -> str:
    if isinstance(r, Sym):
        return to_text(r.cond)
    if isinstance(r, Star):
        inner = regex_text(r.arg)
        wrapped = isinstance(r.arg, Alt) or (
            isinstance(r.arg, Sym) and isinstance(r.arg.cond, (Atom, Top, And, Or))
        )
        return f"{inner}*" if wrapped else f"({inner})*"
    if isinstance(r, Cat):
        return " . ".join(f"({regex_text(p)})" if isinstance(p, Alt) else regex_text(p) for p in r.parts)
    if isinstance(r, Alt):
        return "(" + " + ".join(regex_text(p) for p in r.options) + ")"
    raise TypeError(r)


class _RegexParser:
    def __init__(self, ts: TokenStream):
        self.ts = ts

    def alt(self) -> Regex:
        opts = [self.cat()]
        while self.ts.accept("+"):
            opts.append(self.cat())
        return alt(*opts)

    def cat(self) -> Regex:
        parts = [self.bor()]
        while self.ts.accept("."):
            parts.append(self.bor())
        return cat(*parts)

    def _cond(self, r: Regex, pos: int) -> Formula:
        if not isinstance(r, Sym):
            raise FormulaSyntaxError("Boolean operator applied to a regular expression", pos)
        return r.cond

    def bor(self) -> Regex:
        left = self.band()
        while True:
            pos = self.ts.cur.pos
            if not self.ts.accept("|"):
                return left
            right = self.band()
            left = Sym(Or(self._cond(left, pos), self._cond(right, pos)))

    def band(self) -> Regex:
        left = self.post()
        while True:
            pos = self.ts.cur.pos
            if not self.ts.accept("&"):
                return left
            right = self.post()
            left = Sym(And(self._cond(left, pos), self._cond(right, pos)))

    def post(self) -> Regex:
        r = self.prim()
        while self.ts.accept("*"):
            r = Star(r)  # every written star is a symbol
        return r

    def prim(self) -> Regex:
        ts = self.ts
        tok = ts.cur
        if ts.accept("!"):
            inner = self.prim()
            return Sym(Not(self._cond(inner, tok.pos)))
        if ts.accept("("):
            inner = self.alt()
            ts.expect(")")
            return inner
        if tok.kind == "ident":
            ts.i += 1
            if tok.text == "T":
                return TOP
            if tok.text in ("X", "F", "G", "U"):
                raise FormulaSyntaxError("temporal operator inside a guard", tok.pos, tok.text)
            return Sym(Atom(tok.text))
        raise ts.error("expected a guard")


def parse_regex(text: str) -> Regex:
    ts = TokenStream(text)
    r = _RegexParser(ts).alt()
    if not ts.at_end():
        raise ts.error("trailing input")
    return r


# ---------------------------------------------------------------- automata


@dataclass(frozen=True)
class GuardNfa:
    """Epsilon-free automaton whose transitions carry Boolean conditions."""

    n_states: int
    initial: frozenset[int]
    accepting: frozenset[int]
    transitions: tuple[tuple[int, Formula, int], ...]

    @cached_property
    def _out(self) -> dict[int, list[tuple[Formula, int]]]:
        out: dict[int, list[tuple[Formula, int]]] = {q: [] for q in range(self.n_states)}
        for src, cond, dst in self.transitions:
            out[src].append((cond, dst))
        return out

    def step(self, current: frozenset[int], labels: frozenset[str]) -> frozenset[int]:
        nxt = set()
        for q in current:
            for cond, dst in self._out[q]:
                if eval_labels(cond, labels):
                    nxt.add(dst)
        return frozenset(nxt)

    def accepts_set(self, current: frozenset[int]) -> bool:
        return not current.isdisjoint(self.accepting)

    def run(self, label_seq: Iterable[frozenset[str]]) -> frozenset[int]:
        cur = self.initial
        for labels in label_seq:
            cur = self.step(cur, labels)
        return cur

    def accepts(self, label_seq: Sequence[frozenset[str]]) -> bool:
        if not label_seq:
            return False
        return self.accepts_set(self.run(label_seq))


def _glushkov(r: Regex):
    positions: list[Formula] = []

    def go(e: Regex):
        # returns (nullable, first, last, follow-additions applied in place)
        if isinstance(e, Sym):
            positions.append(e.cond)
            i = len(positions)
            return False, {i}, {i}
        if isinstance(e, Star):
            _, first, last = go(e.arg)
            for x in last:
                follow.setdefault(x, set()).update(first)
            return True, first, last
        if isinstance(e, Cat):
            nullable, first, last = go(e.parts[0])
            for p in e.parts[1:]:
                n2, f2, l2 = go(p)
                for x in last:
                    follow.setdefault(x, set()).update(f2)
                first = first | f2 if nullable else first
                last = last | l2 if n2 else l2
                nullable = nullable and n2
            return nullable, first, last
        if isinstance(e, Alt):
            nullable, first, last = False, set(), set()
            for p in e.options:
                n2, f2, l2 = go(p)
                nullable = nullable or n2
                first |= f2
                last |= l2
            return nullable, first, last
        raise TypeError(e)

    follow: dict[int, set[int]] = {}
    nullable, first, last = go(r)
    trans = [(0, positions[j - 1], j) for j in sorted(first)]
    for i in sorted(follow):
        trans.extend((i, positions[j - 1], j) for j in sorted(follow[i]))
    accepting = set(last) | ({0} if nullable else set())
    return len(positions) + 1, frozenset(accepting), trans


def _prune(n: int, initial: set[int], accepting: frozenset[int], trans):
    fwd: dict[int, set[int]] = {}
    bwd: dict[int, set[int]] = {}
    for s, _, d in trans:
        fwd.setdefault(s, set()).add(d)
        bwd.setdefault(d, set()).add(s)

    def closure(start, edges):
        seen = set(start)
        stack = list(start)
        while stack:
            q = stack.pop()
            for x in edges.get(q, ()):
                if x not in seen:
                    seen.add(x)
                    stack.append(x)
        return seen

    live = closure(initial, fwd) & closure(accepting, bwd)
    return live


def _minimize(n: int, initial: frozenset[int], accepting: frozenset[int], trans) -> GuardNfa:
    live = _prune(n, set(initial), accepting, trans)
    if not live & set(initial):
        return GuardNfa(1, frozenset({0}), frozenset(), ())
    states = sorted(live)
    trans = [(s, c, d) for s, c, d in trans if s in live and d in live]
    block = {q: (q in accepting) for q in states}
    while True:
        sig = {
            q: (block[q], frozenset((to_text(c), block[d]) for s, c, d in trans if s == q))
            for q in states
        }
        ids: dict = {}
        new_block = {}
        for q in states:
            new_block[q] = ids.setdefault(sig[q], len(ids))
        if len(set(new_block.values())) == len(set(block.values())):
            block = new_block
            break
        block = new_block
    # renumber so that the initial block is 0
    order: dict[int, int] = {}
    for q in sorted(states, key=lambda q: (q not in initial, q)):
        order.setdefault(block[q], len(order))
    new_trans = sorted(
        {(order[block[s]], c, order[block[d]]) for s, c, d in trans},
        key=lambda t: (t[0], to_text(t[1]), t[2]),
    )
    return GuardNfa(
        n_states=len(order),
        initial=frozenset(order[block[q]] for q in initial if q in live),
        accepting=frozenset(order[block[q]] for q in states if q in accepting),
        transitions=tuple(new_trans),
    )


def compile_guard(r: Regex) -> GuardNfa:
    n, accepting, trans = _glushkov(r)
    return _minimize(n, frozenset({0}), accepting, trans)


def consistent(h: History, r: Regex, cgs: Cgs) -> bool:
    return compile_guard(r).accepts([cgs.labels[s] for s in h.states])


# ---------------------------------------------------------------- strategies


@dataclass(frozen=True)
class NatStrategy:
    agent: str
    setting: str  # "r" (memoryless) or "R" (recall)
    pairs: tuple[tuple[Regex, Distribution], ...]

    def __post_init__(self):
        if self.setting not in ("r", "R"):
            raise InvalidStrategy(f"unknown setting {self.setting!r}")
        if not self.pairs:
            raise InvalidStrategy("a natural strategy has at least one pair")
        if self.setting == "r":
            for g, _ in self.pairs:
                if not isinstance(g, Sym):
                    raise InvalidStrategy("memoryless strategies use single conditions as guards")

    @property
    def size(self) -> int:
        return len(self.pairs)

    @property
    def deterministic(self) -> bool:
        return all(d.is_point for _, d in self.pairs)

    @cached_property
    def automata(self) -> tuple[GuardNfa, ...]:
        if self.setting == "r":
            return ()
        return tuple(compile_guard(g) for g, _ in self.pairs)

    # memory: a tuple of automaton state sets after reading the history so far
    def initial_memory(self) -> tuple:
        return tuple(a.initial for a in self.automata)

    def step_memory(self, memory: tuple, labels: frozenset[str]) -> tuple:
        if self.setting == "r":
            return ()
        return tuple(a.step(m, labels) for a, m in zip(self.automata, memory))

    def memory_after(self, h: History, cgs: Cgs) -> tuple:
        mem = self.initial_memory()
        for s in h.states:
            mem = self.step_memory(mem, cgs.labels[s])
        return mem

    def choose(self, memory: tuple, state: str, cgs: Cgs, strict: bool = False) -> int:
        """0-based index of the pair selected at ``state`` given ``memory``."""
        legal = cgs.legal[state, self.agent]
        labels = cgs.labels[state]
        for i, (g, dist) in enumerate(self.pairs):
            if self.setting == "r":
                fires = eval_labels(g.cond, labels)
            else:
                fires = self.automata[i].accepts_set(memory[i])
            if not fires:
                continue
            sup = dist.support
            if strict and sup != legal:
                continue
            if sup <= legal:
                return i
        raise NoMatch(f"no pair of the strategy for {self.agent!r} applies in {state!r}")

    def text(self) -> str:
        return format_strategy(self)


def complexity(s: NatStrategy) -> int:
    return sum(g.size() for g, _ in s.pairs)


def match_index(h: History, s: NatStrategy, cgs: Cgs, strict: bool = False) -> int:
    """1-based index of the first applicable pair."""
    mem = s.memory_after(h, cgs) if s.setting == "R" else ()
    return s.choose(mem, h.last, cgs, strict) + 1


def act(s: NatStrategy, h: History, cgs: Cgs, strict: bool = False) -> Distribution:
    return s.pairs[match_index(h, s, cgs, strict) - 1][1]


def is_final_guard(g: Regex, setting: str) -> bool:
    return g == (TOP if setting == "r" else TOP_STAR)


def validate_strategy(s: NatStrategy, cgs: Cgs) -> list[str]:
    """Raise InvalidStrategy on hard errors; return best-effort lint warnings."""
    if s.agent not in cgs.agents:
        raise InvalidStrategy(f"unknown agent {s.agent!r}")
    last_guard, last_dist = s.pairs[-1]
    if not is_final_guard(last_guard, s.setting):
        want = "T" if s.setting == "r" else "T*"
        raise InvalidStrategy(f"the last pair must have guard {want}, got {regex_text(last_guard)}")
    glob = cgs.globally_legal(s.agent)
    if not glob:
        raise InvalidStrategy(
            f"agent {s.agent!r} has no action legal in every state; add a noop action to the model"
        )
    if not last_dist.is_point or last_dist.point_value() not in glob:
        raise InvalidStrategy(
            f"the last pair must choose a single action legal in every state ({', '.join(sorted(glob))})"
        )
    known = cgs.agent_actions(s.agent)
    warnings = []
    for i, (g, dist) in enumerate(s.pairs, 1):
        for p in (p for leaf in regex_leaves(g) for p in atoms(leaf)):
            if p not in cgs.props:
                raise InvalidStrategy(f"pair {i}: unknown proposition {p!r}")
        for a in dist.support:
            if a not in known:
                raise InvalidStrategy(f"pair {i}: action {a!r} is never legal for {s.agent!r}")
        if s.setting == "r":
            last_conds = [g.cond]
        else:
            nfa_leaves = regex_leaves(g)
            _, last_pos, _ = _last_positions(g)
            last_conds = [nfa_leaves[j - 1] for j in last_pos]
        for st in cgs.states:
            if any(eval_labels(c, cgs.labels[st]) for c in last_conds):
                if not dist.support <= cgs.legal[st, s.agent]:
                    warnings.append(f"pair {i}: some action is not legal in state {st!r}; the pair is skipped there")
                    break
    return warnings


def _last_positions(g: Regex):
    n, accepting, trans = _glushkov(g)
    return n, sorted(q for q in accepting if q), trans


# ---------------------------------------------------------------- text format


def format_dist(d: Distribution) -> str:
    if d.is_point:
        return str(d.point_value())
    body = ", ".join(
        f"{a}: {p.numerator}/{p.denominator}" if p.denominator != 1 else f"{a}: {p.numerator}"
        for a, p in sorted(d.items())
    )
    return "{" + body + "}"


def format_pair(g: Regex, d: Distribution) -> str:
    return f"{regex_text(g)} -> {format_dist(d)}"


def format_strategy(s: NatStrategy, header: bool = True) -> str:
    lines = [f"agent {s.agent}", f"setting {s.setting}"] if header else []
    lines += [format_pair(g, d) for g, d in s.pairs]
    return "\n".join(lines) + "\n"


def inline_strategy(s: NatStrategy) -> str:
    return " ".join(f"({format_pair(g, d)})" for g, d in s.pairs)


def parse_dist(text: str) -> Distribution:
    text = text.strip()
    if not text.startswith("{"):
        if not text or not text.replace("_", "a").isalnum():
            raise InvalidStrategy(f"bad action {text!r}")
        return Distribution.point(text)
    if not text.endswith("}"):
        raise InvalidStrategy(f"unterminated distribution {text!r}")
    weights = {}
    for item in filter(None, (x.strip() for x in text[1:-1].split(","))):
        name, _, p = item.partition(":")
        if not p:
            raise InvalidStrategy(f"distribution entry needs a probability: {item!r}")
        weights[name.strip()] = parse_number(p.strip())
    try:
        return Distribution(weights)
    except ValueError as exc:
        raise InvalidStrategy(str(exc)) from None


def parse_strategy(text: str, agent: str | None = None, setting: str | None = None) -> NatStrategy:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("agent "):
            agent = line.split(None, 1)[1].strip()
            continue
        if line.startswith("setting "):
            setting = line.split(None, 1)[1].strip()
            continue
        if line.startswith("(") and line.endswith(")") and "->" in line and line.count("(") == line.count(")"):
            inner = line[1:-1]
            if inner.count("(") == inner.count(")"):
                line = inner
        guard_text, sep, dist_text = line.rpartition("->")
        if not sep:
            raise InvalidStrategy(f"line {lineno}: expected 'guard -> action'")
        try:
            guard = parse_regex(guard_text)
        except FormulaSyntaxError as exc:
            raise InvalidStrategy(f"line {lineno}: {exc}") from None
        pairs.append((guard, parse_dist(dist_text)))
    if agent is None:
        raise InvalidStrategy("strategy does not name its agent")
    if setting is None:
        setting = "r" if all(isinstance(g, Sym) for g, _ in pairs) else "R"
    return NatStrategy(agent, setting, tuple(pairs))


def strategy(agent: str, setting: str, *pairs) -> NatStrategy:
    """Convenience constructor: pairs of (guard text, action or distribution text)."""
    built = []
    for g, d in pairs:
        guard = parse_regex(g) if isinstance(g, str) else g
        dist = parse_dist(d) if isinstance(d, str) else d
        built.append((guard, dist))
    return NatStrategy(agent, setting, tuple(built))


# ---------------------------------------------------------------- vocabularies


def _literals(props: Iterable[str]) -> list[Formula]:
    out = []
    for p in sorted(props):
        out += [Atom(p), Not(Atom(p))]
    return out


def _dedup(formulas: Iterable[Formula]) -> tuple[Formula, ...]:
    seen = {}
    for f in formulas:
        seen.setdefault(to_text(f), f)
    return tuple(sorted(seen.values(), key=lambda f: (bool_size(f), to_text(f))))


def model_props(cgs: Cgs) -> list[str]:
    used = set().union(*cgs.labels.values())
    return sorted(p for p in cgs.props if p in used) or sorted(cgs.props)


def literal_vocab(cgs: Cgs) -> tuple[Formula, ...]:
    return _dedup([Top()] + _literals(model_props(cgs)))


def default_vocab(cgs: Cgs) -> tuple[Formula, ...]:
    lits = _literals(model_props(cgs))
    pairs = [
        And(a, b)
        for a, b in itertools.combinations(lits, 2)
        if atoms(a) != atoms(b)
    ]
    return _dedup([Top()] + lits + pairs)


def minterm_vocab(cgs: Cgs) -> tuple[Formula, ...]:
    props = sorted(cgs.props)
    out: list[Formula] = [Top()]
    for labels in sorted({tuple(sorted(l)) for l in cgs.labels.values()}):
        lits = [Atom(p) if p in labels else Not(Atom(p)) for p in props]
        f = lits[0]
        for lit in lits[1:]:
            f = And(f, lit)
        out.append(f)
    return _dedup(out)


# ---------------------------------------------------------------- enumeration


def _guards_by_size(vocab: Sequence[Formula], budget: int, setting: str) -> dict[int, list[Regex]]:
    leaves = [Sym(f) for f in vocab]
    by_size: dict[int, list[Regex]] = {n: [] for n in range(1, budget + 1)}
    for leaf in leaves:
        if leaf.size() <= budget:
            by_size[leaf.size()].append(leaf)
    if setting == "r":
        return by_size
    for n in range(1, budget + 1):
        found: dict[str, Regex] = {regex_text(r): r for r in by_size[n]}
        if n >= 2:
            for r in by_size[n - 1]:
                if not isinstance(r, Star):
                    found.setdefault(regex_text(Star(r)), Star(r))
        for left_size in range(1, n - 1):
            right_size = n - 1 - left_size
            for a in by_size[left_size]:
                for b in by_size[right_size]:
                    if not isinstance(a, Cat):
                        c = cat(a, b)
                        found.setdefault(regex_text(c), c)
                    if not isinstance(a, Alt) and a != b:
                        c2 = canonical(alt(a, b))
                        if c2.size() == n:
                            found.setdefault(regex_text(c2), c2)
        by_size[n] = list(found.values())
    return by_size


def _valuations(props: Sequence[str]) -> list[frozenset[str]]:
    out = []
    for bits in itertools.product((False, True), repeat=len(props)):
        out.append(frozenset(p for p, b in zip(props, bits) if b))
    return out


def subsumed(g: Regex, earlier: Sequence[Regex], setting: str) -> bool:
    """True iff every history consistent with ``g`` is consistent with some earlier guard."""
    if not earlier:
        return False
    props = sorted({p for r in (g, *earlier) for leaf in regex_leaves(r) for p in atoms(leaf)})
    letters = _valuations(props)
    if setting == "r":
        return all(
            any(eval_labels(e.cond, v) for e in earlier)
            for v in letters
            if eval_labels(g.cond, v)
        )
    a = compile_guard(g)
    others = [compile_guard(e) for e in earlier]
    start = (a.initial, tuple(o.initial for o in others))
    seen = {start}
    stack = [start]
    while stack:
        cur, rest = stack.pop()
        for v in letters:
            nxt = a.step(cur, v)
            if not nxt:
                continue
            nrest = tuple(o.step(m, v) for o, m in zip(others, rest))
            if a.accepts_set(nxt) and not any(o.accepts_set(m) for o, m in zip(others, nrest)):
                return False
            key = (nxt, nrest)
            if key not in seen:
                seen.add(key)
                stack.append(key)
    return True


@dataclass(frozen=True)
class Skeleton:
    """Guard list of a strategy plus the action of its mandatory last pair."""

    guards: tuple[Regex, ...]
    final_action: str
    setting: str

    def complexity(self) -> int:
        return sum(g.size() for g in self.guards) + (1 if self.setting == "r" else 2)


def _guard_lists(vocab, budget: int, setting: str):
    by_size = _guards_by_size(vocab, budget, setting)
    # The final guard and repeated guards stay in the pool: a pair only fires
    # where its action is legal, so (T -> a) (T -> b) is a genuine strategy.
    final = TOP if setting == "r" else TOP_STAR
    pool = [g for n in sorted(by_size) for g in sorted(by_size[n], key=regex_text)]
    if final.size() <= budget and final not in pool:
        pool.append(final)

    def rec(prefix: tuple[Regex, ...], left: int):
        yield prefix
        for g in pool:
            if g.size() <= left:
                yield from rec(prefix + (g,), left - g.size())

    yield from rec((), budget)


def enumerate_skeletons(agent: str, k: int, setting: str, vocab: Sequence[Formula], cgs: Cgs) -> list[Skeleton]:
    if not vocab:
        raise VocabularyEmpty("empty guard vocabulary")
    final_cost = 1 if setting == "r" else 2
    if k < final_cost:
        return []
    glob = sorted(cgs.globally_legal(agent))
    out = [
        Skeleton(guards, a, setting)
        for guards in _guard_lists(vocab, k - final_cost, setting)
        for a in glob
    ]
    out.sort(key=lambda s: (s.complexity(), [regex_text(g) for g in s.guards], s.final_action))
    return out


def enumerate_det(
    agent: str, k: int, setting: str, vocab: Sequence[Formula], cgs: Cgs
) -> Iterator[NatStrategy]:
    """All canonical deterministic strategies of complexity at most ``k``.

    Pairs are pruned when their guard is subsumed by earlier guards whose
    action is legal everywhere (such a pair can never fire); this includes
    the mandatory final pair.
    """
    if not vocab:
        raise VocabularyEmpty("empty guard vocabulary")
    final_cost = 1 if setting == "r" else 2
    if k < final_cost:
        return
    glob = cgs.globally_legal(agent)
    acts = sorted(cgs.agent_actions(agent))
    final = TOP if setting == "r" else TOP_STAR
    found = []
    for guards in _guard_lists(vocab, k - final_cost, setting):
        for choice in itertools.product(acts, repeat=len(guards)):
            blocked = False
            for j, g in enumerate(guards):
                prev = [guards[i] for i in range(j) if choice[i] in glob]
                if subsumed(g, prev, setting):
                    blocked = True
                    break
            if blocked or subsumed(final, [g for g, a in zip(guards, choice) if a in glob], setting):
                continue
            pairs = tuple((g, Distribution.point(a)) for g, a in zip(guards, choice))
            for a in sorted(glob):
                found.append(NatStrategy(agent, setting, pairs + ((final, Distribution.point(a)),)))
    found.sort(key=lambda s: (complexity(s), inline_strategy(s)))
    yield from found
