"""Product of a game structure with the guard-automaton memory of natural strategies.

Fixing the strategies of a coalition yields an MDP whose nondeterminism is the
joint action of the remaining agents; fixing every agent yields a Markov chain.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from .cgs import Cgs, Distribution
from .natstrat import GuardNfa, InvalidStrategy, NatStrategy, validate_strategy


class StrategyAgentMismatch(InvalidStrategy):
    pass


class MissingAgentStrategy(InvalidStrategy):
    pass


@dataclass(frozen=True)
class Mdp:
    states: tuple
    init: Hashable | None
    choices: Mapping[Hashable, tuple]
    trans: Mapping[tuple, Distribution]
    labels: Mapping[Hashable, frozenset[str]]
    selected: Mapping[Hashable, tuple] = field(default_factory=dict, compare=False)

    def successors(self, s) -> set:
        return {t for c in self.choices[s] for t in self.trans[s, c]}

    def is_chain(self) -> bool:
        return all(len(self.choices[s]) == 1 for s in self.states)


@dataclass(frozen=True)
class MarkovChain:
    states: tuple
    init: Hashable | None
    trans: Mapping[Hashable, Distribution]
    labels: Mapping[Hashable, frozenset[str]]

    def as_mdp(self) -> Mdp:
        return Mdp(
            self.states,
            self.init,
            {s: ((),) for s in self.states},
            {(s, ()): d for s, d in self.trans.items()},
            self.labels,
        )


@dataclass(frozen=True)
class MemoryVector:
    """Per-pair sets of automaton states of one recall strategy."""

    automata: tuple[GuardNfa, ...] = field(compare=False)
    sets: tuple[frozenset[int], ...]

    @classmethod
    def initial(cls, automata: Sequence[GuardNfa]) -> MemoryVector:
        return cls(tuple(automata), tuple(a.initial for a in automata))

    def update(self, labels: frozenset[str]) -> MemoryVector:
        return MemoryVector(self.automata, tuple(a.step(m, labels) for a, m in zip(self.automata, self.sets)))

    def accepting(self) -> tuple[bool, ...]:
        return tuple(a.accepts_set(m) for a, m in zip(self.automata, self.sets))


def _check_profile(cgs: Cgs, coalition: Sequence[str], profile: Mapping[str, NatStrategy], strict: bool):
    for agent in coalition:
        if agent not in profile:
            raise MissingAgentStrategy(f"no strategy given for coalition member {agent!r}")
    for agent, strat in profile.items():
        if strat.agent != agent:
            raise StrategyAgentMismatch(f"strategy for {strat.agent!r} supplied for agent {agent!r}")
        if agent not in coalition:
            raise StrategyAgentMismatch(f"strategy supplied for {agent!r}, who is not in the coalition")
        validate_strategy(strat, cgs)


def fix_coalition(
    cgs: Cgs,
    coalition: Sequence[str],
    profile: Mapping[str, NatStrategy],
    initial: str | None = None,
    strict: bool = False,
) -> Mdp:
    """Build the reachable product MDP.

    With ``initial=None`` every game state is a root (its memory being the
    one obtained after the length-1 history).
    """
    coalition = [a for a in cgs.agents if a in set(coalition)]
    _check_profile(cgs, coalition, profile, strict)
    strats = [profile[a] for a in coalition]
    free = [a for a in cgs.agents if a not in set(coalition)]
    pos = {a: i for i, a in enumerate(cgs.agents)}

    def start_memory(s: str) -> tuple:
        return tuple(st.step_memory(st.initial_memory(), cgs.labels[s]) for st in strats)

    roots = [initial] if initial is not None else list(cgs.states)
    states: list = []
    seen: set = set()
    queue: deque = deque()
    for r in roots:
        node = (r, start_memory(r))
        if node not in seen:
            seen.add(node)
            states.append(node)
            queue.append(node)

    choices: dict = {}
    trans: dict = {}
    selected: dict = {}
    while queue:
        node = queue.popleft()
        s, mem = node
        idx = tuple(st.choose(m, s, cgs, strict) for st, m in zip(strats, mem))
        selected[node] = idx
        coal_dist = Distribution.product([st.pairs[i][1] for st, i in zip(strats, idx)])
        free_profiles = list(itertools.product(*(sorted(cgs.legal[s, a]) for a in free)))
        choices[node] = tuple(free_profiles)
        for fp in free_profiles:
            acc: dict = {}
            for coal_acts, w in coal_dist.items():
                joint = [None] * len(cgs.agents)
                for a, act in zip(coalition, coal_acts):
                    joint[pos[a]] = act
                for a, act in zip(free, fp):
                    joint[pos[a]] = act
                for t, p in cgs.trans[s, tuple(joint)].items():
                    nmem = tuple(st.step_memory(m, cgs.labels[t]) for st, m in zip(strats, mem))
                    nxt = (t, nmem)
                    acc[nxt] = acc.get(nxt, Fraction(0)) + w * p
                    if nxt not in seen:
                        seen.add(nxt)
                        states.append(nxt)
                        queue.append(nxt)
            trans[node, fp] = Distribution(acc)
    return Mdp(
        states=tuple(states),
        init=states[0] if initial is not None else None,
        choices=choices,
        trans=trans,
        labels={n: cgs.labels[n[0]] for n in states},
        selected=selected,
    )


def fix_all(
    cgs: Cgs, profile: Mapping[str, NatStrategy], initial: str | None = None, strict: bool = False
) -> MarkovChain:
    for a in cgs.agents:
        if a not in profile:
            raise MissingAgentStrategy(f"no strategy given for agent {a!r}")
    mdp = fix_coalition(cgs, cgs.agents, profile, initial, strict)
    return MarkovChain(mdp.states, mdp.init, {s: mdp.trans[s, ()] for s in mdp.states}, mdp.labels)


def state_name(node) -> str:
    if isinstance(node, tuple) and len(node) == 2 and isinstance(node[0], str):
        s, mem = node
        parts = []
        for m in mem:
            parts.append("/".join("{" + ",".join(map(str, sorted(x))) + "}" for x in m) if m else "-")
        return f"{s}[{';'.join(parts)}]" if any(mem) else s
    return str(node)


def export_mdp(mdp: Mdp) -> str:
    """Plain-text dump: one ``src choice tgt p/q`` line per transition."""
    index = {s: i for i, s in enumerate(mdp.states)}
    lines = [f"states {len(mdp.states)}"]
    if mdp.init is not None:
        lines.append(f"init {index[mdp.init]}")
    for s in mdp.states:
        lab = " ".join(sorted(mdp.labels[s]))
        lines.append(f"state {index[s]} {state_name(s)}" + (f" {{{lab}}}" if lab else " {}"))
    for s in mdp.states:
        for c in mdp.choices[s]:
            cname = ",".join(c) if c else "-"
            for t, p in sorted(mdp.trans[s, c].items(), key=lambda kv: index[kv[0]]):
                lines.append(f"{index[s]} {cname} {index[t]} {p.numerator}/{p.denominator}")
    return "\n".join(lines) + "\n"
