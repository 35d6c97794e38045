"""Stochastic concurrent game structures, distributions and histories."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

Profile = tuple  # joint action, ordered like Cgs.agents


class ModelError(ValueError):
    """Base class for ill-formed models."""


class EmptyLegality(ModelError):
    def __init__(self, state: str, agent: str):
        super().__init__(f"no legal action for agent {agent!r} in state {state!r}")
        self.state = state
        self.agent = agent


class UnnormalizedDistribution(ModelError):
    def __init__(self, state: str, profile: Profile, total: Fraction):
        super().__init__(
            f"transition from {state!r} under {profile!r} sums to {total}, not 1"
        )
        self.state = state
        self.profile = profile
        self.total = total


class TransitionForIllegalProfile(ModelError):
    def __init__(self, state: str, profile: Profile, agent: str):
        super().__init__(
            f"transition given for {profile!r} in state {state!r}, "
            f"but the action of {agent!r} is not legal there"
        )
        self.state = state
        self.profile = profile
        self.agent = agent


class MissingTransition(ModelError):
    def __init__(self, state: str, profile: Profile):
        super().__init__(f"no transition for legal profile {profile!r} in state {state!r}")
        self.state = state
        self.profile = profile


class DanglingStateReference(ModelError):
    def __init__(self, state: str, where: str):
        super().__init__(f"unknown state {state!r} referenced in {where}")
        self.state = state
        self.where = where


class UnknownIdentifier(ModelError):
    def __init__(self, kind: str, name: str, where: str):
        super().__init__(f"unknown {kind} {name!r} in {where}")
        self.kind = kind
        self.name = name
        self.where = where


class IllegalProfile(ValueError):
    def __init__(self, state: str, profile: Profile, agent: str):
        super().__init__(f"profile {profile!r} is not legal in {state!r} (agent {agent!r})")
        self.state = state
        self.profile = profile
        self.agent = agent


def as_prob(value) -> Fraction:
    p = Fraction(value)
    if p < 0 or p > 1:
        raise ValueError(f"probability {p} outside [0, 1]")
    return p


class Distribution(Mapping):
    """Finite distribution with exact rational weights.

    Zero-weight entries are dropped; the weights must sum to exactly 1.
    """

    __slots__ = ("_weights", "_hash")

    def __init__(self, weights: Mapping[Hashable, object] | Iterable[tuple[Hashable, object]]):
        items = weights.items() if isinstance(weights, Mapping) else weights
        acc: dict = {}
        for key, w in items:
            p = as_prob(w)
            if p:
                acc[key] = acc.get(key, Fraction(0)) + p
        total = sum(acc.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"distribution sums to {total}")
        self._weights = acc
        self._hash = None

    @classmethod
    def point(cls, x: Hashable) -> Distribution:
        return cls({x: 1})

    @classmethod
    def uniform(cls, xs: Iterable[Hashable]) -> Distribution:
        xs = list(dict.fromkeys(xs))
        return cls({x: Fraction(1, len(xs)) for x in xs})

    @classmethod
    def product(cls, parts: Sequence[Distribution]) -> Distribution:
        """Product distribution over tuples, one component per part."""
        out: dict = {}
        for combo in itertools.product(*(p.items() for p in parts)):
            key = tuple(k for k, _ in combo)
            w = Fraction(1)
            for _, p in combo:
                w *= p
            out[key] = out.get(key, Fraction(0)) + w
        return cls(out)

    def __getitem__(self, key) -> Fraction:
        return self._weights.get(key, Fraction(0))

    def __contains__(self, key) -> bool:
        return key in self._weights

    def __iter__(self) -> Iterator:
        return iter(self._weights)

    def __len__(self) -> int:
        return len(self._weights)

    @property
    def support(self) -> frozenset:
        return frozenset(self._weights)

    @property
    def is_point(self) -> bool:
        return len(self._weights) == 1

    def point_value(self):
        if not self.is_point:
            raise ValueError("not a point distribution")
        return next(iter(self._weights))

    def map(self, fn) -> Distribution:
        out: dict = {}
        for k, p in self._weights.items():
            key = fn(k)
            out[key] = out.get(key, Fraction(0)) + p
        return Distribution(out)

    def __eq__(self, other) -> bool:
        if isinstance(other, Distribution):
            return self._weights == other._weights
        if isinstance(other, Mapping):
            return self._weights == {k: Fraction(v) for k, v in other.items() if v}
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._weights.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{k!r}: {v}" for k, v in sorted(self._weights.items(), key=lambda kv: repr(kv[0])))
        return f"Distribution({{{body}}})"


@dataclass(frozen=True)
class Cgs:
    """A validated stochastic concurrent game structure.

    ``legal`` maps ``(state, agent)`` to a frozenset of actions and ``trans``
    maps ``(state, profile)`` to a distribution over states, with profiles
    ordered like ``agents``.
    """

    states: tuple[str, ...]
    agents: tuple[str, ...]
    actions: tuple[str, ...]
    props: frozenset[str]
    legal: Mapping[tuple[str, str], frozenset[str]]
    trans: Mapping[tuple[str, Profile], Distribution]
    labels: Mapping[str, frozenset[str]]
    init: str | None = None
    _index: Mapping[str, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", MappingProxyType({s: i for i, s in enumerate(self.states)}))

    def agent_index(self, agent: str) -> int:
        return self.agents.index(agent)

    def legal_profiles(self, state: str) -> list[Profile]:
        return [tuple(p) for p in itertools.product(*(sorted(self.legal[state, a]) for a in self.agents))]

    def globally_legal(self, agent: str) -> frozenset[str]:
        sets = [self.legal[s, agent] for s in self.states]
        return frozenset.intersection(*sets)

    def agent_actions(self, agent: str) -> frozenset[str]:
        return frozenset().union(*(self.legal[s, agent] for s in self.states))

    def label(self, state: str) -> frozenset[str]:
        return self.labels[state]

    def reachable(self, start: str | None = None) -> frozenset[str]:
        start = start or self.init or self.states[0]
        seen = {start}
        stack = [start]
        while stack:
            s = stack.pop()
            for prof in self.legal_profiles(s):
                for t in self.trans[s, prof]:
                    if t not in seen:
                        seen.add(t)
                        stack.append(t)
        return frozenset(seen)


@dataclass(frozen=True)
class History:
    states: tuple[str, ...]

    def __post_init__(self):
        if not self.states:
            raise ValueError("a history has at least one state")

    @property
    def last(self) -> str:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def extend(self, state: str) -> History:
        return History(self.states + (state,))

    def check(self, cgs: Cgs) -> None:
        """Raise ValueError unless consecutive states are linked by a legal move."""
        for s in self.states:
            if s not in cgs._index:
                raise DanglingStateReference(s, "history")
        for s, t in zip(self.states, self.states[1:]):
            if not any(t in cgs.trans[s, p] for p in cgs.legal_profiles(s)):
                raise ValueError(f"no legal move from {s!r} to {t!r}")


@dataclass
class RawModel:
    """Structurally unchecked model, as produced by the model-file parser."""

    agents: list[str] = field(default_factory=list)
    props: list[str] = field(default_factory=list)
    actions: list[str] = field(default_factory=list)
    states: list[tuple[str, list[str]]] = field(default_factory=list)
    legal: list[tuple[str, str, list[str]]] = field(default_factory=list)
    trans: list[tuple[str, tuple[str, ...], list[tuple[str, Fraction]]]] = field(default_factory=list)
    init: str | None = None


def validate_cgs(raw: RawModel) -> Cgs:
    if not raw.states:
        raise ModelError("model declares no states")
    if not raw.agents:
        raise ModelError("model declares no agents")
    if not raw.actions:
        raise ModelError("model declares no actions")
    state_names = [s for s, _ in raw.states]
    if len(set(state_names)) != len(state_names):
        raise ModelError("duplicate state declaration")
    known_states = set(state_names)
    agents = tuple(raw.agents)
    actions = set(raw.actions)
    props = frozenset(raw.props)

    labels = {}
    for s, lab in raw.states:
        for p in lab:
            if p not in props:
                raise UnknownIdentifier("proposition", p, f"labels of state {s!r}")
        labels[s] = frozenset(lab)

    legal: dict[tuple[str, str], frozenset[str]] = {}
    for s, a, acts in raw.legal:
        if s not in known_states:
            raise DanglingStateReference(s, f"legal entry for agent {a!r}")
        if a not in agents:
            raise UnknownIdentifier("agent", a, f"legal entry for state {s!r}")
        for act in acts:
            if act not in actions:
                raise UnknownIdentifier("action", act, f"legal {s} {a}")
        legal[s, a] = legal.get((s, a), frozenset()) | frozenset(acts)
    for s in state_names:
        for a in agents:
            if not legal.get((s, a)):
                raise EmptyLegality(s, a)

    trans: dict[tuple[str, Profile], Distribution] = {}
    for s, prof, targets in raw.trans:
        if s not in known_states:
            raise DanglingStateReference(s, "transition source")
        prof = tuple(prof)
        if len(prof) != len(agents):
            raise ModelError(f"profile {prof!r} in state {s!r} has {len(prof)} components, expected {len(agents)}")
        for a, act in zip(agents, prof):
            if act not in actions:
                raise UnknownIdentifier("action", act, f"transition from {s!r}")
            if act not in legal[s, a]:
                raise TransitionForIllegalProfile(s, prof, a)
        if (s, prof) in trans:
            raise ModelError(f"duplicate transition for {prof!r} in state {s!r}")
        weights: dict[str, Fraction] = {}
        for t, p in targets:
            if t not in known_states:
                raise DanglingStateReference(t, f"transition from {s!r} under {prof!r}")
            p = Fraction(p)
            if p < 0:
                raise ModelError(f"negative probability {p} in transition from {s!r}")
            weights[t] = weights.get(t, Fraction(0)) + p
        total = sum(weights.values(), Fraction(0))
        if total != 1:
            raise UnnormalizedDistribution(s, prof, total)
        trans[s, prof] = Distribution(weights)

    for s in state_names:
        for prof in itertools.product(*(sorted(legal[s, a]) for a in agents)):
            if (s, tuple(prof)) not in trans:
                raise MissingTransition(s, tuple(prof))

    if raw.init is not None and raw.init not in known_states:
        raise DanglingStateReference(raw.init, "init")

    return Cgs(
        states=tuple(state_names),
        agents=agents,
        actions=tuple(raw.actions),
        props=props,
        legal=MappingProxyType(legal),
        trans=MappingProxyType(trans),
        labels=MappingProxyType(labels),
        init=raw.init if raw.init is not None else state_names[0],
    )


def successors(cgs: Cgs, s: str, profile: Profile) -> Distribution:
    profile = tuple(profile)
    for a, act in zip(cgs.agents, profile):
        if act not in cgs.legal.get((s, a), ()):
            raise IllegalProfile(s, profile, a)
    if len(profile) != len(cgs.agents):
        raise IllegalProfile(s, profile, cgs.agents[len(profile)] if len(profile) < len(cgs.agents) else "?")
    return cgs.trans[s, profile]
