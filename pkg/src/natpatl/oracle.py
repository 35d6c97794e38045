"""Monte-Carlo simulation of fully fixed strategy profiles.

Plays are sampled with numpy's PCG64 generator.  Each step draws an integer
uniformly below the common denominator of the outgoing distribution, so the
sampling itself introduces no rounding.  A run with ``batches`` batches uses
one child seed per batch (``SeedSequence.spawn``); the aggregate does not
depend on how batches are scheduled.

The reported interval is the normal approximation at the 99% level:
``p +- 2.5758 * sqrt(p (1 - p) / n)``, which has zero width when the
empirical frequency is 0 or 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Collection, Mapping

import numpy as np

from .cgs import Cgs
from .natstrat import NatStrategy
from .product import MissingAgentStrategy

Z99 = 2.5758


@dataclass(frozen=True)
class Estimate:
    hits: int
    n: int
    horizon: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.hits, self.n)

    @property
    def half_width(self) -> float:
        p = self.hits / self.n
        return Z99 * math.sqrt(p * (1 - p) / self.n)

    @property
    def interval(self) -> tuple[float, float]:
        p = self.hits / self.n
        return (max(0.0, p - self.half_width), min(1.0, p + self.half_width))


class _Chain:
    """Markov chain over (state, memory) nodes, expanded on demand."""

    def __init__(self, cgs: Cgs, profile: Mapping[str, NatStrategy], strict: bool = False):
        for a in cgs.agents:
            if a not in profile:
                raise MissingAgentStrategy(f"no strategy given for agent {a!r}")
        self.cgs = cgs
        self.strats = [profile[a] for a in cgs.agents]
        self.strict = strict
        self.nodes: list = []
        self.index: dict = {}
        self.out: dict[int, tuple] = {}

    def node_id(self, node) -> int:
        if node not in self.index:
            self.index[node] = len(self.nodes)
            self.nodes.append(node)
        return self.index[node]

    def root(self, s: str) -> int:
        mem = tuple(st.step_memory(st.initial_memory(), self.cgs.labels[s]) for st in self.strats)
        return self.node_id((s, mem))

    def expand(self, u: int):
        """(denominator, cumulative numerators, successor ids, joint actions)."""
        if u in self.out:
            return self.out[u]
        s, mem = self.nodes[u]
        cgs = self.cgs
        dists = [st.pairs[st.choose(m, s, cgs, self.strict)][1] for st, m in zip(self.strats, mem)]
        outcomes = []
        for joint in _joint(dists):
            w = joint[1]
            for t, p in cgs.trans[s, joint[0]].items():
                nmem = tuple(st.step_memory(m, cgs.labels[t]) for st, m in zip(self.strats, mem))
                outcomes.append((joint[0], t, nmem, w * p))
        den = math.lcm(*(o[3].denominator for o in outcomes))
        nums = [o[3].numerator * (den // o[3].denominator) for o in outcomes]
        if den >= 2**63:
            raise OverflowError("transition denominators too large for integer sampling")
        cum = np.cumsum(np.array(nums, dtype=np.int64))
        succ = np.array([self.node_id((o[1], o[2])) for o in outcomes], dtype=np.int64)
        acts = [o[0] for o in outcomes]
        self.out[u] = (den, cum, succ, acts)
        return self.out[u]


def _joint(dists):
    out = [((), Fraction(1))]
    for d in dists:
        out = [(prof + (a,), w * p) for prof, w in out for a, p in sorted(d.items())]
    return out


def _simulate(chain: _Chain, start: str, safe: set, target: set, horizon: int, n: int, rng, record: bool = False):
    cur = np.full(n, chain.root(start), dtype=np.int64)
    s0 = start
    hit = np.full(n, s0 in target)
    alive = np.full(n, (s0 not in target) and (s0 in safe))
    traces = [[s0] for _ in range(n)] if record else None
    for _ in range(horizon):
        if not alive.any() and not record:
            break
        active = np.nonzero(alive)[0] if not record else np.arange(n)
        nxt = cur.copy()
        for u in np.unique(cur[active]):
            members = active[cur[active] == u]
            den, cum, succ, acts = chain.expand(int(u))
            draws = rng.integers(0, den, size=len(members))
            pick = np.searchsorted(cum, draws, side="right")
            nxt[members] = succ[pick]
            if record:
                for m, k in zip(members, pick):
                    traces[m].append("(" + ", ".join(acts[k]) + ")")
                    traces[m].append(chain.nodes[succ[k]][0])
        cur = nxt
        states = [chain.nodes[i][0] for i in range(len(chain.nodes))]
        in_target = np.array([s in target for s in states])
        in_safe = np.array([s in safe for s in states])
        newly = alive & in_target[cur]
        hit |= newly
        alive &= ~in_target[cur] & in_safe[cur]
    return int(hit.sum()), traces


def estimate_until(
    cgs: Cgs,
    profile: Mapping[str, NatStrategy],
    start: str,
    safe: Collection[str],
    target: Collection[str],
    horizon: int,
    n: int,
    seed: int,
    batches: int = 1,
    jobs: int = 1,
    strict: bool = False,
) -> Estimate:
    """Estimate Pr(safe U target within ``horizon`` steps) from ``start``."""
    if horizon < 0 or n < 1 or batches < 1:
        raise ValueError("horizon must be >= 0, n and batches >= 1")
    safe, target = set(safe), set(target)
    children = np.random.SeedSequence(seed).spawn(batches)
    sizes = [n // batches + (1 if i < n % batches else 0) for i in range(batches)]

    def run(i: int) -> int:
        chain = _Chain(cgs, profile, strict)
        rng = np.random.Generator(np.random.PCG64(children[i]))
        return _simulate(chain, start, safe, target, horizon, sizes[i], rng)[0]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            hits = sum(pool.map(run, range(batches)))
    else:
        hits = sum(run(i) for i in range(batches))
    return Estimate(hits, n, horizon)


def sample_traces(
    cgs: Cgs, profile: Mapping[str, NatStrategy], start: str, horizon: int, n: int, seed: int
) -> list[str]:
    """``n`` plays of length ``horizon``: states interleaved with joint actions."""
    chain = _Chain(cgs, profile)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    _, traces = _simulate(chain, start, set(cgs.states), set(), horizon, n, rng, record=True)
    return [" ".join(t) for t in traces]
