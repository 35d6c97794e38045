"""Shared fixtures for the test suite: random models, random formulas and an
independent brute-force evaluator for memoryless NatPATL."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from natpatl.cgs import Distribution
from natpatl.dsl import parse_model
from natpatl.logic import And, Atom, Coalition, Next, Not, Or, Top, Until
from natpatl.product import Mdp

PROPS = ("p", "q")
AGENTS = ("x", "y")
ACTIONS = ("a", "b")


def _dyadic_split(rng: random.Random, targets: list[str]) -> dict[str, Fraction]:
    k = rng.randint(1, min(4, len(targets)))
    chosen = rng.sample(targets, k)
    quarters = [1] * k
    for _ in range(4 - k):
        quarters[rng.randrange(k)] += 1
    return {t: Fraction(q, 4) for t, q in zip(chosen, quarters)}


def random_cgs_text(rng: random.Random, max_states: int = 3) -> str:
    n = min(max_states, rng.choice([1, 2, 3, 3]))
    states = [f"s{i}" for i in range(n)]
    lines = [f"agents {' '.join(AGENTS)}", f"props {' '.join(PROPS)}", f"actions {' '.join(ACTIONS)}"]
    for s in states:
        lab = [p for p in PROPS if rng.random() < 0.5]
        lines.append(f"state {s} {{{', '.join(lab)}}}")
    legal = {}
    for s in states:
        for ag in AGENTS:
            acts = rng.choice([["a"], ["b"], ["a", "b"], ["a", "b"]])
            legal[s, ag] = acts
            lines.append(f"legal {s} {ag} {{{', '.join(acts)}}}")
    for s in states:
        for prof in itertools.product(*(legal[s, ag] for ag in AGENTS)):
            dist = _dyadic_split(rng, states)
            body = ", ".join(f"{t}: {p.numerator}/{p.denominator}" for t, p in sorted(dist.items()))
            lines.append(f"trans {s} ({', '.join(prof)}) -> {{{body}}}")
    lines.append("init s0")
    return "\n".join(lines) + "\n"


def random_cgs(rng: random.Random, max_states: int = 3):
    return parse_model(random_cgs_text(rng, max_states))


def random_mdp(rng: random.Random, max_states: int = 6, max_choices: int = 3) -> Mdp:
    n = rng.randint(1, max_states)
    states = tuple(range(n))
    choices, trans = {}, {}
    for s in states:
        cs = tuple(range(rng.randint(1, max_choices)))
        choices[s] = cs
        for c in cs:
            dist = _dyadic_split(rng, list(states))
            trans[s, c] = Distribution(dist)
    labels = {s: frozenset(p for p in PROPS if rng.random() < 0.4) for s in states}
    return Mdp(states, 0, choices, trans, labels, {})


THRESHOLDS = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]


def random_state_formula(rng: random.Random, depth: int, max_k: int = 3, positive: bool = False):
    """Random NatPATL state formula with at most ``depth`` nested coalitions."""
    roll = rng.random()
    if depth == 0 or roll < 0.3:
        base = rng.choice([Atom("p"), Atom("q"), Top()])
        if not positive and rng.random() < 0.3:
            return Not(base)
        return base
    if roll < 0.45:
        op = rng.choice([And, Or])
        return op(random_state_formula(rng, depth - 1, max_k, positive), random_state_formula(rng, depth - 1, max_k, positive))
    if roll < 0.5 and not positive:
        return Not(random_state_formula(rng, depth, max_k, positive))
    agents = tuple(a for a in AGENTS if rng.random() < 0.5)
    cmp = rng.choice([">=", ">"] if positive else [">=", ">", "<=", "<"])
    d = rng.choice(THRESHOLDS)
    k = rng.randint(1, max_k)
    inner = lambda: random_state_formula(rng, depth - 1, max_k, positive)  # noqa: E731
    shape = rng.choice(["X", "U", "F"] if positive else ["X", "U", "F", "G"])
    if shape == "X":
        body = Next(inner())
    elif shape == "U":
        body = Until(inner(), inner())
    elif shape == "F":
        body = Until(Top(), inner())
    else:
        body = Not(Until(Top(), Not(inner())))
    return Coalition(agents, cmp, d, k, body)


# ---------------------------------------------------------------- brute force


def _solve(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rhs)
    m = [row[:] + [b] for row, b in zip(rows, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def chain_until(step: dict, safe: set, target: set) -> dict:
    """Exact Pr(safe U target) in a Markov chain given as state -> {succ: p}."""
    states = list(step)
    can = set(target)
    changed = True
    while changed:
        changed = False
        for s in states:
            if s not in can and s in safe and any(t in can for t in step[s]):
                can.add(s)
                changed = True
    unknown = [s for s in states if s in can and s not in target]
    idx = {s: i for i, s in enumerate(unknown)}
    rows, rhs = [], []
    for s in unknown:
        row = [Fraction(0)] * len(unknown)
        row[idx[s]] += 1
        b = Fraction(0)
        for t, p in step[s].items():
            if t in target:
                b += p
            elif t in idx:
                row[idx[t]] -= p
        rows.append(row)
        rhs.append(b)
    sol = _solve(rows, rhs) if unknown else []
    out = {s: Fraction(0) for s in states}
    for s in target:
        out[s] = Fraction(1)
    for s, i in idx.items():
        out[s] = sol[i]
    return out


def minterm_size(labels: frozenset, props) -> int:
    props = sorted(props)
    return sum(1 if p in labels else 2 for p in props) + len(props) - 1


def natural_behaviours(cgs, agent: str, k: int) -> set:
    """Every state -> action map realised by a deterministic memoryless natural
    strategy of complexity <= k over the minterm vocabulary."""
    if k < 1:
        return set()
    legal = {s: cgs.legal[s, agent] for s in cgs.states}
    glob = set.intersection(*(set(v) for v in legal.values()))
    guards = [("T", 1)] + [(lab, minterm_size(lab, cgs.props)) for lab in {cgs.labels[s] for s in cgs.states}]
    guards = [(g, c) for g, c in guards if c <= k - 1]
    out = set()

    def rec(prefix, left):
        for final in sorted(glob):
            beh = []
            for s in cgs.states:
                pick = final
                for g, a in prefix:
                    if (g == "T" or g == cgs.labels[s]) and a in legal[s]:
                        pick = a
                        break
                beh.append(pick)
            out.add(tuple(beh))
        for g, c in guards:
            if c <= left:
                for a in cgs.actions:
                    rec(prefix + [(g, a)], left - c)

    rec([], k - 1)
    return out


def all_behaviours(cgs, agent: str) -> list[tuple]:
    return list(itertools.product(*(sorted(cgs.legal[s, agent]) for s in cgs.states)))


def brute_force(cgs, f) -> set:
    """States satisfying ``f`` by exhaustive enumeration of memoryless profiles."""
    states = cgs.states
    if isinstance(f, Top):
        return set(states)
    if isinstance(f, Atom):
        return {s for s in states if f.name in cgs.labels[s]}
    if isinstance(f, Not):
        return set(states) - brute_force(cgs, f.arg)
    if isinstance(f, And):
        return brute_force(cgs, f.left) & brute_force(cgs, f.right)
    if isinstance(f, Or):
        return brute_force(cgs, f.left) | brute_force(cgs, f.right)
    assert isinstance(f, Coalition)
    body, negated = f.body, False
    if isinstance(body, Not):
        body, negated = body.arg, True
    if isinstance(body, Next):
        safe, target, kind = set(states), brute_force(cgs, body.arg), "X"
    else:
        safe, target, kind = brute_force(cgs, body.left), brute_force(cgs, body.right), "U"
    coalition = list(f.agents)
    others = [a for a in cgs.agents if a not in coalition]
    ours = [sorted(natural_behaviours(cgs, a, f.k)) for a in coalition]
    theirs = [all_behaviours(cgs, a) for a in others]
    minimise = f.cmp in (">=", ">")
    sat = set()
    for mine in itertools.product(*ours):
        worst = {}
        for opp in itertools.product(*theirs):
            beh = dict(zip(coalition, mine)) | dict(zip(others, opp))
            step = {}
            for i, s in enumerate(states):
                prof = tuple(beh[a][i] for a in cgs.agents)
                step[s] = dict(cgs.trans[s, prof].items())
            if kind == "X":
                val = {s: sum((p for t, p in step[s].items() if t in target), Fraction(0)) for s in states}
            else:
                val = chain_until(step, safe, target)
            if negated:
                val = {s: 1 - v for s, v in val.items()}
            for s in states:
                if s not in worst or (val[s] < worst[s] if minimise else val[s] > worst[s]):
                    worst[s] = val[s]
        for s in states:
            p = worst[s]
            if {">=": p >= f.threshold, ">": p > f.threshold, "<=": p <= f.threshold, "<": p < f.threshold}[f.cmp]:
                sat.add(s)
    return sat


def policy_values(mdp: Mdp, safe: set, target: set, mode: str) -> dict:
    """Optimum over every memoryless deterministic policy, by enumeration."""
    best = {}
    for pick in itertools.product(*(mdp.choices[s] for s in mdp.states)):
        step = {s: dict(mdp.trans[s, c]) for s, c in zip(mdp.states, pick)}
        vals = chain_until(step, safe, target)
        for s in mdp.states:
            if s not in best or (vals[s] > best[s] if mode == "max" else vals[s] < best[s]):
                best[s] = vals[s]
    return best
