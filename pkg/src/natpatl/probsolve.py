"""Exact probabilities for until, next and invariance objectives on chains and MDPs.

Qualitative (0/1) states are found by graph analysis; the remaining values come
from exact rational elimination, driven by policy iteration on MDPs.  An
interval-iteration mode returns certified dyadic bounds instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Collection, Hashable, Mapping

from .product import MarkovChain, Mdp

ZERO = Fraction(0)
ONE = Fraction(1)


class NonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi


@dataclass
class Solution:
    values: dict  # state -> Fraction (exact) or Interval (iterative)
    policy: dict = field(default_factory=dict)
    iterations: int = 0


# ---------------------------------------------------------------- linear algebra


def solve_linear(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Solve ``a x = b`` exactly by Gauss-Jordan elimination (``a`` must be regular)."""
    n = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        m[col], m[piv] = m[piv], m[col]
        pr = m[col]
        inv = 1 / pr[col]
        if inv != 1:
            for j in range(col, n + 1):
                pr[j] *= inv
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                row = m[r]
                for j in range(col, n + 1):
                    if pr[j]:
                        row[j] -= f * pr[j]
    return [m[i][n] for i in range(n)]


# ---------------------------------------------------------------- graph analysis


def _reach_backward(states, preds: Mapping, start: set, allowed: set) -> set:
    seen = set(start)
    stack = list(start)
    while stack:
        t = stack.pop()
        for s in preds.get(t, ()):
            if s not in seen and s in allowed:
                seen.add(s)
                stack.append(s)
    return seen


def _preds(mdp: Mdp) -> dict:
    out: dict = {}
    for s in mdp.states:
        for c in mdp.choices[s]:
            for t in mdp.trans[s, c]:
                out.setdefault(t, set()).add(s)
    return out


def prob0_max(mdp: Mdp, safe: set, target: set) -> set:
    """States where the maximal probability is 0."""
    can = _reach_backward(mdp.states, _preds(mdp), set(target), safe)
    return set(mdp.states) - can


def prob0_min(mdp: Mdp, safe: set, target: set) -> set:
    """States where some adversary avoids the target surely."""
    forced = set(target)
    changed = True
    while changed:
        changed = False
        for s in mdp.states:
            if s in forced or s not in safe:
                continue
            if all(any(t in forced for t in mdp.trans[s, c]) for c in mdp.choices[s]):
                forced.add(s)
                changed = True
    return set(mdp.states) - forced


def prob1_max(mdp: Mdp, safe: set, target: set) -> set:
    """States where some adversary reaches the target almost surely."""
    u = set(mdp.states)
    while True:
        r = set(target)
        changed = True
        while changed:
            changed = False
            for s in mdp.states:
                if s in r or s not in safe or s not in u:
                    continue
                for c in mdp.choices[s]:
                    succ = mdp.trans[s, c]
                    if all(t in u for t in succ) and any(t in r for t in succ):
                        r.add(s)
                        changed = True
                        break
        if r == u:
            return u
        u = r


def _chain_prob0(succ: Mapping, states: Collection, safe: set, target: set) -> set:
    preds: dict = {}
    for s in states:
        for t in succ[s]:
            preds.setdefault(t, set()).add(s)
    can = _reach_backward(states, preds, set(target) & set(states), safe)
    return set(states) - can


# ---------------------------------------------------------------- Markov chains


def _solve_chain(states, succ: Mapping, safe: set, target: set, fixed: Mapping) -> dict:
    """Reachability values for a chain given as ``succ[s] -> {t: p}``.

    ``fixed`` pre-assigns values (targets, known zeros); other states are
    solved after removing those that cannot reach the target.
    """
    vals = dict(fixed)
    rest = [s for s in states if s not in vals]
    if not rest:
        return vals
    zero = _chain_prob0(succ, states, safe, {s for s in states if vals.get(s, ZERO) > 0} | target)
    for s in rest:
        if s in zero:
            vals[s] = ZERO
    rest = [s for s in rest if s not in vals]
    if not rest:
        return vals
    idx = {s: i for i, s in enumerate(rest)}
    a = [[ZERO] * len(rest) for _ in rest]
    b = [ZERO] * len(rest)
    for s in rest:
        i = idx[s]
        a[i][i] += ONE
        for t, p in succ[s].items():
            if t in idx:
                a[i][idx[t]] -= p
            else:
                b[i] += p * vals[t]
    for s, x in zip(rest, solve_linear(a, b)):
        vals[s] = x
    return vals


def mc_until_all(chain: MarkovChain, safe: Collection, target: Collection) -> dict:
    safe, target = set(safe), set(target)
    fixed = {s: ONE for s in chain.states if s in target}
    for s in chain.states:
        if s not in target and s not in safe:
            fixed[s] = ZERO
    return _solve_chain(chain.states, chain.trans, safe, target, fixed)


def mc_until(chain: MarkovChain, safe: Collection, target: Collection, start: Hashable) -> Fraction:
    return mc_until_all(chain, safe, target)[start]


def mc_bounded_until(chain: MarkovChain, safe: Collection, target: Collection, start: Hashable, horizon: int) -> Fraction:
    """Pr(safe U target within ``horizon`` steps), exactly."""
    safe, target = set(safe), set(target)
    vals = {s: ONE if s in target else ZERO for s in chain.states}
    for _ in range(horizon):
        vals = {
            s: ONE if s in target else (_expect(chain.trans[s], vals) if s in safe else ZERO)
            for s in chain.states
        }
    return vals[start]


def mc_next(chain: MarkovChain, target: Collection, start: Hashable) -> Fraction:
    target = set(target)
    return sum((p for t, p in chain.trans[start].items() if t in target), ZERO)


def mc_invariance(chain: MarkovChain, safe: Collection, start: Hashable) -> Fraction:
    safe = set(safe)
    bad = [s for s in chain.states if s not in safe]
    return ONE - mc_until(chain, chain.states, bad, start)


# ---------------------------------------------------------------- MDPs


def _better(mode: str, a: Fraction, b: Fraction) -> bool:
    return a > b if mode == "max" else a < b


def _expect(dist, vals) -> Fraction:
    return sum((p * vals[t] for t, p in dist.items()), ZERO)


def solve_until(
    mdp: Mdp,
    safe: Collection,
    target: Collection,
    mode: str = "max",
    method: str = "exact",
    tolerance: Fraction | None = None,
    max_iterations: int = 100_000,
) -> Solution:
    if mode not in ("min", "max"):
        raise ValueError(f"mode must be 'min' or 'max', not {mode!r}")
    safe, target = set(safe), set(target)
    if mode == "max":
        zero = prob0_max(mdp, safe, target)
        one = prob1_max(mdp, safe, target)
    else:
        zero = prob0_min(mdp, safe, target)
        one = set(target)
    fixed = {s: ZERO for s in zero}
    fixed.update({s: ONE for s in one})
    if method == "iterative":
        return _interval_iteration(mdp, safe, target, mode, fixed, tolerance, max_iterations)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")

    unknown = [s for s in mdp.states if s not in fixed]
    policy = {s: mdp.choices[s][0] for s in mdp.states}
    rounds = 0
    while True:
        rounds += 1
        succ = {s: mdp.trans[s, policy[s]] for s in mdp.states}
        vals = _solve_chain(mdp.states, succ, safe, target, fixed)
        changed = False
        for s in unknown:
            cur = _expect(mdp.trans[s, policy[s]], vals)
            best_c, best_v = policy[s], cur
            for c in mdp.choices[s]:
                v = _expect(mdp.trans[s, c], vals)
                if _better(mode, v, best_v):
                    best_c, best_v = c, v
            if best_c != policy[s]:
                policy[s] = best_c
                changed = True
        if not changed:
            if mode == "max":
                _attach_policy(mdp, vals, policy, target)
            else:
                # states of value 0 must pick a choice that stays inside that set
                for s in zero:
                    if s in safe and s not in target:
                        policy[s] = next(c for c in mdp.choices[s] if set(mdp.trans[s, c]) <= zero)
            return Solution(vals, policy, rounds)


def _attach_policy(mdp: Mdp, vals: Mapping, policy: dict, target: set) -> None:
    """Make a max policy reach the target: among value-optimal choices, pick
    one leading to a state already attached (ties may otherwise loop forever
    inside an end component)."""
    attached = {s for s in mdp.states if s in target or vals[s] == 0}
    pending = [s for s in mdp.states if s not in attached]
    while pending:
        progress = False
        for s in list(pending):
            for c in mdp.choices[s]:
                dist = mdp.trans[s, c]
                if _expect(dist, vals) == vals[s] and any(t in attached for t in dist):
                    policy[s] = c
                    attached.add(s)
                    pending.remove(s)
                    progress = True
                    break
        if not progress:
            break


def _round_down(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction((x.numerator * scale) // x.denominator, scale)


def _round_up(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(-((-x.numerator * scale) // x.denominator), scale)


def _interval_iteration(mdp, safe, target, mode, fixed, tolerance, max_iterations, bits: int = 60):
    from .omega import mecs  # local import: omega depends on this module

    if tolerance is None:
        tolerance = Fraction(1, 10**6)
    tolerance = Fraction(tolerance)
    unknown = [s for s in mdp.states if s not in fixed]
    # collapse end components among the unknown states (only max can have them)
    rep = {s: s for s in mdp.states}
    choices = {s: [(s, c) for c in mdp.choices[s]] for s in unknown}
    if mode == "max" and unknown:
        for comp, _ in mecs(mdp, set(unknown)):
            r = min(comp, key=unknown.index)
            exits = [
                (s, c) for s in sorted(comp, key=unknown.index) for c in mdp.choices[s]
                if not set(mdp.trans[s, c]) <= comp
            ]
            for s in comp:
                rep[s] = r
                choices[s] = exits
    lo = {s: fixed.get(s, ZERO) for s in mdp.states}
    hi = {s: fixed.get(s, ONE) for s in mdp.states}

    def bellman(vals, s, rnd):
        opts = [
            sum((p * vals[rep[t]] for t, p in mdp.trans[src, c].items()), ZERO)
            for src, c in choices[s]
        ]
        if not opts:
            return ZERO
        v = max(opts) if mode == "max" else min(opts)
        return rnd(v, bits)

    for it in range(1, max_iterations + 1):
        nlo = dict(lo)
        nhi = dict(hi)
        for s in unknown:
            nlo[s] = max(lo[s], bellman(lo, s, _round_down))
            nhi[s] = min(hi[s], bellman(hi, s, _round_up))
        lo, hi = nlo, nhi
        if all(hi[s] - lo[s] <= tolerance for s in unknown):
            return Solution({s: Interval(lo[rep[s]], hi[rep[s]]) for s in mdp.states}, {}, it)
    raise NonConvergence(f"interval iteration did not reach width {tolerance} in {max_iterations} steps")


def mdp_until(
    mdp: Mdp,
    safe: Collection,
    target: Collection,
    start: Hashable,
    mode: str = "max",
    method: str = "exact",
    tolerance: Fraction | None = None,
):
    return solve_until(mdp, safe, target, mode, method, tolerance).values[start]


def solve_next(mdp: Mdp, target: Collection, mode: str = "max") -> Solution:
    target = set(target)
    vals, policy = {}, {}
    for s in mdp.states:
        best_c, best_v = None, None
        for c in mdp.choices[s]:
            v = sum((p for t, p in mdp.trans[s, c].items() if t in target), ZERO)
            if best_v is None or _better(mode, v, best_v):
                best_c, best_v = c, v
        vals[s], policy[s] = best_v, best_c
    return Solution(vals, policy, 1)


def mdp_next(mdp: Mdp, target: Collection, start: Hashable, mode: str = "max") -> Fraction:
    return solve_next(mdp, target, mode).values[start]


def dual_mode(mode: str) -> str:
    return "min" if mode == "max" else "max"


def solve_invariance(mdp: Mdp, safe: Collection, mode: str = "max", method: str = "exact", tolerance=None) -> Solution:
    """Pr(G safe) = 1 - Pr(F !safe) under the dual optimisation."""
    safe = set(safe)
    bad = [s for s in mdp.states if s not in safe]
    sol = solve_until(mdp, mdp.states, bad, dual_mode(mode), method, tolerance)
    return Solution({s: complement(v) for s, v in sol.values.items()}, sol.policy, sol.iterations)


def complement(v):
    if isinstance(v, Interval):
        return Interval(ONE - v.hi, ONE - v.lo)
    return ONE - v


def mdp_invariance(mdp: Mdp, safe: Collection, start: Hashable, mode: str = "max") -> Fraction:
    return solve_invariance(mdp, safe, mode).values[start]
