"""Bottom-up model checking of NatPATL and NatPATL* formulas.

Coalition operators are decided by enumerating deterministic natural
strategies of bounded complexity for the coalition and solving the MDP left
for the opponents.  Truth values are three-valued: ``None`` means unknown and
only arises with the iterative solver.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cgs import Cgs
from .logic import (
    And,
    Atom,
    Coalition,
    Formula,
    Next,
    Not,
    Or,
    Top,
    Until,
    classify,
    compare,
    is_state_formula,
    to_text,
)
from .natstrat import (
    NatStrategy,
    VocabularyEmpty,
    default_vocab,
    enumerate_det,
    literal_vocab,
    minterm_vocab,
)
from .omega import DEFAULT_BUDGET, mdp_omega
from .probsolve import Interval, complement, dual_mode, solve_next, solve_until
from .product import Mdp, fix_all, fix_coalition


class UnknownVerdict(RuntimeError):
    pass


class NotPositiveFragment(ValueError):
    pass


@dataclass(frozen=True)
class CheckConfig:
    setting: str = "r"
    vocab: str | tuple = "default"  # "default" | "literals" | "minterms" | tuple of formulas
    opponent: str = "mdp"  # "mdp" or "enumerate:BOUND"
    solve: str = "exact"  # "exact" or "iter:TOL"
    jobs: int = 1
    strict: bool = False
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.setting not in ("r", "R"):
            raise ValueError(f"setting must be 'r' or 'R', not {self.setting!r}")
        self.opponent_bound()
        self.tolerance()

    def opponent_bound(self) -> int | None:
        if self.opponent == "mdp":
            return None
        kind, _, bound = self.opponent.partition(":")
        if kind != "enumerate" or not bound.isdigit():
            raise ValueError(f"opponent mode must be 'mdp' or 'enumerate:BOUND', not {self.opponent!r}")
        return int(bound)

    def tolerance(self) -> Fraction | None:
        if self.solve == "exact":
            return None
        kind, _, tol = self.solve.partition(":")
        if kind != "iter" or not tol:
            raise ValueError(f"solve mode must be 'exact' or 'iter:TOL', not {self.solve!r}")
        return Fraction(tol)


@dataclass(frozen=True)
class Witness:
    profile: tuple[NatStrategy, ...]
    probability: Fraction | Interval | None  # None: no opponent strategy exists

    def as_dict(self) -> dict[str, NatStrategy]:
        return {s.agent: s for s in self.profile}


@dataclass
class CheckResult:
    formula: Formula
    init: str
    truth: dict = field(default_factory=dict)  # formula -> {state: True | False | None}
    witnesses: dict = field(default_factory=dict)  # (state, coalition formula) -> Witness
    values: dict = field(default_factory=dict)  # (state, coalition formula) -> best probability found
    stats: dict = field(default_factory=dict)

    def value(self, state: str, f: Formula | None = None):
        return self.truth[self.formula if f is None else f][state]

    @property
    def verdict(self) -> bool | None:
        return self.truth[self.formula][self.init]

    def holds(self, state: str | None = None) -> bool:
        v = self.truth[self.formula][self.init if state is None else state]
        if v is None:
            raise UnknownVerdict(f"{to_text(self.formula)} is undecided at {state or self.init}")
        return v


def resolve_vocab(cfg: CheckConfig, cgs: Cgs) -> tuple[Formula, ...]:
    if isinstance(cfg.vocab, str):
        builders = {"default": default_vocab, "literals": literal_vocab, "minterms": minterm_vocab}
        if cfg.vocab not in builders:
            raise ValueError(f"unknown vocabulary {cfg.vocab!r}")
        vocab = builders[cfg.vocab](cgs)
    else:
        vocab = tuple(cfg.vocab)
    if not vocab:
        raise VocabularyEmpty("empty guard vocabulary")
    return vocab


# ---------------------------------------------------------------- three-valued Booleans


def _not(a):
    return None if a is None else not a


def _and(a, b):
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def _or(a, b):
    if a is True or b is True:
        return True
    if a is None or b is None:
        return None
    return False


VACUOUS = object()  # opponent value when no opponent strategy exists


def _decide(p, op: str, d: Fraction):
    if isinstance(p, Interval):
        lo, hi = compare(p.lo, op, d), compare(p.hi, op, d)
        if lo and hi:
            return True
        if not lo and not hi:
            return False
        return None
    return compare(p, op, d)


def opponent_mode(op: str) -> str:
    return "min" if op in (">=", ">") else "max"


# ---------------------------------------------------------------- body evaluation


def _maximal_state_subformulas(body: Formula) -> list[Formula]:
    out: list[Formula] = []

    def go(g: Formula):
        if is_state_formula(g):
            if g not in out:
                out.append(g)
            return
        for c in g.children():
            go(c)

    go(body)
    return out


def _replace(body: Formula, table: Mapping[Formula, str]) -> Formula:
    if body in table:
        return Atom(table[body])
    if isinstance(body, Not):
        return Not(_replace(body.arg, table))
    if isinstance(body, And):
        return And(_replace(body.left, table), _replace(body.right, table))
    if isinstance(body, Or):
        return Or(_replace(body.left, table), _replace(body.right, table))
    if isinstance(body, Next):
        return Next(_replace(body.arg, table))
    if isinstance(body, Until):
        return Until(_replace(body.left, table), _replace(body.right, table))
    return body


class _Body:
    """A coalition body prepared for repeated solving on product MDPs."""

    def __init__(self, body: Formula, sat: Mapping[Formula, Mapping[str, bool | None]]):
        self.body = body
        self.negated = isinstance(body, Not) and isinstance(body.arg, (Next, Until)) and _flat(body.arg)
        core = body.arg if self.negated else body
        self.core = core
        if isinstance(core, (Next, Until)) and _flat(core):
            self.kind = "next" if isinstance(core, Next) else "until"
            parts = [core.arg] if isinstance(core, Next) else [core.left, core.right]
            self.preds = [self._pred(sat[p]) for p in parts]
        else:
            self.kind = "omega"
            self.negated = False
            subs = _maximal_state_subformulas(body)
            self.table = {g: f"_q{i}" for i, g in enumerate(subs)}
            self.ltl = _replace(body, self.table)
            self.atom_sat = {name: self._pred(sat[g]) for g, name in self.table.items()}
        self.unknown = any(v is None for g in self._inputs(sat) for v in g.values())

    def _inputs(self, sat):
        if self.kind == "omega":
            return [sat[g] for g in self.table]
        parts = [self.core.arg] if self.kind == "next" else [self.core.left, self.core.right]
        return [sat[p] for p in parts]

    @staticmethod
    def _pred(values: Mapping[str, bool | None]) -> frozenset[str]:
        return frozenset(s for s, v in values.items() if v)

    def solve(self, mdp: Mdp, mode: str, method: str, tol) -> dict:
        if self.kind == "omega":
            labeling = {n: frozenset(a for a, ss in self.atom_sat.items() if n[0] in ss) for n in mdp.states}
            return mdp_omega(mdp, self.ltl, mode, labeling).values
        inner_mode = dual_mode(mode) if self.negated else mode
        if self.kind == "next":
            target = [n for n in mdp.states if n[0] in self.preds[0]]
            vals = solve_next(mdp, target, inner_mode).values
        else:
            safe = [n for n in mdp.states if n[0] in self.preds[0]]
            target = [n for n in mdp.states if n[0] in self.preds[1]]
            vals = solve_until(mdp, safe, target, inner_mode, method, tol).values
        if self.negated:
            vals = {n: complement(v) for n, v in vals.items()}
        return vals

    def solve_chain(self, chain, method: str, tol) -> dict:
        return self.solve(chain.as_mdp(), "max", method, tol)


def _flat(temporal: Formula) -> bool:
    return all(is_state_formula(c) for c in temporal.children())


# ---------------------------------------------------------------- checker


class _Checker:
    def __init__(self, cgs: Cgs, cfg: CheckConfig):
        self.cgs = cgs
        self.cfg = cfg
        self.vocab = resolve_vocab(cfg, cgs)
        self.method = "exact" if cfg.solve == "exact" else "iterative"
        self.tol = cfg.tolerance()
        self._strategies: dict = {}
        self.stats = {"profiles": 0, "solves": 0, "solve_seconds": 0.0}

    # strategies of one agent, deduplicated by behaviour in the memoryless setting
    def strategies(self, agent: str, k: int) -> list[NatStrategy]:
        key = (agent, k)
        if key not in self._strategies:
            out = []
            seen = set()
            for st in enumerate_det(agent, k, self.cfg.setting, self.vocab, self.cgs):
                if self.cfg.setting == "r":
                    sig = tuple(st.pairs[st.choose((), s, self.cgs, self.cfg.strict)][1] for s in self.cgs.states)
                    if sig in seen:
                        continue
                    seen.add(sig)
                out.append(st)
            self._strategies[key] = out
        return self._strategies[key]

    def profiles(self, agents: Sequence[str], k: int) -> list[tuple[NatStrategy, ...]]:
        return list(itertools.product(*(self.strategies(a, k) for a in agents)))

    def roots(self, profile: Sequence[NatStrategy]) -> dict:
        out = {}
        for s in self.cgs.states:
            mem = tuple(st.step_memory(st.initial_memory(), self.cgs.labels[s]) for st in profile)
            out[s] = (s, mem)
        return out

    def profile_values(self, f: Coalition, body: _Body, profile: tuple[NatStrategy, ...], initial=None) -> dict:
        """Opponent-optimal probability of the body, per game state."""
        t0 = time.perf_counter()
        agents = f.agents
        mode = opponent_mode(f.cmp)
        bound = self.cfg.opponent_bound()
        prof = dict(zip(agents, profile))
        states = [initial] if initial is not None else list(self.cgs.states)
        if bound is None:
            mdp = fix_coalition(self.cgs, agents, prof, initial, self.cfg.strict)
            vals = body.solve(mdp, mode, self.method, self.tol)
            roots = self.roots(profile)
            out = {s: vals[roots[s]] for s in states}
        else:
            free = [a for a in self.cgs.agents if a not in set(agents)]
            out = {}
            for opp in self.profiles(free, bound):
                full = dict(prof)
                full.update(zip(free, opp))
                chain = fix_all(self.cgs, full, initial, self.cfg.strict)
                vals = body.solve_chain(chain, self.method, self.tol)
                full_roots = self._full_roots(full)
                for s in states:
                    v = vals[full_roots[s]]
                    if s not in out or _worse(mode, v, out[s]):
                        out[s] = v
            if not out:
                # no opponent has a natural strategy: the universal claim holds vacuously
                out = {s: VACUOUS for s in states}
        self.stats["solves"] += 1
        self.stats["solve_seconds"] += time.perf_counter() - t0
        return out

    def _full_roots(self, full: Mapping[str, NatStrategy]) -> dict:
        strats = [full[a] for a in self.cgs.agents]
        return self.roots(strats)

    def coalition(self, f: Coalition, sat: dict, result: CheckResult, per_state: bool = False) -> dict:
        body = _Body(f.body, sat)
        states = list(self.cgs.states)
        if body.unknown:
            return {s: None for s in states}
        profiles = self.profiles(f.agents, f.k)
        self.stats["profiles"] += len(profiles)
        verdict: dict = {s: False for s in states}
        best: dict = {}
        open_states = set(states)

        def run(profile):
            if per_state:
                vals = {}
                for s in states:
                    vals.update(self.profile_values(f, body, profile, initial=s))
                return vals
            return self.profile_values(f, body, profile)

        jobs = max(1, self.cfg.jobs)
        chunk = max(1, jobs * 4)
        for start in range(0, len(profiles), chunk):
            batch = profiles[start:start + chunk]
            if jobs > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    results = list(pool.map(run, batch))
            else:
                results = [run(p) for p in batch]
            for profile, vals in zip(batch, results):
                for s in states:
                    v = vals[s]
                    if v is VACUOUS:
                        d, v = True, None
                    else:
                        d = _decide(v, f.cmp, f.threshold)
                        if best.get(s) is None or _better_for_coalition(f.cmp, v, best[s]):
                            best[s] = v
                    if verdict[s] is True:
                        continue
                    if d is True:
                        verdict[s] = True
                        result.witnesses[s, f] = Witness(profile, v)
                        open_states.discard(s)
                    elif d is None:
                        verdict[s] = None
            if not open_states:
                break
        for s in states:
            result.values[s, f] = best.get(s)
        return verdict

    def evaluate(self, f: Formula, result: CheckResult, per_state: bool = False) -> dict:
        if f in result.truth:
            return result.truth[f]
        states = self.cgs.states
        if isinstance(f, Top):
            out = {s: True for s in states}
        elif isinstance(f, Atom):
            if f.name not in self.cgs.props:
                from .logic import UnknownAtom

                raise UnknownAtom(f.name)
            out = {s: f.name in self.cgs.labels[s] for s in states}
        elif isinstance(f, Not):
            a = self.evaluate(f.arg, result, per_state)
            out = {s: _not(a[s]) for s in states}
        elif isinstance(f, And):
            a, b = self.evaluate(f.left, result, per_state), self.evaluate(f.right, result, per_state)
            out = {s: _and(a[s], b[s]) for s in states}
        elif isinstance(f, Or):
            a, b = self.evaluate(f.left, result, per_state), self.evaluate(f.right, result, per_state)
            out = {s: _or(a[s], b[s]) for s in states}
        elif isinstance(f, Coalition):
            for a in f.agents:
                if a not in self.cgs.agents:
                    from .logic import UnknownAgent

                    raise UnknownAgent(a)
            sat = {g: self.evaluate(g, result, per_state) for g in _maximal_state_subformulas(f.body)}
            out = self.coalition(f, sat, result, per_state)
        else:
            raise ValueError(f"path formula outside a coalition operator: {to_text(f)}")
        result.truth[f] = out
        return out


def _worse(mode: str, a, b) -> bool:
    a_key = a.lo if isinstance(a, Interval) else a
    b_key = b.lo if isinstance(b, Interval) else b
    return a_key < b_key if mode == "min" else a_key > b_key


def _better_for_coalition(op: str, a, b) -> bool:
    return _worse("max" if op in (">=", ">") else "min", a, b)


def check(cgs: Cgs, s0: str | None, f: Formula, cfg: CheckConfig | None = None) -> CheckResult:
    cfg = cfg or CheckConfig()
    s0 = s0 or cgs.init
    t0 = time.perf_counter()
    checker = _Checker(cgs, cfg)
    result = CheckResult(f, s0)
    checker.evaluate(f, result)
    cls = classify(f)
    result.stats = dict(checker.stats, seconds=time.perf_counter() - t0, fragment=cls.fragment, positive=cls.positive)
    return result


def check_positive_np_path(cgs: Cgs, s0: str | None, f: Formula, cfg: CheckConfig | None = None) -> CheckResult:
    """Decide a negation-free formula by guessing coalition witnesses state by state.

    Only coalition strategies are guessed: each guess is verified with a
    separate per-state product and polynomial-time solve.
    """
    cls = classify(f)
    if not cls.positive:
        raise NotPositiveFragment(f"{to_text(f)} contains a negation")
    cfg = cfg or CheckConfig()
    s0 = s0 or cgs.init
    t0 = time.perf_counter()
    checker = _Checker(cgs, cfg)
    result = CheckResult(f, s0)
    checker.evaluate(f, result, per_state=True)
    result.stats = dict(checker.stats, seconds=time.perf_counter() - t0, fragment=cls.fragment, positive=True)
    return result


def verify_witness(cgs: Cgs, state: str, f: Coalition, witness: Witness, cfg: CheckConfig | None = None, sat=None):
    """Re-solve the body with the witness fixed; returns (probability, verdict)."""
    cfg = cfg or CheckConfig()
    checker = _Checker(cgs, cfg)
    result = CheckResult(f, state)
    if sat is None:
        sat = {g: checker.evaluate(g, result) for g in _maximal_state_subformulas(f.body)}
    body = _Body(f.body, sat)
    p = checker.profile_values(f, body, witness.profile, initial=state)[state]
    if p is VACUOUS:
        return None, True
    return p, _decide(p, f.cmp, f.threshold)
