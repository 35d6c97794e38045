"""Real-arithmetic encoding of coalition queries over behavioral natural strategies.

The emitted SMT-LIB script (logic QF_NRA) is satisfiable iff some behavioral
strategy profile whose guard skeleton has complexity at most ``k`` meets the
threshold against every opponent.  The universal quantifier over opponents is
discharged by a fixpoint certificate:

* when opponents maximise (``<=``, ``<``) a pre-fixpoint ``x >= Bellman(x)``
  bounds the optimum from above;
* when opponents minimise (``>=``, ``>``) a post-fixpoint ``x <= Bellman(x)``
  plus a ranking function (every state with ``x > 0`` makes progress towards
  the target under every choice) bounds it from below.

Hence no quantifier alternation is needed.  Skeletons are disjoined; each one
gets its own variables.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cgs import Cgs, Distribution
from .logic import Coalition, Formula, Next, Not, Until, eval_labels, flip, is_boolean, is_state_formula, to_text
from .natstrat import (
    NatStrategy,
    Skeleton,
    VocabularyEmpty,
    compile_guard,
    enumerate_skeletons,
)
from .probsolve import solve_until
from .product import Mdp


class BodyNotNatPatl(ValueError):
    pass


# ---------------------------------------------------------------- s-expressions


def num(x: Fraction | int) -> str:
    x = Fraction(x)
    if x < 0:
        return f"(- {num(-x)})"
    if x.denominator == 1:
        return f"{x.numerator}.0"
    return f"(/ {x.numerator}.0 {x.denominator}.0)"


def app(op: str, *args: str) -> str:
    return f"({op} {' '.join(args)})"


def conj(args: Sequence[str]) -> str:
    args = [a for a in args if a != "true"]
    if any(a == "false" for a in args):
        return "false"
    if not args:
        return "true"
    return args[0] if len(args) == 1 else app("and", *args)


def disj(args: Sequence[str]) -> str:
    args = [a for a in args if a != "false"]
    if any(a == "true" for a in args):
        return "true"
    if not args:
        return "false"
    return args[0] if len(args) == 1 else app("or", *args)


def plus(args: Sequence[str]) -> str:
    args = [a for a in args if a != "0.0"]
    if not args:
        return "0.0"
    return args[0] if len(args) == 1 else app("+", *args)


def times(args: Sequence[str]) -> str:
    if any(a == "0.0" for a in args):
        return "0.0"
    args = [a for a in args if a != "1.0"]
    if not args:
        return "1.0"
    return args[0] if len(args) == 1 else app("*", *args)


_SMT_OP = {">=": ">=", ">": ">", "<=": "<=", "<": "<"}

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_sexprs(text: str) -> list:
    toks = _TOKEN.findall(re.sub(r";[^\n]*", "", text))
    pos = 0

    def read():
        nonlocal pos
        tok = toks[pos]
        pos += 1
        if tok == "(":
            out = []
            while toks[pos] != ")":
                out.append(read())
            pos += 1
            return out
        if tok == ")":
            raise ValueError("unbalanced ')'")
        return tok

    out = []
    while pos < len(toks):
        out.append(read())
    return out


def _atom_value(tok: str, env: Mapping[str, Fraction]):
    if tok == "true":
        return True
    if tok == "false":
        return False
    if re.fullmatch(r"\d+(\.\d+)?", tok):
        return Fraction(tok)
    return env.get(tok)


def evaluate(expr, env: Mapping[str, Fraction]):
    """Exact evaluation; unbound variables make the result ``None`` unless a
    connective decides without them."""
    if isinstance(expr, str):
        return _atom_value(expr, env)
    op, args = expr[0], expr[1:]
    if op == "and":
        vals = [evaluate(a, env) for a in args]
        if any(v is False for v in vals):
            return False
        return None if any(v is None for v in vals) else True
    if op == "or":
        vals = [evaluate(a, env) for a in args]
        if any(v is True for v in vals):
            return True
        return None if any(v is None for v in vals) else False
    if op == "not":
        v = evaluate(args[0], env)
        return None if v is None else not v
    if op == "=>":
        a = evaluate(args[0], env)
        if a is False:
            return True
        b = evaluate(args[1], env)
        if b is True:
            return True
        return None if a is None or b is None else (not a or b)
    if op == "ite":
        c = evaluate(args[0], env)
        if c is None:
            return None
        return evaluate(args[1] if c else args[2], env)
    vals = [evaluate(a, env) for a in args]
    if any(v is None for v in vals):
        return None
    if op == "+":
        return sum(vals, Fraction(0))
    if op == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:], Fraction(0))
    if op == "*":
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    if op == "/":
        return vals[0] / vals[1]
    if op == "=":
        return all(v == vals[0] for v in vals[1:])
    if op in ("<", "<=", ">", ">="):
        pairs = zip(vals, vals[1:])
        return all({"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op] for a, b in pairs)
    raise ValueError(f"unsupported operator {op!r}")


# ---------------------------------------------------------------- script


@dataclass
class SkeletonPart:
    index: int
    skeletons: tuple[Skeleton, ...]  # one per coalition agent
    nodes: list  # product nodes (state, memory)
    root: object
    mode: str  # opponent optimisation for the solved objective
    kind: str  # "next" | "until"
    op: str
    threshold: Fraction
    safe: frozenset
    target: frozenset
    choices: dict  # node -> list of free-agent profiles
    prob: dict  # (node, choice, node') -> expression
    r_defs: dict  # r variable -> defining expression
    delta: dict  # (agent, pair, action) -> variable
    node_ids: dict


@dataclass
class Script:
    declarations: list[tuple[str, str]] = field(default_factory=list)
    assertions: list[str] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    parts: list[SkeletonPart] = field(default_factory=list)
    disjuncts: list[str] = field(default_factory=list)  # one conjunction per skeleton
    comment: str = ""

    @property
    def text(self) -> str:
        lines = [f"; {line}" for line in self.comment.splitlines()]
        lines.append("(set-logic QF_NRA)")
        lines += [f"(declare-fun {name} () {sort})" for name, sort in self.declarations]
        lines += [f"(assert {a})" for a in self.assertions]
        lines.append("(check-sat)")
        return "\n".join(lines) + "\n"

    def metadata_json(self) -> str:
        return json.dumps(self.metadata, indent=2, sort_keys=True)

    def evaluate(self, env: Mapping[str, Fraction]):
        """Exact truth value of the conjunction of all assertions."""
        vals = [evaluate(parse_sexprs(a)[0], env) for a in self.assertions]
        if any(v is False for v in vals):
            return False
        return None if any(v is None for v in vals) else True


def _sanitize(x) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", str(x))


def _body_shape(body: Formula):
    negated = isinstance(body, Not) and isinstance(body.arg, (Next, Until))
    core = body.arg if negated else body
    if isinstance(core, Next) and is_state_formula(core.arg):
        return negated, "next", [core.arg]
    if isinstance(core, Until) and is_state_formula(core.left) and is_state_formula(core.right):
        return negated, "until", [core.left, core.right]
    raise BodyNotNatPatl(f"body {to_text(body)} is not X or U over state formulas")


def _state_sets(cgs: Cgs, parts: Sequence[Formula], sat) -> list[frozenset[str]]:
    out = []
    for p in parts:
        if sat is not None and p in sat:
            out.append(frozenset(s for s, v in sat[p].items() if v))
        elif is_boolean(p):
            out.append(frozenset(s for s in cgs.states if eval_labels(p, cgs.labels[s])))
        else:
            from .checker import CheckConfig, check

            res = check(cgs, None, p, CheckConfig())
            out.append(frozenset(s for s, v in res.truth[p].items() if v))
    return out


def encode(
    cgs: Cgs,
    query: Coalition,
    vocab: Sequence[Formula],
    k: int | None = None,
    setting: str = "r",
    state: str | None = None,
    sat: Mapping | None = None,
) -> Script:
    if not isinstance(query, Coalition):
        raise BodyNotNatPatl("encode expects a coalition formula")
    if not vocab:
        raise VocabularyEmpty("empty guard vocabulary")
    negated, kind, parts = _body_shape(query.body)
    k = query.k if k is None else k
    state = state or cgs.init
    sets = _state_sets(cgs, parts, sat)
    op, d = query.cmp, Fraction(query.threshold)
    if negated:
        op, d = flip(op), 1 - d
    # opponents minimise when the (possibly flipped) comparison asks for a lower bound
    mode = "min" if op in (">=", ">") else "max"
    coalition = list(query.agents)
    per_agent = [enumerate_skeletons(a, k, setting, vocab, cgs) for a in coalition]
    script = Script(
        comment=(
            f"query: {to_text(query)} at state {state}\n"
            f"setting {setting}, complexity bound {k}; opponents {'minimise' if mode == 'min' else 'maximise'} "
            f"Pr[{'X' if kind == 'next' else 'U'}] compared with {op} {d}"
        )
    )
    script.metadata = {"query": to_text(query), "state": state, "setting": setting, "k": k, "variables": {}, "skeletons": []}
    disjuncts = []
    for j, combo in enumerate(itertools.product(*per_agent)):
        part, constraints = _encode_part(cgs, j, coalition, combo, state, kind, sets, op, d, mode, setting, script)
        script.parts.append(part)
        disjuncts.append(conj(constraints))
        script.disjuncts.append(disjuncts[-1])
        script.metadata["skeletons"].append(
            {
                "index": j,
                "agents": {
                    a: {"guards": [str(g) for g in sk.guards], "final": sk.final_action}
                    for a, sk in zip(coalition, combo)
                },
            }
        )
    script.assertions.append(disj(disjuncts))
    return script


def _encode_part(cgs, j, coalition, combo, state, kind, sets, op, d, mode, setting, script):
    declare = script.declarations
    meta = script.metadata["variables"]
    cons: list[str] = []
    free = [a for a in cgs.agents if a not in set(coalition)]
    autos = [[compile_guard(g) for g in sk.guards] if setting == "R" else [] for sk in combo]

    # pair distributions
    delta: dict = {}
    for x, sk in zip(coalition, combo):
        acts = sorted(cgs.agent_actions(x))
        for i in range(len(sk.guards)):
            names = []
            for a in acts:
                v = f"d_{j}_{_sanitize(x)}_{i}_{_sanitize(a)}"
                delta[x, i, a] = v
                names.append(v)
                declare.append((v, "Real"))
                meta[v] = {"kind": "delta", "skeleton": j, "agent": x, "pair": i, "action": a}
                cons.append(app(">=", v, "0.0"))
            cons.append(app("=", plus(names), "1.0"))

    def start_mem(s):
        return tuple(tuple(a.step(a.initial, cgs.labels[s]) for a in aa) for aa in autos)

    def step_mem(mem, t):
        return tuple(tuple(a.step(m, cgs.labels[t]) for a, m in zip(aa, mm)) for aa, mm in zip(autos, mem))

    root = (state, start_mem(state))
    nodes = [root]
    seen = {root}
    k = 0
    while k < len(nodes):
        s, mem = nodes[k]
        k += 1
        for prof in cgs.legal_profiles(s):
            for t in cgs.trans[s, prof]:
                n2 = (t, step_mem(mem, t))
                if n2 not in seen:
                    seen.add(n2)
                    nodes.append(n2)
    node_ids = {n: i for i, n in enumerate(nodes)}

    def fires(xi, i, node):
        s, mem = node
        g = combo[xi].guards[i]
        if setting == "r":
            return eval_labels(g.cond, cgs.labels[s])
        return autos[xi][i].accepts_set(mem[xi][i])

    # action probabilities r_{x,s,a,q}
    r_var: dict = {}
    r_defs: dict = {}
    chains: dict = {}
    for node in nodes:
        s, mem = node
        q = node_ids[node]
        for xi, x in enumerate(coalition):
            sk = combo[xi]
            legal = cgs.legal[s, x]
            illegal_all = sorted(cgs.agent_actions(x) - legal)
            chain = [i for i in range(len(sk.guards)) if fires(xi, i, node)]
            chains[x, node] = tuple(chain)
            names = []
            for a in sorted(legal):
                expr = num(1 if a == sk.final_action else 0)
                for i in reversed(chain):
                    mass = plus([delta[x, i, b] for b in illegal_all])
                    cond = "true" if mass == "0.0" else app("=", mass, "0.0")
                    expr = delta[x, i, a] if cond == "true" else app("ite", cond, delta[x, i, a], expr)
                v = f"r_{j}_{_sanitize(x)}_{_sanitize(s)}_{_sanitize(a)}_{q}"
                r_var[x, node, a] = v
                r_defs[v] = expr
                names.append(v)
                declare.append((v, "Real"))
                meta[v] = {
                    "kind": "r",
                    "skeleton": j,
                    "agent": x,
                    "state": s,
                    "action": a,
                    "automaton_state": q,
                    "memory": [[sorted(m) for m in mm] for mm in mem],
                }
                cons.append(app("=", v, expr))
                cons.append(app(">=", v, "0.0"))
            cons.append(app("=", plus(names), "1.0"))
    # r is shared between automaton states whose selected pairs agree
    for (x, node), chain in sorted(chains.items(), key=lambda kv: (kv[0][0], node_ids[kv[0][1]])):
        for (x2, node2), chain2 in chains.items():
            if x2 == x and node2[0] == node[0] and node_ids[node2] > node_ids[node] and chain2 == chain:
                for a in sorted(cgs.legal[node[0], x]):
                    cons.append(app("=", r_var[x, node, a], r_var[x, node2, a]))

    # transition expressions
    choices: dict = {}
    prob: dict = {}
    for node in nodes:
        s, mem = node
        free_profiles = list(itertools.product(*(sorted(cgs.legal[s, a]) for a in free)))
        choices[node] = free_profiles
        for fp in free_profiles:
            acc: dict = {}
            for coal in itertools.product(*(sorted(cgs.legal[s, x]) for x in coalition)):
                joint = {**dict(zip(coalition, coal)), **dict(zip(free, fp))}
                prof = tuple(joint[a] for a in cgs.agents)
                weight = [r_var[x, node, a] for x, a in zip(coalition, coal)]
                for t, p in cgs.trans[s, prof].items():
                    n2 = (t, step_mem(mem, t))
                    acc.setdefault(n2, []).append(times(weight + [num(p)]))
            for n2, terms in acc.items():
                prob[node, fp, n2] = plus(terms)

    safe_states = sets[0] if kind == "until" else frozenset(cgs.states)
    target_states = sets[-1]
    if kind == "next":
        for fp in choices[root]:
            succ = [e for (n, c, n2), e in prob.items() if n == root and c == fp and n2[0] in target_states]
            cons.append(app(_SMT_OP[op], plus(succ), num(d)))
    else:
        xv = {n: f"x_{j}_{node_ids[n]}" for n in nodes}
        for n in nodes:
            declare.append((xv[n], "Real"))
            meta[xv[n]] = {"kind": "value", "skeleton": j, "state": n[0], "automaton_state": node_ids[n]}
            cons.append(app(">=", xv[n], "0.0"))
            cons.append(app("<=", xv[n], "1.0"))
        if mode == "max":
            for n in nodes:
                s = n[0]
                if s in target_states:
                    cons.append(app(">=", xv[n], "1.0"))
                    continue
                if s not in safe_states:
                    continue
                for fp in choices[n]:
                    rhs = plus([times([e, xv[n2]]) for (a, c, n2), e in prob.items() if a == n and c == fp])
                    cons.append(app(">=", xv[n], rhs))
        else:
            rank = {n: f"rk_{j}_{node_ids[n]}" for n in nodes}
            for n in nodes:
                declare.append((rank[n], "Real"))
                meta[rank[n]] = {"kind": "rank", "skeleton": j, "state": n[0], "automaton_state": node_ids[n]}
            for n in nodes:
                s = n[0]
                if s in target_states:
                    continue
                if s not in safe_states:
                    cons.append(app("=", xv[n], "0.0"))
                    continue
                progress = []
                for fp in choices[n]:
                    out = [(n2, e) for (a, c, n2), e in prob.items() if a == n and c == fp]
                    rhs = plus([times([e, xv[n2]]) for n2, e in out])
                    cons.append(app("<=", xv[n], rhs))
                    progress.append(
                        disj(
                            [
                                conj([app(">", e, "0.0"), "true" if n2[0] in target_states
                                      else conj([app(">", xv[n2], "0.0"), app("<", rank[n2], rank[n])])])
                                for n2, e in out
                            ]
                        )
                    )
                cons.append(app("=>", app(">", xv[n], "0.0"), conj(progress)))
        cons.append(app(_SMT_OP[op], xv[root], num(d)))

    part = SkeletonPart(
        index=j,
        skeletons=tuple(combo),
        nodes=nodes,
        root=root,
        mode=mode,
        kind=kind,
        op=op,
        threshold=d,
        safe=frozenset(safe_states),
        target=frozenset(target_states),
        choices=choices,
        prob=prob,
        r_defs=r_defs,
        delta=delta,
        node_ids=node_ids,
    )
    return part, cons


# ---------------------------------------------------------------- witnesses


def _matches(sk: Skeleton, strat: NatStrategy) -> bool:
    guards = tuple(g for g, _ in strat.pairs[:-1])
    final = strat.pairs[-1][1]
    return guards == sk.guards and final.is_point and final.point_value() == sk.final_action


def witness_assignment(script: Script, profile: Sequence[NatStrategy]) -> dict[str, Fraction]:
    """Values for every variable of the skeleton matching ``profile``.

    Pair distributions come from the profile, action probabilities from their
    definitions, values from the exact optimum of the induced MDP, and ranks
    from attractor levels.
    """
    by_agent = {s.agent: s for s in profile}
    part = matching_part(script, profile)
    env: dict[str, Fraction] = {}
    for (x, i, a), v in part.delta.items():
        env[v] = by_agent[x].pairs[i][1][a]
    for v, expr in part.r_defs.items():
        env[v] = evaluate(parse_sexprs(expr)[0], env)
    if part.kind == "next":
        return env
    trans = {}
    for (n, c, n2), e in part.prob.items():
        p = evaluate(parse_sexprs(e)[0], env)
        if p:
            trans.setdefault((n, c), {})[n2] = trans.get((n, c), {}).get(n2, Fraction(0)) + p
    mdp = Mdp(
        tuple(part.nodes),
        part.root,
        {n: tuple(part.choices[n]) for n in part.nodes},
        {key: Distribution(v) for key, v in trans.items()},
        {n: frozenset() for n in part.nodes},
    )
    safe = [n for n in part.nodes if n[0] in part.safe]
    target = [n for n in part.nodes if n[0] in part.target]
    vals = solve_until(mdp, safe, target, part.mode).values
    for n in part.nodes:
        env[f"x_{part.index}_{part.node_ids[n]}"] = vals[n]
    if part.mode == "min":
        for n, lvl in attractor_levels(mdp, set(safe), set(target)).items():
            env[f"rk_{part.index}_{part.node_ids[n]}"] = Fraction(lvl)
    return env


def attractor_levels(mdp: Mdp, safe: set, target: set) -> dict:
    """Rank of the states forced (under every choice) to reach the target with
    positive probability; others get a rank above all of them."""
    level = {s: 0 for s in target}
    k = 0
    while True:
        k += 1
        new = [
            s
            for s in mdp.states
            if s not in level
            and s in safe
            and all(any(t in level for t in mdp.trans[s, c]) for c in mdp.choices[s])
        ]
        if not new:
            break
        for s in new:
            level[s] = k
    for s in mdp.states:
        level.setdefault(s, k + 1)
    return level


def matching_part(script: Script, profile: Sequence[NatStrategy]) -> SkeletonPart:
    by_agent = {s.agent: s for s in profile}
    for part in script.parts:
        agents = list(script.metadata["skeletons"][part.index]["agents"])
        if all(a in by_agent and _matches(sk, by_agent[a]) for a, sk in zip(agents, part.skeletons)):
            return part
    raise ValueError("no skeleton of the script matches the given profile")


def check_witness(script: Script, profile: Sequence[NatStrategy]) -> bool:
    """Evaluate the matching skeleton's constraints under the witness values."""
    env = witness_assignment(script, profile)
    part = matching_part(script, profile)
    value = evaluate(parse_sexprs(script.disjuncts[part.index])[0], env)
    if value is None:
        raise ValueError("witness assignment leaves variables unbound")
    return value


# ---------------------------------------------------------------- bound propagation


def _interval(expr, bounds: Mapping[str, tuple[Fraction, Fraction]]):
    """Interval value of an arithmetic expression, or three-valued truth."""
    if isinstance(expr, str):
        v = _atom_value(expr, {})
        if isinstance(v, bool):
            return v
        if v is not None:
            return (v, v)
        return bounds.get(expr, (None, None))
    op, args = expr[0], expr[1:]
    if op in ("and", "or", "not", "=>"):
        vals = [_interval(a, bounds) for a in args]
        if op == "and":
            return False if any(v is False for v in vals) else (True if all(v is True for v in vals) else None)
        if op == "or":
            return True if any(v is True for v in vals) else (False if all(v is False for v in vals) else None)
        if op == "not":
            return None if vals[0] is None else not vals[0]
        a, b = vals
        if a is False or b is True:
            return True
        return False if (a is True and b is False) else None
    if op == "ite":
        t, e = _interval(args[1], bounds), _interval(args[2], bounds)
        if None in (t[0], t[1], e[0], e[1]):
            return (None, None)
        return (min(t[0], e[0]), max(t[1], e[1]))
    vals = [_interval(a, bounds) for a in args]
    if any(v[0] is None or v[1] is None for v in vals):
        return None if op in ("=", "<", "<=", ">", ">=") else (None, None)
    if op == "+":
        return (sum((v[0] for v in vals), Fraction(0)), sum((v[1] for v in vals), Fraction(0)))
    if op == "-":
        if len(vals) == 1:
            return (-vals[0][1], -vals[0][0])
        lo = vals[0][0] - sum((v[1] for v in vals[1:]), Fraction(0))
        hi = vals[0][1] - sum((v[0] for v in vals[1:]), Fraction(0))
        return (lo, hi)
    if op == "*":
        lo, hi = Fraction(1), Fraction(1)
        for a, b in vals:
            cands = [lo * a, lo * b, hi * a, hi * b]
            lo, hi = min(cands), max(cands)
        return (lo, hi)
    if op == "/":
        (a, b), (c, e) = vals
        if c <= 0 <= e:
            return (None, None)
        cands = [a / c, a / e, b / c, b / e]
        return (min(cands), max(cands))
    (a_lo, a_hi), (b_lo, b_hi) = vals[0], vals[1]
    if op == "=":
        return False if a_hi < b_lo or b_hi < a_lo else None
    if op == "<":
        return True if a_hi < b_lo else (False if a_lo >= b_hi else None)
    if op == "<=":
        return True if a_hi <= b_lo else (False if a_lo > b_hi else None)
    if op == ">":
        return True if a_lo > b_hi else (False if a_hi <= b_lo else None)
    if op == ">=":
        return True if a_lo >= b_hi else (False if a_hi < b_lo else None)
    raise ValueError(op)


def propagate_unsat(script: Script) -> bool:
    """Sound but incomplete: True means the script is unsatisfiable.

    Probability-like variables range over [0, 1]; ranks are unbounded.
    """
    base = {
        name: (Fraction(0), Fraction(1))
        for name, _ in script.declarations
        if not name.startswith("rk_")
    }
    return all(_disjunct_unsat(parse_sexprs(d)[0], dict(base)) for d in script.disjuncts)


def _disjunct_unsat(expr, bounds: dict) -> bool:
    conjuncts = expr[1:] if isinstance(expr, list) and expr[0] == "and" else [expr]
    for _ in range(len(conjuncts) + 1):
        changed = False
        for c in conjuncts:
            if not (isinstance(c, list) and c[0] in ("=", ">=", "<=") and isinstance(c[1], str) and c[1] in bounds):
                continue
            iv = _interval(c[2], bounds)
            if not isinstance(iv, tuple) or iv[0] is None or iv[1] is None:
                continue
            lo, hi = bounds[c[1]]
            if c[0] in ("=", ">="):
                lo = max(lo, iv[0])
            if c[0] in ("=", "<="):
                hi = min(hi, iv[1])
            if lo > hi:
                return True
            if (lo, hi) != bounds[c[1]]:
                bounds[c[1]] = (lo, hi)
                changed = True
        if not changed:
            break
    return any(_interval(c, bounds) is False for c in conjuncts)


def dirac_assignments(script: Script, part: SkeletonPart):
    """All Dirac choices for the pair distributions of one skeleton."""
    groups: dict = {}
    for (x, i, a), v in part.delta.items():
        groups.setdefault((x, i), []).append(v)
    keys = sorted(groups)
    for pick in itertools.product(*(groups[k] for k in keys)):
        env = {v: Fraction(0) for vs in groups.values() for v in vs}
        for v in pick:
            env[v] = Fraction(1)
        yield env
