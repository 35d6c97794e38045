import itertools
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from natpatl.cgs import History
from natpatl.dsl import parse_model
from natpatl.logic import And, Atom, Not, Top, eval_labels
from natpatl.models import load, load_strategy
from natpatl.natstrat import (
    TOP,
    TOP_STAR,
    Alt,
    Cat,
    InvalidStrategy,
    NatStrategy,
    Star,
    Sym,
    act,
    alt,
    canonical,
    cat,
    compile_guard,
    complexity,
    consistent,
    enumerate_det,
    format_strategy,
    inline_strategy,
    literal_vocab,
    match_index,
    parse_regex,
    parse_strategy,
    regex_text,
    strategy,
    subsumed,
    validate_strategy,
)
from natpatl.cgs import Distribution

VALUATIONS = [frozenset(), frozenset({"p"}), frozenset({"q"}), frozenset({"p", "q"})]


def in_language(r, word: tuple) -> bool:
    """Direct word-matching semantics of a guard regex."""

    @lru_cache(maxsize=None)
    def m(e, i: int, j: int) -> bool:
        if isinstance(e, Sym):
            return j == i + 1 and eval_labels(e.cond, word[i])
        if isinstance(e, Alt):
            return any(m(o, i, j) for o in e.options)
        if isinstance(e, Cat):
            first, rest = e.parts[0], e.parts[1:]
            if not rest:
                return m(first, i, j)
            tail = Cat(rest) if len(rest) > 1 else rest[0]
            return any(m(first, i, x) and m(tail, x, j) for x in range(i, j + 1))
        if isinstance(e, Star):
            if i == j:
                return True
            return any(m(e.arg, i, x) and m(e, x, j) for x in range(i + 1, j + 1))
        raise TypeError(e)

    return m(r, 0, len(word))


conditions = st.sampled_from([Atom("p"), Atom("q"), Not(Atom("p")), Top(), And(Atom("p"), Not(Atom("q")))])
regexes = st.recursive(
    conditions.map(Sym),
    lambda ch: st.one_of(
        st.lists(ch, min_size=2, max_size=3).map(lambda xs: cat(*xs)),
        st.lists(ch, min_size=2, max_size=3).map(lambda xs: alt(*xs)),
        ch.map(Star),
    ),
    max_leaves=5,
)

WORDS = [w for n in range(1, 5) for w in itertools.product(VALUATIONS, repeat=n)]


@settings(max_examples=150, deadline=None)
@given(regexes)
def test_automaton_matches_word_semantics(r):
    nfa = compile_guard(r)
    for w in WORDS:
        assert nfa.accepts(w) == in_language(r, w), (regex_text(r), w)


@settings(max_examples=150, deadline=None)
@given(regexes)
def test_automaton_size_bound(r):
    assert compile_guard(r).n_states <= 2 * r.size()


@settings(max_examples=200, deadline=None)
@given(regexes)
def test_regex_text_round_trip(r):
    assert parse_regex(regex_text(r)) == r


@settings(max_examples=100, deadline=None)
@given(regexes)
def test_canonical_form_keeps_language(r):
    c = canonical(r)
    assert c.size() <= r.size()
    for w in WORDS[:84]:
        assert in_language(c, w) == in_language(r, w)


def test_small_automata():
    top_star = compile_guard(TOP_STAR)
    assert top_star.n_states == 1 and top_star.accepting == top_star.initial
    p = compile_guard(Sym(Atom("p")))
    assert p.n_states == 2
    assert p.accepts([frozenset({"p"})]) and not p.accepts([frozenset({"p"})] * 2)
    assert not p.accepts([frozenset()])


TWO = parse_model(
    """agents x
props p q requested
actions a b
state s0 {}
state s1 {p}
state s2 {requested}
legal * x {a, b}
trans s0 (a) -> {s1: 1/2, s2: 1/2}
trans s0 (b) -> {s0: 1}
trans s1 (a) -> {s0: 1}
trans s1 (b) -> {s2: 1}
trans s2 (a) -> {s0: 1/2, s2: 1/2}
trans s2 (b) -> {s1: 1}
init s0
"""
)


def histories(cgs, max_len: int):
    out = [History((s,)) for s in cgs.states]
    frontier = list(out)
    for _ in range(max_len - 1):
        frontier = [h.extend(t) for h in frontier for t in cgs.states]
        out += frontier
    return out


def test_consistency_examples():
    assert consistent(History(("s1",)), parse_regex("p"), TWO)
    assert not consistent(History(("s1", "s1")), parse_regex("p"), TWO)
    assert consistent(History(("s0", "s0", "s2")), parse_regex("T* . requested"), TWO)
    last_p = parse_regex("T* . p")
    for h in histories(TWO, 3):
        assert consistent(h, last_p, TWO) == ("p" in TWO.labels[h.last])


def test_consistency_on_model_histories():
    guards = ["T* . p", "(p | q)* . !p", "T . T* . requested", "(T . T)*", "!p*", "p . T* . requested"]
    for text in guards:
        r = parse_regex(text)
        for h in histories(TWO, 4):
            word = tuple(TWO.labels[s] for s in h.states)
            assert consistent(h, r, TWO) == in_language(r, word), (text, h)


# ---------------------------------------------------------------- complexity


def test_complexity_counts_symbols():
    assert complexity(strategy("v", "r", ("T", "noop"))) == 1
    assert complexity(strategy("v", "r", ("hasBallot & !scanned", "scan"), ("T", "noop"))) == 5
    assert parse_regex("T* . p").size() == 4
    assert parse_regex("(p | q)*").size() == 4


def test_example_strategies():
    voter = load_strategy("voter.nstrat")
    coercer = load_strategy("coercer.nstrat")
    assert voter.setting == "r" and coercer.setting == "R"
    assert voter.size == 7 and coercer.size == 4
    assert coercer.pairs[2][0].size() == 15
    assert complexity(voter) == 36
    assert complexity(coercer) == 29


# ---------------------------------------------------------------- matching

VOTING = load("voting.cgs")
VOTER = load_strategy("voter.nstrat")
COERCER = load_strategy("coercer.nstrat")


@pytest.mark.parametrize(
    "state,index,action",
    [
        ("v0c0", 1, "scanBallot"),
        ("v1c0", 2, "enterVote"),
        ("v2c1", 3, "checkSig_s"),
        ("v4c0", 4, "cnlVote"),
        ("v3c2", 5, "conf"),
        ("v5c0", 6, "shred_r"),
        ("v6c3", 7, "noop"),
    ],
)
def test_voter_guards(state, index, action):
    h = History((state,))
    assert match_index(h, VOTER, VOTING) == index
    assert act(VOTER, h, VOTING).point_value() == action


@pytest.mark.parametrize(
    "states,index,action",
    [
        (("v0c0",), 1, "coerce_v"),
        (("v0c0", "v1c1"), 2, "request_v"),
        (("v0c0", "v1c1", "v1c2"), 3, "punish_v"),
        (("v0c0", "v1c1", "v1c2", "v2c3"), 4, "noop"),
    ],
)
def test_coercer_guards(states, index, action):
    h = History(states)
    assert match_index(h, COERCER, VOTING) == index
    assert act(COERCER, h, VOTING).point_value() == action


def test_fallback_is_last_pair():
    s = strategy("x", "r", ("p", "a"), ("q", "b"), ("T", "a"))
    assert match_index(History(("s0",)), s, TWO) == 3


def test_pairs_fire_only_where_available():
    coin = load("coin.cgs")
    s = strategy("a", "r", ("T", "noop"), ("T", "toss"))
    assert act(s, History(("s0",)), coin).point_value() == "noop"
    assert act(s, History(("s0", "sH")), coin).point_value() == "toss"


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(regexes, st.sampled_from("ab")), min_size=0, max_size=3), st.sampled_from("ab"))
def test_prepending_a_dead_pair_shifts_indices(pairs, final):
    body = [(g, Distribution.point(a)) for g, a in pairs]
    s = NatStrategy("x", "R", tuple(body) + ((TOP_STAR, Distribution.point(final)),))
    dead = (Sym(And(Atom("p"), Not(Atom("p")))), Distribution.point("a"))
    s2 = NatStrategy("x", "R", (dead,) + s.pairs)
    for h in histories(TWO, 3):
        assert match_index(h, s2, TWO) == match_index(h, s, TWO) + 1
        assert act(s2, h, TWO) == act(s, h, TWO)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(conditions, st.sampled_from("ab")), max_size=3), st.sampled_from("ab"))
def test_memoryless_choice_depends_on_last_labels(pairs, final):
    s = NatStrategy("x", "r", tuple((Sym(c), Distribution.point(a)) for c, a in pairs) + ((TOP, Distribution.point(final)),))
    hs = histories(TWO, 3)
    for h in hs:
        d = act(s, h, TWO)
        assert d.is_point
        assert d == act(s, History((h.last,)), TWO)


# ---------------------------------------------------------------- formatting


def test_strategy_round_trip():
    for s in (VOTER, COERCER):
        again = parse_strategy(format_strategy(s))
        assert again == s
    mixed = parse_strategy("agent x\nsetting R\nT* . p -> {a: 1/3, b: 2/3}\nT* -> a\n")
    assert not mixed.deterministic
    assert inline_strategy(mixed) == "(T* . p -> {a: 1/3, b: 2/3}) (T* -> a)"


def test_invalid_strategies():
    with pytest.raises(InvalidStrategy):
        NatStrategy("x", "r", ())
    with pytest.raises(InvalidStrategy):
        strategy("x", "r", ("T* . p", "a"), ("T", "b"))
    with pytest.raises(InvalidStrategy):
        validate_strategy(strategy("x", "r", ("p", "a")), TWO)
    with pytest.raises(InvalidStrategy):
        validate_strategy(strategy("z", "r", ("T", "a")), TWO)


def test_coercer_lint():
    warnings = validate_strategy(COERCER, VOTING)
    assert validate_strategy(VOTER, VOTING) == []
    assert len(warnings) == 1 and "3" in warnings[0]


# ---------------------------------------------------------------- enumeration

AB = parse_model(
    """agents x
props p
actions a b
state s {p}
state t {}
legal * x {a, b}
trans s (a) -> {t: 1}
trans s (b) -> {s: 1}
trans t (a) -> {s: 1}
trans t (b) -> {t: 1}
init s
"""
)


def test_enumeration_golden_count():
    found = list(enumerate_det("x", 2, "r", (Atom("p"),), AB))
    texts = [inline_strategy(s) for s in found]
    assert len(found) == 6
    assert "(p -> a) (T -> b)" in texts
    assert all(complexity(s) <= 2 for s in found)


def test_enumeration_trivial_budget():
    found = list(enumerate_det("x", 1, "r", (Top(),), AB))
    assert [inline_strategy(s) for s in found] == ["(T -> a)", "(T -> b)"]


def test_enumeration_recall_includes_last_state_guard():
    found = list(enumerate_det("x", 6, "R", (Top(), Atom("p")), AB))
    assert any(s.pairs[0][0] == parse_regex("T* . p") for s in found)
    assert all(complexity(s) <= 6 for s in found)


@pytest.mark.parametrize("setting,k", [("r", 1), ("r", 3), ("r", 4), ("R", 2), ("R", 4), ("R", 5)])
def test_enumeration_is_sorted_and_duplicate_free(setting, k):
    found = list(enumerate_det("x", k, setting, literal_vocab(TWO), TWO))
    keys = [(complexity(s), inline_strategy(s)) for s in found]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)
    assert all(c <= k for c, _ in keys)
    for s in found:
        validate_strategy(s, TWO)
        assert s.deterministic


def test_enumeration_covers_brute_force_behaviours():
    """Every memoryless behaviour within budget appears in the pruned stream."""
    vocab = literal_vocab(TWO)
    lits = [c for c in vocab if not isinstance(c, Top)]
    pool = [Sym(c) for c in lits] + [TOP]
    expect = set()
    for n in range(0, 3):
        for guards in itertools.product(pool, repeat=n):
            if sum(g.size() for g in guards) > 2:
                continue
            for acts in itertools.product("ab", repeat=n + 1):
                s = NatStrategy("x", "r", tuple((g, Distribution.point(a)) for g, a in zip(guards + (TOP,), acts)))
                expect.add(tuple(act(s, History((q,)), TWO).point_value() for q in TWO.states))
    got = {tuple(act(s, History((q,)), TWO).point_value() for q in TWO.states) for s in enumerate_det("x", 3, "r", vocab, TWO)}
    assert got == expect


def test_subsumption():
    p, np = Sym(Atom("p")), Sym(Not(Atom("p")))
    assert subsumed(TOP, [p, np], "r")
    assert not subsumed(TOP, [p], "r")
    assert subsumed(parse_regex("T* . p"), [TOP_STAR], "R")
    assert not subsumed(TOP_STAR, [parse_regex("T* . p")], "R")
