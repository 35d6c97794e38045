import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_force, random_cgs, random_state_formula
from natpatl.cgs import Distribution
from natpatl.checker import (
    CheckConfig,
    NotPositiveFragment,
    UnknownVerdict,
    check,
    check_positive_np_path,
    verify_witness,
)
from natpatl.dsl import parse_model
from natpatl.logic import Coalition, Top, parse_formula
from natpatl.models import load, load_strategy
from natpatl.natstrat import inline_strategy
from natpatl.probsolve import Interval, solve_until
from natpatl.product import fix_coalition

COIN = load("coin.cgs")
MAZE = load("maze.cgs")
VOTING = load("voting.cgs")
MINTERMS = CheckConfig(setting="r", vocab="minterms")


def test_coin_threshold():
    f = parse_formula("<<a>>[>=1/2,k=1] F heads")
    res = check(COIN, None, f)
    assert res.verdict is True and res.holds()
    w = res.witnesses["s0", f]
    assert [inline_strategy(s) for s in w.profile] == ["(T -> toss)"]
    assert w.probability == Fraction(1, 2)
    assert check(COIN, None, parse_formula("<<a>>[>1/2,k=1] F heads")).verdict is False


def test_coin_recurrence_goes_through_automata():
    f = parse_formula("<<a>>[>=1/2,k=1] G F heads")
    res = check(COIN, None, f)
    assert res.stats["fragment"] == "NatPATLstar"
    assert res.verdict is True
    assert res.witnesses["s0", f].probability == Fraction(1, 2)


def test_maze_claims():
    def min_reach(strat_file, prop):
        mdp = fix_coalition(MAZE, ["C"], {"C": load_strategy(strat_file)}, "M")
        target = [n for n in mdp.states if prop in mdp.labels[n]]
        return solve_until(mdp, mdp.states, target, "min").values[mdp.init]

    assert min_reach("maze_openall.nstrat", "t0") == Fraction(1, 2)
    assert min_reach("maze_closeleft.nstrat", "t1") == 1


@pytest.mark.parametrize("setting", ["r", "R"])
def test_maze_recurrence_formula_is_false(setting):
    f = parse_formula("<<C>>[>=7/10,k=4] G (F t0 & F t1)", MAZE.agents)
    res = check(MAZE, None, f, CheckConfig(setting=setting))
    assert res.verdict is False
    assert res.values["M", f] == 0


def test_voter_verifiability():
    vocab = CheckConfig(vocab=(Top(),))
    f3 = parse_formula("<<v>>[>=0.9,k=3] F (sigOk_s | sigFail_s)", VOTING.agents)
    f4 = parse_formula("<<v>>[>=0.9,k=4] F (sigOk_s | sigFail_s)", VOTING.agents)
    assert check(VOTING, None, f3, vocab).verdict is False
    res = check(VOTING, None, f4, vocab)
    assert res.verdict is True
    w = res.witnesses["v0c0", f4]
    assert inline_strategy(w.profile[0]) == "(T -> checkSig_s) (T -> enterVote) (T -> scanBallot) (T -> noop)"
    assert w.probability == 1


def test_receipt_freeness_fails_once_the_voter_can_keep_a_receipt():
    vocab = CheckConfig(vocab=(Top(),))
    text = "!<<v>>[>=0.5,k={}] F (rec_v_r & !shreded_r)"
    assert check(VOTING, None, parse_formula(text.format(4), VOTING.agents), vocab).verdict is True
    assert check(VOTING, None, parse_formula(text.format(5), VOTING.agents), vocab).verdict is False


def test_shipped_profile_probability():
    voter, coercer = load_strategy("voter.nstrat"), load_strategy("coercer.nstrat")
    mdp = fix_coalition(VOTING, ["v", "c"], {"v": voter, "c": coercer}, "v0c0")
    target = [n for n in mdp.states if "vot_v" in mdp.labels[n]]
    assert solve_until(mdp, mdp.states, target, "min").values[mdp.init] == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    cgs = random_cgs(rng)
    f = random_state_formula(rng, 2)
    res = check(cgs, None, f, MINTERMS)
    assert {s for s in cgs.states if res.truth[f][s]} == brute_force(cgs, f)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_complexity_bound_is_monotone(seed):
    rng = random.Random(seed)
    cgs = random_cgs(rng)
    f = random_state_formula(rng, 1)
    while not isinstance(f, Coalition):
        f = random_state_formula(rng, 1)
    for k in (1, 2, 3):
        lo = check(cgs, None, Coalition(f.agents, f.cmp, f.threshold, k, f.body), MINTERMS)
        hi = check(cgs, None, Coalition(f.agents, f.cmp, f.threshold, k + 1, f.body), MINTERMS)
        for s in cgs.states:
            assert not lo.truth[lo.formula][s] or hi.truth[hi.formula][s]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_witnesses_re_solve(seed):
    rng = random.Random(seed)
    cgs = random_cgs(rng)
    f = random_state_formula(rng, 2)
    res = check(cgs, None, f, MINTERMS)
    for (s, g), w in res.witnesses.items():
        p, verdict = verify_witness(cgs, s, g, w, MINTERMS)
        assert p == w.probability and verdict is True


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_positive_route_agrees(seed):
    rng = random.Random(seed)
    cgs = random_cgs(rng)
    f = random_state_formula(rng, 2, positive=True)
    a = check(cgs, None, f, MINTERMS)
    b = check_positive_np_path(cgs, None, f, MINTERMS)
    assert a.truth[f] == b.truth[f]


def test_positive_route_rejects_negation():
    with pytest.raises(NotPositiveFragment):
        check_positive_np_path(COIN, None, parse_formula("!<<a>>[>=1/2,k=1] F heads"))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_bounded_opponents_are_no_stronger(seed):
    rng = random.Random(seed)
    cgs = random_cgs(rng)
    f = random_state_formula(rng, 1)
    if not isinstance(f, Coalition):
        return
    mdp = check(cgs, None, f, MINTERMS)
    enum = check(cgs, None, f, CheckConfig(vocab="minterms", opponent="enumerate:3"))
    for s in cgs.states:
        if mdp.truth[f][s] and f.cmp in (">=", ">"):
            assert enum.truth[f][s]


THIRD = parse_model(
    """agents a
props goal
actions go
state s {}
state g {goal}
state d {}
legal * a {go}
trans s (go) -> {s: 1/4, g: 1/4, d: 1/2}
trans g (go) -> {g: 1}
trans d (go) -> {d: 1}
init s
"""
)


def test_iterative_mode_brackets_and_reports_unknown():
    cfg = CheckConfig(solve="iter:1/1000000")
    on_edge = parse_formula("<<a>>[>=1/3,k=1] F goal")
    res = check(THIRD, None, on_edge, cfg)
    assert res.verdict is None
    assert isinstance(res.values["s", on_edge], Interval)
    assert Fraction(1, 3) in res.values["s", on_edge]
    with pytest.raises(UnknownVerdict):
        res.holds()
    assert check(THIRD, None, parse_formula("<<a>>[>=3/10,k=1] F goal"), cfg).verdict is True
    assert check(THIRD, None, parse_formula("<<a>>[>=1/3,k=1] F goal")).verdict is True


def test_nested_unknown_propagates():
    cfg = CheckConfig(solve="iter:1/1000000")
    f = parse_formula("<<a>>[>=1/2,k=1] X <<a>>[>=1/3,k=1] F goal")
    res = check(THIRD, None, f, cfg)
    assert res.verdict is None


def test_distribution_of_witness_is_dirac():
    res = check(COIN, None, parse_formula("<<a>>[>=1/2,k=1] F heads"))
    for w in res.witnesses.values():
        for strat in w.profile:
            assert all(isinstance(d, Distribution) and d.is_point for _, d in strat.pairs)
