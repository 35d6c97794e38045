import random
from fractions import Fraction

import pytest

from natpatl.cgs import History
from natpatl.models import load, load_strategy
from natpatl.natstrat import strategy
from natpatl.product import (
    MemoryVector,
    MissingAgentStrategy,
    StrategyAgentMismatch,
    export_mdp,
    fix_all,
    fix_coalition,
)

MAZE = load("maze.cgs")
VOTING = load("voting.cgs")
COIN = load("coin.cgs")
OPENALL = load_strategy("maze_openall.nstrat")


def test_memoryless_product_keeps_state_space():
    mdp = fix_coalition(MAZE, ["C"], {"C": OPENALL})
    assert {s for s, _ in mdp.states} == set(MAZE.states)
    assert len(mdp.states) == len(MAZE.states)
    for node in mdp.states:
        s, _ = node
        assert set(mdp.choices[node]) == {("open",), ("close",)}
        for c in mdp.choices[node]:
            expect = MAZE.trans[s, ("openall",) + c]
            got = {t: p for (t, _), p in mdp.trans[node, c].items()}
            assert got == dict(expect)


def test_rooted_product_reaches_from_init():
    mdp = fix_coalition(MAZE, ["C"], {"C": OPENALL}, initial="M")
    assert mdp.init == ("M", ((),)) or mdp.init[0] == "M"
    assert mdp.states[0] == mdp.init


def test_fix_all_gives_a_chain():
    chain = fix_all(COIN, {"a": strategy("a", "r", ("T", "toss"))}, "s0")
    assert chain.trans[chain.init] == {("sH", ((),)): Fraction(1, 2), ("sT", ((),)): Fraction(1, 2)}
    assert len(chain.states) == 3


def test_recall_memory_tracks_histories():
    coercer = load_strategy("coercer.nstrat")
    voter = load_strategy("voter.nstrat")
    chain = fix_all(VOTING, {"v": voter, "c": coercer}, "v0c0")
    rng = random.Random(3)
    for _ in range(40):
        node = chain.init
        states = [node[0]]
        for _ in range(8):
            dist = chain.trans[node]
            node = rng.choices(list(dist), weights=[float(p) for p in dist.values()])[0]
            states.append(node[0])
            mem_c = node[1][list(VOTING.agents).index("c")]
            assert mem_c == coercer.memory_after(History(tuple(states)), VOTING)


def test_memory_vector_agrees_with_strategy():
    coercer = load_strategy("coercer.nstrat")
    mv = MemoryVector.initial(coercer.automata)
    mem = coercer.initial_memory()
    for s in ("v0c0", "v1c1", "v1c2", "v5c2"):
        mv = mv.update(VOTING.labels[s])
        mem = coercer.step_memory(mem, VOTING.labels[s])
        assert mv.sets == mem
    assert mv.accepting()[-1]


def test_profile_errors():
    with pytest.raises(MissingAgentStrategy):
        fix_coalition(MAZE, ["C"], {})
    with pytest.raises(StrategyAgentMismatch):
        fix_coalition(MAZE, ["C"], {"C": load_strategy("maze_env_open.nstrat")})
    with pytest.raises(StrategyAgentMismatch):
        fix_coalition(MAZE, ["C"], {"C": OPENALL, "E": load_strategy("maze_env_open.nstrat")})
    with pytest.raises(MissingAgentStrategy):
        fix_all(MAZE, {"C": OPENALL})


def test_export_format():
    text = export_mdp(fix_coalition(COIN, ["a"], {"a": strategy("a", "r", ("T", "toss"))}, "s0"))
    lines = text.splitlines()
    assert lines[0] == "states 3"
    assert lines[1] == "init 0"
    assert "state 0 s0 {}" in lines
    assert "0 - 1 1/2" in lines and "0 - 2 1/2" in lines
