"""Shipped example models and strategies, plus the generators that wrote them."""

from __future__ import annotations

from fractions import Fraction
from importlib import resources
from pathlib import Path

MODEL_DIR = Path(str(resources.files(__name__)))


def path(name: str) -> Path:
    return MODEL_DIR / name


def load(name: str):
    from ..dsl import load_model

    return load_model(path(name))


def load_strategy(name: str):
    from ..natstrat import parse_strategy

    return parse_strategy(path(name).read_text())


def _frac(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator}" if p.denominator != 1 else str(p.numerator)


# ---------------------------------------------------------------- maze

MAZE_TILES = {
    "A": (0, 2), "B": (1, 2), "C": (2, 2),
    "L": (0, 1), "M": (1, 1), "R": (2, 1),
    "LL": (0, 0), "D": (1, 0), "DR": (2, 0),
}
MAZE_COALITION_DOORS = [("L", "M"), ("B", "C"), ("L", "A"), ("R", "C"), ("D", "M"), ("DR", "R"), ("D", "DR")]
MAZE_ENV_DOORS = [("A", "B"), ("M", "B"), ("M", "R"), ("LL", "L")]
LEFT_DOOR = ("L", "M")


def maze_text() -> str:
    lines = [
        "# Robot maze on a 3x3 grid (row 2 is the top row):",
        "#",
        "#     A(t0)  B(t1)  C",
        "#     L      M      R        robot starts in M",
        "#     LL     D      DR",
        "#",
        "# Doors of the controller C: "
        + ", ".join(f"{a}|{b}" for a, b in MAZE_COALITION_DOORS)
        + f" (the left door is {LEFT_DOOR[0]}|{LEFT_DOOR[1]}).",
        "#   openall opens all of them; closeleft closes the left door only.",
        "# Doors of the environment E: "
        + ", ".join(f"{a}|{b}" for a, b in MAZE_ENV_DOORS)
        + "; open/close acts on all of them at once.",
        "# LL|D is a wall; tiles not listed as neighbours above are not connected.",
        "# Each step the robot moves to a uniformly chosen neighbour behind an open",
        "# door and stays put when every door around it is closed.",
        "agents C E",
        "props t0 t1",
        "actions openall closeleft open close",
    ]
    labels = {"A": "t0", "B": "t1"}
    for s in MAZE_TILES:
        lines.append(f"state {s} {{{labels.get(s, '')}}}")
    lines += ["legal * C {openall, closeleft}", "legal * E {open, close}"]
    for s in MAZE_TILES:
        for ca in ("openall", "closeleft"):
            for ea in ("open", "close"):
                doors = [d for d in MAZE_COALITION_DOORS if not (ca == "closeleft" and d == LEFT_DOOR)]
                if ea == "open":
                    doors += MAZE_ENV_DOORS
                nbrs = [t for t in MAZE_TILES if (s, t) in doors or (t, s) in doors] or [s]
                p = Fraction(1, len(nbrs))
                body = ", ".join(f"{t}: {_frac(p)}" for t in nbrs)
                lines.append(f"trans {s} ({ca}, {ea}) -> {{{body}}}")
    lines.append("init M")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- voting

VOTER_PHASES = [
    ("hasBallot_v",),
    ("hasBallot_v", "scanned_v"),
    ("entVote_v_s",),
    ("entVote_v_s", "sigOk_s"),
    ("entVote_v_s", "sigFail_s"),
    ("vot_v", "rec_v_r"),
    ("vot_v", "rec_v_r", "shreded_r"),
]
COERCER_STATUS = [(), ("coerced_v",), ("coerced_v", "requested_v"), ("coerced_v", "requested_v", "punished_v")]


def _voter_moves(phase: int, fail: Fraction) -> dict[str, dict[int, Fraction]]:
    ok = 1 - fail

    def attempt(target: int) -> dict[int, Fraction]:
        return {target: ok, phase: fail} if fail else {target: Fraction(1)}

    moves = {"noop": {phase: Fraction(1)}}
    if phase == 0:
        moves["scanBallot"] = attempt(1)
    elif phase == 1:
        moves["enterVote"] = attempt(2)
    elif phase == 2:
        # the signature check itself reports a mismatch with probability `fail`
        moves["checkSig_s"] = {3: ok, 4: fail} if fail else {3: Fraction(1)}
    elif phase == 3:
        moves["conf"] = attempt(5)
        moves["cnlVote"] = attempt(1)
    elif phase == 4:
        moves["cnlVote"] = attempt(1)
    elif phase == 5:
        moves["shred_r"] = attempt(6)
    return moves


def _coercer_moves(status: int, fail: Fraction) -> dict[str, dict[int, Fraction]]:
    ok = 1 - fail
    moves = {"noop": {status: Fraction(1)}}
    name = {0: "coerce_v", 1: "request_v", 2: "punish_v"}.get(status)
    if name:
        moves[name] = {status + 1: ok, status: fail} if fail else {status + 1: Fraction(1)}
    return moves


def voting_text(fail: Fraction = Fraction(1, 10)) -> str:
    fail = Fraction(fail)
    props = sorted({p for ph in VOTER_PHASES for p in ph} | {p for st in COERCER_STATUS for p in st})
    lines = [
        "# Secure voting with one voter v (signature s, receipt r) and one coercer c.",
        "# State v<i>c<j>: voter phase i, coercer status j.",
        "#   voter phases: 0 ballot, 1 scanned, 2 vote entered, 3 signature ok,",
        "#                 4 signature failed, 5 voted with receipt, 6 receipt shredded",
        "#   coercer status (cumulative): 0 none, 1 coerced, 2 requested, 3 punished",
        f"# Every non-noop action fails (leaves its component unchanged) with probability {_frac(fail)};",
        "# a signature check reports a mismatch with the same probability.",
        "# Regenerate with natpatl.models.voting_text(fail).",
        "agents v c",
        "props " + " ".join(props),
        "actions scanBallot enterVote checkSig_s conf cnlVote shred_r coerce_v request_v punish_v noop",
    ]
    name = lambda i, j: f"v{i}c{j}"  # noqa: E731
    for i, ph in enumerate(VOTER_PHASES):
        for j, st in enumerate(COERCER_STATUS):
            lines.append(f"state {name(i, j)} {{{', '.join(sorted(ph + st))}}}")
    for i in range(len(VOTER_PHASES)):
        for j in range(len(COERCER_STATUS)):
            vm, cm = _voter_moves(i, fail), _coercer_moves(j, fail)
            lines.append(f"legal {name(i, j)} v {{{', '.join(sorted(vm))}}}")
            lines.append(f"legal {name(i, j)} c {{{', '.join(sorted(cm))}}}")
    for i in range(len(VOTER_PHASES)):
        for j in range(len(COERCER_STATUS)):
            vm, cm = _voter_moves(i, fail), _coercer_moves(j, fail)
            for va in sorted(vm):
                for ca in sorted(cm):
                    out = {}
                    for i2, p in vm[va].items():
                        for j2, q in cm[ca].items():
                            out[name(i2, j2)] = out.get(name(i2, j2), Fraction(0)) + p * q
                    body = ", ".join(f"{t}: {_frac(p)}" for t, p in sorted(out.items()))
                    lines.append(f"trans {name(i, j)} ({va}, {ca}) -> {{{body}}}")
    lines.append("init v0c0")
    return "\n".join(lines) + "\n"
