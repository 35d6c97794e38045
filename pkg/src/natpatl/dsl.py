"""Text formats: game models (.cgs), formula lists (.nf) and guard vocabularies.

Model syntax, one statement per line, ``#`` starts a comment::

    agents a b
    props p q
    actions go stay noop
    state s0 {p}
    legal s0 a {go, noop}        # '*' as state applies to every state
    trans s0 (go, noop) -> {s1: 1/2, s0: 1/2}
    init s0

Probabilities are written as exact fractions (``1/3``) or integers; decimal
notation is rejected so that models stay exact.
"""

from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

from .cgs import Cgs, ModelError, RawModel, validate_cgs
from .logic import Formula, parse_bool, parse_formula

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_FRACTION = re.compile(r"^\d+(/\d+)?$")


class DslError(ModelError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _names(text: str, line: int) -> list[str]:
    out = [x for x in re.split(r"[\s,]+", text.strip()) if x]
    for x in out:
        if not re.fullmatch(_IDENT, x):
            raise DslError(f"bad identifier {x!r}", line)
    return out


def _braced(text: str, line: int) -> str:
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise DslError(f"expected '{{ ... }}', got {text!r}", line)
    return text[1:-1]


def parse_fraction(text: str, line: int = 0) -> Fraction:
    text = text.strip()
    if not _FRACTION.match(text):
        raise DslError(f"probability {text!r} must be an exact fraction like 1/3", line)
    return Fraction(text)


def parse_raw_model(text: str) -> RawModel:
    raw = RawModel()
    pending_legal: list = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head in ("agents", "props", "actions"):
            getattr(raw, head).extend(_names(rest, lineno))
        elif head == "state":
            m = re.fullmatch(rf"({_IDENT})\s*(\{{.*\}})?", rest)
            if not m:
                raise DslError("expected 'state NAME {labels}'", lineno)
            labels = _names(_braced(m.group(2), lineno), lineno) if m.group(2) else []
            raw.states.append((m.group(1), labels))
        elif head == "legal":
            m = re.fullmatch(rf"({_IDENT}|\*)\s+({_IDENT})\s*(\{{.*\}})", rest)
            if not m:
                raise DslError("expected 'legal STATE AGENT {actions}'", lineno)
            pending_legal.append((m.group(1), m.group(2), _names(_braced(m.group(3), lineno), lineno)))
        elif head == "trans":
            m = re.fullmatch(rf"({_IDENT})\s*\(([^)]*)\)\s*->\s*(\{{.*\}})", rest)
            if not m:
                raise DslError("expected 'trans STATE (a1, ..., an) -> {t: p, ...}'", lineno)
            profile = tuple(_names(m.group(2), lineno))
            targets = []
            for item in filter(None, (x.strip() for x in _braced(m.group(3), lineno).split(","))):
                name, sep, p = item.partition(":")
                if not sep:
                    raise DslError(f"expected 'state: probability', got {item!r}", lineno)
                targets.append((name.strip(), parse_fraction(p, lineno)))
            raw.trans.append((m.group(1), profile, targets))
        elif head == "init":
            raw.init = _names(rest, lineno)[0]
        else:
            raise DslError(f"unknown statement {head!r}", lineno)
    for s, a, acts in pending_legal:
        if s == "*":
            raw.legal.extend((st, a, acts) for st, _ in raw.states)
        else:
            raw.legal.append((s, a, acts))
    return raw


def parse_model(text: str) -> Cgs:
    return validate_cgs(parse_raw_model(text))


def load_model(path: str | Path) -> Cgs:
    return parse_model(Path(path).read_text())


def format_model(cgs: Cgs) -> str:
    lines = [
        "agents " + " ".join(cgs.agents),
        "props " + " ".join(sorted(cgs.props)),
        "actions " + " ".join(cgs.actions),
    ]
    for s in cgs.states:
        lines.append(f"state {s} {{{', '.join(sorted(cgs.labels[s]))}}}")
    for s in cgs.states:
        for a in cgs.agents:
            lines.append(f"legal {s} {a} {{{', '.join(sorted(cgs.legal[s, a]))}}}")
    for s in cgs.states:
        for prof in cgs.legal_profiles(s):
            dist = cgs.trans[s, prof]
            body = ", ".join(f"{t}: {dist[t]}" for t in cgs.states if t in dist)
            lines.append(f"trans {s} ({', '.join(prof)}) -> {{{body}}}")
    lines.append(f"init {cgs.init}")
    return "\n".join(lines) + "\n"


def _lines(text: str):
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_formulas(text: str, agents=None) -> list[Formula]:
    return [parse_formula(line, agents) for _, line in _lines(text)]


def parse_vocab(text: str) -> tuple[Formula, ...]:
    return tuple(parse_bool(line) for _, line in _lines(text))
