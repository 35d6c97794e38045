"""Command-line front end.

Exit status: 0 formula true at the initial state, 1 false, 2 unknown,
3 usage error, 4 invalid input (model, formula, strategy), 5 resource limit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cgs import Cgs, ModelError
from .checker import CheckConfig, CheckResult, check
from .dsl import load_model, parse_formulas, parse_vocab
from .logic import Coalition, FormulaSyntaxError, UnknownAgent, UnknownAtom, ThresholdOutOfRange
from .logic import Until, eval_labels, is_boolean, parse_formula, to_text
from .natstrat import InvalidStrategy, VocabularyEmpty, enumerate_det, inline_strategy, parse_strategy
from .omega import StateBudgetExceeded, ltl_to_dra, to_hoa
from .probsolve import Interval, NonConvergence
from .rarith import BodyNotNatPatl, encode

SCHEMA_ID = "natpatl.report/1"
EXIT_TRUE, EXIT_FALSE, EXIT_UNKNOWN, EXIT_USAGE, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3, 4, 5

INPUT_ERRORS = (
    ModelError,
    FormulaSyntaxError,
    UnknownAgent,
    UnknownAtom,
    ThresholdOutOfRange,
    InvalidStrategy,
    VocabularyEmpty,
    BodyNotNatPatl,
    FileNotFoundError,
    ValueError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _find(path: str, near: Path | None = None) -> Path:
    p = Path(path)
    if p.exists():
        return p
    if near is not None and (near / path).exists():
        return near / path
    from .models import path as shipped

    if shipped(path).exists():
        return shipped(path)
    raise FileNotFoundError(f"no such file: {path}")


def _load(path: str) -> tuple[Cgs, Path]:
    p = _find(path)
    cgs = load_model(p)
    unreachable = [s for s in cgs.states if s not in cgs.reachable(cgs.init)]
    if unreachable:
        print(f"warning: states unreachable from {cgs.init}: {', '.join(unreachable)}", file=sys.stderr)
    return cgs, p


def _vocab(spec: str, model_dir: Path):
    if spec in ("default", "literals", "minterms"):
        return spec
    return parse_vocab(_find(spec, model_dir).read_text())


def _prob_json(p):
    if p is None:
        return None
    if isinstance(p, Interval):
        return {"lo": _frac(p.lo), "hi": _frac(p.hi)}
    return _frac(p)


def _frac(p: Fraction) -> str:
    p = Fraction(p)
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def _verdict(v) -> str:
    return "unknown" if v is None else ("true" if v else "false")


def _result_json(cgs: Cgs, res: CheckResult) -> dict:
    coalitions = []
    seen = []
    for g in res.formula.walk():
        if isinstance(g, Coalition) and g not in seen:
            seen.append(g)
    for g in seen:
        for s in cgs.states:
            w = res.witnesses.get((s, g))
            coalitions.append(
                {
                    "formula": to_text(g),
                    "state": s,
                    "verdict": _verdict(res.truth[g][s]),
                    "probability": _prob_json(w.probability if w else res.values.get((s, g))),
                    "witness": [inline_strategy(st) for st in w.profile] if w else None,
                }
            )
    stats = {k: v for k, v in res.stats.items() if k not in ("seconds", "solve_seconds", "fragment", "positive")}
    return {
        "formula": to_text(res.formula),
        "fragment": res.stats.get("fragment"),
        "positive": res.stats.get("positive"),
        "state": res.init,
        "verdict": _verdict(res.verdict),
        "states": {s: _verdict(res.truth[res.formula][s]) for s in cgs.states},
        "coalitions": coalitions,
        "stats": stats,
    }


def report(cgs: Cgs, model: str, cfg: CheckConfig, vocab_name: str, results: list[CheckResult], seconds: float) -> dict:
    return {
        "schema": SCHEMA_ID,
        "tool": {"name": "natpatl", "version": __version__},
        "config": {
            "model": model,
            "state": results[0].init if results else cgs.init,
            "setting": cfg.setting,
            "vocab": vocab_name,
            "solve": cfg.solve,
            "opponent": cfg.opponent,
            "strict": cfg.strict,
        },
        "results": [_result_json(cgs, r) for r in results],
        "timing": {"seconds": round(seconds, 6), "per_formula": [round(r.stats.get("seconds", 0.0), 6) for r in results]},
    }


def _exit_for(results: list[CheckResult]) -> int:
    verdicts = [r.verdict for r in results]
    if any(v is None for v in verdicts):
        return EXIT_UNKNOWN
    return EXIT_TRUE if all(verdicts) else EXIT_FALSE


def cmd_check(args) -> int:
    import time

    cgs, path = _load(args.model)
    texts = []
    if args.formula:
        texts += args.formula
    formulas = [parse_formula(t, cgs.agents) for t in texts]
    if args.formulas:
        formulas += parse_formulas(_find(args.formulas, path.parent).read_text(), cgs.agents)
    if not formulas:
        raise ValueError("give --formula or --formulas")
    cfg = CheckConfig(
        setting=args.setting,
        vocab=_vocab(args.vocab, path.parent),
        opponent=args.opponent,
        solve=args.solve,
        jobs=args.jobs,
        strict=args.strict,
    )
    state = args.state or cgs.init
    if state not in cgs.states:
        raise ValueError(f"unknown state {state!r}")
    t0 = time.perf_counter()
    results = [check(cgs, state, f, cfg) for f in formulas]
    elapsed = time.perf_counter() - t0
    if args.json:
        rep = report(cgs, path.name, cfg, args.vocab if isinstance(cfg.vocab, str) else Path(args.vocab).name, results, elapsed)
        print(json.dumps(rep, indent=2, sort_keys=True))
    else:
        for r in results:
            print(f"{_verdict(r.verdict):8} {to_text(r.formula)}  [at {r.init}]")
            for g in dict.fromkeys(x for x in r.formula.walk() if isinstance(x, Coalition)):
                w = r.witnesses.get((r.init, g))
                p = w.probability if w else r.values.get((r.init, g))
                line = f"    {to_text(g)}: {_verdict(r.truth[g][r.init])}"
                if p is not None:
                    line += f", p = {_prob_json(p)}"
                if w:
                    line += "  witness " + " ; ".join(f"{st.agent}: {inline_strategy(st)}" for st in w.profile)
                print(line)
    return _exit_for(results)


def _profile(cgs: Cgs, spec: str, model_dir: Path) -> dict:
    out = {}
    for item in filter(None, spec.split(",")):
        st = parse_strategy(_find(item.strip(), model_dir).read_text())
        out[st.agent] = st
    return out


def _objective(cgs: Cgs, text: str):
    f = parse_formula(text)
    if not isinstance(f, Until) or not (is_boolean(f.left) and is_boolean(f.right)):
        raise ValueError("--until expects 'a U b' or 'F b' with Boolean a and b")
    safe = [s for s in cgs.states if eval_labels(f.left, cgs.labels[s])]
    target = [s for s in cgs.states if eval_labels(f.right, cgs.labels[s])]
    return f, safe, target


def cmd_simulate(args) -> int:
    from .oracle import estimate_until, sample_traces

    cgs, path = _load(args.model)
    prof = _profile(cgs, args.profile, path.parent)
    f, safe, target = _objective(cgs, args.until)
    seed = int(os.environ.get("NATPATL_SEED", args.seed))
    state = args.state or cgs.init
    est = estimate_until(cgs, prof, state, safe, target, args.horizon, args.n, seed, args.batches, args.jobs)
    lo, hi = est.interval
    if args.traces:
        Path(args.traces).write_text("\n".join(sample_traces(cgs, prof, state, args.horizon, args.traces_n, seed)) + "\n")
    if args.json:
        print(json.dumps({
            "schema": "natpatl.simulation/1",
            "objective": to_text(f),
            "state": state,
            "horizon": args.horizon,
            "n": args.n,
            "seed": seed,
            "hits": est.hits,
            "estimate": _frac(est.value),
            "interval99": [lo, hi],
        }, indent=2, sort_keys=True))
    else:
        print(f"estimate {float(est.value):.6f} ({est.hits}/{est.n}), 99% interval [{lo:.6f}, {hi:.6f}], horizon {args.horizon}, seed {seed}")
    return 0


def cmd_enumerate(args) -> int:
    cgs, path = _load(args.model)
    cfg = CheckConfig(setting=args.setting, vocab=_vocab(args.vocab, path.parent))
    from .checker import resolve_vocab
    from .natstrat import complexity

    count = 0
    for st in enumerate_det(args.agent, args.k, args.setting, resolve_vocab(cfg, cgs), cgs):
        print(f"{complexity(st)}\t{inline_strategy(st)}")
        count += 1
        if args.limit and count >= args.limit:
            break
    print(f"# {count} strategies", file=sys.stderr)
    return 0


def cmd_encode(args) -> int:
    cgs, path = _load(args.model)
    f = parse_formula(args.formula, cgs.agents)
    if not isinstance(f, Coalition):
        raise BodyNotNatPatl("encode expects a single coalition formula")
    cfg = CheckConfig(setting=args.setting, vocab=_vocab(args.vocab, path.parent))
    from .checker import resolve_vocab

    script = encode(cgs, f, resolve_vocab(cfg, cgs), setting=args.setting, state=args.state)
    if args.out:
        Path(args.out).write_text(script.text)
        Path(args.meta or args.out + ".json").write_text(script.metadata_json() + "\n")
    else:
        sys.stdout.write(script.text)
    return 0


def cmd_export(args) -> int:
    from .product import export_mdp, fix_coalition

    cgs, path = _load(args.model)
    if args.hoa:
        sys.stdout.write(to_hoa(ltl_to_dra(parse_formula(args.hoa))))
        return 0
    prof = _profile(cgs, args.profile or "", path.parent)
    mdp = fix_coalition(cgs, list(prof), prof, args.state or cgs.init)
    sys.stdout.write(export_mdp(mdp))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="natpatl", description="Model checking of NatPATL over stochastic game structures.")
    p.add_argument("--version", action="version", version=f"natpatl {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(q, vocab=True):
        q.add_argument("model", help="model file (.cgs); shipped models can be named directly")
        q.add_argument("--state", help="initial state (default: the model's init)")
        if vocab:
            q.add_argument("--setting", choices=["r", "R"], default="r", help="memoryless (r) or recall (R)")
            q.add_argument("--vocab", default="default", help="default | literals | minterms | FILE")

    q = sub.add_parser("check", help="decide formulas")
    common(q)
    q.add_argument("--formula", action="append", help="formula text (repeatable)")
    q.add_argument("--formulas", help="file with one formula per line (.nf)")
    q.add_argument("--solve", default="exact", help="exact | iter:TOL")
    q.add_argument("--opponent", default="mdp", help="mdp | enumerate:BOUND")
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--strict", action="store_true", help="a pair applies only if its support is exactly the legal set")
    q.add_argument("--json", action="store_true", help="print a JSON report")
    q.set_defaults(func=cmd_check)

    q = sub.add_parser("simulate", help="Monte-Carlo estimate of a bounded until")
    common(q, vocab=False)
    q.add_argument("--profile", required=True, help="comma-separated strategy files, one per agent")
    q.add_argument("--until", required=True, help="'a U b' or 'F b' with Boolean a, b")
    q.add_argument("--n", type=int, default=100_000)
    q.add_argument("--horizon", type=int, default=100)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--batches", type=int, default=1)
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--traces", help="write sample plays to this file")
    q.add_argument("--traces-n", type=int, default=10)
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("enumerate", help="list canonical deterministic strategies")
    common(q)
    q.add_argument("--agent", required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--limit", type=int, default=0)
    q.set_defaults(func=cmd_enumerate)

    q = sub.add_parser("encode", help="emit the real-arithmetic encoding of a coalition query")
    common(q)
    q.add_argument("--formula", required=True)
    q.add_argument("--out", help="script file (default: standard output)")
    q.add_argument("--meta", help="metadata file (default: OUT.json)")
    q.set_defaults(func=cmd_encode)

    q = sub.add_parser("export", help="dump the product with the given strategies fixed, or an automaton")
    common(q, vocab=False)
    q.add_argument("--profile", help="comma-separated strategy files")
    q.add_argument("--hoa", help="print the Rabin automaton of this LTL formula in HOA format instead")
    q.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StateBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
