"""Command-line front end.

Two subcommands: `run` evaluates a query against a program file under a
chosen strategy configuration and prints each answer as bindings of the
query's own variable names; `bench` drives the strategy matrix over one of
the generated graph families and prints the report.

Exit status: 0 on success, 1 when the engine hits a limit or detects an
internal inconsistency, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .bench import BenchSpec, GraphConfig, SHAPES, run_matrix
from .engine import ALL_CONFIGS, DEFAULT_STEP_BUDGET, Engine, StepBudgetExceeded, StrategyConfig
from .reader import ParseError, parse_program, parse_query
from .tablespace import TablingInvariantError
from .terms import Struct, Var, term_to_str

_VARIANTS = {
    "first": "recursive_first",
    "last": "recursive_last",
    "recursive_first": "recursive_first",
    "recursive_last": "recursive_last",
}


def _add_strategy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dre", action="store_true", help="resume repeated calls from the pioneer's next clause")
    p.add_argument("--dra", action="store_true", help="re-evaluate only looping alternatives")
    p.add_argument("--drs", action="store_true", help="propagate only looping and current-round solutions")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lintab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="cmd", required=True)

    runp = sub.add_parser("run", help="evaluate a query against a program file")
    runp.add_argument("--program", required=True, help="path to the program file")
    runp.add_argument("--query", required=True, help="query text, '.'-terminated")
    _add_strategy_flags(runp)
    runp.add_argument("--stats", choices=("text", "structured"), default="text")
    runp.add_argument("--step-budget", type=int, default=DEFAULT_STEP_BUDGET)

    benchp = sub.add_parser("bench", help="run the strategy matrix on a generated graph")
    benchp.add_argument("--shape", required=True, choices=SHAPES)
    benchp.add_argument("--depth", required=True, type=int)
    benchp.add_argument("--variant", choices=sorted(_VARIANTS), default="first")
    benchp.add_argument("--with-slds", action="store_true", help="instrument clause bodies with sld1..sld4 markers")
    benchp.add_argument("--bound", action="store_true", help="query path(1,Z) instead of path(X,Z)")
    _add_strategy_flags(benchp)
    benchp.add_argument("--all-configs", action="store_true", help="run all 8 strategy combinations")
    benchp.add_argument("--stats", choices=("text", "structured"), default="text")
    benchp.add_argument("--step-budget", type=int, default=DEFAULT_STEP_BUDGET)
    return parser


def _collect_bindings(template, answer, out: dict) -> None:
    # first occurrence of each query variable wins; answers are fresh copies
    # shaped exactly like the template
    if type(template) is Var:
        if template not in out:
            out[template] = answer
        return
    if type(template) is Struct:
        for t, a in zip(template.args, answer.args):
            _collect_bindings(t, a, out)


def _format_answer(template, varmap: dict, answer) -> str:
    if not varmap:
        return "true"
    bound: dict = {}
    _collect_bindings(template, answer, bound)
    names: dict = {}
    parts = [f"{name} = {term_to_str(bound[v], names)}" for name, v in varmap.items() if v in bound]
    return ", ".join(parts) if parts else "true"


def _cmd_run(args) -> int:
    try:
        with open(args.program, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read program {args.program!r}: {exc.strerror}", file=sys.stderr)
        return 2
    varmap: dict = {}
    try:
        program = parse_program(text)
        goals = parse_query(args.query, varmap)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    config = StrategyConfig(dre=args.dre, dra=args.dra, drs=args.drs)
    engine = Engine(program, config, step_budget=args.step_budget)
    t0 = time.perf_counter()
    try:
        raw, stats = engine.run_query(goals)
    except (StepBudgetExceeded, TablingInvariantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    wall_ms = (time.perf_counter() - t0) * 1000.0
    answers = engine.answers(raw)
    template = goals[0] if len(goals) == 1 else None
    for a in answers:
        if template is None:
            # conjunction: the collected copy holds the goals in order
            line_bound: dict = {}
            for t, got in zip(goals, a.args):
                _collect_bindings(t, got, line_bound)
            names: dict = {}
            parts = [f"{n} = {term_to_str(line_bound[v], names)}" for n, v in varmap.items() if v in line_bound]
            print(", ".join(parts) if parts else "true")
        else:
            print(_format_answer(template, varmap, a))
    if args.stats == "structured":
        rec = {"config": config.label, "dre": config.dre, "dra": config.dra, "drs": config.drs,
               "answer_count": len(answers), "wall_ms": round(wall_ms, 3)}
        rec.update(stats.as_dict())
        print(json.dumps(rec, sort_keys=True))
    else:
        print(f"% config={config.label} answers={len(answers)} wall_ms={wall_ms:.1f}")
        print(f"% alts_explored={stats.alts_explored} nonleader_sols_consumed={stats.nonleader_sols_consumed}"
              f" rounds_started={stats.rounds_started} followers_created={stats.followers_created}"
              f" answers_emitted={stats.answers_emitted}")
        if stats.sld_calls:
            print("% sld_calls: " + " ".join(f"{k}={v}" for k, v in sorted(stats.sld_calls.items())))
    return 0


def _cmd_bench(args) -> int:
    if args.all_configs and (args.dre or args.dra or args.drs):
        print("error: --all-configs conflicts with individual strategy flags", file=sys.stderr)
        return 2
    configs = ALL_CONFIGS if args.all_configs else (StrategyConfig(dre=args.dre, dra=args.dra, drs=args.drs),)
    try:
        spec = BenchSpec(
            graph=GraphConfig(args.shape, args.depth),
            variant=_VARIANTS[args.variant],
            with_slds=args.with_slds,
            bound=args.bound,
            configs=configs,
            step_budget=args.step_budget,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_matrix(spec)
    except (RuntimeError, TablingInvariantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = report.render_structured() if args.stats == "structured" else report.render_text()
    sys.stdout.write(out)
    return 1 if any(c.error is not None for c in report.cells) else 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return _cmd_run(args) if args.cmd == "run" else _cmd_bench(args)


if __name__ == "__main__":
    sys.exit(main())
