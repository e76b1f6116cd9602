"""Command-line surface tying the toolkit into reproducible pipelines.

Machine-readable results go to standard output, diagnostics to standard
error.  Exit codes: 0 success, 1 domain negative (reject, not well-formed,
refinement exhausted), 2 usage or protocol error.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
from pathlib import Path

from .errors import CcfgError, GrammarParseError, SampleError
from .harness import load_corpus, mutate_test_case
from .metrics import (
    ProblemScores,
    aggregate,
    effectiveness_for_problem,
    reward_for_document,
    score_grammars,
)
from .model import parse_grammar_document
from .recognizer import STEP_BUDGET, parse_test_case
from .refine import MAX_ITERATIONS, refine
from .sampler import SampleLimits, sample_set
from .wellformed import feedback_text, report_from_parse_error, validate

_ENV_SEED = "CCFG_SEED"


def _default_seed() -> int:
    raw = os.environ.get(_ENV_SEED)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        return 0


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_default_seed(),
                        help="random seed (env %s overrides the default)"
                             % _ENV_SEED)
    common.add_argument("--format", choices=("human", "document"),
                        default="human", help="output mode")
    common.add_argument("--node-budget", type=int, default=100_000)
    common.add_argument("--retry-budget", type=int, default=1_000)
    common.add_argument("--output-budget", type=int, default=1 << 20)
    common.add_argument("--default-range", type=int, nargs=2,
                        metavar=("LO", "HI"), default=(-10 ** 9, 10 ** 9))
    common.add_argument("--step-budget", type=int, default=STEP_BUDGET)
    return common


def _limits(args) -> SampleLimits:
    return SampleLimits(node_budget=args.node_budget,
                        retry_budget=args.retry_budget,
                        output_budget=args.output_budget,
                        default_range=tuple(args.default_range))


def _load_grammar(path):
    return parse_grammar_document(Path(path).read_bytes())


def _emit(args, document: dict, human_lines) -> None:
    if args.format == "document":
        print(json.dumps(document, indent=2))
    else:
        for line in human_lines:
            print(line)


def _build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="ccfg",
        description="Grammar engine and evaluation toolkit for counter grammars")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common],
                       help="check a grammar against the error taxonomy")
    p.add_argument("grammar")

    p = sub.add_parser("sample", parents=[common],
                       help="sample constraint-satisfying test cases")
    p.add_argument("grammar")
    p.add_argument("-k", type=int, default=1, help="number of test cases")
    p.add_argument("--outdir", help="write tc_<j>.txt files here")
    p.add_argument("--record-separator", default="",
                   help="separator between cases on standard output")
    p.add_argument("--boundary-bias", action="store_true",
                   help="push samples toward interval endpoints")

    p = sub.add_parser("check", parents=[common],
                       help="decide whether a test case is in the language")
    p.add_argument("grammar")
    p.add_argument("testfile")
    p.add_argument("--tolerate-trailing-newline", action="store_true")

    p = sub.add_parser("score", parents=[common],
                       help="element/set validity and generality scores")
    p.add_argument("--candidate", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("-k", type=int, default=10)

    p = sub.add_parser("reward", parents=[common],
                       help="validity x generality reward")
    p.add_argument("--candidate", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("-k", type=int, default=5)

    p = sub.add_parser("effectiveness", parents=[common],
                       help="how well generated tests expose wrong solutions")
    p.add_argument("--corpus", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--grammar", required=True)
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--timeout-ms", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("mutate", parents=[common],
                       help="token-level mutation of an existing test case")
    p.add_argument("testfile")
    p.add_argument("--rate", type=float, default=0.3)

    p = sub.add_parser("refine", parents=[common],
                       help="drive an external grammar oracle with feedback")
    p.add_argument("--spec", required=True, help="specification text file")
    p.add_argument("--oracle", required=True,
                   help="oracle command line (shell-quoted)")
    p.add_argument("--max-iters", type=int, default=MAX_ITERATIONS)
    p.add_argument("--truth", help="optional reference grammar to score against")
    p.add_argument("--timeout-ms", type=int, default=60_000)

    p = sub.add_parser("bench", parents=[common],
                       help="corpus-level summary over candidate grammars")
    p.add_argument("--corpus", required=True)
    p.add_argument("--grammars", required=True,
                   help="directory of <problem name>.json candidates")
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--timeout-ms", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=None)
    return parser


# --------------------------------------------------------------------------
# subcommand bodies


def _cmd_validate(args) -> int:
    try:
        grammar = _load_grammar(args.grammar)
    except GrammarParseError as exc:
        report = report_from_parse_error(exc)
    else:
        report = validate(grammar, node_budget=args.node_budget,
                          retry_budget=args.retry_budget, seed=args.seed)
    lines = (["well-formed"] if report.well_formed else feedback_text(report))
    lines += [f"warning: {w}" for w in report.warnings]
    _emit(args, report.to_document(), lines)
    return 0 if report.well_formed else 1


def _cmd_sample(args) -> int:
    grammar = _load_grammar(args.grammar)
    cases = sample_set(grammar, args.k, args.seed, _limits(args),
                       boundary_bias=args.boundary_bias)
    if args.outdir:
        outdir = Path(args.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        for j, case in enumerate(cases):
            (outdir / f"tc_{j}.txt").write_bytes(case.data)
        print(f"wrote {len(cases)} test cases to {outdir}", file=sys.stderr)
    else:
        separator = args.record_separator.encode("utf-8").decode("unicode_escape")
        output = separator.join(case.data.decode("utf-8") for case in cases)
        sys.stdout.write(output)
        sys.stdout.flush()
    return 0


def _cmd_check(args) -> int:
    grammar = _load_grammar(args.grammar)
    data = Path(args.testfile).read_bytes()
    result = parse_test_case(
        grammar, data, args.step_budget,
        tolerate_trailing_newline=args.tolerate_trailing_newline,
        default_range=tuple(args.default_range))
    _emit(args, result.to_document(),
          ["accepted" if result.accepted else f"rejected: {result.reason}"])
    if result.accepted:
        return 0
    return 2 if result.inconclusive else 1


def _cmd_score(args) -> int:
    candidate = _load_grammar(args.candidate)
    truth = _load_grammar(args.truth)
    scores = score_grammars(candidate, truth, args.k, args.seed, _limits(args))
    _emit(args, scores, [
        f"validity: elt={scores['validity']['elt']:.4f} "
        f"set={scores['validity']['set']}",
        f"generality: elt={scores['generality']['elt']:.4f} "
        f"set={scores['generality']['set']}",
    ])
    return 0 if scores["well_formed"] else 1


def _cmd_reward(args) -> int:
    truth = _load_grammar(args.truth)
    result = reward_for_document(Path(args.candidate).read_bytes(), truth,
                                 args.k, args.seed, _limits(args))
    doc = {"r_v": result.r_v, "r_g": result.r_g, "total": result.total}
    _emit(args, doc, [f"reward: total={result.total:.4f} "
                      f"(r_v={result.r_v:.4f}, r_g={result.r_g:.4f})"])
    return 0 if result.total > 0 else 1


def _cmd_effectiveness(args) -> int:
    corpus = load_corpus(args.corpus)
    problem = corpus.find(args.problem)
    if problem is None:
        print(f"no problem named '{args.problem}' in {args.corpus}",
              file=sys.stderr)
        return 2
    grammar = _load_grammar(args.grammar)
    result = effectiveness_for_problem(problem, grammar, args.k, args.seed,
                                       args.timeout_ms, args.workers,
                                       _limits(args))
    if result.get("note"):
        print(result["note"], file=sys.stderr)
    _emit(args, result,
          [f"effectiveness: elt={result['elt']:.4f} set={result['set']:.4f}"])
    return 0


def _cmd_mutate(args) -> int:
    data = Path(args.testfile).read_bytes()
    mutated = mutate_test_case(data, args.rate, args.seed)
    sys.stdout.buffer.write(mutated)
    sys.stdout.buffer.flush()
    return 0


def _cmd_refine(args) -> int:
    specification = Path(args.spec).read_text(encoding="utf-8")
    oracle = shlex.split(args.oracle)
    truth = _load_grammar(args.truth) if args.truth else None
    trace = refine(specification, oracle, args.max_iters, truth, args.seed,
                   args.timeout_ms)
    lines = [f"outcome: {trace.outcome} after {len(trace.attempts)} attempts"]
    for i, attempt in enumerate(trace.attempts, start=1):
        status = "well-formed" if attempt.report.well_formed else "rejected"
        lines.append(f"attempt {i}: {status}")
    _emit(args, trace.to_document(), lines)
    return 0 if trace.outcome == "well_formed" else 1


def _cmd_bench(args) -> int:
    corpus = load_corpus(args.corpus)
    for line_no, reason in corpus.skipped:
        print(f"corpus line {line_no}: {reason}", file=sys.stderr)
    grammar_dir = Path(args.grammars)
    rows = []
    skipped = []
    for problem in corpus:
        candidate_path = grammar_dir / f"{problem.name}.json"
        if problem.truth_grammar is None:
            skipped.append((problem.name, "no reference grammar"))
            continue
        if not candidate_path.exists():
            skipped.append((problem.name, f"no candidate at {candidate_path}"))
            continue
        if not problem.correct_cmds or not problem.incorrect_cmds:
            skipped.append((problem.name, "missing solutions"))
            continue
        try:
            candidate = parse_grammar_document(candidate_path.read_bytes())
        except GrammarParseError as exc:
            report = report_from_parse_error(exc)
            rows.append(ProblemScores(problem.name, 0.0, 0.0, 0.0, 0.0,
                                      0.0, 0.0))
            print(f"{problem.name}: candidate unusable "
                  f"({feedback_text(report)[0]})", file=sys.stderr)
            continue
        scores = score_grammars(candidate, problem.truth_grammar, args.k,
                                args.seed, _limits(args))
        effect = effectiveness_for_problem(problem, candidate, args.k,
                                           args.seed, args.timeout_ms,
                                           args.workers, _limits(args))
        rows.append(ProblemScores(
            problem.name,
            scores["validity"]["elt"], scores["validity"]["set"],
            scores["generality"]["elt"], scores["generality"]["set"],
            effect["elt"], effect["set"],
            scores["inconclusive_parses"]))
    for name, reason in skipped:
        print(f"skipped {name}: {reason}", file=sys.stderr)
    summary = aggregate(rows)
    summary["skipped"] = [{"name": n, "reason": r} for n, r in skipped]
    _emit(args, summary, [
        f"problems: {summary['problems']}",
        f"validity: elt={summary['validity']['elt']:.2f} "
        f"set={summary['validity']['set']:.2f}",
        f"effectiveness: elt={summary['effectiveness']['elt']:.2f} "
        f"set={summary['effectiveness']['set']:.2f}",
        f"generality: elt={summary['generality']['elt']:.2f} "
        f"set={summary['generality']['set']:.2f}",
    ])
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "sample": _cmd_sample,
    "check": _cmd_check,
    "score": _cmd_score,
    "reward": _cmd_reward,
    "effectiveness": _cmd_effectiveness,
    "mutate": _cmd_mutate,
    "refine": _cmd_refine,
    "bench": _cmd_bench,
}


def dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return _COMMANDS[args.command](args)
    except (GrammarParseError, SampleError) as exc:
        # A bad grammar or an infeasible sampling run is a domain negative,
        # not a usage error.
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CcfgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
