"""Validity, generality, reward, and effectiveness scores.

Element-based validity is the fraction of candidate-generated test cases
the reference grammar accepts; element-based generality mirrors it with
the roles swapped.  The reward of a candidate against a reference is the
product of the two (zero outright for candidates that are not
well-formed).  Set-based scores are the all-or-nothing indicator over the
same sample.  Effectiveness measures how often generated tests make wrong
solutions' outputs diverge from the correct one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    EmptyCorpus,
    EmptySolutionSet,
    GrammarParseError,
    SampleError,
    TruthNotWellFormed,
)
from .harness import Problem, run_matrix, outputs_differ
from .model import Grammar, parse_grammar_document
from .recognizer import parse_test_case
from .sampler import SampleLimits, derive_seed, sample_set
from .wellformed import validate

REWARD_SAMPLE_SIZE = 5
EVALUATION_SAMPLE_SIZE = 10


@dataclass(frozen=True, slots=True)
class Reward:
    r_v: float
    r_g: float
    total: float


@dataclass(frozen=True, slots=True)
class SampleScore:
    """Outcome of judging one k-sample: accepted / inconclusive counts."""

    accepted: int
    inconclusive: int
    size: int

    @property
    def element(self) -> float:
        return self.accepted / self.size

    @property
    def set_indicator(self) -> int:
        return 1 if self.accepted == self.size else 0


@dataclass
class EffectivenessInput:
    """Solution outputs per test, plus per-test validity flags.

    ``incorrect_outputs[s][t]`` is wrong solution ``s`` run on test ``t``;
    all rows must be as long as ``tests``.
    """

    tests: list
    reference_outputs: list
    incorrect_outputs: list
    validity_flags: list

    def __post_init__(self):
        n = len(self.tests)
        if len(self.reference_outputs) != n or len(self.validity_flags) != n:
            raise ValueError("per-test lists must match the number of tests")
        for row in self.incorrect_outputs:
            if len(row) != n:
                raise ValueError("every solution needs one output per test")


def _ensure_truth(truth: Grammar, seed: int) -> None:
    report = validate(truth, seed=derive_seed(seed, "validate-truth"))
    if not report.well_formed:
        raise TruthNotWellFormed(
            "reference grammar failed validation: "
            + "; ".join(e.message for e in report.errors))


def _judge_sample(source: Grammar, judge: Grammar, k: int, seed: int,
                  limits: Optional[SampleLimits]) -> SampleScore:
    """Sample k cases from ``source`` and count how many ``judge`` accepts."""
    try:
        cases = sample_set(source, k, derive_seed(seed, "sample"), limits)
    except SampleError:
        return SampleScore(0, 0, k)
    accepted = 0
    inconclusive = 0
    for case in cases:
        result = parse_test_case(judge, case.data)
        if result.accepted:
            accepted += 1
        elif result.inconclusive:
            inconclusive += 1
    return SampleScore(accepted, inconclusive, k)


def _validity_score(candidate: Grammar, truth: Grammar, k: int, seed: int,
                    limits: Optional[SampleLimits],
                    candidate_known_good: bool = False) -> SampleScore:
    if not candidate_known_good:
        report = validate(candidate, seed=derive_seed(seed, "validate-candidate"))
        if not report.well_formed:
            return SampleScore(0, 0, k)
    return _judge_sample(candidate, truth, k, derive_seed(seed, "validity"),
                         limits)


def _generality_score(candidate: Grammar, truth: Grammar, k: int, seed: int,
                      limits: Optional[SampleLimits],
                      candidate_known_good: bool = False) -> SampleScore:
    if not candidate_known_good:
        report = validate(candidate, seed=derive_seed(seed, "validate-candidate"))
        if not report.well_formed:
            return SampleScore(0, 0, k)
    return _judge_sample(truth, candidate, k, derive_seed(seed, "generality"),
                         limits)


def element_validity(candidate: Grammar, truth: Grammar,
                     k: int = EVALUATION_SAMPLE_SIZE, seed: int = 0,
                     limits: Optional[SampleLimits] = None) -> float:
    """Fraction of k candidate samples the reference grammar accepts."""
    _ensure_truth(truth, seed)
    return _validity_score(candidate, truth, k, seed, limits).element


def element_generality(candidate: Grammar, truth: Grammar,
                       k: int = EVALUATION_SAMPLE_SIZE, seed: int = 0,
                       limits: Optional[SampleLimits] = None) -> float:
    """Fraction of k reference samples the candidate grammar accepts."""
    _ensure_truth(truth, seed)
    return _generality_score(candidate, truth, k, seed, limits).element


def set_validity(candidate: Grammar, truth: Grammar,
                 k: int = EVALUATION_SAMPLE_SIZE, seed: int = 0,
                 limits: Optional[SampleLimits] = None) -> int:
    """1 iff every sampled case is accepted, over the same sample as
    element_validity."""
    _ensure_truth(truth, seed)
    return _validity_score(candidate, truth, k, seed, limits).set_indicator


def set_generality(candidate: Grammar, truth: Grammar,
                   k: int = EVALUATION_SAMPLE_SIZE, seed: int = 0,
                   limits: Optional[SampleLimits] = None) -> int:
    _ensure_truth(truth, seed)
    return _generality_score(candidate, truth, k, seed, limits).set_indicator


def reward(candidate: Grammar, truth: Grammar, k: int = REWARD_SAMPLE_SIZE,
           seed: int = 0, limits: Optional[SampleLimits] = None) -> Reward:
    """Validity times generality over k-samples; zero when the candidate is
    not well-formed."""
    _ensure_truth(truth, seed)
    report = validate(candidate, seed=derive_seed(seed, "validate-candidate"))
    if not report.well_formed:
        return Reward(0.0, 0.0, 0.0)
    r_v = _validity_score(candidate, truth, k, seed, limits,
                          candidate_known_good=True).element
    r_g = _generality_score(candidate, truth, k, seed, limits,
                            candidate_known_good=True).element
    return Reward(r_v, r_g, r_v * r_g)


def reward_for_document(candidate_document, truth: Grammar,
                        k: int = REWARD_SAMPLE_SIZE, seed: int = 0,
                        limits: Optional[SampleLimits] = None) -> Reward:
    """Reward for a raw grammar document; unparseable candidates score 0."""
    try:
        candidate = parse_grammar_document(candidate_document)
    except GrammarParseError:
        _ensure_truth(truth, seed)
        return Reward(0.0, 0.0, 0.0)
    return reward(candidate, truth, k, seed, limits)


def score_grammars(candidate: Grammar, truth: Grammar,
                   k: int = EVALUATION_SAMPLE_SIZE, seed: int = 0,
                   limits: Optional[SampleLimits] = None) -> dict:
    """All four validity/generality scores plus inconclusive-parse tallies."""
    _ensure_truth(truth, seed)
    report = validate(candidate, seed=derive_seed(seed, "validate-candidate"))
    if report.well_formed:
        validity = _validity_score(candidate, truth, k, seed, limits,
                                   candidate_known_good=True)
        generality = _generality_score(candidate, truth, k, seed, limits,
                                       candidate_known_good=True)
    else:
        validity = generality = SampleScore(0, 0, k)
    return {
        "well_formed": report.well_formed,
        "validity": {"elt": validity.element, "set": validity.set_indicator},
        "generality": {"elt": generality.element,
                       "set": generality.set_indicator},
        "inconclusive_parses": validity.inconclusive + generality.inconclusive,
        "k": k,
    }


# --------------------------------------------------------------------------
# effectiveness


def _difference_matrix(inp: EffectivenessInput) -> list:
    return [
        [outputs_differ(ref, row[t]) for t, ref in enumerate(inp.reference_outputs)]
        for row in inp.incorrect_outputs
    ]


def _check_effectiveness_input(inp: EffectivenessInput) -> None:
    if not inp.incorrect_outputs:
        raise EmptySolutionSet("need at least one incorrect solution")
    if not inp.tests:
        raise EmptySolutionSet("need at least one test case")


def element_effectiveness(inp: EffectivenessInput) -> float:
    """Mean over tests of the fraction of wrong solutions they expose;
    zero whenever the suite contains an invalid test."""
    _check_effectiveness_input(inp)
    if not all(inp.validity_flags):
        return 0.0
    matrix = _difference_matrix(inp)
    per_test = []
    for t in range(len(inp.tests)):
        exposed = sum(1 for row in matrix if row[t])
        per_test.append(exposed / len(matrix))
    return sum(per_test) / len(per_test)


def set_effectiveness(inp: EffectivenessInput) -> float:
    """Fraction of wrong solutions exposed by at least one test; zero
    whenever the suite contains an invalid test."""
    _check_effectiveness_input(inp)
    if not all(inp.validity_flags):
        return 0.0
    matrix = _difference_matrix(inp)
    exposed = sum(1 for row in matrix if any(row))
    return exposed / len(matrix)


def effectiveness_for_problem(problem: Problem, candidate: Grammar,
                              k: int = EVALUATION_SAMPLE_SIZE, seed: int = 0,
                              timeout_ms: int = 10_000,
                              workers: Optional[int] = None,
                              limits: Optional[SampleLimits] = None) -> dict:
    """Generate a k-case suite from ``candidate`` and score it on the
    problem's solutions.

    Validity flags come from the problem's reference grammar when present;
    without one every generated case counts as valid (flagged in the
    result).  The first correct command is the reference solution.
    """
    if not problem.correct_cmds:
        raise EmptySolutionSet(f"'{problem.name}' has no correct solution")
    if not problem.incorrect_cmds:
        raise EmptySolutionSet(f"'{problem.name}' has no incorrect solutions")
    try:
        cases = sample_set(candidate, k, derive_seed(seed, "effectiveness"),
                           limits)
    except SampleError as exc:
        return {"elt": 0.0, "set": 0.0, "invalid_tests": k, "k": k,
                "note": f"sampling failed: {exc}"}
    tests = [case.data for case in cases]
    if problem.truth_grammar is not None:
        flags = [parse_test_case(problem.truth_grammar, t).accepted
                 for t in tests]
        note = None
    else:
        flags = [True] * len(tests)
        note = "no reference grammar; validity of generated cases not checked"
    reference_row = run_matrix([problem.correct_cmds[0]], tests, timeout_ms,
                               workers)[0]
    incorrect_rows = run_matrix(problem.incorrect_cmds, tests, timeout_ms,
                                workers)
    inp = EffectivenessInput(tests, reference_row, incorrect_rows, flags)
    result = {
        "elt": element_effectiveness(inp),
        "set": set_effectiveness(inp),
        "invalid_tests": sum(1 for f in flags if not f),
        "k": k,
    }
    if note:
        result["note"] = note
    return result


# --------------------------------------------------------------------------
# corpus aggregation


@dataclass(frozen=True, slots=True)
class ProblemScores:
    name: str
    validity_elt: float
    validity_set: float
    generality_elt: float
    generality_set: float
    effectiveness_elt: float
    effectiveness_set: float
    inconclusive_parses: int = 0


def aggregate(per_problem: Sequence[ProblemScores]) -> dict:
    """Corpus summary: per-column means as percentages, two decimals."""
    if not per_problem:
        raise EmptyCorpus("no problem scores to aggregate")

    def mean_pct(values) -> float:
        return round(100.0 * sum(values) / len(values), 2)

    return {
        "problems": len(per_problem),
        "validity": {
            "elt": mean_pct([p.validity_elt for p in per_problem]),
            "set": mean_pct([p.validity_set for p in per_problem]),
        },
        "effectiveness": {
            "elt": mean_pct([p.effectiveness_elt for p in per_problem]),
            "set": mean_pct([p.effectiveness_set for p in per_problem]),
        },
        "generality": {
            "elt": mean_pct([p.generality_elt for p in per_problem]),
            "set": mean_pct([p.generality_set for p in per_problem]),
        },
        "inconclusive_parses": sum(p.inconclusive_parses for p in per_problem),
    }
