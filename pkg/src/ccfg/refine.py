"""Bounded iterative refinement against an external grammar oracle.

The oracle is any runnable command: it receives one request document on
standard input and answers with one grammar container on standard output,
statelessly, once per invocation.  The driver validates each answer and
feeds the categorized error lines back until the oracle produces a
well-formed grammar or the iteration bound is hit; it never edits a
grammar itself.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import GrammarParseError, OracleProtocolError, OracleSpawnError
from .metrics import Reward, reward
from .model import Grammar, parse_grammar_document
from .sampler import derive_seed
from .wellformed import (
    WellFormednessReport,
    feedback_text,
    report_from_parse_error,
    validate,
)

MAX_ITERATIONS = 5
MAX_FEEDBACK_LINES = 20


@dataclass(frozen=True)
class OracleRequest:
    specification: str
    previous_grammar: Optional[str]
    feedback: tuple
    iteration: int

    def to_document(self) -> bytes:
        doc = {
            "specification": self.specification,
            "feedback": list(self.feedback),
            "iteration": self.iteration,
        }
        if self.previous_grammar is not None:
            doc["previous_grammar"] = self.previous_grammar
        return (json.dumps(doc, sort_keys=True) + "\n").encode("utf-8")


@dataclass(frozen=True)
class Attempt:
    document: str
    report: WellFormednessReport
    reward: Optional[Reward] = None
    grammar: Optional[Grammar] = None


@dataclass
class RefinementTrace:
    attempts: list
    requests: list
    outcome: str  # well_formed | exhausted

    def to_document(self) -> dict:
        return {
            "outcome": self.outcome,
            "attempts": [
                {
                    "document": a.document,
                    "report": a.report.to_document(),
                    "reward": None if a.reward is None else {
                        "r_v": a.reward.r_v, "r_g": a.reward.r_g,
                        "total": a.reward.total,
                    },
                }
                for a in self.attempts
            ],
            "requests": [json.loads(r.to_document()) for r in self.requests],
        }


def build_request(specification: str, previous: Optional[str],
                  report: Optional[WellFormednessReport],
                  iteration: int) -> OracleRequest:
    """Deterministic request assembly; feedback capped to keep requests small."""
    if iteration < 1:
        raise ValueError("iteration starts at 1")
    feedback = ()
    if report is not None:
        feedback = tuple(feedback_text(report)[:MAX_FEEDBACK_LINES])
    return OracleRequest(specification, previous, feedback, iteration)


def _invoke_oracle(command: Sequence[str], request: bytes,
                   timeout_ms: int) -> bytes:
    try:
        completed = subprocess.run(
            list(command), input=request, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, timeout=timeout_ms / 1000.0)
    except OSError as exc:
        raise OracleSpawnError(f"cannot start oracle {command!r}: {exc}") from None
    except subprocess.TimeoutExpired:
        raise OracleProtocolError(
            f"oracle {command!r} produced no response within "
            f"{timeout_ms} ms") from None
    if completed.returncode != 0:
        raise OracleProtocolError(
            f"oracle exited with status {completed.returncode}")
    if not completed.stdout.strip():
        raise OracleProtocolError("oracle returned an empty response")
    return completed.stdout


def refine(specification: str, oracle: Sequence[str],
           max_iterations: int = MAX_ITERATIONS,
           truth: Optional[Grammar] = None, seed: int = 0,
           timeout_ms: int = 60_000) -> RefinementTrace:
    """Drive the oracle until it emits a well-formed grammar or gives out.

    Each answer is parsed and validated; a failed answer contributes its
    error lines to the next request.  When ``truth`` is given, the final
    well-formed grammar is also scored against it (informational only; the
    loop gates on well-formedness alone).
    """
    attempts: list = []
    requests: list = []
    previous: Optional[str] = None
    report: Optional[WellFormednessReport] = None
    outcome = "exhausted"
    for iteration in range(1, max_iterations + 1):
        request = build_request(specification, previous, report, iteration)
        requests.append(request)
        response = _invoke_oracle(oracle, request.to_document(), timeout_ms)
        text = response.decode("utf-8", errors="replace")
        grammar: Optional[Grammar] = None
        try:
            grammar = parse_grammar_document(response)
        except GrammarParseError as exc:
            report = report_from_parse_error(exc)
        else:
            report = validate(grammar, seed=derive_seed(seed, f"validate:{iteration}"))
        scored: Optional[Reward] = None
        if report.well_formed and truth is not None and grammar is not None:
            scored = reward(grammar, truth,
                            seed=derive_seed(seed, f"reward:{iteration}"))
        attempts.append(Attempt(text, report, scored, grammar))
        if report.well_formed:
            outcome = "well_formed"
            break
        previous = text
    return RefinementTrace(attempts, requests, outcome)
