"""Problem corpora, solution execution, output comparison, mutation fuzzing.

A corpus is a UTF-8 file with one JSON record per line:

    {"name": ..., "specification": ..., "grammar": <container or absent>,
     "tests": {"public": [...], "private": [...], "generated": [...]},
     "correct_cmds": [[argv...], ...], "incorrect_cmds": [[argv...], ...]}

Commands are argv arrays run with the test case on standard input.
"""

from __future__ import annotations

import json
import math
import os
import random
import re
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import (
    EmptyCorpus,
    EmptyTestCase,
    GrammarParseError,
    ReferenceFailed,
    UnreadablePath,
)
from .model import Grammar, parse_grammar_document, render_grammar
from .sampler import derive_seed

DEFAULT_TIMEOUT_MS = 10_000

_TOKEN_SPLIT_RE = re.compile(rb"([ \n]+)")
_INT_TOKEN_RE = re.compile(rb"-?\d+")
_FLOAT_TOKEN_RE = re.compile(rb"-?\d+\.\d+")


@dataclass
class TestSets:
    public: list = field(default_factory=list)
    private: list = field(default_factory=list)
    generated: list = field(default_factory=list)

    def all_cases(self) -> list:
        return self.public + self.private + self.generated


@dataclass
class Problem:
    name: str
    specification: str
    truth_grammar: Optional[Grammar]
    tests: TestSets
    correct_cmds: list
    incorrect_cmds: list


@dataclass
class Corpus:
    problems: list
    skipped: list  # (line number, reason)

    def __iter__(self):
        return iter(self.problems)

    def __len__(self):
        return len(self.problems)

    def __getitem__(self, item):
        return self.problems[item]

    def find(self, name: str) -> Optional[Problem]:
        for problem in self.problems:
            if problem.name == name:
                return problem
        return None


@dataclass
class RunOutcome:
    status: str  # ok | nonzero_exit | timeout | spawn_error
    stdout: bytes
    duration_ms: int


def _decode_tests(obj) -> TestSets:
    sets = TestSets()
    if not isinstance(obj, dict):
        return sets
    for kind in ("public", "private", "generated"):
        entries = obj.get(kind, [])
        if isinstance(entries, list):
            getattr(sets, kind).extend(
                e.encode("utf-8") for e in entries if isinstance(e, str))
    return sets


def _decode_commands(obj) -> list:
    commands = []
    if isinstance(obj, list):
        for entry in obj:
            if (isinstance(entry, list) and entry
                    and all(isinstance(part, str) for part in entry)):
                commands.append(list(entry))
    return commands


def load_corpus(path) -> Corpus:
    """Load problems from a line-delimited corpus file.

    Malformed records land in the skip report instead of failing the load;
    a record without a usable grammar still loads (with a note) so that
    grammar-independent commands can use it.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise UnreadablePath(f"cannot read corpus at {path}: {exc}") from None
    problems: list = []
    skipped: list = []
    seen = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            skipped.append((line_no, f"not valid JSON: {exc}"))
            continue
        name = record.get("name")
        if not isinstance(name, str) or not name:
            skipped.append((line_no, "record has no name"))
            continue
        if name in seen:
            skipped.append((line_no, f"duplicate problem name '{name}'"))
            continue
        grammar = None
        if "grammar" in record:
            try:
                grammar = parse_grammar_document(json.dumps(record["grammar"]))
            except GrammarParseError as exc:
                skipped.append(
                    (line_no, f"'{name}': grammar unusable ({exc}); "
                              f"grammar-dependent commands will skip it"))
        else:
            skipped.append(
                (line_no, f"'{name}' has no grammar; grammar-dependent "
                          f"commands will skip it"))
        seen.add(name)
        problems.append(Problem(
            name=name,
            specification=record.get("specification", ""),
            truth_grammar=grammar,
            tests=_decode_tests(record.get("tests")),
            correct_cmds=_decode_commands(record.get("correct_cmds")),
            incorrect_cmds=_decode_commands(record.get("incorrect_cmds")),
        ))
    if not problems:
        raise EmptyCorpus(f"no usable problems in {path}")
    return Corpus(problems, skipped)


def save_corpus(corpus, path) -> None:
    """Write problems back out, one record per line (load_corpus inverse)."""
    problems = corpus.problems if isinstance(corpus, Corpus) else list(corpus)
    with open(path, "w", encoding="utf-8") as handle:
        for problem in problems:
            record = {
                "name": problem.name,
                "specification": problem.specification,
                "tests": {
                    kind: [case.decode("utf-8")
                           for case in getattr(problem.tests, kind)]
                    for kind in ("public", "private", "generated")
                },
                "correct_cmds": problem.correct_cmds,
                "incorrect_cmds": problem.incorrect_cmds,
            }
            if problem.truth_grammar is not None:
                record["grammar"] = json.loads(
                    render_grammar(problem.truth_grammar))
            handle.write(json.dumps(record) + "\n")


# --------------------------------------------------------------------------
# solution execution


def run_solution(command: Sequence[str], input_bytes: bytes,
                 timeout_ms: int = DEFAULT_TIMEOUT_MS) -> RunOutcome:
    """Run one command with the test case on stdin; failures are statuses."""
    start = time.perf_counter()

    def elapsed() -> int:
        return int((time.perf_counter() - start) * 1000)

    try:
        completed = subprocess.run(
            list(command), input=input_bytes, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, timeout=timeout_ms / 1000.0)
    except subprocess.TimeoutExpired:
        return RunOutcome("timeout", b"", elapsed())
    except OSError:
        return RunOutcome("spawn_error", b"", elapsed())
    status = "ok" if completed.returncode == 0 else "nonzero_exit"
    return RunOutcome(status, completed.stdout, elapsed())


def run_matrix(commands: Sequence[Sequence[str]], tests: Sequence[bytes],
               timeout_ms: int = DEFAULT_TIMEOUT_MS,
               workers: Optional[int] = None) -> list:
    """Run every (command, test) pair; results indexed [command][test].

    Pairs run concurrently up to the worker cap but are joined by index,
    so parallelism never changes downstream scores.
    """
    if not commands or not tests:
        return [[] for _ in commands]
    workers = workers or os.cpu_count() or 1
    jobs = [(c, t) for c in range(len(commands)) for t in range(len(tests))]
    results: list = [[None] * len(tests) for _ in commands]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = pool.map(
            lambda job: run_solution(commands[job[0]], tests[job[1]], timeout_ms),
            jobs)
        for (c, t), outcome in zip(jobs, outcomes):
            results[c][t] = outcome
    return results


def _normalize_output(data: bytes) -> bytes:
    lines = [line.rstrip() for line in data.split(b"\n")]
    while lines and not lines[-1]:
        lines.pop()
    return b"\n".join(lines)


def outputs_differ(reference: RunOutcome, candidate: RunOutcome) -> bool:
    """True when the candidate behaves observably differently.

    Crashes and timeouts count as differing; otherwise outputs are compared
    after stripping trailing whitespace per line and trailing blank lines.
    """
    if reference.status != "ok":
        raise ReferenceFailed(
            f"reference solution ended with status '{reference.status}'")
    if candidate.status != "ok":
        return True
    return _normalize_output(reference.stdout) != _normalize_output(candidate.stdout)


# --------------------------------------------------------------------------
# mutation fuzzing baseline


def _mutate_int(token: bytes, rng: random.Random) -> bytes:
    negative = token.startswith(b"-")
    digits = len(token) - (1 if negative else 0)
    top = 10 ** digits - 1
    while True:
        value = rng.randint(1, top) if negative else rng.randint(0, top)
        candidate = f"-{value}".encode() if negative else str(value).encode()
        if candidate != token:
            return candidate


def _mutate_float(token: bytes, rng: random.Random) -> bytes:
    positions = [i for i, b in enumerate(token) if 0x30 <= b <= 0x39]
    pos = rng.choice(positions)
    old = token[pos] - 0x30
    new = rng.choice([d for d in range(10) if d != old])
    return token[:pos] + bytes([new + 0x30]) + token[pos + 1:]


def _mutate_string(token: bytes, rng: random.Random) -> bytes:
    lower = b"abcdefghijklmnopqrstuvwxyz"
    upper = lower.upper()
    digits = b"0123456789"

    def same_class(byte: int) -> int:
        for pool in (lower, upper, digits):
            if byte in pool:
                return pool[rng.randrange(len(pool))]
        return byte

    for _ in range(64):
        candidate = bytes(same_class(b) for b in token)
        if candidate != token:
            return candidate
    return token  # nothing mutable in this token


def mutate_test_case(test: bytes, rate: float = 0.3, seed: int = 0) -> bytes:
    """Mutate ceil(rate * token_count) distinct tokens, by inferred type.

    Tokens are split on spaces and newlines and the separator byte sequence
    is reproduced exactly; integers stay in their sign class with at most
    as many digits, floats get one digit perturbed, letter/digit strings
    are redrawn per character class.
    """
    if not 0 < rate <= 1:
        raise ValueError("rate must be in (0, 1]")
    pieces = _TOKEN_SPLIT_RE.split(test)
    token_slots = [i for i, piece in enumerate(pieces)
                   if i % 2 == 0 and piece]
    if not token_slots:
        raise EmptyTestCase("no tokens to mutate")
    rng = random.Random(derive_seed(seed, "mutate"))
    count = math.ceil(rate * len(token_slots))
    chosen = rng.sample(token_slots, count)
    for slot in sorted(chosen):
        token = pieces[slot]
        if _INT_TOKEN_RE.fullmatch(token):
            pieces[slot] = _mutate_int(token, rng)
        elif _FLOAT_TOKEN_RE.fullmatch(token):
            pieces[slot] = _mutate_float(token, rng)
        else:
            pieces[slot] = _mutate_string(token, rng)
    return b"".join(pieces)
